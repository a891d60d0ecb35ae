#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <random>

namespace simodet {

inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

inline std::uint64_t mix_seed(std::uint64_t h, std::uint64_t v) {
  std::uint64_t s = h ^ (v + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2));
  return splitmix64(s);
}

// Counter-based split of a master seed into disjoint per-trial streams.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a, std::uint64_t b = 0) {
  return mix_seed(mix_seed(master, a), b);
}

// Thin deterministic generator. Gaussians use Box-Muller directly so streams do
// not depend on the standard library's unspecified normal_distribution algorithm.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  // uniform in [0, 1)
  double uniform01() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

  // pair of independent N(0,1) samples packed as re/im
  std::complex<double> standard_pair() {
    const double u1 = 1.0 - uniform01();  // (0, 1], keeps log finite
    const double u2 = uniform01();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * M_PI * u2;
    return {r * std::cos(a), r * std::sin(a)};
  }

  // circularly symmetric complex Gaussian, E|z|^2 = variance
  std::complex<double> complex_gaussian(double variance) {
    return standard_pair() * std::sqrt(variance / 2.0);
  }

  // unbiased uniform integer in [0, n)
  std::uint32_t below(std::uint32_t n) {
    const std::uint64_t limit = std::uint64_t(-1) - std::uint64_t(-1) % n;
    std::uint64_t x;
    do {
      x = eng_();
    } while (x >= limit);
    return static_cast<std::uint32_t>(x % n);
  }

 private:
  std::mt19937_64 eng_;
};

}  // namespace simodet
