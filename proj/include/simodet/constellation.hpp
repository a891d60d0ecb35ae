#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace simodet {

// A finite complex symbol alphabet together with the geometric constants the
// detectors need: minimum squared point distance, maximum and average symbol
// energy. Points are kept in lexicographic (re, im) order; that order defines
// the index space used everywhere (detector outputs, pilot selection,
// tie-breaking).
struct Constellation {
  std::string name;
  std::vector<std::complex<double>> points;
  double d_min_sq = 0.0;
  double e_max = 0.0;
  double e_avg = 0.0;
  bool is_constant_modulus = false;

  int size() const { return static_cast<int>(points.size()); }

  // exact-value lookup; -1 when absent
  int index_of(std::complex<double> p) const {
    for (int i = 0; i < size(); ++i) {
      if (points[i] == p) return i;
    }
    return -1;
  }

  static Constellation from_points(std::string name, std::vector<std::complex<double>> pts) {
    if (pts.empty()) throw std::invalid_argument("constellation: empty point set");
    std::sort(pts.begin(), pts.end(), [](auto a, auto b) {
      if (a.real() != b.real()) return a.real() < b.real();
      return a.imag() < b.imag();
    });
    for (std::size_t i = 1; i < pts.size(); ++i) {
      if (pts[i] == pts[i - 1]) throw std::invalid_argument("constellation: duplicate point");
    }
    Constellation c;
    c.name = std::move(name);
    c.points = std::move(pts);
    double dmin = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < c.points.size(); ++i) {
      for (std::size_t j = i + 1; j < c.points.size(); ++j) {
        dmin = std::min(dmin, std::norm(c.points[i] - c.points[j]));
      }
    }
    c.d_min_sq = c.points.size() > 1 ? dmin : 0.0;
    double emax = 0.0, esum = 0.0;
    for (auto p : c.points) {
      emax = std::max(emax, std::norm(p));
      esum += std::norm(p);
    }
    c.e_max = emax;
    c.e_avg = esum / static_cast<double>(c.points.size());
    c.is_constant_modulus = true;
    for (auto p : c.points) {
      if (std::abs(std::norm(p) - c.e_avg) > 1e-12 * std::max(1.0, c.e_avg)) {
        c.is_constant_modulus = false;
        break;
      }
    }
    return c;
  }
};

inline Constellation make_bpsk() {
  return Constellation::from_points("bpsk", {{-1.0, 0.0}, {1.0, 0.0}});
}

// unit average energy: points (+-1 +- j)/sqrt(2)
inline Constellation make_qpsk() {
  const double r = 1.0 / std::sqrt(2.0);
  return Constellation::from_points("qpsk", {{r, r}, {r, -r}, {-r, r}, {-r, -r}});
}

// unnormalized 16-QAM grid a+bj with a,b in {+-1,+-3}; e_max = 18, e_avg = 10
inline Constellation make_16qam() {
  std::vector<std::complex<double>> pts;
  for (int a = -3; a <= 3; a += 2) {
    for (int b = -3; b <= 3; b += 2) {
      pts.emplace_back(static_cast<double>(a), static_cast<double>(b));
    }
  }
  return Constellation::from_points("16qam", std::move(pts));
}

inline const Constellation& constellation_by_name(std::string_view name) {
  static const Constellation bpsk = make_bpsk();
  static const Constellation qpsk = make_qpsk();
  static const Constellation qam16 = make_16qam();
  if (name == "bpsk") return bpsk;
  if (name == "qpsk") return qpsk;
  if (name == "16qam") return qam16;
  throw std::invalid_argument("unknown constellation: " + std::string(name));
}

}  // namespace simodet
