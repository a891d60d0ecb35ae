#include <catch2/catch_amalgamated.hpp>

#include "simodet/constellation.hpp"

using namespace simodet;
using Catch::Approx;

namespace {

// independent brute-force recomputation of the stored geometry constants
void check_constants(const Constellation& c) {
  double dmin = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < c.points.size(); ++i)
    for (std::size_t j = i + 1; j < c.points.size(); ++j)
      dmin = std::min(dmin, std::norm(c.points[i] - c.points[j]));
  double emax = 0.0, esum = 0.0;
  for (auto p : c.points) {
    emax = std::max(emax, std::norm(p));
    esum += std::norm(p);
  }
  REQUIRE(c.d_min_sq == dmin);
  REQUIRE(c.e_max == emax);
  REQUIRE(c.e_avg == esum / static_cast<double>(c.points.size()));
}

}  // namespace

TEST_CASE("built-in constants match brute force exactly", "[constellation]") {
  check_constants(make_bpsk());
  check_constants(make_qpsk());
  check_constants(make_16qam());
}

TEST_CASE("qpsk geometry", "[constellation]") {
  const Constellation c = make_qpsk();
  REQUIRE(c.points.size() == 4);
  REQUIRE(c.d_min_sq == Approx(2.0).margin(1e-12));
  REQUIRE(c.e_max == Approx(1.0).margin(1e-12));
  REQUIRE(c.e_avg == Approx(1.0).margin(1e-12));
  REQUIRE(c.is_constant_modulus);
  // radius rule identity: T * d_min^2 / 2 == T
  for (int t : {2, 8, 20}) {
    REQUIRE(t * c.d_min_sq / 2.0 == Approx(static_cast<double>(t)).margin(1e-10));
  }
}

TEST_CASE("16qam geometry", "[constellation]") {
  const Constellation c = make_16qam();
  REQUIRE(c.points.size() == 16);
  REQUIRE(c.e_max == 18.0);
  REQUIRE(c.d_min_sq == 4.0);
  REQUIRE(c.e_avg == 10.0);
  REQUIRE_FALSE(c.is_constant_modulus);
}

TEST_CASE("bpsk geometry", "[constellation]") {
  const Constellation c = make_bpsk();
  REQUIRE(c.points.size() == 2);
  REQUIRE(c.d_min_sq == 4.0);
  REQUIRE(c.e_avg == 1.0);
  REQUIRE(c.is_constant_modulus);
}

TEST_CASE("points are lexicographically ordered and distinct", "[constellation]") {
  for (const auto* name : {"bpsk", "qpsk", "16qam"}) {
    const Constellation& c = constellation_by_name(name);
    for (std::size_t i = 1; i < c.points.size(); ++i) {
      const auto a = c.points[i - 1], b = c.points[i];
      const bool ordered =
          a.real() < b.real() || (a.real() == b.real() && a.imag() < b.imag());
      REQUIRE(ordered);
    }
    for (int i = 0; i < c.size(); ++i) REQUIRE(c.index_of(c.points[i]) == i);
  }
}

TEST_CASE("generic constructor validates input", "[constellation]") {
  REQUIRE_THROWS_AS(Constellation::from_points("empty", {}), std::invalid_argument);
  REQUIRE_THROWS_AS(Constellation::from_points("dup", {{1, 0}, {1, 0}}), std::invalid_argument);
  const auto c = Constellation::from_points("tri", {{2, 0}, {-1, 0}, {0, 1}});
  REQUIRE(c.points.front() == std::complex<double>(-1, 0));
  REQUIRE(c.e_max == 4.0);
}

TEST_CASE("lookup by name", "[constellation]") {
  REQUIRE(constellation_by_name("qpsk").name == "qpsk");
  REQUIRE_THROWS_AS(constellation_by_name("8psk"), std::invalid_argument);
}
