#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "doctest.h"
#include "umm/errors.hpp"
#include "umm/polymin.hpp"

using namespace umm;

namespace {

constexpr double kInfinity = std::numeric_limits<double>::infinity();

struct GridMin {
  double value = 0.0;
  double argmin = 0.0;
};

GridMin grid_min(const RealPoly& p, double lo, double hi, int n) {
  GridMin g{p(lo), lo};
  for (int i = 1; i <= n; ++i) {
    const double x = lo + (hi - lo) * i / n;
    const double v = p(x);
    if (v < g.value) g = {v, x};
  }
  return g;
}

RealPoly from_roots(const std::vector<double>& roots, double lead) {
  std::vector<double> c{lead};
  for (double r : roots) {
    std::vector<double> next(c.size() + 1, 0.0);
    for (std::size_t i = 0; i < c.size(); ++i) {
      next[i + 1] += c[i];
      next[i] -= r * c[i];
    }
    c = next;
  }
  return RealPoly(c);
}

}  // namespace

TEST_CASE("polynomial basics") {
  const RealPoly p({1.0, -2.0, 0.0, 3.0});
  CHECK(p.degree() == 3);
  CHECK(p(2.0) == doctest::Approx(1.0 - 4.0 + 24.0));
  CHECK(p.derivative().coeffs() == std::vector<double>{-2.0, 0.0, 9.0});
  CHECK(RealPoly({0.0, 0.0}).degree() == -1);
  CHECK(RealPoly({1.0, 2.0, 1e-20}).effective_degree() == 1);
}

TEST_CASE("closed-form quadratic minimum") {
  // (x - 2)^2 + 1
  const RealPoly p({5.0, -4.0, 1.0});
  CHECK(minimize_quadratic_on_interval(p, 0.0, 10.0).argmin == doctest::Approx(2.0));
  CHECK(minimize_quadratic_on_interval(p, 0.0, 10.0).value == doctest::Approx(1.0));
  CHECK(minimize_quadratic_on_interval(p, 0.0, 1.0).argmin == 1.0);
  CHECK(minimize_quadratic_on_interval(p, 0.0, std::numeric_limits<double>::infinity()).argmin == doctest::Approx(2.0));
  // Concave: smaller endpoint wins.
  const RealPoly c({0.0, 1.0, -1.0});
  CHECK(minimize_quadratic_on_interval(c, 0.0, 3.0).argmin == 3.0);
  CHECK(minimize_quadratic_on_interval(c, 0.0, 0.5).argmin == 0.0);
  // Linear with positive slope on a ray: minimum at the left end.
  CHECK(minimize_quadratic_on_interval(RealPoly({1.0, 2.0}), 0.0, kInfinity).argmin == 0.0);
  CHECK_THROWS_AS(minimize_quadratic_on_interval(c, 0.0, kInfinity), UnboundedTrust);
  CHECK_THROWS_AS(minimize_quadratic_on_interval(RealPoly({0.0, -1.0}), 0.0, kInfinity), UnboundedTrust);
  CHECK_THROWS_AS(minimize_quadratic_on_interval(RealPoly({0.0, 0.0, 1.0, 1.0}), 0.0, 1.0), DegreeMismatch);
  CHECK_THROWS_AS(minimize_quadratic_on_interval(p, 1.0, 0.0), DomainError);
}

TEST_CASE("companion roots recover known roots") {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  for (int deg = 1; deg <= 6; ++deg) {
    for (int trial = 0; trial < 30; ++trial) {
      std::vector<double> roots(static_cast<std::size_t>(deg));
      for (double& r : roots) r = u(rng);
      std::sort(roots.begin(), roots.end());
      // Skip draws with nearly repeated roots; those are ill-conditioned.
      bool spread = true;
      for (std::size_t i = 1; i < roots.size(); ++i) spread = spread && roots[i] - roots[i - 1] > 0.05;
      if (!spread) continue;
      const std::vector<double> got = poly_roots(from_roots(roots, u(rng) > 0 ? 1.5 : -0.7));
      REQUIRE(got.size() == roots.size());
      for (std::size_t i = 0; i < roots.size(); ++i) CHECK(got[i] == doctest::Approx(roots[i]).epsilon(1e-9));
    }
  }
  // x^2 + 1 has no real roots.
  CHECK(poly_roots(RealPoly({1.0, 0.0, 1.0})).empty());
  CHECK_THROWS_AS(poly_roots(RealPoly({0.0, 0.0})), DegenerateInput);
}

TEST_CASE("minimum over an interval matches a dense grid") {
  std::mt19937_64 rng(32);
  std::normal_distribution<double> n(0.0, 1.0);
  std::uniform_real_distribution<double> w(0.05, 5.0);
  for (int deg = 2; deg <= 6; ++deg) {
    for (int trial = 0; trial < 40; ++trial) {
      std::vector<double> c(static_cast<std::size_t>(deg + 1));
      for (double& x : c) x = n(rng);
      const RealPoly p(c);
      const double hi = w(rng);
      const int grid = 100000;
      const PolyMinimum m = minimize_poly_on_interval(p, 0.0, hi);
      const GridMin g = grid_min(p, 0.0, hi, grid);
      CHECK(m.argmin >= 0.0);
      CHECK(m.argmin <= hi);
      CHECK(m.value == p(m.argmin));
      CHECK(m.value <= g.value + 1e-12 * (1.0 + std::abs(g.value)));
      CHECK(m.value >= g.value - 1e-3 * (1.0 + std::abs(g.value)));
    }
  }
}

TEST_CASE("double roots and flat minima") {
  // (x - 0.3)^2 (x - 0.8)^2 has two global minima with value 0.
  const RealPoly p = from_roots({0.3, 0.3, 0.8, 0.8}, 1.0);
  const PolyMinimum m = minimize_poly_on_interval(p, 0.0, 1.0);
  CHECK(m.value <= 1e-15);
  CHECK(std::min(std::abs(m.argmin - 0.3), std::abs(m.argmin - 0.8)) < 1e-6);
  // (x - 0.5)^6 is very flat at its minimum.
  const PolyMinimum f = minimize_poly_on_interval(from_roots({0.5, 0.5, 0.5, 0.5, 0.5, 0.5}, 1.0), 0.0, 2.0);
  CHECK(f.value <= 1e-15);
  CHECK(std::abs(f.argmin - 0.5) < 1e-2);
  // Degenerate interval.
  CHECK(minimize_poly_on_interval(RealPoly({1.0, 1.0, 1.0, 1.0}), 0.5, 0.5).argmin == 0.5);
  CHECK_THROWS_AS(minimize_poly_on_interval(RealPoly({0.0, 0.0, 0.0, 1.0}), 0.0, kInfinity), UnboundedTrust);
}

TEST_CASE("ties resolve toward the smaller argument") {
  // Even quartic with equal minima at +-1 on [-2, 2].
  const RealPoly p({0.0, 0.0, -2.0, 0.0, 1.0});
  CHECK(minimize_poly_on_interval(p, -2.0, 2.0).argmin == doctest::Approx(-1.0));
  // Constant on the interval.
  CHECK(minimize_poly_on_interval(RealPoly({3.0}), -1.0, 1.0).argmin == -1.0);
}
