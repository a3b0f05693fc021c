#include <cmath>
#include <random>

#include "doctest.h"
#include "testing.hpp"
#include "umm/enclosure.hpp"
#include "umm/errors.hpp"
#include "umm/problems.hpp"

using namespace umm;
using umm::testing::SoundnessStats;

namespace {

constexpr Elementary kAll[] = {Elementary::Exp, Elementary::Log, Elementary::Softplus, Elementary::Sigmoid};

double taylor_sum(Elementary fn, double z0, double z, int k) {
  const std::vector<double> c = taylor_coefficients(fn, z0, k);
  double acc = 0.0;
  for (int i = k - 1; i >= 0; --i) acc = acc * (z - z0) + c[static_cast<std::size_t>(i)];
  return acc;
}

// A random expansion point and range for fn. Log stays in (0, inf).
void draw_range(Elementary fn, std::mt19937_64& rng, double& z0, double& a, double& b) {
  std::uniform_real_distribution<double> u(-6.0, 6.0), w(0.0, 4.0);
  if (fn == Elementary::Log) {
    z0 = std::exp(u(rng) / 3.0);
    a = z0 * std::exp(-w(rng) / 2.0);
    b = z0 + w(rng);
  } else {
    z0 = u(rng);
    a = z0 - w(rng);
    b = z0 + w(rng);
  }
}

ExprGraph scalar_graph(Elementary fn, double a, double b) {
  // h(eta) = fn(a + b eta)
  ExprGraph g;
  const NodeId e = g.variable(kEtaName, {});
  g.set_output(g.unary(fn, g.add(g.scalar(a), g.mul(g.scalar(b), e))));
  return g;
}

}  // namespace

TEST_CASE("exp remainder on [0, 1] about 0") {
  const Interval sharp = elementary_remainder(Elementary::Exp, 0.0, Interval(0.0, 1.0), 2, RemainderMethod::Sharp);
  const Interval lag = elementary_remainder(Elementary::Exp, 0.0, Interval(0.0, 1.0), 2, RemainderMethod::Lagrange);
  // Scaled remainder (e^z - 1 - z) / z^2 runs from 1/2 at 0 to e - 2 at 1.
  CHECK(sharp.hi() >= std::exp(1.0) - 2.0);
  CHECK(sharp.hi() == doctest::Approx(std::exp(1.0) - 2.0).epsilon(1e-14));
  CHECK(sharp.lo() <= 0.5);
  CHECK(sharp.lo() == doctest::Approx(0.5).epsilon(1e-14));
  // f''/2 over [0, 1] is [1/2, e/2].
  CHECK(lag.hi() >= std::exp(1.0) / 2.0);
  CHECK(lag.hi() == doctest::Approx(std::exp(1.0) / 2.0).epsilon(1e-14));
  CHECK(lag.lo() == doctest::Approx(0.5).epsilon(1e-14));
}

TEST_CASE("Taylor coefficients at known points") {
  const auto e = taylor_coefficients(Elementary::Exp, 0.0, 4);
  CHECK(e[0] == 1.0);
  CHECK(e[1] == 1.0);
  CHECK(e[2] == doctest::Approx(0.5));
  CHECK(e[3] == doctest::Approx(1.0 / 6.0));
  const auto s = taylor_coefficients(Elementary::Sigmoid, 0.0, 4);
  CHECK(s[0] == doctest::Approx(0.5));
  CHECK(s[1] == doctest::Approx(0.25));
  CHECK(std::abs(s[2]) < 1e-15);
  CHECK(s[3] == doctest::Approx(-1.0 / 48.0));
  const auto l = taylor_coefficients(Elementary::Log, 2.0, 3);
  CHECK(l[0] == doctest::Approx(std::log(2.0)));
  CHECK(l[1] == doctest::Approx(0.5));
  CHECK(l[2] == doctest::Approx(-0.125));
  const auto sp = taylor_coefficients(Elementary::Softplus, 0.0, 3);
  CHECK(sp[0] == doctest::Approx(std::log(2.0)));
  CHECK(sp[1] == doctest::Approx(0.5));
  CHECK(sp[2] == doctest::Approx(0.125));
}

TEST_CASE("elementary remainders are sound and sharp is inside Lagrange") {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> t(0.0, 1.0);
  for (Elementary fn : kAll) {
    for (int k = kMinDegree; k <= kMaxDegree; ++k) {
      for (int trial = 0; trial < 60; ++trial) {
        double z0, a, b;
        draw_range(fn, rng, z0, a, b);
        const Interval zr(a, b);
        const Interval sharp = elementary_remainder(fn, z0, zr, k, RemainderMethod::Sharp);
        const Interval lag = elementary_remainder(fn, z0, zr, k, RemainderMethod::Lagrange);
        CHECK(lag.contains(sharp));
        for (int i = 0; i <= 40; ++i) {
          const double z = a + (b - a) * i / 40.0;
          const double pk = std::pow(z - z0, k);
          const double fz = evaluate(fn, z), tz = taylor_sum(fn, z0, z, k);
          const double tol = 1e-12 * (1.0 + std::abs(fz) + std::abs(tz));
          for (const Interval& r : {sharp, lag}) {
            const double lo = std::min(r.lo() * pk, r.hi() * pk), hi = std::max(r.lo() * pk, r.hi() * pk);
            CHECK(fz >= tz + lo - tol);
            CHECK(fz <= tz + hi + tol);
          }
        }
      }
    }
  }
}

TEST_CASE("sharp remainders are tight at the range end") {
  // Where f^(k) is monotone on a side, the scaled remainder reaches its
  // extreme at the far end, so the sharp interval touches that value.
  const double z0 = 0.5, b = 2.0;
  const Interval r = elementary_remainder(Elementary::Exp, z0, Interval(z0, b), 3, RemainderMethod::Sharp);
  const double at_end = (std::exp(b) - taylor_sum(Elementary::Exp, z0, b, 3)) / std::pow(b - z0, 3);
  CHECK(r.hi() == doctest::Approx(at_end).epsilon(1e-12));
  CHECK(r.lo() == doctest::Approx(std::exp(z0) / 6.0).epsilon(1e-12));
}

TEST_CASE("softplus quadratic remainder never exceeds 1/8") {
  std::mt19937_64 rng(22);
  std::uniform_real_distribution<double> u(-20.0, 20.0), w(0.0, 30.0);
  for (int trial = 0; trial < 500; ++trial) {
    const double z0 = u(rng);
    const Interval zr(z0 - w(rng), z0 + w(rng));
    for (RemainderMethod m : {RemainderMethod::Sharp, RemainderMethod::Lagrange})
      CHECK(elementary_remainder(Elementary::Softplus, z0, zr, 2, m).hi() <= 0.125 + 1e-12);
  }
  const Interval whole = elementary_remainder(Elementary::Softplus, 0.0, Interval::entire(), 2, RemainderMethod::Sharp);
  CHECK(whole.hi() <= 0.125 + 1e-12);
  CHECK(whole.lo() >= 0.0);
}

TEST_CASE("remainder argument checks") {
  CHECK_THROWS_AS(elementary_remainder(Elementary::Exp, 0.0, Interval(0.0, 1.0), 1, RemainderMethod::Sharp),
                  UnsupportedDegree);
  CHECK_THROWS_AS(elementary_remainder(Elementary::Exp, 0.0, Interval(0.0, 1.0), 7, RemainderMethod::Sharp),
                  UnsupportedDegree);
  CHECK_THROWS_AS(elementary_remainder(Elementary::Exp, 2.0, Interval(0.0, 1.0), 2, RemainderMethod::Sharp),
                  DomainError);
  CHECK_THROWS_AS(elementary_remainder(Elementary::Log, 1.0, Interval(0.0, 2.0), 2, RemainderMethod::Lagrange),
                  DomainError);
  CHECK(remainder_method_from_string(to_string(RemainderMethod::Lagrange)) == RemainderMethod::Lagrange);
  CHECK_THROWS_AS(remainder_method_from_string("bogus"), DomainError);
}

TEST_CASE("directional polynomial arithmetic encloses the exact functions") {
  const double etabar = 0.8;
  const int k = 3;
  // p(eta) = 1 + 2 eta, q(eta) = -0.5 + eta
  DirectionalPoly p = dpoly_add(dpoly_constant(1.0, k, etabar), dpoly_scale(dpoly_identity(k, etabar), 2.0));
  DirectionalPoly q = dpoly_sub(dpoly_identity(k, etabar), dpoly_constant(0.5, k, etabar));
  const DirectionalPoly pq = dpoly_mul(p, q);
  const DirectionalPoly pq2 = dpoly_mul(pq, pq);  // degree 4, truncated to 3
  const DirectionalPoly ex = dpoly_compose_elementary(Elementary::Exp, q, RemainderMethod::Sharp);
  for (int i = 0; i <= 100; ++i) {
    const double eta = etabar * i / 100.0;
    const double pv = 1.0 + 2.0 * eta, qv = -0.5 + eta;
    for (auto [enc, exact] : {std::pair{pq, pv * qv}, std::pair{pq2, pv * qv * pv * qv}, std::pair{ex, std::exp(qv)}}) {
      CHECK(upper_poly(enc)(eta) >= exact - 1e-12);
      CHECK(lower_poly(enc)(eta) <= exact + 1e-12);
    }
  }
  CHECK(pq.remainder.contains(0.0));
  CHECK(pq.coeffs[2] == doctest::Approx(2.0));
  CHECK(pq2.remainder.width() > 0.0);
  const Interval r = range_bound(pq2, Interval(0.0, etabar));
  for (int i = 0; i <= 50; ++i) {
    const double eta = etabar * i / 50.0, v = (1.0 + 2.0 * eta) * (-0.5 + eta);
    CHECK(r.contains(v * v));
  }
  CHECK_THROWS_AS(range_bound(pq, Interval(0.0, 2.0)), DomainError);
  CHECK_THROWS_AS(dpoly_add(p, dpoly_constant(0.0, 2, etabar)), DegreeMismatch);
  CHECK_THROWS_AS(dpoly_add(p, dpoly_constant(0.0, k, 1.0)), DegreeMismatch);
  CHECK_THROWS_AS(dpoly_mul(pq2, dpoly_identity(k, kInf)), DegreeMismatch);
  const DirectionalPoly unb = dpoly_identity(2, kInf);
  CHECK_THROWS_AS(dpoly_mul(dpoly_mul(unb, unb), unb), UnboundedTrust);
}

TEST_CASE("exact quadratic propagates with a point remainder") {
  // h(eta) = (0.3 - 1.7 eta)^2 = 0.09 - 1.02 eta + 2.89 eta^2
  ExprGraph g;
  const NodeId e = g.variable(kEtaName, {});
  g.set_output(g.pow(g.sub(g.scalar(0.3), g.mul(g.scalar(1.7), e)), 2));
  for (double etabar : {0.5, kInf}) {
    const DirectionalPoly p = propagate_directional(g, etabar, 2, RemainderMethod::Sharp);
    CHECK(p.coeffs[0] == doctest::Approx(0.09).epsilon(1e-15));
    CHECK(p.coeffs[1] == doctest::Approx(-1.02).epsilon(1e-15));
    CHECK(p.remainder.contains(1.7 * 1.7));
    CHECK(p.remainder.width() <= 1e-14);
  }
}

TEST_CASE("propagation errors") {
  ExprGraph g;
  const NodeId e = g.variable(kEtaName, {});
  g.set_output(g.unary(Elementary::Exp, e));
  CHECK_THROWS_AS(propagate_directional(g, kInf, 2, RemainderMethod::Sharp), UnboundedTrust);
  CHECK_THROWS_AS(propagate_directional(g, 1.0, 1, RemainderMethod::Sharp), UnsupportedDegree);
  CHECK_THROWS_AS(propagate_directional(g, -1.0, 2, RemainderMethod::Sharp), DomainError);
  ExprGraph lg;
  const NodeId x = lg.variable(kEtaName, {});
  lg.set_output(lg.unary(Elementary::Log, lg.sub(lg.scalar(0.5), x)));
  CHECK_THROWS_AS(propagate_directional(lg, 1.0, 2, RemainderMethod::Sharp), DomainError);
  ExprGraph two;
  two.set_output(two.add(two.variable("a", {}), two.variable("b", {})));
  CHECK_THROWS_AS(propagate_directional(two, 1.0, 2, RemainderMethod::Sharp), UnboundVariable);
  ExprGraph v;
  v.set_output(v.sum(v.variable(kEtaName, {2})));
  CHECK_THROWS_AS(propagate_quadratic(v, {1.0, kInf}, RemainderMethod::Sharp), UnboundedTrust);
  CHECK_THROWS_AS(propagate_quadratic(v, {1.0, 1.0, 1.0}, RemainderMethod::Sharp), ShapeError);
  CHECK_THROWS_AS(propagate_quadratic(v, {}, RemainderMethod::Sharp), ShapeError);
}

TEST_CASE("scalar compositions are enclosed for every degree and method") {
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  SoundnessStats s;
  for (Elementary fn : kAll) {
    for (int trial = 0; trial < 20; ++trial) {
      double a = u(rng), b = u(rng);
      if (fn == Elementary::Log) {
        a = std::abs(a) + 0.2;
        b = std::abs(b);
      }
      const ExprGraph g = scalar_graph(fn, a, b);
      for (double etabar : {0.01, 0.5, 2.0})
        for (RemainderMethod m : {RemainderMethod::Sharp, RemainderMethod::Lagrange})
          umm::testing::check_directional(g, {{kEtaName, Tensor::scalar(0.0)}}, {{kEtaName, Tensor::scalar(1.0)}},
                                          etabar, {2, 3, 4, 5, 6}, m, 101, s);
    }
  }
  CHECK(s.violations == 0);
  CHECK(s.center_failures == 0);
  CHECK(s.vacuous == 0);
}

TEST_CASE("problem graphs are enclosed along random lines") {
  std::mt19937_64 rng(24);
  const Dataset data = synthetic_mnist(20, 3);
  std::vector<ProblemSpec> problems;
  for (const char* name : {"lsq", "quartic", "logistic1d", "nnparam"}) problems.push_back(one_d_problem(name));
  for (RegressionKind kind : {RegressionKind::LeastSquares, RegressionKind::Logistic, RegressionKind::GenNormal})
    problems.push_back(random_regression(kind, 30, 4, 5).problem);
  problems.push_back(mlp_problem(2, 6, data, 9));
  SoundnessStats sharp, lag;
  for (const ProblemSpec& p : problems) {
    for (int draw = 0; draw < 3; ++draw) {
      const Bindings x = umm::testing::plus(p.init, umm::testing::random_like(p.init, rng, 0.5));
      const Bindings v = umm::testing::unit_direction(p.init, rng);
      for (double etabar : {0.1, 1.0}) {
        umm::testing::check_directional(p.graph, x, v, etabar, {2, 3, 4}, RemainderMethod::Sharp, 101, sharp);
        umm::testing::check_directional(p.graph, x, v, etabar, {2}, RemainderMethod::Lagrange, 101, lag);
      }
    }
  }
  CHECK(sharp.violations == 0);
  CHECK(sharp.center_failures == 0);
  CHECK(lag.violations == 0);
}

TEST_CASE("sharp propagation is never looser than Lagrange propagation") {
  const ProblemSpec p = mlp_problem(2, 6, synthetic_mnist(20, 4), 10);
  std::mt19937_64 rng(25);
  for (int draw = 0; draw < 5; ++draw) {
    const ExprGraph h = line_restrict(p.graph, p.init, umm::testing::unit_direction(p.init, rng));
    const DirectionalPoly s = propagate_directional(h, 1.0, 2, RemainderMethod::Sharp);
    const DirectionalPoly l = propagate_directional(h, 1.0, 2, RemainderMethod::Lagrange);
    CHECK(s.remainder.hi() <= l.remainder.hi() * (1.0 + 1e-12) + 1e-300);
    CHECK(s.remainder.lo() >= l.remainder.lo() - 1e-12 * std::abs(l.remainder.lo()));
  }
}

TEST_CASE("poly_range contains sampled values") {
  std::mt19937_64 rng(26);
  std::normal_distribution<double> n(0.0, 1.0);
  for (int deg = 1; deg <= 6; ++deg) {
    for (int trial = 0; trial < 50; ++trial) {
      std::vector<double> c(static_cast<std::size_t>(deg + 1));
      for (double& x : c) x = n(rng);
      const double lo = -1.0 + n(rng) * 0.1, hi = 1.5;
      const Interval r = poly_range(c, lo, hi);
      const RealPoly p(c);
      double smin = kInf, smax = -kInf;
      for (int i = 0; i <= 2000; ++i) {
        const double v = p(lo + (hi - lo) * i / 2000.0);
        smin = std::min(smin, v);
        smax = std::max(smax, v);
      }
      CHECK(r.lo() <= smin);
      CHECK(r.hi() >= smax);
      // Not much wider than the sampled range.
      CHECK(r.lo() >= smin - 1e-6 * (1.0 + std::abs(smin)) - (smax - smin) * 1e-4);
    }
  }
  const Interval ray = poly_range({1.0, -2.0, 1.0}, 0.0, kInf);
  CHECK(ray.hi() == kInf);
  CHECK(ray.lo() <= 0.0);
  CHECK(ray.lo() >= -1e-14);
  CHECK_THROWS_AS(poly_range({1.0}, 1.0, 0.0), DomainError);
}

TEST_CASE("quadratic enclosures are sound on per-layer and identity subspaces") {
  std::mt19937_64 rng(27);
  const ProblemSpec mlp = mlp_problem(2, 5, synthetic_mnist(15, 5), 11);
  const ProblemSpec pd = random_pd_quadratic(6, 12);
  const ProblemSpec logi = random_regression(RegressionKind::Logistic, 25, 3, 13).problem;
  SoundnessStats s;
  for (int draw = 0; draw < 4; ++draw) {
    for (double etabar : {0.1, 1.0}) {
      const Bindings xm = umm::testing::plus(mlp.init, umm::testing::random_like(mlp.init, rng, 0.3));
      umm::testing::check_quadratic(mlp.graph, xm, direction_stack(umm::testing::unit_direction(mlp.init, rng), StackMode::PerLayer),
                                    etabar, RemainderMethod::Sharp, 200, rng, s);
      umm::testing::check_quadratic(pd.graph, pd.init, direction_stack(pd.init, StackMode::Identity), etabar,
                                    RemainderMethod::Sharp, 200, rng, s);
      umm::testing::check_quadratic(logi.graph, logi.init, direction_stack(logi.init, StackMode::Identity), etabar,
                                    RemainderMethod::Lagrange, 200, rng, s);
    }
  }
  CHECK(s.violations == 0);
  CHECK(s.center_failures == 0);
  CHECK(s.vacuous == 0);
}

TEST_CASE("one-dimensional quadratic enclosure matches the k=2 directional one") {
  std::mt19937_64 rng(28);
  const ProblemSpec p = mlp_problem(1, 6, synthetic_mnist(10, 6), 14);
  for (int draw = 0; draw < 5; ++draw) {
    const Bindings v = umm::testing::unit_direction(p.init, rng);
    const DirectionStack whole = direction_stack(v, StackMode::Whole);
    for (RemainderMethod m : {RemainderMethod::Sharp, RemainderMethod::Lagrange}) {
      const QuadEnclosure q = propagate_quadratic(subspace_restrict(p.graph, p.init, whole.U, 1), {0.7}, m);
      const DirectionalPoly d = propagate_directional(line_restrict(p.graph, p.init, v), 0.7, 2, m);
      CHECK(q.c0 == doctest::Approx(d.coeffs[0]).epsilon(1e-10));
      CHECK(q.c1[0] == doctest::Approx(d.coeffs[1]).epsilon(1e-10));
      CHECK(q.qlo[0] == doctest::Approx(d.remainder.lo()).epsilon(1e-10));
      CHECK(q.qhi[0] == doctest::Approx(d.remainder.hi()).epsilon(1e-10));
    }
  }
}
