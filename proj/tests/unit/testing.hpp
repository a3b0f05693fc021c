// Helpers shared by the unit tests and the acceptance binary.
#pragma once

#include <cmath>
#include <random>
#include <vector>

#include "umm/expr.hpp"
#include "umm/optimizers.hpp"

namespace umm::testing {

inline Tensor random_like(const Tensor& t, std::mt19937_64& rng, double scale = 1.0) {
  std::normal_distribution<double> n(0.0, scale);
  Tensor out(t.shape());
  for (double& v : out.data()) v = n(rng);
  return out;
}

inline Bindings random_like(const Bindings& b, std::mt19937_64& rng, double scale = 1.0) {
  Bindings out;
  for (const auto& [name, t] : b) out.emplace(name, random_like(t, rng, scale));
  return out;
}

inline Bindings plus(const Bindings& x, const Bindings& d, double s = 1.0) {
  Bindings out = x;
  axpy(s, d, out);
  return out;
}

// Central-difference directional derivative of the graph at x along d.
inline double fd_directional(const ExprGraph& g, const Bindings& x, const Bindings& d, double h = 1e-6) {
  return (eval(g, plus(x, d, h)) - eval(g, plus(x, d, -h))) / (2.0 * h);
}

// Largest relative violation of loss[t] <= loss[t-1] + slack * (1 + |loss[t-1]|).
inline bool monotone(const RunTrace& tr, double slack = 1e-10) {
  for (std::size_t i = 1; i < tr.rows.size(); ++i)
    if (tr.rows[i].loss > tr.rows[i - 1].loss + slack * (1.0 + std::abs(tr.rows[i - 1].loss))) return false;
  return true;
}

inline std::vector<double> linspace(double lo, double hi, int n) {
  std::vector<double> v(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) v[static_cast<std::size_t>(i)] = lo + (hi - lo) * i / (n - 1);
  return v;
}

}  // namespace umm::testing

#include <algorithm>
#include <limits>

#include "umm/enclosure.hpp"

namespace umm::testing {

struct SoundnessStats {
  long checks = 0;
  long violations = 0;
  long center_failures = 0;
  long vacuous = 0;      // enclosures with an infinite remainder end (trivially sound)
  double worst = 0.0;    // largest violation divided by (1 + |h|)
};

// Evaluates h on `grid` evenly spaced points of [0, etabar] and checks the
// degree-k enclosure of every requested k against those values.
inline void check_directional(const ExprGraph& f, const Bindings& x, const Bindings& v, double etabar,
                              const std::vector<int>& degrees, RemainderMethod method, int grid,
                              SoundnessStats& s, double slack = 1e-9, double center_tol = 1e-10) {
  const ExprGraph h = line_restrict(f, x, v);
  std::vector<double> etas = linspace(0.0, etabar, grid), hv(etas.size());
  for (std::size_t i = 0; i < etas.size(); ++i) hv[i] = eval(h, {{kEtaName, Tensor::scalar(etas[i])}});
  for (int k : degrees) {
    const DirectionalPoly p = propagate_directional(h, etabar, k, method);
    if (std::abs(p.value_at_center() - hv[0]) > center_tol * std::max(1.0, std::abs(hv[0]))) ++s.center_failures;
    const bool up_finite = std::isfinite(p.remainder.hi()), lo_finite = std::isfinite(p.remainder.lo());
    if (!up_finite || !lo_finite) ++s.vacuous;
    const RealPoly up = upper_poly(p), lo = lower_poly(p);
    for (std::size_t i = 0; i < etas.size(); ++i) {
      const double tol = slack * (1.0 + std::abs(hv[i]));
      ++s.checks;
      double viol = 0.0;
      if (up_finite) viol = std::max(viol, hv[i] - up(etas[i]));
      if (lo_finite) viol = std::max(viol, lo(etas[i]) - hv[i]);
      if (!(viol <= tol)) ++s.violations;
      s.worst = std::max(s.worst, viol / (1.0 + std::abs(hv[i])));
    }
  }
}

// Same for the quadratic enclosure of f(x + U eta) on the box [0, etabar]^d,
// at `samples` random box points plus the corners of the box.
inline void check_quadratic(const ExprGraph& f, const Bindings& x, const DirectionStack& stack, double etabar,
                            RemainderMethod method, int samples, std::mt19937_64& rng, SoundnessStats& s,
                            double slack = 1e-9, double center_tol = 1e-10) {
  const ExprGraph h = subspace_restrict(f, x, stack.U, stack.d);
  const std::vector<double> box(stack.d, etabar);
  const QuadEnclosure q = propagate_quadratic(h, box, method);
  const double h0 = eval(f, x);
  if (std::abs(q.c0 - h0) > center_tol * std::max(1.0, std::abs(h0))) ++s.center_failures;
  bool finite = true;
  for (std::size_t t = 0; t < q.qlo.size(); ++t) finite = finite && std::isfinite(q.qlo[t]) && std::isfinite(q.qhi[t]);
  if (!finite) {
    ++s.vacuous;
    return;
  }
  std::uniform_real_distribution<double> u(0.0, etabar);
  std::uniform_int_distribution<int> coin(0, 1);
  for (int i = 0; i < samples; ++i) {
    std::vector<double> eta(stack.d);
    for (double& e : eta) e = i % 4 == 0 ? etabar * coin(rng) : u(rng);
    Tensor et(Shape{stack.d});
    for (std::size_t j = 0; j < stack.d; ++j) et[j] = eta[j];
    const double hv = eval(h, {{kEtaName, et}});
    const double viol = std::max(hv - q.upper(eta), q.lower(eta) - hv);
    ++s.checks;
    if (!(viol <= slack * (1.0 + std::abs(hv)))) ++s.violations;
    s.worst = std::max(s.worst, viol / (1.0 + std::abs(hv)));
  }
}

// Gaussian direction with unit Euclidean norm.
inline Bindings unit_direction(const Bindings& like, std::mt19937_64& rng) {
  Bindings v = random_like(like, rng);
  const double n = std::sqrt(squared_norm(v));
  return n > 0.0 ? scaled(v, 1.0 / n) : v;
}

}  // namespace umm::testing
