#include "umm/boxqp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "umm/errors.hpp"
#include "umm/polymin.hpp"

namespace umm {

BoxQP::BoxQP(std::vector<double> A, std::vector<double> b, std::vector<double> lo, std::vector<double> hi)
    : A_(std::move(A)), b_(std::move(b)), lo_(std::move(lo)), hi_(std::move(hi)) {
  const std::size_t d = b_.size();
  if (A_.size() != d * d || lo_.size() != d || hi_.size() != d) throw ShapeError("BoxQP: inconsistent dimensions");
  for (std::size_t i = 0; i < d; ++i) {
    if (!(lo_[i] <= 0.0 && 0.0 <= hi_[i])) throw DomainError("BoxQP: the box must contain 0");
    if (!std::isfinite(lo_[i]) || !std::isfinite(hi_[i])) throw DomainError("BoxQP: the box must be bounded");
    for (std::size_t j = i + 1; j < d; ++j) {
      const double s = 0.5 * (A_[i * d + j] + A_[j * d + i]);
      A_[i * d + j] = A_[j * d + i] = s;
    }
  }
}

double BoxQP::objective(const std::vector<double>& x) const {
  const std::size_t d = dim();
  double quad = 0.0, lin = 0.0;
  for (std::size_t i = 0; i < d; ++i) {
    double row = 0.0;
    for (std::size_t j = 0; j < d; ++j) row += A_[i * d + j] * x[j];
    quad += x[i] * row;
    lin += b_[i] * x[i];
  }
  return 0.5 * quad - lin;
}

std::vector<double> BoxQP::gradient(const std::vector<double>& x) const {
  const std::size_t d = dim();
  std::vector<double> g(d);
  for (std::size_t i = 0; i < d; ++i) {
    double row = 0.0;
    for (std::size_t j = 0; j < d; ++j) row += A_[i * d + j] * x[j];
    g[i] = row - b_[i];
  }
  return g;
}

namespace {

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

void clip(const BoxQP& q, std::vector<double>& x) {
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = std::clamp(x[i], q.lo()[i], q.hi()[i]);
}

}  // namespace

std::vector<double> conjugate_box_min(const BoxQP& q, ConjugateTrace* trace) {
  const std::size_t d = q.dim();
  std::vector<double> x(d, 0.0);
  std::vector<double> r = q.gradient(x);
  std::vector<double> p(d, 0.0);
  const double tol = 1e-14 * std::sqrt(dot(q.b(), q.b())) + 1e-300;
  double rr_prev = 0.0;

  for (std::size_t it = 0; it < d; ++it) {
    const double rr = dot(r, r);
    if (std::sqrt(rr) <= tol) break;
    const double beta = it == 0 ? 0.0 : rr / rr_prev;
    for (std::size_t j = 0; j < d; ++j) p[j] = -r[j] + beta * p[j];

    // Feasible step lengths keeping x + alpha p inside the box.
    double alo = -std::numeric_limits<double>::infinity();
    double ahi = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < d; ++j) {
      if (p[j] == 0.0) continue;
      const double t1 = (q.lo()[j] - x[j]) / p[j];
      const double t2 = (q.hi()[j] - x[j]) / p[j];
      alo = std::max(alo, std::min(t1, t2));
      ahi = std::min(ahi, std::max(t1, t2));
    }
    alo = std::min(alo, 0.0);
    ahi = std::max(ahi, 0.0);
    if (std::isinf(alo) || std::isinf(ahi)) break;  // p == 0

    double pap = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
      double row = 0.0;
      for (std::size_t j = 0; j < d; ++j) row += q.A(i, j) * p[j];
      pap += p[i] * row;
    }
    const PolyMinimum m = minimize_quadratic_on_interval(RealPoly({0.0, dot(r, p), 0.5 * pap}), alo, ahi);
    const double alpha = m.value <= 0.0 ? m.argmin : 0.0;
    for (std::size_t j = 0; j < d; ++j) x[j] += alpha * p[j];
    clip(q, x);
    if (trace) {
      trace->iterates.push_back(x);
      trace->directions.push_back(p);
      trace->steps.push_back(alpha);
      if (alpha == alo || alpha == ahi) trace->any_clipped = true;
    }
    rr_prev = rr;
    r = q.gradient(x);
  }
  return x;
}

std::vector<double> cyclic_cd_pass(const BoxQP& q, std::vector<double> x) {
  const std::size_t d = q.dim();
  if (x.size() != d) throw ShapeError("cyclic_cd_pass: dimension mismatch");
  for (std::size_t i = 0; i < d; ++i) {
    double gi = -q.b()[i];
    for (std::size_t j = 0; j < d; ++j) gi += q.A(i, j) * x[j];
    const double lo = q.lo()[i] - x[i];
    const double hi = q.hi()[i] - x[i];
    const PolyMinimum m = minimize_quadratic_on_interval(RealPoly({0.0, gi, 0.5 * q.A(i, i)}), std::min(lo, 0.0),
                                                         std::max(hi, 0.0));
    if (m.value < 0.0) x[i] = std::clamp(x[i] + m.argmin, q.lo()[i], q.hi()[i]);
  }
  return x;
}

std::vector<double> minimize_box_qp(const BoxQP& q) { return cyclic_cd_pass(q, conjugate_box_min(q)); }

}  // namespace umm
