#include <algorithm>
#include <cmath>
#include <optional>
#include <string>

#include "enclosure_detail.hpp"
#include "umm/enclosure.hpp"
#include "umm/errors.hpp"

namespace umm {

namespace {

using detail::bidx;
using detail::MatDims;

// One entry: c0 + c1^T eta + eta^T [qlo, qhi] eta. Empty q means zero.
struct QP {
  double c0 = 0.0;
  std::vector<double> c1;
  std::vector<double> qlo, qhi;
};

struct QCtx {
  std::size_t d = 0;
  RemainderMethod method = RemainderMethod::Sharp;
  std::vector<double> etabar;
  std::vector<double> box_prod;  // etabar_i * etabar_j rounded up
};

// Range of c1^T eta over the box [0, etabar].
Interval linear_range(const double* c1, const QCtx& ctx) {
  double lo = 0.0, hi = 0.0;
  for (std::size_t i = 0; i < ctx.d; ++i) {
    if (c1[i] > 0.0) hi = add_up(hi, mul_up(c1[i], ctx.etabar[i]));
    else if (c1[i] < 0.0) lo = add_down(lo, mul_down(c1[i], ctx.etabar[i]));
  }
  return Interval(lo, hi);
}

// Range of eta^T Q eta over the box, using eta >= 0.
Interval quad_range(const double* qlo, const double* qhi, const QCtx& ctx) {
  double lo = 0.0, hi = 0.0;
  for (std::size_t t = 0; t < ctx.d * ctx.d; ++t) {
    if (qhi[t] > 0.0) hi = add_up(hi, mul_up(qhi[t], ctx.box_prod[t]));
    if (qlo[t] < 0.0) lo = add_down(lo, mul_down(qlo[t], ctx.box_prod[t]));
  }
  return Interval(lo, hi);
}

// Accumulate s * [blo, bhi] into [lo, hi] for an interval factor s.
void add_scaled(double* lo, double* hi, const Interval& s, const double* blo, const double* bhi, std::size_t m) {
  const double slo = s.lo(), shi = s.hi();
  for (std::size_t t = 0; t < m; ++t) {
    if (blo[t] == 0.0 && bhi[t] == 0.0) continue;
    double vlo, vhi;
    if (slo >= 0.0 && blo[t] >= 0.0) {
      vlo = mul_down(slo, blo[t]);
      vhi = mul_up(shi, bhi[t]);
    } else if (slo == shi) {
      vlo = slo >= 0.0 ? mul_down(slo, blo[t]) : mul_down(slo, bhi[t]);
      vhi = slo >= 0.0 ? mul_up(slo, bhi[t]) : mul_up(slo, blo[t]);
    } else {
      vlo = std::min({mul_down(slo, blo[t]), mul_down(slo, bhi[t]), mul_down(shi, blo[t]), mul_down(shi, bhi[t])});
      vhi = std::max({mul_up(slo, blo[t]), mul_up(slo, bhi[t]), mul_up(shi, blo[t]), mul_up(shi, bhi[t])});
    }
    lo[t] = add_down(lo[t], vlo);
    hi[t] = add_up(hi[t], vhi);
  }
}

void add_interval(double* lo, double* hi, std::size_t t, const Interval& v) {
  lo[t] = add_down(lo[t], v.lo());
  hi[t] = add_up(hi[t], v.hi());
}

QP qp_mul(const QP& a, const QP& b, const QCtx& ctx) {
  const std::size_t d = ctx.d, dd = d * d;
  QP o;
  o.c0 = a.c0 * b.c0;
  o.c1.assign(d, 0.0);
  for (std::size_t i = 0; i < d; ++i) o.c1[i] = a.c0 * b.c1[i] + b.c0 * a.c1[i];
  o.qlo.assign(dd, 0.0);
  o.qhi.assign(dd, 0.0);
  const bool qa = !a.qlo.empty(), qb = !b.qlo.empty();
  if (qb) add_scaled(o.qlo.data(), o.qhi.data(), Interval(a.c0), b.qlo.data(), b.qhi.data(), dd);
  if (qa) add_scaled(o.qlo.data(), o.qhi.data(), Interval(b.c0), a.qlo.data(), a.qhi.data(), dd);
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = i; j < d; ++j) {
      Interval v = Interval(a.c1[i]) * Interval(b.c1[j]);
      if (i != j) v = scale(v + Interval(a.c1[j]) * Interval(b.c1[i]), 0.5);
      if (v.is_zero()) continue;
      add_interval(o.qlo.data(), o.qhi.data(), i * d + j, v);
      if (i != j) add_interval(o.qlo.data(), o.qhi.data(), j * d + i, v);
    }
  }
  // Cubic and quartic terms, absorbed using ranges over the box.
  if (qb) add_scaled(o.qlo.data(), o.qhi.data(), linear_range(a.c1.data(), ctx), b.qlo.data(), b.qhi.data(), dd);
  if (qa) add_scaled(o.qlo.data(), o.qhi.data(), linear_range(b.c1.data(), ctx), a.qlo.data(), a.qhi.data(), dd);
  if (qa && qb) {
    add_scaled(o.qlo.data(), o.qhi.data(), quad_range(a.qlo.data(), a.qhi.data(), ctx), b.qlo.data(), b.qhi.data(), dd);
  }
  return o;
}

bool qp_is_constant(const QP& a) {
  for (double v : a.c1)
    if (v != 0.0) return false;
  for (std::size_t t = 0; t < a.qlo.size(); ++t)
    if (a.qlo[t] != 0.0 || a.qhi[t] != 0.0) return false;
  return true;
}

QP qp_compose(Elementary fn, const QP& a, const QCtx& ctx) {
  const std::size_t d = ctx.d, dd = d * d;
  QP o;
  o.c1.assign(d, 0.0);
  if (qp_is_constant(a)) {
    o.c0 = evaluate(fn, a.c0);
    return o;
  }
  const bool qa = !a.qlo.empty();
  Interval zrange = Interval(a.c0) + linear_range(a.c1.data(), ctx);
  if (qa) zrange += quad_range(a.qlo.data(), a.qhi.data(), ctx);
  if (fn == Elementary::Log && !(zrange.lo() > 0.0)) {
    throw DomainError("log argument range " + to_string(zrange) + " reaches non-positive values");
  }
  const Interval ig = elementary_remainder(fn, a.c0, zrange, 2, ctx.method);
  const std::vector<double> f = taylor_coefficients(fn, a.c0, 2);
  if (!std::isfinite(f[0]) || !std::isfinite(f[1])) {
    throw DomainError("non-finite Taylor coefficient for " + std::string(to_string(fn)));
  }
  o.c0 = f[0];
  for (std::size_t i = 0; i < d; ++i) o.c1[i] = f[1] * a.c1[i];
  o.qlo.assign(dd, 0.0);
  o.qhi.assign(dd, 0.0);
  if (qa) add_scaled(o.qlo.data(), o.qhi.data(), Interval(f[1]), a.qlo.data(), a.qhi.data(), dd);
  if (!ig.is_zero()) {
    // (p - z0)^2 = (w^T eta)^2 with w = c1 + Q eta, so it lies in eta^T [w w^T] eta.
    std::vector<Interval> w(d);
    for (std::size_t i = 0; i < d; ++i) {
      Interval wi(a.c1[i]);
      if (qa) {
        for (std::size_t j = 0; j < d; ++j) {
          const Interval qij(a.qlo[i * d + j], a.qhi[i * d + j]);
          if (!qij.is_zero()) wi += qij * Interval(0.0, ctx.etabar[j]);
        }
      }
      w[i] = wi;
    }
    for (std::size_t i = 0; i < d; ++i) {
      for (std::size_t j = 0; j < d; ++j) {
        const Interval wij = (i == j) ? sqr(w[i]) : w[i] * w[j];
        if (wij.is_zero()) continue;
        add_interval(o.qlo.data(), o.qhi.data(), i * d + j, ig * wij);
      }
    }
  }
  return o;
}

QP qp_pow(const QP& a, int n, const QCtx& ctx) {
  if (n == 0) {
    QP one;
    one.c0 = 1.0;
    one.c1.assign(ctx.d, 0.0);
    return one;
  }
  QP acc = a;
  for (int i = 1; i < n; ++i) acc = qp_mul(acc, a, ctx);
  return acc;
}

struct QTensor {
  Shape shape;
  std::size_t n = 0, d = 0;
  std::vector<double> c0;
  std::vector<double> c1;        // n * d, empty means zero
  std::vector<double> qlo, qhi;  // n * d * d, empty means zero

  QTensor(Shape s, std::size_t d_) : shape(std::move(s)), n(numel(shape)), d(d_), c0(n, 0.0) {}

  bool has_c1() const { return !c1.empty(); }
  bool has_q() const { return !qlo.empty(); }
  bool is_constant() const { return !has_c1() && !has_q(); }
  void ensure_c1() {
    if (c1.empty()) c1.assign(n * d, 0.0);
  }
  void ensure_q() {
    if (qlo.empty()) {
      qlo.assign(n * d * d, 0.0);
      qhi.assign(n * d * d, 0.0);
    }
  }
  QP get(std::size_t i) const {
    QP e;
    e.c0 = c0[i];
    if (has_c1()) e.c1.assign(c1.begin() + static_cast<std::ptrdiff_t>(i * d), c1.begin() + static_cast<std::ptrdiff_t>((i + 1) * d));
    else e.c1.assign(d, 0.0);
    if (has_q()) {
      const auto off = static_cast<std::ptrdiff_t>(i * d * d), end = static_cast<std::ptrdiff_t>((i + 1) * d * d);
      e.qlo.assign(qlo.begin() + off, qlo.begin() + end);
      e.qhi.assign(qhi.begin() + off, qhi.begin() + end);
    }
    return e;
  }
  void put(std::size_t i, const QP& e) {
    c0[i] = e.c0;
    bool nz = false;
    for (double v : e.c1) nz = nz || v != 0.0;
    if (nz || has_c1()) {
      ensure_c1();
      std::copy(e.c1.begin(), e.c1.end(), c1.begin() + static_cast<std::ptrdiff_t>(i * d));
    }
    if (!e.qlo.empty()) {
      ensure_q();
      std::copy(e.qlo.begin(), e.qlo.end(), qlo.begin() + static_cast<std::ptrdiff_t>(i * d * d));
      std::copy(e.qhi.begin(), e.qhi.end(), qhi.begin() + static_cast<std::ptrdiff_t>(i * d * d));
    }
  }
};

QTensor add_sub(const QTensor& a, const QTensor& b, const Shape& shape, const QCtx& ctx, double sign) {
  QTensor o(shape, ctx.d);
  const std::size_t d = ctx.d, dd = d * d;
  for (std::size_t i = 0; i < o.n; ++i) o.c0[i] = a.c0[bidx(a.n, i)] + sign * b.c0[bidx(b.n, i)];
  if (a.has_c1() || b.has_c1()) {
    o.ensure_c1();
    for (std::size_t i = 0; i < o.n; ++i) {
      for (std::size_t t = 0; t < d; ++t) {
        const double x = a.has_c1() ? a.c1[bidx(a.n, i) * d + t] : 0.0;
        const double y = b.has_c1() ? b.c1[bidx(b.n, i) * d + t] : 0.0;
        o.c1[i * d + t] = x + sign * y;
      }
    }
  }
  if (a.has_q() || b.has_q()) {
    o.ensure_q();
    for (std::size_t i = 0; i < o.n; ++i) {
      for (std::size_t t = 0; t < dd; ++t) {
        Interval x(0.0), y(0.0);
        if (a.has_q()) x = Interval(a.qlo[bidx(a.n, i) * dd + t], a.qhi[bidx(a.n, i) * dd + t]);
        if (b.has_q()) y = Interval(b.qlo[bidx(b.n, i) * dd + t], b.qhi[bidx(b.n, i) * dd + t]);
        const Interval s = sign > 0 ? x + y : x - y;
        o.qlo[i * dd + t] = s.lo();
        o.qhi[i * dd + t] = s.hi();
      }
    }
  }
  return o;
}

QTensor scale_by_constant(const std::vector<double>& s, const QTensor& p, const Shape& shape, const QCtx& ctx) {
  QTensor o(shape, ctx.d);
  const std::size_t d = ctx.d, dd = d * d;
  for (std::size_t i = 0; i < o.n; ++i) o.c0[i] = s[bidx(s.size(), i)] * p.c0[bidx(p.n, i)];
  if (p.has_c1()) {
    o.ensure_c1();
    for (std::size_t i = 0; i < o.n; ++i)
      for (std::size_t t = 0; t < d; ++t) o.c1[i * d + t] = s[bidx(s.size(), i)] * p.c1[bidx(p.n, i) * d + t];
  }
  if (p.has_q()) {
    o.ensure_q();
    for (std::size_t i = 0; i < o.n; ++i) {
      const double si = s[bidx(s.size(), i)];
      for (std::size_t t = 0; t < dd; ++t) {
        const double lo = p.qlo[bidx(p.n, i) * dd + t], hi = p.qhi[bidx(p.n, i) * dd + t];
        o.qlo[i * dd + t] = si >= 0.0 ? mul_down(si, lo) : mul_down(si, hi);
        o.qhi[i * dd + t] = si >= 0.0 ? mul_up(si, hi) : mul_up(si, lo);
      }
    }
  }
  return o;
}

// Range over the box of each element's linear part (quadratic = false) or
// quadratic part (quadratic = true).
std::vector<Interval> element_ranges(const QTensor& a, const QCtx& ctx, bool quadratic) {
  std::vector<Interval> r(a.n);
  const std::size_t d = ctx.d;
  if (quadratic && a.has_q())
    for (std::size_t e = 0; e < a.n; ++e) r[e] = quad_range(&a.qlo[e * d * d], &a.qhi[e * d * d], ctx);
  if (!quadratic && a.has_c1())
    for (std::size_t e = 0; e < a.n; ++e) r[e] = linear_range(&a.c1[e * d], ctx);
  return r;
}

QTensor matmul(const QTensor& a, const QTensor& b, const Shape& shape, const QCtx& ctx) {
  const MatDims md = detail::matmul_dims(a.shape, b.shape);
  const std::size_t d = ctx.d, dd = d * d;
  QTensor o(shape, d);
  if (a.is_constant()) {
    detail::real_matmul(a.c0.data(), b.c0.data(), o.c0.data(), md);
    if (b.has_c1()) {
      o.ensure_c1();
      detail::real_matmul(a.c0.data(), b.c1.data(), o.c1.data(), {md.m, md.k, md.n * d});
    }
    if (b.has_q()) {
      o.ensure_q();
      detail::interval_matmul_left(a.c0.data(), b.qlo.data(), b.qhi.data(), o.qlo.data(), o.qhi.data(),
                                   {md.m, md.k, md.n * dd});
    }
    return o;
  }
  if (b.is_constant()) {
    detail::real_matmul(a.c0.data(), b.c0.data(), o.c0.data(), md);
    if (a.has_c1()) {
      o.ensure_c1();
      for (std::size_t i = 0; i < md.m; ++i)
        for (std::size_t p = 0; p < md.k; ++p) {
          const double* src = &a.c1[(i * md.k + p) * d];
          for (std::size_t j = 0; j < md.n; ++j) {
            const double s = b.c0[p * md.n + j];
            if (s == 0.0) continue;
            double* dst = &o.c1[(i * md.n + j) * d];
            for (std::size_t t = 0; t < d; ++t) dst[t] += s * src[t];
          }
        }
    }
    if (a.has_q()) {
      o.ensure_q();
      for (std::size_t i = 0; i < md.m; ++i)
        for (std::size_t p = 0; p < md.k; ++p) {
          const double* slo = &a.qlo[(i * md.k + p) * dd];
          const double* shi = &a.qhi[(i * md.k + p) * dd];
          for (std::size_t j = 0; j < md.n; ++j) {
            const double s = b.c0[p * md.n + j];
            if (s == 0.0) continue;
            double* lo = &o.qlo[(i * md.n + j) * dd];
            double* hi = &o.qhi[(i * md.n + j) * dd];
            for (std::size_t t = 0; t < dd; ++t) {
              lo[t] = add_down(lo[t], s > 0.0 ? mul_down(s, slo[t]) : mul_down(s, shi[t]));
              hi[t] = add_up(hi[t], s > 0.0 ? mul_up(s, shi[t]) : mul_up(s, slo[t]));
            }
          }
        }
    }
    return o;
  }
  // General case: accumulate each product in place, with the truncation
  // terms of every operand element computed once.
  const std::vector<Interval> la = element_ranges(a, ctx, false), qa = element_ranges(a, ctx, true);
  const std::vector<Interval> lb = element_ranges(b, ctx, false), qb = element_ranges(b, ctx, true);
  const bool any_c1 = a.has_c1() || b.has_c1();
  if (any_c1) o.ensure_c1();
  if (any_c1 || a.has_q() || b.has_q()) o.ensure_q();
  for (std::size_t i = 0; i < md.m; ++i) {
    for (std::size_t j = 0; j < md.n; ++j) {
      const std::size_t oe = i * md.n + j;
      double* oc1 = o.has_c1() ? &o.c1[oe * d] : nullptr;
      double* olo = o.has_q() ? &o.qlo[oe * dd] : nullptr;
      double* ohi = o.has_q() ? &o.qhi[oe * dd] : nullptr;
      double c0 = 0.0;
      for (std::size_t p = 0; p < md.k; ++p) {
        const std::size_t ae = i * md.k + p, be = p * md.n + j;
        const double a0 = a.c0[ae], b0 = b.c0[be];
        c0 += a0 * b0;
        const double* a1 = a.has_c1() ? &a.c1[ae * d] : nullptr;
        const double* b1 = b.has_c1() ? &b.c1[be * d] : nullptr;
        if (a1) for (std::size_t t = 0; t < d; ++t) oc1[t] += b0 * a1[t];
        if (b1) for (std::size_t t = 0; t < d; ++t) oc1[t] += a0 * b1[t];
        if (a1 && b1) {
          for (std::size_t r = 0; r < d; ++r) {
            for (std::size_t s = r; s < d; ++s) {
              double lo = mul_down(a1[r], b1[s]), hi = mul_up(a1[r], b1[s]);
              if (r != s) {
                lo = mul_down(add_down(lo, mul_down(a1[s], b1[r])), 0.5);
                hi = mul_up(add_up(hi, mul_up(a1[s], b1[r])), 0.5);
              }
              if (lo == 0.0 && hi == 0.0) continue;
              olo[r * d + s] = add_down(olo[r * d + s], lo);
              ohi[r * d + s] = add_up(ohi[r * d + s], hi);
              if (r != s) {
                olo[s * d + r] = add_down(olo[s * d + r], lo);
                ohi[s * d + r] = add_up(ohi[s * d + r], hi);
              }
            }
          }
        }
        if (b.has_q()) {
          const double* blo = &b.qlo[be * dd];
          const double* bhi = &b.qhi[be * dd];
          add_scaled(olo, ohi, Interval(a0), blo, bhi, dd);
          if (!la[ae].is_zero()) add_scaled(olo, ohi, la[ae], blo, bhi, dd);
          if (a.has_q() && !qa[ae].is_zero()) add_scaled(olo, ohi, qa[ae], blo, bhi, dd);
        }
        if (a.has_q()) {
          const double* alo = &a.qlo[ae * dd];
          const double* ahi = &a.qhi[ae * dd];
          add_scaled(olo, ohi, Interval(b0), alo, ahi, dd);
          if (!lb[be].is_zero()) add_scaled(olo, ohi, lb[be], alo, ahi, dd);
        }
      }
      o.c0[oe] = c0;
    }
  }
  return o;
}

QTensor reduce_sum(const QTensor& a, const QCtx& ctx) {
  const std::size_t d = ctx.d, dd = d * d;
  QTensor o(Shape{}, d);
  double s = 0.0;
  for (double v : a.c0) s += v;
  o.c0[0] = s;
  if (a.has_c1()) {
    o.ensure_c1();
    for (std::size_t i = 0; i < a.n; ++i)
      for (std::size_t t = 0; t < d; ++t) o.c1[t] += a.c1[i * d + t];
  }
  if (a.has_q()) {
    o.ensure_q();
    for (std::size_t i = 0; i < a.n; ++i)
      for (std::size_t t = 0; t < dd; ++t) {
        o.qlo[t] = add_down(o.qlo[t], a.qlo[i * dd + t]);
        o.qhi[t] = add_up(o.qhi[t], a.qhi[i * dd + t]);
      }
  }
  return o;
}

template <typename Op>
QTensor entrywise(const QTensor& a, const QTensor& b, const Shape& shape, const QCtx& ctx, Op op) {
  QTensor o(shape, ctx.d);
  for (std::size_t i = 0; i < o.n; ++i) o.put(i, op(a.get(bidx(a.n, i)), b.get(bidx(b.n, i))));
  return o;
}

}  // namespace

double QuadEnclosure::upper(const std::vector<double>& eta) const {
  double v = c0;
  for (std::size_t i = 0; i < d; ++i) {
    v += c1[i] * eta[i];
    for (std::size_t j = 0; j < d; ++j) v += eta[i] * qhi[i * d + j] * eta[j];
  }
  return v;
}

double QuadEnclosure::lower(const std::vector<double>& eta) const {
  double v = c0;
  for (std::size_t i = 0; i < d; ++i) {
    v += c1[i] * eta[i];
    for (std::size_t j = 0; j < d; ++j) v += eta[i] * qlo[i * d + j] * eta[j];
  }
  return v;
}

QuadEnclosure propagate_quadratic(const ExprGraph& g, const std::vector<double>& etabar, RemainderMethod method) {
  QCtx ctx;
  ctx.d = etabar.size();
  ctx.method = method;
  ctx.etabar = etabar;
  if (ctx.d == 0) throw ShapeError("propagate_quadratic: empty trust box");
  for (double e : etabar) {
    if (std::isinf(e)) throw UnboundedTrust("propagate_quadratic needs a finite trust box");
    if (!(e >= 0.0)) throw DomainError("trust box entries must be non-negative");
  }
  const std::size_t d = ctx.d, dd = d * d;
  ctx.box_prod.resize(dd);
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j) ctx.box_prod[i * d + j] = mul_up(etabar[i], etabar[j]);

  const std::size_t last = static_cast<std::size_t>(g.output());
  // Free intermediate enclosures after their last use; wide layers are large.
  std::vector<std::size_t> last_use(last + 1, 0);
  for (std::size_t id = 0; id <= last; ++id)
    for (NodeId in : g.nodes()[id].inputs) last_use[static_cast<std::size_t>(in)] = id;

  std::vector<std::optional<QTensor>> val(last + 1);
  std::string var_name;
  for (std::size_t id = 0; id <= last; ++id) {
    const Node& n = g.nodes()[id];
    auto in = [&](int i) -> const QTensor& { return *val[static_cast<std::size_t>(n.inputs[static_cast<std::size_t>(i)])]; };
    switch (n.kind) {
      case OpKind::Constant: {
        QTensor t(n.shape, d);
        t.c0 = n.value.values();
        val[id] = std::move(t);
        break;
      }
      case OpKind::Variable: {
        if (!var_name.empty() && var_name != n.name) throw UnboundVariable("quadratic propagation needs exactly one variable");
        if (n.shape != Shape{d}) {
          throw ShapeError("quadratic propagation variable must have shape (" + std::to_string(d) + "), got " +
                           shape_string(n.shape));
        }
        var_name = n.name;
        QTensor t(n.shape, d);
        t.ensure_c1();
        for (std::size_t i = 0; i < d; ++i) t.c1[i * d + i] = 1.0;
        val[id] = std::move(t);
        break;
      }
      case OpKind::Add: val[id] = add_sub(in(0), in(1), n.shape, ctx, 1.0); break;
      case OpKind::Sub: val[id] = add_sub(in(0), in(1), n.shape, ctx, -1.0); break;
      case OpKind::Mul: {
        const QTensor& a = in(0);
        const QTensor& b = in(1);
        if (a.is_constant()) val[id] = scale_by_constant(a.c0, b, n.shape, ctx);
        else if (b.is_constant()) val[id] = scale_by_constant(b.c0, a, n.shape, ctx);
        else val[id] = entrywise(a, b, n.shape, ctx, [&](const QP& x, const QP& y) { return qp_mul(x, y, ctx); });
        break;
      }
      case OpKind::MatMul: val[id] = matmul(in(0), in(1), n.shape, ctx); break;
      case OpKind::Sum: val[id] = reduce_sum(in(0), ctx); break;
      case OpKind::Unary: {
        const QTensor& a = in(0);
        QTensor o(n.shape, d);
        if (a.is_constant()) {
          for (std::size_t i = 0; i < o.n; ++i) o.c0[i] = evaluate(n.fn, a.c0[i]);
        } else {
          for (std::size_t i = 0; i < o.n; ++i) o.put(i, qp_compose(n.fn, a.get(i), ctx));
        }
        val[id] = std::move(o);
        break;
      }
      case OpKind::IntPow: {
        const QTensor& a = in(0);
        QTensor o(n.shape, d);
        for (std::size_t i = 0; i < o.n; ++i) o.put(i, qp_pow(a.get(i), n.exponent, ctx));
        val[id] = std::move(o);
        break;
      }
    }
    for (NodeId input : n.inputs) {
      const auto i = static_cast<std::size_t>(input);
      if (last_use[i] == id && i != last) val[i].reset();
    }
  }

  const QTensor& out = *val[last];
  QuadEnclosure e;
  e.d = d;
  e.c0 = out.c0[0];
  e.c1 = out.has_c1() ? out.c1 : std::vector<double>(d, 0.0);
  e.qlo = out.has_q() ? out.qlo : std::vector<double>(dd, 0.0);
  e.qhi = out.has_q() ? out.qhi : std::vector<double>(dd, 0.0);
  e.etabar = etabar;
  return e;
}

}  // namespace umm
