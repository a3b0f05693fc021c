#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <string>

#include "enclosure_detail.hpp"
#include "umm/enclosure.hpp"
#include "umm/errors.hpp"

namespace umm {

namespace detail {

MatDims matmul_dims(const Shape& a, const Shape& b) {
  if (a.empty() || b.empty() || a.back() != b.front()) {
    throw ShapeError("matmul: incompatible shapes " + shape_string(a) + " x " + shape_string(b));
  }
  const std::size_t k = a.back();
  return {k ? numel(a) / k : 0, k, k ? numel(b) / k : 0};
}

void real_matmul(const double* a, const double* b, double* out, const MatDims& d) {
  std::fill(out, out + d.m * d.n, 0.0);
  for (std::size_t i = 0; i < d.m; ++i) {
    double* row = out + i * d.n;
    for (std::size_t p = 0; p < d.k; ++p) {
      const double aip = a[i * d.k + p];
      if (aip == 0.0) continue;
      const double* brow = b + p * d.n;
      for (std::size_t j = 0; j < d.n; ++j) row[j] += aip * brow[j];
    }
  }
}

void interval_matmul_left(const double* a, const double* blo, const double* bhi, double* lo, double* hi,
                          const MatDims& d) {
  std::fill(lo, lo + d.m * d.n, 0.0);
  std::fill(hi, hi + d.m * d.n, 0.0);
  for (std::size_t i = 0; i < d.m; ++i) {
    double* lrow = lo + i * d.n;
    double* hrow = hi + i * d.n;
    for (std::size_t p = 0; p < d.k; ++p) {
      const double s = a[i * d.k + p];
      if (s == 0.0) continue;
      const double* bl = blo + p * d.n;
      const double* bh = bhi + p * d.n;
      if (s > 0.0) {
        for (std::size_t j = 0; j < d.n; ++j) {
          lrow[j] = add_down(lrow[j], mul_down(s, bl[j]));
          hrow[j] = add_up(hrow[j], mul_up(s, bh[j]));
        }
      } else {
        for (std::size_t j = 0; j < d.n; ++j) {
          lrow[j] = add_down(lrow[j], mul_down(s, bh[j]));
          hrow[j] = add_up(hrow[j], mul_up(s, bl[j]));
        }
      }
    }
  }
}

void interval_matmul_right(const double* alo, const double* ahi, const double* b, double* lo, double* hi,
                           const MatDims& d) {
  std::fill(lo, lo + d.m * d.n, 0.0);
  std::fill(hi, hi + d.m * d.n, 0.0);
  for (std::size_t i = 0; i < d.m; ++i) {
    double* lrow = lo + i * d.n;
    double* hrow = hi + i * d.n;
    for (std::size_t p = 0; p < d.k; ++p) {
      const double al = alo[i * d.k + p], ah = ahi[i * d.k + p];
      if (al == 0.0 && ah == 0.0) continue;
      const double* brow = b + p * d.n;
      for (std::size_t j = 0; j < d.n; ++j) {
        const double s = brow[j];
        if (s >= 0.0) {
          lrow[j] = add_down(lrow[j], mul_down(al, s));
          hrow[j] = add_up(hrow[j], mul_up(ah, s));
        } else {
          lrow[j] = add_down(lrow[j], mul_down(ah, s));
          hrow[j] = add_up(hrow[j], mul_up(al, s));
        }
      }
    }
  }
}

double pow_up_nonneg(double x, int n) {
  double r = 1.0;
  for (int i = 0; i < n; ++i) r = mul_up(r, x);
  return r;
}

double pow_down_nonneg(double x, int n) {
  double r = 1.0;
  for (int i = 0; i < n; ++i) r = mul_down(r, x);
  return r;
}

}  // namespace detail

namespace {

using detail::bidx;
using detail::MatDims;

constexpr double kEps = std::numeric_limits<double>::epsilon();

double factorial(int n) {
  double f = 1.0;
  for (int i = 2; i <= n; ++i) f *= i;
  return f;
}

void check_degree(int k) {
  if (k < kMinDegree || k > kMaxDegree) {
    throw UnsupportedDegree("Taylor degree " + std::to_string(k) + " outside [2, 6]");
  }
}

// x / f for f > 0, rounded down / up.
double div_down(double x, double f) {
  const double q = x / f;
  if (!std::isfinite(q)) return q;
  return std::fma(q, f, -x) > 0.0 ? next_down(q) : q;
}

double div_up(double x, double f) {
  const double q = x / f;
  if (!std::isfinite(q)) return q;
  return std::fma(q, f, -x) < 0.0 ? next_up(q) : q;
}

Interval widen(double value, double error) {
  if (std::isinf(value)) return Interval(value);
  return Interval(next_down(value - error), next_up(value + error));
}

// Range of f^(order)(z) over [a, b], a <= b, endpoints possibly infinite.
Interval derivative_range(Elementary fn, int order, double a, double b) {
  Interval acc = widen(derivative(fn, order, a).value, derivative(fn, order, a).error);
  const DerivativeValue vb = derivative(fn, order, b);
  acc = hull(acc, widen(vb.value, vb.error));
  for (double z : derivative_breakpoints(fn, order)) {
    if (z > a && z < b) {
      const DerivativeValue v = derivative(fn, order, z);
      acc = hull(acc, widen(v.value, v.error));
    }
  }
  return acc;
}

bool monotone_on(Elementary fn, int order, double a, double b) {
  for (double z : derivative_breakpoints(fn, order))
    if (z > a && z < b) return false;
  return true;
}

Interval divide_factorial(const Interval& i, int k) {
  const double f = factorial(k);
  return Interval(div_down(i.lo(), f), div_up(i.hi(), f));
}

// Enclosure of R(z) = (f(z) - T_{k-1}(z; z0)) / (z - z0)^k at a single z != z0.
Interval scaled_remainder_at(Elementary fn, double z0, double z, int k) {
  if (std::isinf(z)) {
    if (fn == Elementary::Exp && z > 0) return Interval(kInf);
    return Interval(0.0);
  }
  const double dz = z - z0;
  // Rounding of dz itself: the error term is bounded by one ulp of dz.
  const double dz_err = std::abs(dz) * kEps;
  const DerivativeValue fz = derivative(fn, 0, z);
  if (!std::isfinite(fz.value)) return Interval::entire();
  double t = 0.0, mag = std::abs(fz.value), err = fz.error;
  double p = 1.0;
  for (int i = 0; i < k; ++i) {
    const DerivativeValue di = derivative(fn, i, z0);
    const double fi = di.value / factorial(i);
    t += fi * p;
    mag += std::abs(fi) * std::abs(p);
    err += di.error / factorial(i) * std::abs(p);
    p *= dz;
  }
  // First-order effect of the perturbation in dz on f(z) - T(z).
  const DerivativeValue d1 = derivative(fn, 1, z);
  err += (std::abs(d1.value) + std::abs(derivative(fn, 1, z0).value)) * dz_err;
  const double num = fz.value - t;
  err += (2.0 * k + 6.0) * kEps * mag;
  const double denom = std::pow(std::abs(dz), k);
  const double sign = (dz < 0 && k % 2 == 1) ? -1.0 : 1.0;
  const double r = sign * num / denom;
  const double r_err = err / denom * (1.0 + 4.0 * k * kEps) + 4.0 * kEps * std::abs(r);
  if (!std::isfinite(r) || !std::isfinite(r_err)) return Interval::entire();
  return widen(r, r_err);
}

// Sharp remainder over one side [a, b] of z0 (z0 is a or b).
Interval sharp_side(Elementary fn, double z0, double a, double b, int k, const Interval& at_center) {
  const Interval lagrange_side = divide_factorial(derivative_range(fn, k, a, b), k);
  if (!monotone_on(fn, k, a, b)) return lagrange_side;
  const double end = (a == z0) ? b : a;
  const Interval candidate = hull(at_center, scaled_remainder_at(fn, z0, end, k));
  const double lo = std::max(candidate.lo(), lagrange_side.lo());
  const double hi = std::min(candidate.hi(), lagrange_side.hi());
  if (lo > hi) return lagrange_side;
  return Interval(lo, hi);
}

}  // namespace

std::string_view to_string(RemainderMethod m) { return m == RemainderMethod::Sharp ? "sharp" : "lagrange"; }

RemainderMethod remainder_method_from_string(std::string_view name) {
  if (name == "sharp") return RemainderMethod::Sharp;
  if (name == "lagrange") return RemainderMethod::Lagrange;
  throw DomainError("unknown remainder method: " + std::string(name));
}

Interval elementary_remainder(Elementary fn, double z0, const Interval& zrange, int k, RemainderMethod method) {
  check_degree(k);
  if (!std::isfinite(z0) || !zrange.contains(z0)) {
    throw DomainError("expansion point outside its range " + to_string(zrange));
  }
  if (fn == Elementary::Log && !(zrange.lo() > 0.0)) {
    throw DomainError("log remainder over " + to_string(zrange) + " leaves the domain");
  }
  const Interval lagrange = divide_factorial(derivative_range(fn, k, zrange.lo(), zrange.hi()), k);
  if (method == RemainderMethod::Lagrange) return lagrange;

  const DerivativeValue c = derivative(fn, k, z0);
  const Interval at_center = divide_factorial(widen(c.value, c.error), k);
  Interval out = at_center;
  if (zrange.lo() < z0) out = hull(out, sharp_side(fn, z0, zrange.lo(), z0, k, at_center));
  if (zrange.hi() > z0) out = hull(out, sharp_side(fn, z0, z0, zrange.hi(), k, at_center));
  return Interval(std::max(out.lo(), lagrange.lo()), std::min(out.hi(), lagrange.hi()));
}

std::vector<double> taylor_coefficients(Elementary fn, double z0, int k) {
  std::vector<double> out(static_cast<std::size_t>(k));
  for (int i = 0; i < k; ++i) out[static_cast<std::size_t>(i)] = derivative(fn, i, z0).value / factorial(i);
  return out;
}

Interval poly_range(const std::vector<double>& coeffs, double lo, double hi) {
  if (!(lo <= hi) || std::isinf(lo)) throw DomainError("poly_range: need finite lo <= hi");
  int deg = -1;
  for (int i = static_cast<int>(coeffs.size()) - 1; i >= 0; --i) {
    if (coeffs[static_cast<std::size_t>(i)] != 0.0) {
      deg = i;
      break;
    }
  }
  if (deg <= 0) return Interval(deg < 0 ? 0.0 : coeffs[0]);

  auto horner = [&](double x) {
    double acc = 0.0;
    for (int i = deg; i >= 0; --i) acc = acc * x + coeffs[static_cast<std::size_t>(i)];
    return acc;
  };
  auto magnitude = [&](double x) {
    double acc = 0.0;
    for (int i = deg; i >= 0; --i) acc = acc * std::abs(x) + std::abs(coeffs[static_cast<std::size_t>(i)]);
    return acc;
  };

  std::vector<double> candidates{lo};
  if (std::isfinite(hi)) candidates.push_back(hi);
  auto consider = [&](double x) {
    if (x > lo && x < hi && std::isfinite(x)) candidates.push_back(x);
  };
  if (deg == 2) {
    consider(-coeffs[1] / (2.0 * coeffs[2]));
  } else if (deg == 3) {
    const double a = 3.0 * coeffs[3], b = 2.0 * coeffs[2], c = coeffs[1];
    const double disc = b * b - 4.0 * a * c;
    if (disc >= 0.0) {
      const double q = -0.5 * (b + std::copysign(std::sqrt(disc), b));
      if (q != 0.0) {
        consider(q / a);
        consider(c / q);
      } else {
        consider(0.0);
      }
    }
  } else if (deg > 3) {
    std::vector<double> dc(static_cast<std::size_t>(deg));
    for (int i = 1; i <= deg; ++i) dc[static_cast<std::size_t>(i - 1)] = i * coeffs[static_cast<std::size_t>(i)];
    for (const auto& z : companion_eigenvalues(RealPoly(dc))) consider(z.real());
  }

  // Slack covers Horner rounding and slightly misplaced critical points.
  const double rel = (2.0 * deg + 4.0) * kEps + (deg >= 3 ? 1e-13 : 0.0);
  double rlo = kInf, rhi = -kInf;
  for (double x : candidates) {
    const double v = horner(x);
    const double e = rel * magnitude(x);
    rlo = std::min(rlo, next_down(v - e));
    rhi = std::max(rhi, next_up(v + e));
  }
  if (std::isinf(hi)) {
    if (coeffs[static_cast<std::size_t>(deg)] > 0.0) rhi = kInf;
    else rlo = -kInf;
  }
  return Interval(rlo, rhi);
}

namespace {

// Enclosure entry with inline storage; the working representation of the
// tensor propagator.
struct EP {
  std::array<double, kMaxDegree> c{};
  Interval r;
};

struct Ctx {
  int k = 2;
  double etabar = 1.0;
  RemainderMethod method = RemainderMethod::Sharp;
  // etabar^j rounded up, j = 0..k
  std::array<double, kMaxDegree + 1> pow_up{};

  Ctx(int k_, double etabar_, RemainderMethod m) : k(k_), etabar(etabar_), method(m) {
    for (int j = 0; j <= k; ++j) pow_up[static_cast<std::size_t>(j)] = detail::pow_up_nonneg(etabar, j);
  }
};

EP ep_add(const EP& a, const EP& b, const Ctx& ctx) {
  EP o;
  for (int i = 0; i < ctx.k; ++i) o.c[static_cast<std::size_t>(i)] = a.c[static_cast<std::size_t>(i)] + b.c[static_cast<std::size_t>(i)];
  o.r = a.r + b.r;
  return o;
}

EP ep_sub(const EP& a, const EP& b, const Ctx& ctx) {
  EP o;
  for (int i = 0; i < ctx.k; ++i) o.c[static_cast<std::size_t>(i)] = a.c[static_cast<std::size_t>(i)] - b.c[static_cast<std::size_t>(i)];
  o.r = a.r - b.r;
  return o;
}

EP ep_scale(const EP& a, double s, const Ctx& ctx) {
  EP o;
  for (int i = 0; i < ctx.k; ++i) o.c[static_cast<std::size_t>(i)] = a.c[static_cast<std::size_t>(i)] * s;
  o.r = scale(a.r, s);
  return o;
}

Interval ep_coeff(const EP& a, int i, int k) {
  return i < k ? Interval(a.c[static_cast<std::size_t>(i)]) : a.r;
}

EP ep_mul(const EP& a, const EP& b, const Ctx& ctx) {
  const int k = ctx.k;
  EP o;
  for (int i = 0; i < k; ++i)
    for (int j = 0; i + j < k; ++j) o.c[static_cast<std::size_t>(i + j)] += a.c[static_cast<std::size_t>(i)] * b.c[static_cast<std::size_t>(j)];
  Interval rem(0.0);
  for (int m = k; m <= 2 * k; ++m) {
    Interval cm(0.0);
    for (int i = m - k; i <= k; ++i) {
      const Interval ai = ep_coeff(a, i, k);
      const Interval bj = ep_coeff(b, m - i, k);
      if (ai.is_zero() || bj.is_zero()) continue;
      cm += ai * bj;
    }
    if (cm.is_zero()) continue;
    if (m == k) {
      rem += cm;
      continue;
    }
    const double range_hi = ctx.pow_up[static_cast<std::size_t>(m - k)];
    if (std::isinf(range_hi)) throw UnboundedTrust("product truncation needs a bounded trust region");
    rem += cm * Interval(0.0, range_hi);
  }
  o.r = rem;
  return o;
}

bool ep_is_constant(const EP& a, int k) {
  for (int i = 1; i < k; ++i)
    if (a.c[static_cast<std::size_t>(i)] != 0.0) return false;
  return a.r.is_zero();
}

Interval ep_range(const EP& a, const Ctx& ctx, double lo, double hi) {
  std::vector<double> coeffs(a.c.begin(), a.c.begin() + ctx.k);
  Interval out = poly_range(coeffs, lo, hi);
  if (!a.r.is_zero()) {
    out += a.r * Interval(detail::pow_down_nonneg(lo, ctx.k), detail::pow_up_nonneg(hi, ctx.k));
  }
  return out;
}

EP ep_compose(Elementary fn, const EP& a, const Ctx& ctx) {
  const int k = ctx.k;
  const double z0 = a.c[0];
  if (ep_is_constant(a, k)) {
    EP o;
    o.c[0] = evaluate(fn, z0);
    return o;
  }
  const Interval zrange = ep_range(a, ctx, 0.0, ctx.etabar);
  if (fn == Elementary::Log && !(zrange.lo() > 0.0)) {
    throw DomainError("log argument range " + to_string(zrange) + " reaches non-positive values");
  }
  const Interval ig = elementary_remainder(fn, z0, zrange, k, ctx.method);
  const std::vector<double> f = taylor_coefficients(fn, z0, k);
  for (double v : f)
    if (!std::isfinite(v)) throw DomainError("non-finite Taylor coefficient for " + std::string(to_string(fn)));

  EP u = a;
  u.c[0] = 0.0;
  EP o;
  o.c[0] = f[0];
  EP upow = u;
  for (int i = 1; i < k; ++i) {
    if (i > 1) upow = ep_mul(upow, u, ctx);
    if (f[static_cast<std::size_t>(i)] != 0.0) o = ep_add(o, ep_scale(upow, f[static_cast<std::size_t>(i)], ctx), ctx);
  }
  // (p - z0)^k = eta^k w^k with w = c_1 + c_2 eta + ... + r eta^(k-1).
  std::vector<double> wc(a.c.begin() + 1, a.c.begin() + k);
  Interval wrange = poly_range(wc, 0.0, ctx.etabar);
  if (!a.r.is_zero()) {
    if (std::isinf(ctx.etabar)) throw UnboundedTrust("composition needs a bounded trust region");
    wrange += a.r * Interval(0.0, ctx.pow_up[static_cast<std::size_t>(k - 1)]);
  }
  if (!ig.is_zero()) o.r += ig * pow(wrange, k);
  return o;
}

EP ep_pow(const EP& a, int n, const Ctx& ctx) {
  EP one;
  one.c[0] = 1.0;
  if (n == 0) return one;
  EP acc = a;
  for (int i = 1; i < n; ++i) acc = ep_mul(acc, a, ctx);
  return acc;
}

// Tensor of enclosures stored as coefficient arrays; an empty array means
// all-zero, which keeps constants and exact linear terms cheap.
struct DTensor {
  Shape shape;
  std::size_t n = 0;
  std::vector<std::vector<double>> c;  // k arrays
  std::vector<double> rlo, rhi;

  DTensor(Shape s, int k) : shape(std::move(s)), n(numel(shape)), c(static_cast<std::size_t>(k)) {}

  bool has_rem() const { return !rlo.empty(); }
  bool is_constant() const {
    for (std::size_t i = 1; i < c.size(); ++i)
      if (!c[i].empty()) return false;
    return !has_rem();
  }
  std::vector<double>& coeff(std::size_t i) {
    if (c[i].empty()) c[i].assign(n, 0.0);
    return c[i];
  }
  void ensure_rem() {
    if (rlo.empty()) {
      rlo.assign(n, 0.0);
      rhi.assign(n, 0.0);
    }
  }
  EP get(std::size_t i) const {
    EP e;
    for (std::size_t j = 0; j < c.size(); ++j)
      if (!c[j].empty()) e.c[j] = c[j][i];
    if (has_rem()) e.r = Interval(rlo[i], rhi[i]);
    return e;
  }
  void put(std::size_t i, const EP& e) {
    for (std::size_t j = 0; j < c.size(); ++j)
      if (e.c[j] != 0.0 || !c[j].empty()) coeff(j)[i] = e.c[j];
    if (!e.r.is_zero() || has_rem()) {
      ensure_rem();
      rlo[i] = e.r.lo();
      rhi[i] = e.r.hi();
    }
  }
};

DTensor from_constant(const Tensor& t, int k) {
  DTensor d(t.shape(), k);
  d.c[0] = t.values();
  return d;
}

template <typename Op>
DTensor entrywise(const DTensor& a, const DTensor& b, const Shape& shape, const Ctx& ctx, Op op) {
  DTensor o(shape, ctx.k);
  for (std::size_t i = 0; i < o.n; ++i) o.put(i, op(a.get(bidx(a.n, i)), b.get(bidx(b.n, i))));
  return o;
}

DTensor add_sub(const DTensor& a, const DTensor& b, const Shape& shape, const Ctx& ctx, double sign) {
  DTensor o(shape, ctx.k);
  for (std::size_t j = 0; j < o.c.size(); ++j) {
    if (a.c[j].empty() && b.c[j].empty()) continue;
    std::vector<double>& dst = o.coeff(j);
    for (std::size_t i = 0; i < o.n; ++i) {
      const double x = a.c[j].empty() ? 0.0 : a.c[j][bidx(a.n, i)];
      const double y = b.c[j].empty() ? 0.0 : b.c[j][bidx(b.n, i)];
      dst[i] = x + sign * y;
    }
  }
  if (a.has_rem() || b.has_rem()) {
    o.ensure_rem();
    for (std::size_t i = 0; i < o.n; ++i) {
      const Interval x = a.has_rem() ? Interval(a.rlo[bidx(a.n, i)], a.rhi[bidx(a.n, i)]) : Interval(0.0);
      Interval y = b.has_rem() ? Interval(b.rlo[bidx(b.n, i)], b.rhi[bidx(b.n, i)]) : Interval(0.0);
      if (sign < 0) y = -y;
      const Interval s = x + y;
      o.rlo[i] = s.lo();
      o.rhi[i] = s.hi();
    }
  }
  return o;
}

// Constant tensor `s` times enclosure tensor `p`, elementwise with broadcasting.
DTensor scale_by_constant(const std::vector<double>& s, const DTensor& p, const Shape& shape, const Ctx& ctx) {
  DTensor o(shape, ctx.k);
  for (std::size_t j = 0; j < o.c.size(); ++j) {
    if (p.c[j].empty()) continue;
    std::vector<double>& dst = o.coeff(j);
    for (std::size_t i = 0; i < o.n; ++i) dst[i] = s[bidx(s.size(), i)] * p.c[j][bidx(p.n, i)];
  }
  if (p.has_rem()) {
    o.ensure_rem();
    for (std::size_t i = 0; i < o.n; ++i) {
      const Interval v = scale(Interval(p.rlo[bidx(p.n, i)], p.rhi[bidx(p.n, i)]), s[bidx(s.size(), i)]);
      o.rlo[i] = v.lo();
      o.rhi[i] = v.hi();
    }
  }
  return o;
}

DTensor matmul(const DTensor& a, const DTensor& b, const Shape& shape, const Ctx& ctx) {
  const MatDims d = detail::matmul_dims(a.shape, b.shape);
  DTensor o(shape, ctx.k);
  if (a.is_constant()) {
    for (std::size_t j = 0; j < o.c.size(); ++j) {
      if (b.c[j].empty()) continue;
      detail::real_matmul(a.c[0].data(), b.c[j].data(), o.coeff(j).data(), d);
    }
    if (b.has_rem()) {
      o.ensure_rem();
      detail::interval_matmul_left(a.c[0].data(), b.rlo.data(), b.rhi.data(), o.rlo.data(), o.rhi.data(), d);
    }
    return o;
  }
  if (b.is_constant()) {
    for (std::size_t j = 0; j < o.c.size(); ++j) {
      if (a.c[j].empty()) continue;
      detail::real_matmul(a.c[j].data(), b.c[0].data(), o.coeff(j).data(), d);
    }
    if (a.has_rem()) {
      o.ensure_rem();
      detail::interval_matmul_right(a.rlo.data(), a.rhi.data(), b.c[0].data(), o.rlo.data(), o.rhi.data(), d);
    }
    return o;
  }
  std::vector<EP> bcol(d.k);
  for (std::size_t j = 0; j < d.n; ++j) {
    for (std::size_t p = 0; p < d.k; ++p) bcol[p] = b.get(p * d.n + j);
    for (std::size_t i = 0; i < d.m; ++i) {
      EP acc;
      for (std::size_t p = 0; p < d.k; ++p) acc = ep_add(acc, ep_mul(a.get(i * d.k + p), bcol[p], ctx), ctx);
      o.put(i * d.n + j, acc);
    }
  }
  return o;
}

DTensor reduce_sum(const DTensor& a, const Ctx& ctx) {
  DTensor o(Shape{}, ctx.k);
  for (std::size_t j = 0; j < o.c.size(); ++j) {
    if (a.c[j].empty()) continue;
    double s = 0.0;
    for (double v : a.c[j]) s += v;
    o.coeff(j)[0] = s;
  }
  if (a.has_rem()) {
    double lo = 0.0, hi = 0.0;
    for (std::size_t i = 0; i < a.n; ++i) {
      lo = add_down(lo, a.rlo[i]);
      hi = add_up(hi, a.rhi[i]);
    }
    o.ensure_rem();
    o.rlo[0] = lo;
    o.rhi[0] = hi;
  }
  return o;
}

DirectionalPoly to_dpoly(const EP& e, const Ctx& ctx) {
  DirectionalPoly p;
  p.k = ctx.k;
  p.coeffs.assign(e.c.begin(), e.c.begin() + ctx.k);
  p.remainder = e.r;
  p.etabar = ctx.etabar;
  return p;
}

EP from_dpoly(const DirectionalPoly& p) {
  check_degree(p.k);
  if (p.coeffs.size() != static_cast<std::size_t>(p.k)) throw DegreeMismatch("coefficient count differs from degree");
  EP e;
  std::copy(p.coeffs.begin(), p.coeffs.end(), e.c.begin());
  e.r = p.remainder;
  return e;
}

Ctx ctx_of(const DirectionalPoly& p, RemainderMethod m = RemainderMethod::Sharp) {
  if (!(p.etabar >= 0.0)) throw DomainError("trust region end must be non-negative");
  return Ctx(p.k, p.etabar, m);
}

void check_compatible(const DirectionalPoly& p, const DirectionalPoly& q) {
  if (p.k != q.k) throw DegreeMismatch("enclosures of different degree");
  if (p.etabar != q.etabar) throw DegreeMismatch("enclosures over different trust regions");
}

}  // namespace

DirectionalPoly dpoly_constant(double c, int k, double etabar) {
  check_degree(k);
  DirectionalPoly p;
  p.k = k;
  p.coeffs.assign(static_cast<std::size_t>(k), 0.0);
  p.coeffs[0] = c;
  p.etabar = etabar;
  return p;
}

DirectionalPoly dpoly_identity(int k, double etabar) {
  DirectionalPoly p = dpoly_constant(0.0, k, etabar);
  p.coeffs[1] = 1.0;
  return p;
}

DirectionalPoly dpoly_add(const DirectionalPoly& p, const DirectionalPoly& q) {
  check_compatible(p, q);
  const Ctx ctx = ctx_of(p);
  return to_dpoly(ep_add(from_dpoly(p), from_dpoly(q), ctx), ctx);
}

DirectionalPoly dpoly_sub(const DirectionalPoly& p, const DirectionalPoly& q) {
  check_compatible(p, q);
  const Ctx ctx = ctx_of(p);
  return to_dpoly(ep_sub(from_dpoly(p), from_dpoly(q), ctx), ctx);
}

DirectionalPoly dpoly_scale(const DirectionalPoly& p, double c) {
  const Ctx ctx = ctx_of(p);
  return to_dpoly(ep_scale(from_dpoly(p), c, ctx), ctx);
}

DirectionalPoly dpoly_mul(const DirectionalPoly& p, const DirectionalPoly& q) {
  check_compatible(p, q);
  const Ctx ctx = ctx_of(p);
  return to_dpoly(ep_mul(from_dpoly(p), from_dpoly(q), ctx), ctx);
}

DirectionalPoly dpoly_compose_elementary(Elementary fn, const DirectionalPoly& p, RemainderMethod method) {
  const Ctx ctx = ctx_of(p, method);
  return to_dpoly(ep_compose(fn, from_dpoly(p), ctx), ctx);
}

Interval range_bound(const DirectionalPoly& p, const Interval& sub) {
  const Ctx ctx = ctx_of(p);
  if (sub.lo() < 0.0 || sub.hi() > p.etabar) throw DomainError("range_bound: sub-interval outside the trust region");
  return ep_range(from_dpoly(p), ctx, sub.lo(), sub.hi());
}

RealPoly upper_poly(const DirectionalPoly& p) {
  std::vector<double> c = p.coeffs;
  c.push_back(p.remainder.hi());
  return RealPoly(std::move(c));
}

RealPoly lower_poly(const DirectionalPoly& p) {
  std::vector<double> c = p.coeffs;
  c.push_back(p.remainder.lo());
  return RealPoly(std::move(c));
}

DirectionalPoly propagate_directional(const ExprGraph& g, double etabar, int k, RemainderMethod method) {
  check_degree(k);
  if (!(etabar >= 0.0)) throw DomainError("trust region end must be non-negative");
  const Ctx ctx(k, etabar, method);
  const std::size_t last = static_cast<std::size_t>(g.output());
  std::vector<std::optional<DTensor>> val(last + 1);
  std::string var_name;

  for (std::size_t id = 0; id <= last; ++id) {
    const Node& n = g.nodes()[id];
    auto in = [&](int i) -> const DTensor& { return *val[static_cast<std::size_t>(n.inputs[static_cast<std::size_t>(i)])]; };
    switch (n.kind) {
      case OpKind::Constant: val[id] = from_constant(n.value, k); break;
      case OpKind::Variable: {
        if (!var_name.empty() && var_name != n.name) throw UnboundVariable("directional propagation needs exactly one variable");
        if (numel(n.shape) != 1) throw ShapeError("directional propagation needs a scalar variable");
        var_name = n.name;
        DTensor d(n.shape, k);
        d.coeff(0)[0] = 0.0;
        d.coeff(1)[0] = 1.0;
        val[id] = std::move(d);
        break;
      }
      case OpKind::Add: val[id] = add_sub(in(0), in(1), n.shape, ctx, 1.0); break;
      case OpKind::Sub: val[id] = add_sub(in(0), in(1), n.shape, ctx, -1.0); break;
      case OpKind::Mul: {
        const DTensor& a = in(0);
        const DTensor& b = in(1);
        if (a.is_constant()) {
          val[id] = scale_by_constant(a.c[0].empty() ? std::vector<double>(a.n, 0.0) : a.c[0], b, n.shape, ctx);
        } else if (b.is_constant()) {
          val[id] = scale_by_constant(b.c[0].empty() ? std::vector<double>(b.n, 0.0) : b.c[0], a, n.shape, ctx);
        } else {
          val[id] = entrywise(a, b, n.shape, ctx, [&](const EP& x, const EP& y) { return ep_mul(x, y, ctx); });
        }
        break;
      }
      case OpKind::MatMul: {
        const DTensor& a = in(0);
        const DTensor& b = in(1);
        DTensor a2 = a, b2 = b;
        if (a2.c[0].empty()) a2.coeff(0);
        if (b2.c[0].empty()) b2.coeff(0);
        val[id] = matmul(a2, b2, n.shape, ctx);
        break;
      }
      case OpKind::Sum: val[id] = reduce_sum(in(0), ctx); break;
      case OpKind::Unary: {
        const DTensor& a = in(0);
        DTensor o(n.shape, k);
        if (a.is_constant()) {
          std::vector<double>& dst = o.coeff(0);
          for (std::size_t i = 0; i < o.n; ++i) dst[i] = evaluate(n.fn, a.c[0].empty() ? 0.0 : a.c[0][i]);
        } else {
          for (std::size_t i = 0; i < o.n; ++i) o.put(i, ep_compose(n.fn, a.get(i), ctx));
        }
        val[id] = std::move(o);
        break;
      }
      case OpKind::IntPow: {
        const DTensor& a = in(0);
        DTensor o(n.shape, k);
        for (std::size_t i = 0; i < o.n; ++i) o.put(i, ep_pow(a.get(i), n.exponent, ctx));
        if (o.c[0].empty()) o.coeff(0);
        val[id] = std::move(o);
        break;
      }
    }
  }
  DTensor& out = *val[last];
  DirectionalPoly p = to_dpoly(out.get(0), ctx);
  if (std::isinf(etabar) && !p.remainder.is_bounded()) throw UnboundedTrust("enclosure remainder is unbounded");
  return p;
}

}  // namespace umm
