#include "umm/polymin.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "umm/errors.hpp"

namespace umm {

namespace {

using cplx = std::complex<double>;
constexpr double kEps = std::numeric_limits<double>::epsilon();

// Parlett-Reinsch diagonal balancing; improves eigenvalue accuracy for
// companion matrices whose coefficients span many orders of magnitude.
void balance(std::vector<std::vector<cplx>>& a) {
  const std::size_t n = a.size();
  constexpr double radix = 2.0;
  constexpr double sqrdx = radix * radix;
  bool done = false;
  while (!done) {
    done = true;
    for (std::size_t i = 0; i < n; ++i) {
      double r = 0.0, c = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        if (j == i) continue;
        c += std::abs(a[j][i]);
        r += std::abs(a[i][j]);
      }
      if (c == 0.0 || r == 0.0) continue;
      double g = r / radix;
      double f = 1.0;
      const double s = c + r;
      while (c < g) {
        f *= radix;
        c *= sqrdx;
      }
      g = r * radix;
      while (c > g) {
        f /= radix;
        c /= sqrdx;
      }
      if ((c + r) / f < 0.95 * s) {
        done = false;
        const double ginv = 1.0 / f;
        for (std::size_t j = 0; j < n; ++j) a[i][j] *= ginv;
        for (std::size_t j = 0; j < n; ++j) a[j][i] *= f;
      }
    }
  }
}

// Eigenvalues of an upper Hessenberg matrix via single-shift complex QR with
// Wilkinson shifts, deflating from the bottom.
std::vector<cplx> hessenberg_eigenvalues(std::vector<std::vector<cplx>> h) {
  const int n = static_cast<int>(h.size());
  std::vector<cplx> eig;
  eig.reserve(static_cast<std::size_t>(n));
  double norm = 0.0;
  for (const auto& row : h)
    for (const cplx& v : row) norm = std::max(norm, std::abs(v));
  if (norm == 0.0) norm = 1.0;

  int hi = n - 1;
  int its = 0;
  std::vector<double> cs(static_cast<std::size_t>(n));
  std::vector<cplx> sn(static_cast<std::size_t>(n));
  while (hi >= 0) {
    if (hi == 0) {
      eig.push_back(h[0][0]);
      break;
    }
    int l = hi;
    while (l > 0) {
      double s = std::abs(h[l - 1][l - 1]) + std::abs(h[l][l]);
      if (s == 0.0) s = norm;
      if (std::abs(h[l][l - 1]) <= kEps * s) break;
      --l;
    }
    if (l > 0) h[l][l - 1] = 0.0;
    if (l == hi) {
      eig.push_back(h[hi][hi]);
      --hi;
      its = 0;
      continue;
    }
    if (++its > 200 * n) throw DegenerateInput("companion QR iteration did not converge");

    const cplx a = h[hi - 1][hi - 1], b = h[hi - 1][hi], c = h[hi][hi - 1], d = h[hi][hi];
    cplx mu;
    if (its % 12 == 11) {
      // exceptional shift to break cycles
      mu = d + cplx(std::abs(c.real()) + std::abs(c.imag()), 0.0) * 0.75;
    } else {
      const cplx half_tr = 0.5 * (a + d);
      const cplx disc = std::sqrt(0.25 * (a - d) * (a - d) + b * c);
      const cplx mu1 = half_tr + disc, mu2 = half_tr - disc;
      mu = std::abs(mu1 - d) < std::abs(mu2 - d) ? mu1 : mu2;
    }

    for (int i = l; i <= hi; ++i) h[i][i] -= mu;
    for (int i = l; i < hi; ++i) {
      const cplx x = h[i][i], y = h[i + 1][i];
      const double r = std::hypot(std::abs(x), std::abs(y));
      double cr;
      cplx s;
      if (r == 0.0) {
        cr = 1.0;
        s = 0.0;
      } else if (std::abs(x) == 0.0) {
        cr = 0.0;
        s = std::conj(y) / r;
      } else {
        cr = std::abs(x) / r;
        s = (x / std::abs(x)) * std::conj(y) / r;
      }
      cs[static_cast<std::size_t>(i)] = cr;
      sn[static_cast<std::size_t>(i)] = s;
      for (int j = i; j <= hi; ++j) {
        const cplx t1 = h[i][j], t2 = h[i + 1][j];
        h[i][j] = cr * t1 + s * t2;
        h[i + 1][j] = -std::conj(s) * t1 + cr * t2;
      }
    }
    for (int i = l; i < hi; ++i) {
      const double cr = cs[static_cast<std::size_t>(i)];
      const cplx s = sn[static_cast<std::size_t>(i)];
      for (int r = l; r <= std::min(i + 1, hi); ++r) {
        const cplx t1 = h[r][i], t2 = h[r][i + 1];
        h[r][i] = cr * t1 + std::conj(s) * t2;
        h[r][i + 1] = -s * t1 + cr * t2;
      }
    }
    for (int i = l; i <= hi; ++i) h[i][i] += mu;
  }
  return eig;
}

double newton_polish(const RealPoly& p, const RealPoly& dp, double x, int iterations) {
  for (int it = 0; it < iterations; ++it) {
    const double d = dp(x);
    if (d == 0.0 || !std::isfinite(d)) break;
    const double next = x - p(x) / d;
    if (!std::isfinite(next) || std::abs(p(next)) > std::abs(p(x))) break;
    x = next;
  }
  return x;
}

// Coefficients of q(u) = p(lo + w u).
RealPoly shifted_scaled(const RealPoly& p, double lo, double w) {
  const int n = p.degree();
  if (n < 0) return RealPoly({0.0});
  // Taylor shift by repeated synthetic division.
  std::vector<double> c(p.coeffs().begin(), p.coeffs().begin() + n + 1);
  for (int i = 0; i < n; ++i)
    for (int j = n - 1; j >= i; --j) c[static_cast<std::size_t>(j)] += lo * c[static_cast<std::size_t>(j) + 1];
  double scale = 1.0;
  for (int i = 0; i <= n; ++i) {
    c[static_cast<std::size_t>(i)] *= scale;
    scale *= w;
  }
  return RealPoly(std::move(c));
}

}  // namespace

RealPoly::RealPoly(std::vector<double> coeffs) : coeffs_(std::move(coeffs)) {}

int RealPoly::degree() const {
  for (int i = static_cast<int>(coeffs_.size()) - 1; i >= 0; --i)
    if (coeffs_[static_cast<std::size_t>(i)] != 0.0) return i;
  return -1;
}

int RealPoly::effective_degree(double rel_tol) const {
  double mx = 0.0;
  for (double c : coeffs_) mx = std::max(mx, std::abs(c));
  if (mx == 0.0) return -1;
  for (int i = static_cast<int>(coeffs_.size()) - 1; i >= 0; --i)
    if (std::abs(coeffs_[static_cast<std::size_t>(i)]) > rel_tol * mx) return i;
  return -1;
}

double RealPoly::operator()(double x) const {
  double acc = 0.0;
  for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) acc = acc * x + *it;
  return acc;
}

RealPoly RealPoly::derivative() const {
  if (coeffs_.size() <= 1) return RealPoly({0.0});
  std::vector<double> d(coeffs_.size() - 1);
  for (std::size_t i = 1; i < coeffs_.size(); ++i) d[i - 1] = static_cast<double>(i) * coeffs_[i];
  return RealPoly(std::move(d));
}

PolyMinimum minimize_quadratic_on_interval(const RealPoly& p, double lo, double hi) {
  if (!(lo <= hi)) throw DomainError("minimize_quadratic_on_interval: lo > hi");
  const double c0 = p.coeff(0), c1 = p.coeff(1), c2 = p.coeff(2);
  for (std::size_t i = 3; i < p.coeffs().size(); ++i)
    if (p.coeffs()[i] != 0.0) throw DegreeMismatch("minimize_quadratic_on_interval: degree > 2");
  auto value = [&](double x) { return c0 + x * (c1 + x * c2); };
  if (c2 > 0.0) {
    const double x = std::clamp(-c1 / (2.0 * c2), lo, hi);
    return {x, value(x)};
  }
  if (std::isinf(hi)) {
    if (c2 < 0.0 || c1 < 0.0) throw UnboundedTrust("quadratic is unbounded below on an infinite interval");
    return {lo, value(lo)};
  }
  const double vlo = value(lo), vhi = value(hi);
  if (vhi < vlo) return {hi, vhi};
  return {lo, vlo};
}

std::vector<cplx> companion_eigenvalues(const RealPoly& p) {
  const int n = p.effective_degree();
  if (n < 0) throw DegenerateInput("poly_roots: zero polynomial");
  if (n == 0) return {};
  const double lead = p.coeff(static_cast<std::size_t>(n));
  std::vector<std::vector<cplx>> h(static_cast<std::size_t>(n), std::vector<cplx>(static_cast<std::size_t>(n)));
  for (int j = 0; j < n; ++j) h[0][static_cast<std::size_t>(j)] = -p.coeff(static_cast<std::size_t>(n - 1 - j)) / lead;
  for (int i = 1; i < n; ++i) h[static_cast<std::size_t>(i)][static_cast<std::size_t>(i - 1)] = 1.0;
  balance(h);
  return hessenberg_eigenvalues(std::move(h));
}

std::vector<double> poly_roots(const RealPoly& p) {
  const std::vector<cplx> eig = companion_eigenvalues(p);
  double scale = 1.0;
  for (const cplx& z : eig) scale = std::max(scale, std::abs(z));
  const RealPoly dp = p.derivative();
  std::vector<double> roots;
  for (const cplx& z : eig) {
    if (std::abs(z.imag()) <= 1e-8 * scale) roots.push_back(newton_polish(p, dp, z.real(), 2));
  }
  std::sort(roots.begin(), roots.end());
  std::vector<double> unique;
  for (double r : roots) {
    if (unique.empty() || std::abs(r - unique.back()) > 1e-10 * scale) unique.push_back(r);
  }
  return unique;
}

PolyMinimum minimize_poly_on_interval(const RealPoly& p, double lo, double hi) {
  if (!(lo <= hi)) throw DomainError("minimize_poly_on_interval: lo > hi");
  if (p.degree() <= 2) {
    std::vector<double> c = p.coeffs();
    c.resize(3, 0.0);
    return minimize_quadratic_on_interval(RealPoly(std::move(c)), lo, hi);
  }
  if (!std::isfinite(lo) || !std::isfinite(hi)) throw UnboundedTrust("minimize_poly_on_interval needs a finite interval");

  std::vector<double> candidates{lo, hi};
  const double w = hi - lo;
  if (w > 0.0) {
    // Work in u in [0, 1] so coefficient magnitudes reflect the interval.
    const RealPoly q = shifted_scaled(p, lo, w);
    const RealPoly dq = q.derivative();
    if (dq.effective_degree() >= 1) {
      const RealPoly ddq = dq.derivative();
      // Real parts of every critical point; clustered multiple roots
      // have imaginary noise well above any fixed acceptance tolerance.
      for (const cplx& z : companion_eigenvalues(dq)) {
        double u = z.real();
        if (!(u >= -1e-12 && u <= 1.0 + 1e-12)) continue;
        u = newton_polish(dq, ddq, u, 3);
        candidates.push_back(std::clamp(lo + w * std::clamp(u, 0.0, 1.0), lo, hi));
      }
    }
  }
  std::sort(candidates.begin(), candidates.end());
  PolyMinimum best{candidates.front(), p(candidates.front())};
  for (double x : candidates) {
    const double v = p(x);
    if (v < best.value) best = {x, v};
  }
  return best;
}

}  // namespace umm
