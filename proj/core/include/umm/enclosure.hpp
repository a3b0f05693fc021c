#pragma once

#include <string_view>
#include <vector>

#include "umm/elementary.hpp"
#include "umm/expr.hpp"
#include "umm/interval.hpp"
#include "umm/polymin.hpp"

namespace umm {

// How the Taylor remainder of an elementary function is bounded.
//   Lagrange: interval range of f^(k)/k! over the input range.
//   Sharp:    range of the scaled remainder (f(z) - T_{k-1}(z)) / (z - z0)^k,
//             taken from its endpoint values on each side of z0 where f^(k) is
//             monotone there (the scaled remainder is then monotone too), and
//             from the one-sided Lagrange range otherwise. Always a subset of
//             the Lagrange result.
enum class RemainderMethod { Lagrange, Sharp };

std::string_view to_string(RemainderMethod m);
RemainderMethod remainder_method_from_string(std::string_view name);

inline constexpr int kMinDegree = 2;
inline constexpr int kMaxDegree = 6;

// Interval I with f(z) in T_{k-1}(z; z0) + I (z - z0)^k for all z in zrange.
// zrange may be unbounded. Throws DomainError if z0 is outside zrange or zrange
// leaves f's domain, UnsupportedDegree unless 2 <= k <= 6.
Interval elementary_remainder(Elementary fn, double z0, const Interval& zrange, int k, RemainderMethod method);

// f^(i)(z0) / i! for i = 0..k-1.
std::vector<double> taylor_coefficients(Elementary fn, double z0, int k);

// Enclosure of a univariate h on [0, etabar]:
//   h(eta) in sum_{i<k} coeffs[i] eta^i + remainder * eta^k.
// The real coefficients are plain floating-point values; the remainder is
// outward rounded.
struct DirectionalPoly {
  int k = 2;
  std::vector<double> coeffs;  // size k
  Interval remainder;
  double etabar = 1.0;         // trust region [0, etabar], may be +inf

  double value_at_center() const { return coeffs.front(); }
};

DirectionalPoly dpoly_constant(double c, int k, double etabar);
// The exact polynomial eta.
DirectionalPoly dpoly_identity(int k, double etabar);

DirectionalPoly dpoly_add(const DirectionalPoly& p, const DirectionalPoly& q);
DirectionalPoly dpoly_sub(const DirectionalPoly& p, const DirectionalPoly& q);
DirectionalPoly dpoly_scale(const DirectionalPoly& p, double c);
// Product truncated back to degree k; terms of degree j > k are absorbed into
// the remainder using the range [0, etabar^(j-k)]. UnboundedTrust if that
// needs an infinite range with a non-zero coefficient.
DirectionalPoly dpoly_mul(const DirectionalPoly& p, const DirectionalPoly& q);
DirectionalPoly dpoly_compose_elementary(Elementary fn, const DirectionalPoly& p, RemainderMethod method);

// Range of the enclosure over sub (a subset of the trust region).
Interval range_bound(const DirectionalPoly& p, const Interval& sub);

// Majorizer and minorizer: remainder replaced by its upper / lower endpoint.
RealPoly upper_poly(const DirectionalPoly& p);
RealPoly lower_poly(const DirectionalPoly& p);

// Range of a real polynomial over [lo, hi] (hi may be +inf), from the endpoint
// values and every critical point, widened for evaluation error.
Interval poly_range(const std::vector<double>& coeffs, double lo, double hi);

// Enclosure of the graph output as a polynomial in its single scalar variable
// over [0, etabar]. Throws UnboundedTrust if etabar is infinite and a bounded
// range was needed, or the final remainder is unbounded.
DirectionalPoly propagate_directional(const ExprGraph& g, double etabar, int k, RemainderMethod method);

// Enclosure of f(x0 + U eta) on the box [0, etabar]:
//   c0 + c1^T eta + eta^T Q eta with Q in [qlo, qhi] (symmetric, d x d, row-major).
struct QuadEnclosure {
  std::size_t d = 0;
  double c0 = 0.0;
  std::vector<double> c1;
  std::vector<double> qlo, qhi;
  std::vector<double> etabar;

  Interval q(std::size_t i, std::size_t j) const { return Interval(qlo[i * d + j], qhi[i * d + j]); }
  // Upper / lower bound value at eta (eta >= 0 elementwise).
  double upper(const std::vector<double>& eta) const;
  double lower(const std::vector<double>& eta) const;
};

// The graph's single variable must be a vector of length etabar.size();
// every etabar entry must be finite and non-negative.
QuadEnclosure propagate_quadratic(const ExprGraph& g, const std::vector<double>& etabar, RemainderMethod method);

}  // namespace umm
