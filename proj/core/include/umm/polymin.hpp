#pragma once

#include <complex>
#include <vector>

namespace umm {

// Real polynomial c_0 + c_1 x + ... + c_k x^k. The leading coefficient may
// have either sign.
class RealPoly {
 public:
  RealPoly() = default;
  explicit RealPoly(std::vector<double> coeffs);

  const std::vector<double>& coeffs() const { return coeffs_; }
  double coeff(std::size_t i) const { return i < coeffs_.size() ? coeffs_[i] : 0.0; }
  // Index of the highest non-zero coefficient, -1 for the zero polynomial.
  int degree() const;
  // Degree after dropping leading coefficients with |c| <= rel_tol * max|c|.
  int effective_degree(double rel_tol = 1e-14) const;

  double operator()(double x) const;
  RealPoly derivative() const;

 private:
  std::vector<double> coeffs_;
};

struct PolyMinimum {
  double argmin = 0.0;
  double value = 0.0;
};

// Closed-form minimum of c_0 + c_1 x + c_2 x^2 over [lo, hi]. hi may be +inf
// when the quadratic is bounded below on the ray; otherwise UnboundedTrust.
PolyMinimum minimize_quadratic_on_interval(const RealPoly& p, double lo, double hi);

// Eigenvalues of the companion matrix (Hessenberg QR with Wilkinson shifts).
std::vector<std::complex<double>> companion_eigenvalues(const RealPoly& p);

// Real roots: eigenvalues with small imaginary part, deduplicated and
// Newton-polished. DegenerateInput for the zero polynomial.
std::vector<double> poly_roots(const RealPoly& p);

// Global minimum over [lo, hi] (finite): endpoints plus critical points.
// Ties resolve toward the smaller argument.
PolyMinimum minimize_poly_on_interval(const RealPoly& p, double lo, double hi);

}  // namespace umm
