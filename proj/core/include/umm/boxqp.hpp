#pragma once

#include <cstddef>
#include <vector>

namespace umm {

// f(x) = 1/2 x^T A x - b^T x over lo <= x <= hi. A is symmetrized on
// construction and need not be positive semidefinite; 0 must be feasible.
class BoxQP {
 public:
  // A is d x d, row-major.
  BoxQP(std::vector<double> A, std::vector<double> b, std::vector<double> lo, std::vector<double> hi);

  std::size_t dim() const { return b_.size(); }
  double A(std::size_t i, std::size_t j) const { return A_[i * dim() + j]; }
  const std::vector<double>& b() const { return b_; }
  const std::vector<double>& lo() const { return lo_; }
  const std::vector<double>& hi() const { return hi_; }

  double objective(const std::vector<double>& x) const;
  std::vector<double> gradient(const std::vector<double>& x) const;  // A x - b

 private:
  std::vector<double> A_, b_, lo_, hi_;
};

// Iterates and search directions of the conjugate-direction method, for
// inspection by tests.
struct ConjugateTrace {
  std::vector<std::vector<double>> iterates;    // x_1 .. x_m
  std::vector<std::vector<double>> directions;  // p_1 .. p_m
  std::vector<double> steps;                    // alpha_1 .. alpha_m
  bool any_clipped = false;                     // some alpha_i hit its feasible-interval end
};

// Conjugate-gradient recurrence from x_0 = 0 where each step length is the
// exact minimizer of f along p_i within the box. At most d steps; stops early
// once the residual vanishes. Objective values are non-increasing and <= 0.
std::vector<double> conjugate_box_min(const BoxQP& q, ConjugateTrace* trace = nullptr);

// One pass of exact coordinate minimization, coordinates in order 0..d-1.
std::vector<double> cyclic_cd_pass(const BoxQP& q, std::vector<double> x);

// cyclic_cd_pass(conjugate_box_min(q)).
std::vector<double> minimize_box_qp(const BoxQP& q);

}  // namespace umm
