#pragma once

// Helpers shared by the directional and quadratic propagators.

#include <cstddef>
#include <vector>

#include "umm/interval.hpp"

namespace umm::detail {

struct MatDims {
  std::size_t m = 0, k = 0, n = 0;
};

MatDims matmul_dims(const Shape& a, const Shape& b);

// out[m, n] = sum_p a[m, p] b[p, n] in plain floating point.
void real_matmul(const double* a, const double* b, double* out, const MatDims& d);

// Outward-rounded [lo, hi] = a (real, m x k) times [blo, bhi] (k x n).
void interval_matmul_left(const double* a, const double* blo, const double* bhi, double* lo, double* hi,
                          const MatDims& d);
// Outward-rounded [lo, hi] = [alo, ahi] (m x k) times b (real, k x n).
void interval_matmul_right(const double* alo, const double* ahi, const double* b, double* lo, double* hi,
                           const MatDims& d);

// x^n rounded up, x >= 0 (inf stays inf).
double pow_up_nonneg(double x, int n);
double pow_down_nonneg(double x, int n);

inline std::size_t bidx(std::size_t size, std::size_t i) { return size == 1 ? 0 : i; }

}  // namespace umm::detail
