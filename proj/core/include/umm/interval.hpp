#pragma once

#include <cfloat>
#include <cmath>
#include <limits>
#include <string>

#include "umm/elementary.hpp"
#include "umm/tensor.hpp"

namespace umm {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// Closed real interval [lo, hi]. Endpoints may be infinite but never NaN.
//
// Arithmetic is conservative: each endpoint is rounded outward by one ulp
// whenever the floating-point result of the primitive is inexact (detected
// with error-free transforms), so results always contain the exact set.
// Products use the convention 0 * inf = 0.
class Interval {
 public:
  constexpr Interval() = default;
  explicit Interval(double point) : Interval(point, point) {}
  Interval(double lo, double hi) : lo_(lo), hi_(hi) {
    if (!(lo <= hi)) invalid(lo, hi);
  }

  double lo() const { return lo_; }
  double hi() const { return hi_; }
  double width() const { return hi_ - lo_; }
  double mid() const;
  double mag() const;  // max(|lo|, |hi|)

  bool is_point() const { return lo_ == hi_; }
  bool is_zero() const { return lo_ == 0.0 && hi_ == 0.0; }
  bool is_bounded() const;
  bool contains(double x) const { return lo_ <= x && x <= hi_; }
  bool contains(const Interval& other) const { return lo_ <= other.lo_ && other.hi_ <= hi_; }

  bool operator==(const Interval&) const = default;

  static Interval entire() { return Interval(-kInf, kInf); }

 private:
  [[noreturn]] static void invalid(double lo, double hi);

  double lo_ = 0.0;
  double hi_ = 0.0;
};

std::string to_string(const Interval& i);

Interval operator+(const Interval& a, const Interval& b);
Interval operator-(const Interval& a, const Interval& b);
Interval operator-(const Interval& a);
Interval operator*(const Interval& a, const Interval& b);
inline Interval& operator+=(Interval& a, const Interval& b) { return a = a + b; }

// Footnote-style scalar product: [min(lo z, hi z), max(lo z, hi z)].
Interval scale(const Interval& i, double z);
Interval hull(const Interval& a, const Interval& b);
Interval hull(const Interval& a, double x);
// Intersection; throws DomainError when empty.
Interval intersect(const Interval& a, const Interval& b);
// x^2 with a non-negative lower end when the interval straddles zero.
Interval sqr(const Interval& a);
// Integer power n >= 0 with even/odd handling.
Interval pow(const Interval& a, int n);
// Image under a monotone elementary function; DomainError outside the domain.
Interval monotone_image(const Interval& i, Elementary fn);

// Outward-rounded scalar primitives, usable on their own.
inline double next_down(double x) { return x == -kInf ? x : std::nextafter(x, -kInf); }
inline double next_up(double x) { return x == kInf ? x : std::nextafter(x, kInf); }

// Directed rounding via error-free transforms: TwoSum for addition and FMA
// for multiplication give the exact sign of the rounding error, so an
// endpoint is nudged only when the rounded result is on the wrong side.
inline double add_down(double a, double b) {
  const double s = a + b;
  if (std::isnan(s)) return -kInf;
  if (std::isinf(s)) return (std::isfinite(a) && std::isfinite(b) && s > 0) ? DBL_MAX : s;
  const double bb = s - a;
  const double err = (a - (s - bb)) + (b - bb);
  return err < 0.0 ? next_down(s) : s;
}

inline double add_up(double a, double b) {
  const double s = a + b;
  if (std::isnan(s)) return kInf;
  if (std::isinf(s)) return (std::isfinite(a) && std::isfinite(b) && s < 0) ? -DBL_MAX : s;
  const double bb = s - a;
  const double err = (a - (s - bb)) + (b - bb);
  return err > 0.0 ? next_up(s) : s;
}

inline double mul_down(double a, double b) {
  if (a == 0.0 || b == 0.0) return 0.0;
  const double p = a * b;
  if (std::isinf(p)) return (std::isfinite(a) && std::isfinite(b) && p > 0) ? DBL_MAX : p;
  if (std::abs(p) < DBL_MIN) return next_down(p);
  const double err = std::fma(a, b, -p);
  return err < 0.0 ? next_down(p) : p;
}

inline double mul_up(double a, double b) {
  if (a == 0.0 || b == 0.0) return 0.0;
  const double p = a * b;
  if (std::isinf(p)) return (std::isfinite(a) && std::isfinite(b) && p < 0) ? -DBL_MAX : p;
  if (std::abs(p) < DBL_MIN) return next_up(p);
  const double err = std::fma(a, b, -p);
  return err > 0.0 ? next_up(p) : p;
}

// Elementwise interval over equal-shape tensors.
class TensorInterval {
 public:
  TensorInterval() = default;
  TensorInterval(Tensor lo, Tensor hi);
  // Degenerate tensor interval [t, t].
  explicit TensorInterval(const Tensor& t) : TensorInterval(t, t) {}

  const Tensor& lo() const { return lo_; }
  const Tensor& hi() const { return hi_; }
  const Shape& shape() const { return lo_.shape(); }
  std::size_t rank() const { return lo_.rank(); }
  std::size_t size() const { return lo_.size(); }
  Interval operator[](std::size_t i) const { return Interval(lo_[i], hi_[i]); }
  void set(std::size_t i, const Interval& v);

 private:
  Tensor lo_;
  Tensor hi_;
};

// Inner product of a tensor interval with a real tensor over the trailing axes.
TensorInterval inner(const TensorInterval& a, const Tensor& b);

}  // namespace umm
