#include "umm/interval.hpp"

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <sstream>

#include "umm/errors.hpp"

namespace umm {

void Interval::invalid(double lo, double hi) {
  if (std::isnan(lo) || std::isnan(hi)) throw DomainError("interval endpoint is NaN");
  throw DomainError("interval with lo > hi: [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
}

double Interval::mid() const {
  if (std::isinf(lo_) || std::isinf(hi_)) {
    if (lo_ == -kInf && hi_ == kInf) return 0.0;
    return std::isinf(lo_) ? lo_ : hi_;
  }
  return 0.5 * lo_ + 0.5 * hi_;
}

double Interval::mag() const { return std::max(std::abs(lo_), std::abs(hi_)); }

bool Interval::is_bounded() const { return std::isfinite(lo_) && std::isfinite(hi_); }

std::string to_string(const Interval& i) {
  std::ostringstream os;
  os.precision(17);
  os << '[' << i.lo() << ", " << i.hi() << ']';
  return os.str();
}

Interval operator+(const Interval& a, const Interval& b) {
  return Interval(add_down(a.lo(), b.lo()), add_up(a.hi(), b.hi()));
}

Interval operator-(const Interval& a) { return Interval(-a.hi(), -a.lo()); }

Interval operator-(const Interval& a, const Interval& b) { return a + (-b); }

Interval operator*(const Interval& a, const Interval& b) {
  const double p[4][2] = {{a.lo(), b.lo()}, {a.lo(), b.hi()}, {a.hi(), b.lo()}, {a.hi(), b.hi()}};
  double lo = kInf, hi = -kInf;
  for (const auto& pr : p) {
    lo = std::min(lo, mul_down(pr[0], pr[1]));
    hi = std::max(hi, mul_up(pr[0], pr[1]));
  }
  return Interval(lo, hi);
}

Interval scale(const Interval& i, double z) {
  if (!std::isfinite(z)) throw DomainError("scale: non-finite factor");
  return i * Interval(z);
}

Interval hull(const Interval& a, const Interval& b) {
  return Interval(std::min(a.lo(), b.lo()), std::max(a.hi(), b.hi()));
}

Interval hull(const Interval& a, double x) { return hull(a, Interval(x)); }

Interval intersect(const Interval& a, const Interval& b) {
  const double lo = std::max(a.lo(), b.lo());
  const double hi = std::min(a.hi(), b.hi());
  if (lo > hi) throw DomainError("empty interval intersection");
  return Interval(lo, hi);
}

Interval sqr(const Interval& a) {
  if (a.lo() >= 0.0) return Interval(mul_down(a.lo(), a.lo()), mul_up(a.hi(), a.hi()));
  if (a.hi() <= 0.0) return Interval(mul_down(a.hi(), a.hi()), mul_up(a.lo(), a.lo()));
  return Interval(0.0, std::max(mul_up(a.lo(), a.lo()), mul_up(a.hi(), a.hi())));
}

namespace {

// x >= 0
double pow_down(double x, int n) {
  double r = 1.0;
  for (int i = 0; i < n; ++i) r = mul_down(r, x);
  return r;
}

double pow_up(double x, int n) {
  double r = 1.0;
  for (int i = 0; i < n; ++i) r = mul_up(r, x);
  return r;
}

}  // namespace

Interval pow(const Interval& a, int n) {
  if (n < 0) throw DomainError("pow: negative exponent");
  if (n == 0) return Interval(1.0);
  if (n == 1) return a;
  if (n % 2 == 0) {
    double mlo, mhi;
    if (a.lo() >= 0.0) {
      mlo = a.lo();
      mhi = a.hi();
    } else if (a.hi() <= 0.0) {
      mlo = -a.hi();
      mhi = -a.lo();
    } else {
      mlo = 0.0;
      mhi = std::max(-a.lo(), a.hi());
    }
    return Interval(pow_down(mlo, n), pow_up(mhi, n));
  }
  const double lo = a.lo() >= 0.0 ? pow_down(a.lo(), n) : -pow_up(-a.lo(), n);
  const double hi = a.hi() >= 0.0 ? pow_up(a.hi(), n) : -pow_down(-a.hi(), n);
  return Interval(lo, hi);
}

Interval monotone_image(const Interval& i, Elementary fn) {
  switch (fn) {
    case Elementary::Exp:
      return Interval(std::max(0.0, next_down(std::exp(i.lo()))), next_up(std::exp(i.hi())));
    case Elementary::Log:
      if (!(i.lo() > 0.0)) throw DomainError("log of interval " + to_string(i) + " leaves its domain");
      return Interval(next_down(std::log(i.lo())), next_up(std::log(i.hi())));
    case Elementary::Softplus:
      return Interval(std::max(0.0, next_down(evaluate(fn, i.lo()))), next_up(evaluate(fn, i.hi())));
    case Elementary::Sigmoid:
      return Interval(std::max(0.0, next_down(evaluate(fn, i.lo()))),
                      std::min(1.0, next_up(evaluate(fn, i.hi()))));
  }
  return i;
}

TensorInterval::TensorInterval(Tensor lo, Tensor hi) : lo_(std::move(lo)), hi_(std::move(hi)) {
  if (lo_.shape() != hi_.shape()) throw ShapeError("tensor interval endpoints differ in shape");
  for (std::size_t i = 0; i < lo_.size(); ++i) {
    if (std::isnan(lo_[i]) || std::isnan(hi_[i]) || lo_[i] > hi_[i]) {
      throw DomainError("tensor interval entry " + std::to_string(i) + " is not a valid interval");
    }
  }
}

void TensorInterval::set(std::size_t i, const Interval& v) {
  lo_[i] = v.lo();
  hi_[i] = v.hi();
}

TensorInterval inner(const TensorInterval& a, const Tensor& b) {
  const std::size_t q = b.rank();
  const std::size_t r = a.rank();
  if (q > r) throw ShapeError("inner: rank(b) exceeds rank(a)");
  for (std::size_t i = 0; i < q; ++i) {
    if (a.shape()[r - q + i] != b.shape()[i]) {
      throw ShapeError("inner: trailing axes " + shape_string(a.shape()) + " vs " + shape_string(b.shape()));
    }
  }
  Shape out_shape(a.shape().begin(), a.shape().begin() + static_cast<std::ptrdiff_t>(r - q));
  Tensor lo(out_shape), hi(out_shape);
  const std::size_t n = b.size();
  for (std::size_t i = 0; i < lo.size(); ++i) {
    Interval acc(0.0);
    for (std::size_t j = 0; j < n; ++j) acc += scale(a[i * n + j], b[j]);
    lo[i] = acc.lo();
    hi[i] = acc.hi();
  }
  return TensorInterval(std::move(lo), std::move(hi));
}

}  // namespace umm
