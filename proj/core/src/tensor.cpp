#include "umm/tensor.hpp"

#include <cmath>
#include <sstream>

#include "umm/errors.hpp"

namespace umm {

std::size_t numel(const Shape& shape) {
  std::size_t n = 1;
  for (std::size_t d : shape) n *= d;
  return n;
}

std::string shape_string(const Shape& shape) {
  std::ostringstream os;
  os << '(';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << ',';
    os << shape[i];
  }
  os << ')';
  return os.str();
}

Tensor::Tensor(Shape shape, double fill) : shape_(std::move(shape)) {
  if (shape_.size() > kMaxRank) throw ShapeError("tensor rank exceeds 4: " + shape_string(shape_));
  data_.assign(numel(shape_), fill);
}

Tensor::Tensor(Shape shape, std::vector<double> data) : shape_(std::move(shape)), data_(std::move(data)) {
  if (shape_.size() > kMaxRank) throw ShapeError("tensor rank exceeds 4: " + shape_string(shape_));
  if (data_.size() != numel(shape_)) {
    throw ShapeError("data length " + std::to_string(data_.size()) + " does not match shape " +
                     shape_string(shape_));
  }
}

Tensor Tensor::vector(std::initializer_list<double> values) {
  return Tensor(Shape{values.size()}, std::vector<double>(values));
}

Tensor Tensor::matrix(std::size_t rows, std::size_t cols, std::initializer_list<double> values) {
  return Tensor(Shape{rows, cols}, std::vector<double>(values));
}

double Tensor::item() const {
  if (data_.size() != 1) throw ShapeError("item() on tensor of shape " + shape_string(shape_));
  return data_[0];
}

Tensor Tensor::reshaped(Shape shape) const {
  if (numel(shape) != data_.size()) {
    throw ShapeError("cannot reshape " + shape_string(shape_) + " to " + shape_string(shape));
  }
  return Tensor(std::move(shape), data_);
}

double dot(const Tensor& a, const Tensor& b) {
  if (a.size() != b.size()) throw ShapeError("dot: size mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double squared_norm(const Tensor& a) { return dot(a, a); }

double dot(const Bindings& a, const Bindings& b) {
  double s = 0.0;
  for (const auto& [name, t] : a) {
    auto it = b.find(name);
    if (it == b.end()) throw ShapeError("dot: missing binding " + name);
    s += dot(t, it->second);
  }
  return s;
}

double squared_norm(const Bindings& a) {
  double s = 0.0;
  for (const auto& [name, t] : a) s += squared_norm(t);
  return s;
}

void axpy(double alpha, const Bindings& x, Bindings& out) {
  for (const auto& [name, t] : x) {
    auto it = out.find(name);
    if (it == out.end()) throw ShapeError("axpy: missing binding " + name);
    if (it->second.size() != t.size()) throw ShapeError("axpy: size mismatch for " + name);
    auto dst = it->second.data();
    for (std::size_t i = 0; i < t.size(); ++i) dst[i] += alpha * t[i];
  }
}

Bindings scaled(const Bindings& x, double alpha) {
  Bindings out = x;
  for (auto& [name, t] : out)
    for (double& v : t.data()) v *= alpha;
  return out;
}

Bindings zeros_like(const Bindings& x) {
  Bindings out;
  for (const auto& [name, t] : x) out.emplace(name, Tensor(t.shape()));
  return out;
}

std::size_t total_size(const Bindings& x) {
  std::size_t n = 0;
  for (const auto& [name, t] : x) n += t.size();
  return n;
}

Tensor inner(const Tensor& a, const Tensor& b) {
  const std::size_t q = b.rank();
  if (q > a.rank()) throw ShapeError("inner: rank(b) exceeds rank(a)");
  const std::size_t r = a.rank();
  for (std::size_t i = 0; i < q; ++i) {
    if (a.shape()[r - q + i] != b.shape()[i]) {
      throw ShapeError("inner: trailing axes " + shape_string(a.shape()) + " vs " + shape_string(b.shape()));
    }
  }
  Shape out_shape(a.shape().begin(), a.shape().begin() + static_cast<std::ptrdiff_t>(r - q));
  Tensor out(out_shape);
  const std::size_t inner_n = b.size();
  for (std::size_t i = 0; i < out.size(); ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < inner_n; ++j) s += a[i * inner_n + j] * b[j];
    out[i] = s;
  }
  return out;
}

Tensor outer(const Tensor& a, const Tensor& b) {
  Shape shape = a.shape();
  shape.insert(shape.end(), b.shape().begin(), b.shape().end());
  Tensor out(shape);
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j) out[i * b.size() + j] = a[i] * b[j];
  return out;
}

Tensor outer_power(const Tensor& v, int k) {
  if (k < 0) throw DomainError("outer_power: negative power");
  if (v.rank() != 1) throw ShapeError("outer_power expects a vector");
  Tensor out = Tensor::scalar(1.0);
  for (int i = 0; i < k; ++i) out = outer(v, out);
  return out;
}

}  // namespace umm
