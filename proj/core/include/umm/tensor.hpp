#pragma once

#include <cstddef>
#include <initializer_list>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace umm {

using Shape = std::vector<std::size_t>;

std::size_t numel(const Shape& shape);
std::string shape_string(const Shape& shape);

// Dense row-major tensor of doubles, rank 0..4. A rank-0 tensor holds one value.
class Tensor {
 public:
  static constexpr std::size_t kMaxRank = 4;

  Tensor() : data_(1, 0.0) {}
  explicit Tensor(Shape shape, double fill = 0.0);
  Tensor(Shape shape, std::vector<double> data);

  static Tensor scalar(double value) { return Tensor(Shape{}, value); }
  static Tensor vector(std::initializer_list<double> values);
  static Tensor matrix(std::size_t rows, std::size_t cols, std::initializer_list<double> values);

  const Shape& shape() const { return shape_; }
  std::size_t rank() const { return shape_.size(); }
  std::size_t size() const { return data_.size(); }
  bool is_scalar() const { return data_.size() == 1 && shape_.empty(); }

  std::span<const double> data() const { return data_; }
  std::span<double> data() { return data_; }
  const std::vector<double>& values() const { return data_; }

  double operator[](std::size_t i) const { return data_[i]; }
  double& operator[](std::size_t i) { return data_[i]; }
  double item() const;

  double at(std::size_t i, std::size_t j) const { return data_[i * shape_.at(1) + j]; }
  double& at(std::size_t i, std::size_t j) { return data_[i * shape_.at(1) + j]; }

  Tensor reshaped(Shape shape) const;

  bool operator==(const Tensor& other) const = default;

 private:
  Shape shape_;
  std::vector<double> data_;
};

// Named parameter tensors; ordered so iteration is deterministic.
using Bindings = std::map<std::string, Tensor>;

double dot(const Tensor& a, const Tensor& b);
double squared_norm(const Tensor& a);
double dot(const Bindings& a, const Bindings& b);
double squared_norm(const Bindings& a);
// out[name] += alpha * x[name] for every name in x.
void axpy(double alpha, const Bindings& x, Bindings& out);
Bindings scaled(const Bindings& x, double alpha);
Bindings zeros_like(const Bindings& x);
std::size_t total_size(const Bindings& x);

// Contraction of the trailing axes of `a` against all axes of `b`:
// out[i...] = sum_j a[i..., j...] * b[j...].
Tensor inner(const Tensor& a, const Tensor& b);
// Outer product; rank(a) + rank(b) must stay within kMaxRank.
Tensor outer(const Tensor& a, const Tensor& b);
// v^{(x)k} for a vector v; k = 0 yields the scalar 1.
Tensor outer_power(const Tensor& v, int k);

}  // namespace umm
