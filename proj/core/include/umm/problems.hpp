#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "umm/expr.hpp"

namespace umm {

struct Optimum {
  Bindings argmin;
  double value = 0.0;
  bool unbounded = false;  // infimum not attained (e.g. separable logistic data)
};

struct ProblemSpec {
  std::string name;
  ExprGraph graph;
  Bindings init;
  std::optional<Optimum> optimum;
  std::size_t n = 0;  // examples
  std::size_t d = 0;  // parameters
  std::uint64_t seed = 0;
  Bindings truth;     // generating parameters, when synthetic
};

struct Dataset {
  Tensor features;  // n x d
  Tensor labels;    // n (regression) or n x c (one-hot)
  std::size_t n() const { return features.shape().at(0); }
  std::size_t d() const { return features.shape().at(1); }
};

// lsq: (x - 3/2)^2   quartic: (x - 3)^4
// logistic1d: 2/3 softplus(x) + 1/3 softplus(-x)   nnparam: (sigmoid(x - 10) - 1/2)^2
// All start at x = 0. Throws UnknownProblem.
ProblemSpec one_d_problem(const std::string& name);

enum class RegressionKind { LeastSquares, Logistic, GenNormal };
RegressionKind regression_kind_from_string(const std::string& name);
std::string to_string(RegressionKind k);

struct Regression {
  ProblemSpec problem;
  Dataset data;
};

// Loss graph over an existing dataset with vector labels (logistic labels in
// {0, 1}); x_1 = 0. Least squares carries its normal-equation optimum when
// the design has full column rank; logistic data with a single label class
// is flagged unbounded.
ProblemSpec regression_problem(RegressionKind kind, const Dataset& data);

// Features ~ N(0, Z^T Z) with Z standard normal (d x d); true model standard
// normal. Losses are negative log-likelihoods up to constants: sum of squared
// residuals, logistic cross-entropy in softplus form, sum of quartic residuals.
Regression random_regression(RegressionKind kind, std::size_t n, std::size_t d, std::uint64_t seed);

// Fully connected softplus network, mean squared error against one-hot
// labels, weights ~ N(0, 1/fan_in), zero biases. Parameters are named
// W1, b1, ..., W{L+1}, b{L+1}; biases have shape (1, width).
ProblemSpec mlp_problem(std::size_t hidden_layers, std::size_t width, const Dataset& data, std::uint64_t seed);

// f(x) = ||M (x - x*)||^2 with M = I + (0.1/sqrt(d)) G; x* uniform in
// [lo, hi]^d; starts at 0. Certified optimum (x*, 0).
ProblemSpec random_pd_quadratic(std::size_t d, std::uint64_t seed, double lo = 0.3, double hi = 0.7);

// f(x) = 1/2 sum lambda_i x_i^2 with lambda evenly spaced in [1, beta];
// beta-smooth, starts at x = 1.
ProblemSpec diagonal_quadratic(std::size_t d, double beta);

// IDX files: train-images-idx3-ubyte / train-labels-idx1-ubyte under dir.
// First n examples, pixels scaled to [0, 1], labels one-hot over 10 classes.
Dataset load_mnist(const std::string& dir, std::size_t n);
Dataset load_idx_pair(const std::string& images_path, const std::string& labels_path, std::size_t n);

// Seeded Gaussian blobs in [0, 1]^784 with 10 classes: the stand-in when the
// MNIST files are absent.
Dataset synthetic_mnist(std::size_t n, std::uint64_t seed);

}  // namespace umm
