#include "umm/problems.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "umm/errors.hpp"

namespace umm {

namespace {

Tensor normal_tensor(Shape shape, std::mt19937_64& rng, double stddev = 1.0) {
  std::normal_distribution<double> dist(0.0, stddev);
  Tensor t(std::move(shape));
  for (double& v : t.data()) v = dist(rng);
  return t;
}

Tensor matmul(const Tensor& a, const Tensor& b) {
  const std::size_t m = a.shape().at(0), k = a.shape().at(1), n = b.shape().at(1);
  Tensor out(Shape{m, n});
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t p = 0; p < k; ++p)
      for (std::size_t j = 0; j < n; ++j) out.at(i, j) += a.at(i, p) * b.at(p, j);
  return out;
}

// Solves S x = r for symmetric positive definite S (d x d) by Cholesky.
std::vector<double> spd_solve(std::vector<double> S, std::vector<double> r, std::size_t d) {
  for (std::size_t j = 0; j < d; ++j) {
    double s = S[j * d + j];
    for (std::size_t p = 0; p < j; ++p) s -= S[j * d + p] * S[j * d + p];
    if (!(s > 0.0)) throw DegenerateInput("normal equations are not positive definite");
    const double ljj = std::sqrt(s);
    S[j * d + j] = ljj;
    for (std::size_t i = j + 1; i < d; ++i) {
      double t = S[i * d + j];
      for (std::size_t p = 0; p < j; ++p) t -= S[i * d + p] * S[j * d + p];
      S[i * d + j] = t / ljj;
    }
  }
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t p = 0; p < i; ++p) r[i] -= S[i * d + p] * r[p];
    r[i] /= S[i * d + i];
  }
  for (std::size_t i = d; i-- > 0;) {
    for (std::size_t p = i + 1; p < d; ++p) r[i] -= S[p * d + i] * r[p];
    r[i] /= S[i * d + i];
  }
  return r;
}

ProblemSpec scalar_problem(const std::string& name) {
  ProblemSpec p;
  p.name = name;
  p.d = 1;
  p.init.emplace("x", Tensor::scalar(0.0));
  return p;
}

void set_optimum(ProblemSpec& p, double argmin, double value) {
  Optimum o;
  o.argmin.emplace("x", Tensor::scalar(argmin));
  o.value = value;
  p.optimum = o;
}

// Residual node A x - b for a dataset with vector labels.
NodeId residual(ExprGraph& g, const Dataset& data, NodeId x) {
  const Tensor b = data.labels.reshaped({data.n()});
  return g.sub(g.matmul(g.constant(data.features), x), g.constant(b));
}

ProblemSpec regression_base(const std::string& name, const Dataset& data) {
  ProblemSpec p;
  p.name = name;
  p.n = data.n();
  p.d = data.d();
  p.init.emplace("x", Tensor(Shape{data.d()}));
  return p;
}

ProblemSpec least_squares(const Dataset& data) {
  ProblemSpec p = regression_base("lsq", data);
  const NodeId x = p.graph.variable("x", {data.d()});
  p.graph.set_output(p.graph.sum(p.graph.pow(residual(p.graph, data, x), 2)));

  const std::size_t n = data.n(), d = data.d();
  std::vector<double> S(d * d, 0.0), r(d, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t a = 0; a < d; ++a) {
      r[a] += data.features.at(i, a) * data.labels[i];
      for (std::size_t b = 0; b < d; ++b) S[a * d + b] += data.features.at(i, a) * data.features.at(i, b);
    }
  }
  try {
    Optimum o;
    o.argmin.emplace("x", Tensor(Shape{d}, spd_solve(S, r, d)));
    o.value = eval(p.graph, o.argmin);
    p.optimum = o;
  } catch (const DegenerateInput&) {
    // rank-deficient design: no certified optimum
  }
  return p;
}

ProblemSpec logistic(const Dataset& data) {
  ProblemSpec p = regression_base("logistic", data);
  const NodeId x = p.graph.variable("x", {data.d()});
  // -log sigmoid(s z) = softplus(-s z), s = +1 for label 1 and -1 for label 0.
  Tensor neg_sign(Shape{data.n()});
  bool all_pos = true, all_neg = true;
  for (std::size_t i = 0; i < data.n(); ++i) {
    const bool pos = data.labels[i] > 0.5;
    neg_sign[i] = pos ? -1.0 : 1.0;
    all_pos = all_pos && pos;
    all_neg = all_neg && !pos;
  }
  const NodeId z = p.graph.matmul(p.graph.constant(data.features), x);
  p.graph.set_output(p.graph.sum(p.graph.unary(Elementary::Softplus, p.graph.mul(p.graph.constant(neg_sign), z))));
  bool any_feature = false;
  for (double v : data.features.data()) any_feature = any_feature || v != 0.0;
  if ((all_pos || all_neg) && any_feature) {
    Optimum o;
    o.value = 0.0;
    o.unbounded = true;
    p.optimum = o;
  }
  return p;
}

ProblemSpec gen_normal(const Dataset& data) {
  ProblemSpec p = regression_base("gen_normal", data);
  const NodeId x = p.graph.variable("x", {data.d()});
  p.graph.set_output(p.graph.sum(p.graph.pow(residual(p.graph, data, x), 4)));
  return p;
}

}  // namespace

ProblemSpec one_d_problem(const std::string& name) {
  ProblemSpec p = scalar_problem(name);
  ExprGraph& g = p.graph;
  const NodeId x = g.variable("x", {});
  if (name == "lsq") {
    g.set_output(g.pow(g.sub(x, g.scalar(1.5)), 2));
    set_optimum(p, 1.5, 0.0);
  } else if (name == "quartic") {
    g.set_output(g.pow(g.sub(x, g.scalar(3.0)), 4));
    set_optimum(p, 3.0, 0.0);
  } else if (name == "logistic1d") {
    const NodeId a = g.mul(g.scalar(2.0 / 3.0), g.unary(Elementary::Softplus, x));
    const NodeId b = g.mul(g.scalar(1.0 / 3.0), g.unary(Elementary::Softplus, g.sub(g.scalar(0.0), x)));
    g.set_output(g.add(a, b));
    // derivative 2/3 s(x) - 1/3 s(-x) vanishes at s(x) = 1/3, x = -log 2
    const double xs = -std::log(2.0);
    set_optimum(p, xs, eval(g, {{"x", Tensor::scalar(xs)}}));
  } else if (name == "nnparam") {
    const NodeId s = g.unary(Elementary::Sigmoid, g.sub(x, g.scalar(10.0)));
    g.set_output(g.pow(g.sub(s, g.scalar(0.5)), 2));
    set_optimum(p, 10.0, 0.0);
  } else {
    throw UnknownProblem("unknown one-dimensional problem: " + name);
  }
  return p;
}

RegressionKind regression_kind_from_string(const std::string& name) {
  if (name == "lsq") return RegressionKind::LeastSquares;
  if (name == "logistic") return RegressionKind::Logistic;
  if (name == "gen_normal") return RegressionKind::GenNormal;
  throw UnknownProblem("unknown regression kind: " + name);
}

std::string to_string(RegressionKind k) {
  switch (k) {
    case RegressionKind::LeastSquares: return "lsq";
    case RegressionKind::Logistic: return "logistic";
    case RegressionKind::GenNormal: return "gen_normal";
  }
  return "?";
}

ProblemSpec regression_problem(RegressionKind kind, const Dataset& data) {
  if (data.labels.size() != data.n()) throw ShapeError("regression_problem: need one label per example");
  switch (kind) {
    case RegressionKind::LeastSquares: return least_squares(data);
    case RegressionKind::Logistic: return logistic(data);
    case RegressionKind::GenNormal: return gen_normal(data);
  }
  throw DomainError("regression_problem: unknown kind");
}

Regression random_regression(RegressionKind kind, std::size_t n, std::size_t d, std::uint64_t seed) {
  if (n == 0 || d == 0) throw DomainError("random_regression: n and d must be positive");
  std::mt19937_64 rng(seed);
  const Tensor Z = normal_tensor({d, d}, rng);
  const Tensor E = normal_tensor({n, d}, rng);
  Dataset data;
  data.features = matmul(E, Z);  // rows ~ N(0, Z^T Z)
  const Tensor beta = normal_tensor({d, 1}, rng);
  const Tensor z = matmul(data.features, beta);
  Tensor labels(Shape{n});
  switch (kind) {
    case RegressionKind::LeastSquares: {
      std::normal_distribution<double> noise(0.0, 0.1);
      for (std::size_t i = 0; i < n; ++i) labels[i] = z[i] + noise(rng);
      break;
    }
    case RegressionKind::Logistic: {
      std::uniform_real_distribution<double> u(0.0, 1.0);
      for (std::size_t i = 0; i < n; ++i) labels[i] = u(rng) < evaluate(Elementary::Sigmoid, z[i]) ? 1.0 : 0.0;
      break;
    }
    case RegressionKind::GenNormal: {
      // |eps| = alpha * G^(1/beta), G ~ Gamma(1/beta, 1), random sign; alpha = 0.1, beta = 4.
      std::gamma_distribution<double> gamma(0.25, 1.0);
      std::bernoulli_distribution coin(0.5);
      for (std::size_t i = 0; i < n; ++i) {
        const double mag = 0.1 * std::pow(gamma(rng), 0.25);
        labels[i] = z[i] + (coin(rng) ? mag : -mag);
      }
      break;
    }
  }
  data.labels = labels;

  Regression out{regression_problem(kind, data), data};
  out.problem.seed = seed;
  out.problem.truth.emplace("x", beta.reshaped({d}));
  return out;
}

ProblemSpec mlp_problem(std::size_t hidden_layers, std::size_t width, const Dataset& data, std::uint64_t seed) {
  if (hidden_layers < 1 || width < 1) throw DomainError("mlp_problem: need at least one hidden layer of width >= 1");
  const std::size_t n = data.n();
  const Tensor Y = data.labels.rank() == 1 ? data.labels.reshaped({n, 1}) : data.labels;
  const std::size_t c = Y.shape().at(1);

  ProblemSpec p;
  p.name = "mlp" + std::to_string(hidden_layers) + "x" + std::to_string(width);
  p.n = n;
  p.seed = seed;
  ExprGraph& g = p.graph;
  std::mt19937_64 rng(seed);

  const NodeId ones = g.constant(Tensor(Shape{n, 1}, 1.0));
  NodeId h = g.constant(data.features);
  std::size_t fan_in = data.d();
  for (std::size_t layer = 1; layer <= hidden_layers + 1; ++layer) {
    const bool last = layer == hidden_layers + 1;
    const std::size_t fan_out = last ? c : width;
    const std::string w_name = "W" + std::to_string(layer);
    const std::string b_name = "b" + std::to_string(layer);
    const NodeId W = g.variable(w_name, {fan_in, fan_out});
    const NodeId b = g.variable(b_name, {1, fan_out});
    p.init.emplace(w_name, normal_tensor({fan_in, fan_out}, rng, 1.0 / std::sqrt(static_cast<double>(fan_in))));
    p.init.emplace(b_name, Tensor(Shape{1, fan_out}));
    const NodeId z = g.add(g.matmul(h, W), g.matmul(ones, b));
    h = last ? z : g.unary(Elementary::Softplus, z);
    fan_in = fan_out;
  }
  const NodeId err = g.sub(h, g.constant(Y));
  g.set_output(g.mul(g.scalar(1.0 / static_cast<double>(n * c)), g.sum(g.pow(err, 2))));
  p.d = total_size(p.init);
  return p;
}

ProblemSpec random_pd_quadratic(std::size_t d, std::uint64_t seed, double lo, double hi) {
  std::mt19937_64 rng(seed);
  Tensor M = normal_tensor({d, d}, rng, 0.1 / std::sqrt(static_cast<double>(d)));
  for (std::size_t i = 0; i < d; ++i) M.at(i, i) += 1.0;
  std::uniform_real_distribution<double> u(lo, hi);
  Tensor xs(Shape{d});
  for (double& v : xs.data()) v = u(rng);
  const Tensor target = matmul(M, xs.reshaped({d, 1})).reshaped({d});

  ProblemSpec p;
  p.name = "pd_quadratic";
  p.d = d;
  p.seed = seed;
  const NodeId x = p.graph.variable("x", {d});
  const NodeId r = p.graph.sub(p.graph.matmul(p.graph.constant(M), x), p.graph.constant(target));
  p.graph.set_output(p.graph.sum(p.graph.pow(r, 2)));
  p.init.emplace("x", Tensor(Shape{d}));
  Optimum o;
  o.argmin.emplace("x", xs);
  o.value = 0.0;
  p.optimum = o;
  return p;
}

ProblemSpec diagonal_quadratic(std::size_t d, double beta) {
  if (d == 0 || beta < 1.0) throw DomainError("diagonal_quadratic: need d >= 1 and beta >= 1");
  Tensor half_lambda(Shape{d});
  for (std::size_t i = 0; i < d; ++i) {
    const double lambda = d == 1 ? beta : 1.0 + (beta - 1.0) * static_cast<double>(i) / static_cast<double>(d - 1);
    half_lambda[i] = 0.5 * lambda;
  }
  ProblemSpec p;
  p.name = "diag_quadratic";
  p.d = d;
  const NodeId x = p.graph.variable("x", {d});
  p.graph.set_output(p.graph.sum(p.graph.mul(p.graph.constant(half_lambda), p.graph.pow(x, 2))));
  p.init.emplace("x", Tensor(Shape{d}, 1.0));
  Optimum o;
  o.argmin.emplace("x", Tensor(Shape{d}));
  o.value = 0.0;
  p.optimum = o;
  return p;
}

Dataset synthetic_mnist(std::size_t n, std::uint64_t seed) {
  constexpr std::size_t kPixels = 784, kClasses = 10;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::normal_distribution<double> noise(0.0, 0.15);
  std::uniform_int_distribution<std::size_t> cls(0, kClasses - 1);
  std::vector<double> centers(kClasses * kPixels);
  for (double& v : centers) v = u(rng) < 0.2 ? u(rng) : 0.0;  // sparse, like digit strokes
  Dataset data;
  data.features = Tensor(Shape{n, kPixels});
  data.labels = Tensor(Shape{n, kClasses});
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t c = cls(rng);
    data.labels.at(i, c) = 1.0;
    for (std::size_t j = 0; j < kPixels; ++j) {
      const double v = centers[c * kPixels + j] + noise(rng);
      data.features.at(i, j) = std::clamp(v, 0.0, 1.0);
    }
  }
  return data;
}

}  // namespace umm
