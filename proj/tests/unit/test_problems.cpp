#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>

#include "doctest.h"
#include "testing.hpp"
#include "umm/errors.hpp"
#include "umm/problems.hpp"

using namespace umm;

namespace {

double at(const ProblemSpec& p, double x) { return eval(p.graph, {{"x", Tensor::scalar(x)}}); }

double softplus(double z) { return std::log1p(std::exp(z)); }

void check_gradient(const ProblemSpec& p, std::uint64_t seed, double tol = 1e-6) {
  std::mt19937_64 rng(seed);
  const Bindings x = umm::testing::plus(p.init, umm::testing::random_like(p.init, rng, 0.3));
  const ValueAndGrad vg = value_and_grad(p.graph, x);
  for (int i = 0; i < 3; ++i) {
    const Bindings d = umm::testing::random_like(p.init, rng);
    const double fd = umm::testing::fd_directional(p.graph, x, d);
    CHECK(dot(vg.grad, d) == doctest::Approx(fd).epsilon(tol).scale(1.0 + std::abs(vg.value)));
  }
}

void put_be32(std::ofstream& f, std::uint32_t v) {
  const unsigned char b[4] = {static_cast<unsigned char>(v >> 24), static_cast<unsigned char>(v >> 16),
                              static_cast<unsigned char>(v >> 8), static_cast<unsigned char>(v)};
  f.write(reinterpret_cast<const char*>(b), 4);
}

struct IdxFiles {
  std::filesystem::path dir;
  std::string images, labels;

  explicit IdxFiles(const std::string& tag) {
    dir = std::filesystem::temp_directory_path() / ("umm_idx_" + tag);
    std::filesystem::create_directories(dir);
    images = (dir / "train-images-idx3-ubyte").string();
    labels = (dir / "train-labels-idx1-ubyte").string();
  }
  ~IdxFiles() { std::filesystem::remove_all(dir); }

  // count images of 2x3 pixels; pixel j of image i is (i * 6 + j) * 10 capped at 255.
  void write(std::uint32_t image_magic, std::uint32_t count, std::size_t truncate_pixels = 0,
             unsigned bad_label = 0) const {
    std::ofstream im(images, std::ios::binary);
    put_be32(im, image_magic);
    put_be32(im, count);
    put_be32(im, 2);
    put_be32(im, 3);
    for (std::uint32_t i = 0; i < count * 6 - truncate_pixels; ++i) {
      const unsigned char px = static_cast<unsigned char>(std::min<std::uint32_t>(i * 10, 255));
      im.put(static_cast<char>(px));
    }
    std::ofstream lb(labels, std::ios::binary);
    put_be32(lb, 0x801);
    put_be32(lb, count);
    for (std::uint32_t i = 0; i < count; ++i) lb.put(static_cast<char>(bad_label ? bad_label : (i * 3) % 10));
  }
};

}  // namespace

TEST_CASE("one-dimensional problems") {
  const ProblemSpec lsq = one_d_problem("lsq");
  CHECK(at(lsq, 0.0) == 2.25);
  CHECK(at(lsq, 1.5) == 0.0);
  const ProblemSpec q = one_d_problem("quartic");
  CHECK(at(q, 0.0) == 81.0);
  CHECK(at(q, 4.0) == 1.0);
  const ProblemSpec l = one_d_problem("logistic1d");
  CHECK(at(l, 0.0) == doctest::Approx(std::log(2.0)));
  CHECK(at(l, 1.0) == doctest::Approx(2.0 / 3.0 * softplus(1.0) + 1.0 / 3.0 * softplus(-1.0)));
  const ProblemSpec nn = one_d_problem("nnparam");
  CHECK(at(nn, 0.0) == doctest::Approx(0.249955).epsilon(1e-5));
  CHECK(at(nn, 10.0) == 0.0);
  for (const ProblemSpec* p : {&lsq, &q, &l, &nn}) {
    REQUIRE(p->optimum.has_value());
    CHECK(p->init.at("x").item() == 0.0);
    const double xs = p->optimum->argmin.at("x").item();
    CHECK(at(*p, xs) == doctest::Approx(p->optimum->value));
    // Certified minimizer: no nearby point does better.
    for (double dx : {-0.1, -1e-3, 1e-3, 0.1}) CHECK(at(*p, xs + dx) >= p->optimum->value - 1e-15);
    CHECK(grad(p->graph, p->optimum->argmin, "x").item() == doctest::Approx(0.0).scale(1.0));
    check_gradient(*p, 1);
  }
  CHECK_THROWS_AS(one_d_problem("cubic"), UnknownProblem);
}

TEST_CASE("regression generators") {
  for (RegressionKind kind : {RegressionKind::LeastSquares, RegressionKind::Logistic, RegressionKind::GenNormal}) {
    const Regression r = random_regression(kind, 50, 4, 61);
    CHECK(r.problem.n == 50);
    CHECK(r.problem.d == 4);
    CHECK(r.data.features.shape() == Shape{50, 4});
    CHECK(r.problem.truth.at("x").shape() == Shape{4});
    CHECK(regression_kind_from_string(to_string(kind)) == kind);
    check_gradient(r.problem, 62);
    // Same seed, same data.
    CHECK(random_regression(kind, 50, 4, 61).data.labels == r.data.labels);
    CHECK(!(random_regression(kind, 50, 4, 63).data.labels == r.data.labels));
  }
  CHECK_THROWS_AS(regression_kind_from_string("huber"), UnknownProblem);
}

TEST_CASE("least-squares optimum solves the normal equations") {
  const Regression r = random_regression(RegressionKind::LeastSquares, 80, 5, 64);
  REQUIRE(r.problem.optimum.has_value());
  const Optimum& o = *r.problem.optimum;
  const Tensor g = grad(r.problem.graph, o.argmin, "x");
  for (double v : g.data()) CHECK(std::abs(v) < 1e-9 * (1.0 + o.value));
  std::mt19937_64 rng(65);
  for (int i = 0; i < 1000; ++i) {
    const Bindings y = umm::testing::plus(o.argmin, umm::testing::random_like(o.argmin, rng, 0.05));
    CHECK(eval(r.problem.graph, y) >= o.value - 1e-12 * (1.0 + o.value));
  }
  // Labels near the truth: the fit is within the noise level.
  CHECK(o.value / 80.0 < 0.05);
}

TEST_CASE("logistic loss matches the cross-entropy and flags separable data") {
  Dataset data;
  data.features = Tensor::matrix(3, 2, {1.0, 0.0, 0.5, -1.0, -2.0, 1.0});
  data.labels = Tensor::vector({1.0, 0.0, 1.0});
  const ProblemSpec p = regression_problem(RegressionKind::Logistic, data);
  const Bindings x{{"x", Tensor::vector({0.3, -0.7})}};
  double expected = 0.0;
  for (std::size_t i = 0; i < 3; ++i) {
    const double z = data.features.at(i, 0) * 0.3 + data.features.at(i, 1) * -0.7;
    const double s = 1.0 / (1.0 + std::exp(-z));
    expected -= data.labels[i] > 0.5 ? std::log(s) : std::log(1.0 - s);
  }
  CHECK(eval(p.graph, x) == doctest::Approx(expected).epsilon(1e-13));
  CHECK(!p.optimum.has_value());

  data.labels = Tensor::vector({1.0, 1.0, 1.0});
  const ProblemSpec sep = regression_problem(RegressionKind::Logistic, data);
  REQUIRE(sep.optimum.has_value());
  CHECK(sep.optimum->unbounded);
  CHECK(sep.optimum->value == 0.0);
  data.labels = Tensor::vector({1.0, 1.0});
  CHECK_THROWS_AS(regression_problem(RegressionKind::Logistic, data), ShapeError);
}

TEST_CASE("generalized-normal loss at the truth is the sum of fourth-power noise") {
  const Regression r = random_regression(RegressionKind::GenNormal, 60, 3, 66);
  const Tensor& beta = r.problem.truth.at("x");
  double expected = 0.0;
  for (std::size_t i = 0; i < 60; ++i) {
    double z = 0.0;
    for (std::size_t j = 0; j < 3; ++j) z += r.data.features.at(i, j) * beta[j];
    expected += std::pow(r.data.labels[i] - z, 4);
  }
  CHECK(eval(r.problem.graph, r.problem.truth) == doctest::Approx(expected).epsilon(1e-12));
  CHECK(expected / 60.0 < 1e-2);
}

TEST_CASE("network loss with zero weights") {
  const Dataset data = synthetic_mnist(12, 67);
  const ProblemSpec p = mlp_problem(2, 5, data, 68);
  CHECK(p.name == "mlp2x5");
  CHECK(p.d == 784 * 5 + 5 + 5 * 5 + 5 + 5 * 10 + 10);
  CHECK(p.init.size() == 6);
  CHECK(p.init.at("b1").shape() == Shape{1, 5});
  for (double v : p.init.at("b2").data()) CHECK(v == 0.0);
  // Zero output layer: prediction b3 everywhere.
  Bindings x = p.init;
  for (auto& [name, t] : x)
    if (name == "W3") t = Tensor(t.shape());
  x.at("b3") = Tensor(Shape{1, 10}, 0.1);
  // Each row of Y is one-hot: sum (0.1 - y)^2 = 9 * 0.01 + 0.81.
  CHECK(eval(p.graph, x) == doctest::Approx((9 * 0.01 + 0.81) / 10.0).epsilon(1e-14));
  check_gradient(p, 69, 1e-5);
  // Rank-1 labels become a single output.
  Dataset scalar;
  scalar.features = Tensor::matrix(2, 2, {1.0, 2.0, 3.0, 4.0});
  scalar.labels = Tensor::vector({0.5, -0.5});
  CHECK(mlp_problem(1, 3, scalar, 1).init.at("W2").shape() == Shape{3, 1});
  CHECK_THROWS_AS(mlp_problem(0, 3, scalar, 1), DomainError);
}

TEST_CASE("weight initialisation scale") {
  const ProblemSpec p = mlp_problem(1, 400, synthetic_mnist(5, 70), 71);
  const Tensor& W = p.init.at("W1");
  double s2 = 0.0;
  for (double v : W.data()) s2 += v * v;
  // Variance 1 / fan_in with fan_in = 784.
  CHECK(s2 / static_cast<double>(W.size()) == doctest::Approx(1.0 / 784.0).epsilon(0.02));
}

TEST_CASE("positive definite quadratic and diagonal quadratic") {
  const ProblemSpec p = random_pd_quadratic(20, 72);
  REQUIRE(p.optimum.has_value());
  CHECK(eval(p.graph, p.optimum->argmin) <= 1e-28);
  for (double v : p.optimum->argmin.at("x").data()) {
    CHECK(v >= 0.3);
    CHECK(v <= 0.7);
  }
  CHECK(eval(p.graph, p.init) > 0.0);
  const ProblemSpec d = diagonal_quadratic(3, 5.0);
  // 1/2 (1 + 3 + 5) at x = 1
  CHECK(eval(d.graph, d.init) == doctest::Approx(4.5));
  CHECK(diagonal_quadratic(1, 4.0).graph.nodes().size() > 0);
  CHECK(eval(diagonal_quadratic(1, 4.0).graph, {{"x", Tensor::vector({1.0})}}) == 2.0);
  CHECK_THROWS_AS(diagonal_quadratic(0, 2.0), DomainError);
}

TEST_CASE("synthetic digits are reproducible and in range") {
  const Dataset a = synthetic_mnist(30, 73), b = synthetic_mnist(30, 73);
  CHECK(a.features == b.features);
  CHECK(a.labels == b.labels);
  CHECK(a.d() == 784);
  for (double v : a.features.data()) {
    CHECK(v >= 0.0);
    CHECK(v <= 1.0);
  }
  for (std::size_t i = 0; i < a.n(); ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < 10; ++j) s += a.labels.at(i, j);
    CHECK(s == 1.0);
  }
}

TEST_CASE("IDX loading") {
  IdxFiles files("ok");
  files.write(0x803, 4);
  const Dataset d = load_idx_pair(files.images, files.labels, 3);
  CHECK(d.features.shape() == Shape{3, 6});
  CHECK(d.labels.shape() == Shape{3, 10});
  CHECK(d.features.at(0, 0) == 0.0);
  CHECK(d.features.at(0, 1) == doctest::Approx(10.0 / 255.0));
  CHECK(d.features.at(2, 5) == doctest::Approx(170.0 / 255.0));
  CHECK(d.labels.at(1, 3) == 1.0);
  CHECK(load_mnist(files.dir.string(), 4).n() == 4);
  CHECK_THROWS_AS(load_idx_pair(files.images, files.labels, 5), DomainError);
  CHECK_THROWS_AS(load_idx_pair(files.images, files.labels, 0), DomainError);
}

TEST_CASE("IDX error handling") {
  {
    IdxFiles files("magic");
    files.write(0x802, 2);
    CHECK_THROWS_AS(load_idx_pair(files.images, files.labels, 1), BadMagic);
    // Labels and images swapped.
    CHECK_THROWS_AS(load_idx_pair(files.labels, files.images, 1), BadMagic);
  }
  {
    IdxFiles files("trunc");
    files.write(0x803, 3, 4);
    CHECK_NOTHROW(load_idx_pair(files.images, files.labels, 2));
    CHECK_THROWS_AS(load_idx_pair(files.images, files.labels, 3), TruncatedFile);
    std::ofstream(files.labels, std::ios::binary).put('\0');
    CHECK_THROWS_AS(load_idx_pair(files.images, files.labels, 1), TruncatedFile);
  }
  {
    IdxFiles files("label");
    files.write(0x803, 2, 0, 12);
    CHECK_THROWS_AS(load_idx_pair(files.images, files.labels, 1), DomainError);
  }
  CHECK_THROWS_AS(load_mnist("/nonexistent/umm", 1), FileNotFound);
}
