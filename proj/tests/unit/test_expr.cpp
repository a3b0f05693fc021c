#include <cmath>
#include <random>

#include "doctest.h"
#include "testing.hpp"
#include "umm/errors.hpp"
#include "umm/expr.hpp"
#include "umm/oracles.hpp"

using namespace umm;
using umm::testing::fd_directional;

namespace {

// f(W, b) = sum softplus(X W + 1 b)^2 + sum log(1 + exp(sigmoid(W)))
ExprGraph mixed_graph() {
  ExprGraph g;
  const NodeId X = g.constant(Tensor::matrix(3, 2, {0.5, -1.0, 2.0, 0.3, -0.7, 1.1}));
  const NodeId ones = g.constant(Tensor(Shape{3, 1}, 1.0));
  const NodeId W = g.variable("W", {2, 2});
  const NodeId b = g.variable("b", {1, 2});
  const NodeId z = g.add(g.matmul(X, W), g.matmul(ones, b));
  const NodeId h = g.unary(Elementary::Softplus, z);
  const NodeId term1 = g.sum(g.pow(h, 2));
  const NodeId s = g.unary(Elementary::Sigmoid, W);
  const NodeId term2 = g.sum(g.unary(Elementary::Log, g.add(g.scalar(1.0), g.unary(Elementary::Exp, s))));
  g.set_output(g.add(term1, term2));
  return g;
}

Bindings mixed_point() {
  return {{"W", Tensor::matrix(2, 2, {0.1, -0.4, 0.7, 0.2})}, {"b", Tensor::matrix(1, 2, {-0.3, 0.5})}};
}

double softplus(double z) { return std::log1p(std::exp(z)); }
double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

}  // namespace

TEST_CASE("forward value matches a hand computation") {
  const ExprGraph g = mixed_graph();
  const Bindings x = mixed_point();
  const double X[3][2] = {{0.5, -1.0}, {2.0, 0.3}, {-0.7, 1.1}};
  const double W[2][2] = {{0.1, -0.4}, {0.7, 0.2}};
  const double b[2] = {-0.3, 0.5};
  double expected = 0.0;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 2; ++j) {
      const double z = X[i][0] * W[0][j] + X[i][1] * W[1][j] + b[j];
      expected += softplus(z) * softplus(z);
    }
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) expected += std::log(1.0 + std::exp(sigmoid(W[i][j])));
  CHECK(eval(g, x) == doctest::Approx(expected).epsilon(1e-14));
}

TEST_CASE("reverse-mode gradient agrees with central differences") {
  const ExprGraph g = mixed_graph();
  const Bindings x = mixed_point();
  const ValueAndGrad vg = value_and_grad(g, x);
  CHECK(vg.value == eval(g, x));
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    const Bindings d = umm::testing::random_like(x, rng);
    CHECK(dot(vg.grad, d) == doctest::Approx(fd_directional(g, x, d)).epsilon(1e-7));
  }
  CHECK(grad(g, x, "b") == vg.grad.at("b"));
  CHECK_THROWS_AS(grad(g, x, "nope"), UnboundVariable);
}

TEST_CASE("scalar broadcasting in elementwise ops") {
  ExprGraph g;
  const NodeId v = g.variable("v", {3});
  const NodeId c = g.scalar(2.0);
  g.set_output(g.sum(g.mul(g.sub(v, c), g.sub(c, v))));
  const Bindings x{{"v", Tensor::vector({1.0, 2.0, 4.0})}};
  CHECK(eval(g, x) == doctest::Approx(-(1.0 + 0.0 + 4.0)));
  const Tensor gv = grad(g, x, "v");
  // d/dv -(v-2)^2 = -2(v-2)
  CHECK(gv[0] == doctest::Approx(2.0));
  CHECK(gv[1] == doctest::Approx(0.0));
  CHECK(gv[2] == doctest::Approx(-4.0));
}

TEST_CASE("gradient of a broadcast scalar variable sums over elements") {
  ExprGraph g;
  const NodeId s = g.variable("s", {});
  const NodeId t = g.constant(Tensor::vector({1.0, 2.0, 3.0}));
  g.set_output(g.sum(g.mul(s, t)));
  CHECK(grad(g, {{"s", Tensor::scalar(5.0)}}, "s").item() == doctest::Approx(6.0));
}

TEST_CASE("shape and binding errors") {
  ExprGraph g;
  const NodeId a = g.variable("a", {2});
  const NodeId b = g.variable("b", {3});
  CHECK_THROWS_AS(g.add(a, b), ShapeError);
  CHECK_THROWS_AS(g.matmul(a, b), ShapeError);
  CHECK_THROWS_AS(g.set_output(a), ShapeError);
  CHECK_THROWS_AS(g.variable("a", {2}), ShapeError);
  CHECK_THROWS_AS(g.pow(a, -1), DomainError);
  g.set_output(g.sum(a));
  CHECK_THROWS_AS(eval(g, {}), UnboundVariable);
  CHECK_THROWS_AS(eval(g, {{"a", Tensor::vector({1.0, 2.0, 3.0})}}), ShapeError);
  ExprGraph empty;
  CHECK_THROWS_AS(empty.output(), ShapeError);
}

TEST_CASE("log outside its domain raises DomainError") {
  ExprGraph g;
  const NodeId x = g.variable("x", {});
  g.set_output(g.unary(Elementary::Log, x));
  CHECK(eval(g, {{"x", Tensor::scalar(std::exp(1.0))}}) == doctest::Approx(1.0));
  CHECK_THROWS_AS(eval(g, {{"x", Tensor::scalar(-1.0)}}), DomainError);
  CHECK_THROWS_AS(eval(g, {{"x", Tensor::scalar(0.0)}}), DomainError);
}

TEST_CASE("line restriction evaluates f(x0 + eta v)") {
  const ExprGraph g = mixed_graph();
  const Bindings x = mixed_point();
  std::mt19937_64 rng(11);
  const Bindings v = umm::testing::random_like(x, rng);
  const ExprGraph h = line_restrict(g, x, v);
  REQUIRE(h.variables().size() == 1);
  CHECK(h.variables()[0].first == kEtaName);
  CHECK(h.variables()[0].second.empty());
  for (double eta : {0.0, 0.3, -1.2, 2.5}) {
    const double direct = eval(g, umm::testing::plus(x, v, eta));
    CHECK(eval(h, {{kEtaName, Tensor::scalar(eta)}}) == doctest::Approx(direct).epsilon(1e-13));
  }
  // h'(0) = <grad f(x0), v>
  const double slope = grad(h, {{kEtaName, Tensor::scalar(0.0)}}, kEtaName).item();
  CHECK(slope == doctest::Approx(dot(value_and_grad(g, x).grad, v)).epsilon(1e-12));
  Bindings bad = v;
  bad.erase("b");
  CHECK_THROWS_AS(line_restrict(g, x, bad), ShapeError);
}

TEST_CASE("subspace restriction with one column equals line restriction") {
  const ExprGraph g = mixed_graph();
  const Bindings x = mixed_point();
  std::mt19937_64 rng(12);
  const Bindings v = umm::testing::random_like(x, rng);
  const DirectionStack whole = direction_stack(v, StackMode::Whole);
  const ExprGraph h1 = line_restrict(g, x, v);
  const ExprGraph hs = subspace_restrict(g, x, whole.U, whole.d);
  for (double eta : {0.0, 0.7, 1.9}) {
    CHECK(eval(hs, {{kEtaName, Tensor::vector({eta})}}) ==
          doctest::Approx(eval(h1, {{kEtaName, Tensor::scalar(eta)}})).epsilon(1e-13));
  }
}

TEST_CASE("per-layer subspace restriction moves each tensor separately") {
  const ExprGraph g = mixed_graph();
  const Bindings x = mixed_point();
  std::mt19937_64 rng(13);
  const Bindings v = umm::testing::random_like(x, rng);
  const DirectionStack s = direction_stack(v, StackMode::PerLayer);
  REQUIRE(s.d == 2);
  const ExprGraph hs = subspace_restrict(g, x, s.U, s.d);
  const std::vector<double> eta{0.4, -0.9};
  Bindings moved = x;
  apply_stack(moved, s, eta);
  CHECK(eval(hs, {{kEtaName, Tensor::vector({0.4, -0.9})}}) == doctest::Approx(eval(g, moved)).epsilon(1e-13));
  // Bindings are ordered by name, so column 0 is W and column 1 is b.
  Bindings only_b = x;
  axpy(-0.9, {{"b", v.at("b")}}, only_b);
  CHECK(eval(hs, {{kEtaName, Tensor::vector({0.0, -0.9})}}) == doctest::Approx(eval(g, only_b)).epsilon(1e-13));
  CHECK_THROWS_AS(subspace_restrict(g, x, s.U, 0), ShapeError);
}
