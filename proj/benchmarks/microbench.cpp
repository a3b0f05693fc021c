#include <benchmark/benchmark.h>

#include <random>

#include "umm/boxqp.hpp"
#include "umm/enclosure.hpp"
#include "umm/oracles.hpp"
#include "umm/polymin.hpp"
#include "umm/problems.hpp"

namespace {

using namespace umm;

void BM_IntervalMul(benchmark::State& state) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  std::vector<Interval> xs;
  for (int i = 0; i < 1024; ++i) {
    const double a = u(rng), b = u(rng);
    xs.emplace_back(std::min(a, b), std::max(a, b));
  }
  Interval acc(0.0);
  for (auto _ : state) {
    for (std::size_t i = 0; i + 1 < xs.size(); ++i) acc = hull(acc, xs[i] * xs[i + 1]);
    benchmark::DoNotOptimize(acc);
  }
  state.SetItemsProcessed(state.iterations() * 1023);
}
BENCHMARK(BM_IntervalMul);

struct MlpLine {
  ProblemSpec problem;
  Bindings v;
};

MlpLine mlp_line(std::size_t depth, std::size_t width) {
  MlpLine m{mlp_problem(depth, width, synthetic_mnist(100, 0), 1), {}};
  m.v = scaled(value_and_grad(m.problem.graph, m.problem.init).grad, -1.0);
  return m;
}

void BM_PropagateDirectional(benchmark::State& state) {
  const MlpLine m = mlp_line(static_cast<std::size_t>(state.range(0)), 32);
  const ExprGraph h = line_restrict(m.problem.graph, m.problem.init, m.v);
  const int k = static_cast<int>(state.range(1));
  for (auto _ : state) benchmark::DoNotOptimize(propagate_directional(h, 1.0, k, RemainderMethod::Sharp));
}
BENCHMARK(BM_PropagateDirectional)->Args({1, 2})->Args({1, 4})->Args({2, 2})->Unit(benchmark::kMillisecond);

void BM_PropagateQuadraticPerLayer(benchmark::State& state) {
  const MlpLine m = mlp_line(static_cast<std::size_t>(state.range(0)), 32);
  const DirectionStack s = direction_stack(m.v, StackMode::PerLayer);
  const ExprGraph h = subspace_restrict(m.problem.graph, m.problem.init, s.U, s.d);
  const std::vector<double> box(s.d, 1.0);
  for (auto _ : state) benchmark::DoNotOptimize(propagate_quadratic(h, box, RemainderMethod::Sharp));
}
BENCHMARK(BM_PropagateQuadraticPerLayer)->Arg(1)->Arg(2)->Unit(benchmark::kMillisecond);

void BM_PolyMin(benchmark::State& state) {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> n(0.0, 1.0);
  std::vector<RealPoly> ps;
  for (int i = 0; i < 64; ++i) {
    std::vector<double> c(static_cast<std::size_t>(state.range(0) + 1));
    for (double& x : c) x = n(rng);
    ps.emplace_back(c);
  }
  for (auto _ : state)
    for (const RealPoly& p : ps) benchmark::DoNotOptimize(minimize_poly_on_interval(p, 0.0, 1.0));
  state.SetItemsProcessed(state.iterations() * 64);
}
BENCHMARK(BM_PolyMin)->DenseRange(2, 6);

void BM_BoxQP(benchmark::State& state) {
  const std::size_t d = static_cast<std::size_t>(state.range(0));
  std::mt19937_64 rng(3);
  std::normal_distribution<double> n(0.0, 1.0);
  std::vector<double> A(d * d), b(d);
  for (double& x : A) x = n(rng);
  for (double& x : b) x = n(rng);
  const BoxQP q(A, b, std::vector<double>(d, 0.0), std::vector<double>(d, 1.0));
  for (auto _ : state) benchmark::DoNotOptimize(minimize_box_qp(q));
}
BENCHMARK(BM_BoxQP)->Arg(2)->Arg(8)->Arg(32);

}  // namespace

BENCHMARK_MAIN();
