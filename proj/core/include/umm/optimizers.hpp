#pragma once

#include <chrono>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "umm/enclosure.hpp"
#include "umm/oracles.hpp"
#include "umm/problems.hpp"

namespace umm {

// SafeRate / SafeCombination are the MM optimizers; Fixed applies the oracle
// direction with the oracle scale as learning rate (plain GD, Adam, AdaGrad);
// Backtracking is Armijo line search along -g.
enum class OptimizerKind { SafeRate, SafeCombination, Fixed, Backtracking };

std::string_view to_string(OptimizerKind k);
OptimizerKind optimizer_kind_from_string(std::string_view name);

struct Counters {
  std::size_t grad_evals = 0;
  std::size_t loss_evals = 0;  // loss-only evaluations (backtracking trials)
  std::size_t propagations = 0;
};

// Everything a bound provider may use about the current line x + eta v.
struct LineContext {
  const ExprGraph& graph;
  const Bindings& x;
  double fx;
  const Bindings& g;
  const Bindings& v;
  double etabar;
};

// Supplies a polynomial P with P(0) = f(x) and P(eta) >= f(x + eta v) on [0, etabar].
class BoundProvider {
 public:
  virtual ~BoundProvider() = default;
  virtual RealPoly upper(const LineContext& line) = 0;
};

// Upper polynomial of the degree-k Taylor enclosure of the restricted graph.
class EnclosureBound : public BoundProvider {
 public:
  EnclosureBound(int k, RemainderMethod method) : k_(k), method_(method) {}
  RealPoly upper(const LineContext& line) override;

 private:
  int k_;
  RemainderMethod method_;
};

// f + eta g^T v + (beta/2) eta^2 |v|^2, valid for beta-smooth f.
class SmoothnessBound : public BoundProvider {
 public:
  explicit SmoothnessBound(double beta) : beta_(beta) {}
  RealPoly upper(const LineContext& line) override;

 private:
  double beta_;
};

struct OptimizerConfig {
  OptimizerKind kind = OptimizerKind::SafeRate;
  OracleConfig oracle;                      // for Fixed, oracle.scale is the learning rate
  StackMode stack = StackMode::Whole;       // SafeCombination only
  int k = 2;                                // SafeRate enclosure degree
  RemainderMethod method = RemainderMethod::Sharp;
  double etabar0 = 1.0;                     // +inf allowed for SafeRate
  double alpha0 = 1.0;                      // Backtracking
  int max_halvings = 60;
  int stall_window = 50;
  bool record_wall_time = false;            // elapsed_s stays 0 otherwise
};

// Row 0 describes x_1 (eta and etabar empty). Row t >= 1 describes step t:
// loss f(x_{t+1}), grad_norm |g_t|, the chosen eta_t, the trust region
// etabar_t it was chosen in, and the cumulative count of evaluated points.
struct TraceRow {
  int step = 0;
  double loss = 0.0;
  double grad_norm = 0.0;
  std::vector<double> eta;
  std::vector<double> etabar;
  std::size_t points = 0;
  double elapsed_s = 0.0;
};

struct RunTrace {
  std::vector<TraceRow> rows;
  bool stalled = false;   // eta = 0 with non-zero gradient for stall_window steps in a row
  int stall_step = -1;
  bool aborted = false;   // a step threw; rows hold the steps completed before it
  std::string error;
  Counters counters;
  Bindings final_x;
};

class Optimizer {
 public:
  // The problem must outlive the optimizer. `bound` overrides the SafeRate
  // enclosure bound.
  Optimizer(const ProblemSpec& problem, OptimizerConfig config, std::shared_ptr<BoundProvider> bound = nullptr);

  TraceRow initial_row() const;
  TraceRow step();

  const Bindings& x() const { return x_; }
  double loss() const { return fx_; }
  const Bindings& grad() const { return g_; }
  const std::vector<double>& etabar() const { return etabar_; }
  const Counters& counters() const { return counters_; }
  const OptimizerConfig& config() const { return config_; }
  int steps_taken() const { return t_; }
  bool stalled() const { return stall_run_ >= config_.stall_window; }

 private:
  void evaluate_at_x();
  std::vector<double> saferate_step(const Bindings& v);
  std::vector<double> safecombination_step(const Bindings& v);
  std::vector<double> backtracking_step();
  void update_trust(const std::vector<double>& eta);

  const ProblemSpec& problem_;
  OptimizerConfig config_;
  std::shared_ptr<BoundProvider> bound_;
  DirectionOracle oracle_;
  Bindings x_, g_;
  double fx_ = 0.0;
  std::vector<double> etabar_;
  Counters counters_;
  std::size_t points_ = 0;
  int t_ = 0;
  int stall_run_ = 0;
  std::chrono::steady_clock::time_point start_;
};

// Runs T steps. Errors thrown by a step are caught and reported through
// RunTrace::aborted; construction errors propagate.
RunTrace run(const ProblemSpec& problem, const OptimizerConfig& config, int T,
             std::shared_ptr<BoundProvider> bound = nullptr);

struct Theorem1Report {
  double beta = 0.0;
  int T = 0;
  std::vector<double> eta;           // eta_1 .. eta_T
  std::vector<double> grad_sq;       // |g_1|^2 .. |g_T|^2
  std::vector<double> loss;          // f(x_1) .. f(x_{T+1})
  double max_eta_error = 0.0;        // max |eta_t - 1/beta| over steps with g_t != 0
  bool rate_holds = true;            // min_{t<=T'} |g_t|^2 <= 2 beta (f(x_1) - f(x_{T'+1})) / T' for all T' <= T
  double min_slack = 0.0;            // smallest (bound - min |g|^2) over T'
};

// SafeRate with GD directions and the smoothness bound, etabar_1 = 1, on
// diagonal_quadratic(d, beta).
Theorem1Report theorem1_harness(double beta, int T, std::size_t d = 8);

}  // namespace umm
