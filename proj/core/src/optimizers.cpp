#include "umm/optimizers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "umm/boxqp.hpp"
#include "umm/errors.hpp"

namespace umm {

std::string_view to_string(OptimizerKind k) {
  switch (k) {
    case OptimizerKind::SafeRate: return "saferate";
    case OptimizerKind::SafeCombination: return "safecombination";
    case OptimizerKind::Fixed: return "fixed";
    case OptimizerKind::Backtracking: return "backtracking";
  }
  return "?";
}

OptimizerKind optimizer_kind_from_string(std::string_view name) {
  if (name == "saferate") return OptimizerKind::SafeRate;
  if (name == "safecombination") return OptimizerKind::SafeCombination;
  if (name == "fixed") return OptimizerKind::Fixed;
  if (name == "backtracking") return OptimizerKind::Backtracking;
  throw DomainError("unknown optimizer: " + std::string(name));
}

RealPoly EnclosureBound::upper(const LineContext& line) {
  const ExprGraph h = line_restrict(line.graph, line.x, line.v);
  return upper_poly(propagate_directional(h, line.etabar, k_, method_));
}

RealPoly SmoothnessBound::upper(const LineContext& line) {
  return RealPoly({line.fx, dot(line.g, line.v), 0.5 * beta_ * squared_norm(line.v)});
}

namespace {

bool all_finite(const std::vector<double>& v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

std::size_t stack_width(const Bindings& x, StackMode mode) {
  switch (mode) {
    case StackMode::Whole: return 1;
    case StackMode::PerLayer: return x.size();
    case StackMode::Identity: return total_size(x);
  }
  return 1;
}

}  // namespace

Optimizer::Optimizer(const ProblemSpec& problem, OptimizerConfig config, std::shared_ptr<BoundProvider> bound)
    : problem_(problem),
      config_(config),
      bound_(std::move(bound)),
      oracle_(config.oracle),
      x_(problem.init),
      start_(std::chrono::steady_clock::now()) {
  if (!(config_.etabar0 > 0.0)) throw DomainError("initial trust region must be positive");
  switch (config_.kind) {
    case OptimizerKind::SafeRate:
      if (!bound_) bound_ = std::make_shared<EnclosureBound>(config_.k, config_.method);
      etabar_.assign(1, config_.etabar0);
      break;
    case OptimizerKind::SafeCombination:
      if (std::isinf(config_.etabar0)) throw UnboundedTrust("SafeCombination needs a finite trust region");
      etabar_.assign(stack_width(x_, config_.stack), config_.etabar0);
      break;
    case OptimizerKind::Fixed:
      break;
    case OptimizerKind::Backtracking:
      if (!(config_.alpha0 > 0.0)) throw DomainError("backtracking needs alpha0 > 0");
      break;
  }
  evaluate_at_x();
}

void Optimizer::evaluate_at_x() {
  ValueAndGrad vg = value_and_grad(problem_.graph, x_);
  ++counters_.grad_evals;
  fx_ = vg.value;
  g_ = std::move(vg.grad);
}

TraceRow Optimizer::initial_row() const {
  TraceRow row;
  row.step = 0;
  row.loss = fx_;
  row.grad_norm = std::sqrt(squared_norm(g_));
  return row;
}

TraceRow Optimizer::step() {
  ++t_;
  TraceRow row;
  row.step = t_;
  row.grad_norm = std::sqrt(squared_norm(g_));
  row.etabar = etabar_;

  switch (config_.kind) {
    case OptimizerKind::SafeRate: row.eta = saferate_step(oracle_.direction(g_)); break;
    case OptimizerKind::SafeCombination: row.eta = safecombination_step(oracle_.direction(g_)); break;
    case OptimizerKind::Fixed: {
      axpy(1.0, oracle_.direction(g_), x_);
      row.eta = {config_.oracle.scale};
      ++points_;
      evaluate_at_x();
      break;
    }
    case OptimizerKind::Backtracking: row.eta = backtracking_step(); break;
  }

  const bool moved = std::any_of(row.eta.begin(), row.eta.end(), [](double e) { return e != 0.0; });
  stall_run_ = (!moved && row.grad_norm > 0.0) ? stall_run_ + 1 : 0;

  row.loss = fx_;
  row.points = points_;
  if (config_.record_wall_time)
    row.elapsed_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  return row;
}

std::vector<double> Optimizer::saferate_step(const Bindings& v) {
  const double etabar = etabar_.front();
  const RealPoly P = bound_->upper(LineContext{problem_.graph, x_, fx_, g_, v, etabar});
  ++counters_.propagations;
  double eta = 0.0;
  if (all_finite(P.coeffs())) eta = minimize_poly_on_interval(P, 0.0, etabar).argmin;
  if (eta != 0.0) axpy(eta, v, x_);
  ++points_;
  evaluate_at_x();
  update_trust({eta});
  return {eta};
}

std::vector<double> Optimizer::safecombination_step(const Bindings& v) {
  const DirectionStack stack = direction_stack(v, config_.stack);
  const std::size_t d = stack.d;
  if (d != etabar_.size()) throw ShapeError("SafeCombination: direction count changed");
  const ExprGraph h = subspace_restrict(problem_.graph, x_, stack.U, d);
  const QuadEnclosure q = propagate_quadratic(h, etabar_, config_.method);
  ++counters_.propagations;

  std::vector<double> eta(d, 0.0);
  if (std::isfinite(q.c0) && all_finite(q.c1) && all_finite(q.qhi)) {
    // upper bound c0 + c1^T eta + eta^T qhi eta  ==  c0 + 1/2 eta^T A eta - b^T eta
    std::vector<double> A(d * d);
    for (std::size_t i = 0; i < d * d; ++i) A[i] = 2.0 * q.qhi[i];
    std::vector<double> b(d);
    for (std::size_t i = 0; i < d; ++i) b[i] = -q.c1[i];
    const BoxQP qp(std::move(A), std::move(b), std::vector<double>(d, 0.0), etabar_);
    eta = minimize_box_qp(qp);
  }
  apply_stack(x_, stack, eta);
  ++points_;
  evaluate_at_x();
  update_trust(eta);
  return eta;
}

std::vector<double> Optimizer::backtracking_step() {
  const double gg = squared_norm(g_);
  double alpha = config_.alpha0;
  for (int i = 0; i <= config_.max_halvings; ++i, alpha *= 0.5) {
    Bindings trial = x_;
    axpy(-alpha, g_, trial);
    const double ft = eval(problem_.graph, trial);
    ++counters_.loss_evals;
    ++points_;
    if (ft <= fx_ - 0.5 * alpha * gg) {
      x_ = std::move(trial);
      evaluate_at_x();
      return {alpha};
    }
  }
  return {0.0};
}

void Optimizer::update_trust(const std::vector<double>& eta) {
  for (std::size_t i = 0; i < etabar_.size(); ++i) etabar_[i] = eta[i] >= 0.5 * etabar_[i] ? 2.0 * etabar_[i] : 0.5 * etabar_[i];
}

RunTrace run(const ProblemSpec& problem, const OptimizerConfig& config, int T, std::shared_ptr<BoundProvider> bound) {
  RunTrace trace;
  Optimizer opt(problem, config, std::move(bound));
  trace.rows.push_back(opt.initial_row());
  for (int t = 1; t <= T; ++t) {
    try {
      trace.rows.push_back(opt.step());
    } catch (const Error& e) {
      trace.aborted = true;
      trace.error = "step " + std::to_string(t) + ": " + e.what();
      break;
    }
    if (!trace.stalled && opt.stalled()) {
      trace.stalled = true;
      trace.stall_step = t;
    }
  }
  trace.counters = opt.counters();
  trace.final_x = opt.x();
  return trace;
}

Theorem1Report theorem1_harness(double beta, int T, std::size_t d) {
  const ProblemSpec problem = diagonal_quadratic(d, beta);
  OptimizerConfig config;
  config.kind = OptimizerKind::SafeRate;
  config.oracle = default_oracle_config(OracleKind::GD);
  config.etabar0 = 1.0;
  Optimizer opt(problem, config, std::make_shared<SmoothnessBound>(beta));

  Theorem1Report report;
  report.beta = beta;
  report.T = T;
  report.loss.push_back(opt.loss());
  report.min_slack = std::numeric_limits<double>::infinity();
  double min_gsq = std::numeric_limits<double>::infinity();
  for (int t = 1; t <= T; ++t) {
    const double gsq = squared_norm(opt.grad());
    const TraceRow row = opt.step();
    report.grad_sq.push_back(gsq);
    report.eta.push_back(row.eta.front());
    report.loss.push_back(row.loss);
    // With g = 0 every eta is a minimizer of the constant bound.
    if (gsq > 0.0) report.max_eta_error = std::max(report.max_eta_error, std::abs(row.eta.front() - 1.0 / beta));
    min_gsq = std::min(min_gsq, gsq);
    const double bound = 2.0 * beta * (report.loss.front() - row.loss) / t;
    report.min_slack = std::min(report.min_slack, bound - min_gsq);
    if (min_gsq > bound) report.rate_holds = false;
  }
  return report;
}

}  // namespace umm
