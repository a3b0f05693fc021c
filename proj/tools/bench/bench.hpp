#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "umm/optimizers.hpp"
#include "umm/problems.hpp"

namespace umm::bench {

// Malformed or inconsistent configuration; the CLI maps it to exit code 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ProblemConfig {
  std::string kind = "one_d";      // one_d | regression | mlp | pd_quadratic
  std::string name = "lsq";        // one_d: lsq | quartic | logistic1d | nnparam
  std::string loss = "lsq";        // regression: lsq | logistic | gen_normal
  std::size_t n = 1000;            // regression examples
  std::size_t d = 20;              // regression / pd_quadratic dimension
  std::size_t depth = 1;           // mlp hidden layers
  std::size_t width = 32;
  std::size_t examples = 100;
  std::string data = "synthetic";  // mlp: synthetic | mnist
  std::string mnist_dir = "data/mnist";
};

// One optimizer entry of a config; a grid entry expands into one run per value.
struct OptimizerEntry {
  std::string label;
  OptimizerConfig config;
  std::string grid_param;    // "lr", "alpha0" or empty
  std::vector<double> grid;
};

struct BenchConfig {
  std::string name = "bench";
  ProblemConfig problem;
  int steps = 100;
  std::uint64_t seed = 0;
  bool record_wall_time = false;
  std::vector<OptimizerEntry> optimizers;
};

struct RunSpec {
  std::string name;   // file-safe, unique within a config
  std::string group;  // the entry label
  double hyper = 0.0; // grid value, 0 for non-grid entries
  OptimizerConfig config;
  bool baseline = false;
};

struct RunResult {
  RunSpec spec;
  RunTrace trace;
};

struct Options {
  std::optional<std::uint64_t> seed;
  std::string out = ".";
  int threads = 0;  // 0: hardware concurrency
};

// Learning-rate and initial-step grids used when an entry gives none.
std::vector<double> default_lr_grid();
std::vector<double> default_alpha0_grid();

BenchConfig parse_bench_config(const std::string& json_text);
BenchConfig load_bench_config(const std::string& path);
std::string read_text_file(const std::string& path);

// "mnist" reads the IDX files under mnist_dir and falls back to the seeded
// synthetic stand-in (with a note on stderr) when they are missing.
Dataset load_dataset(const std::string& data, const std::string& mnist_dir, std::size_t n, std::uint64_t seed);
ProblemSpec build_problem(const ProblemConfig& p, std::uint64_t seed);
std::vector<RunSpec> expand_runs(const BenchConfig& c);

// Runs every spec on the problem using up to `threads` workers. Results are
// in spec order regardless of scheduling.
std::vector<RunResult> run_all(const ProblemSpec& problem, const std::vector<RunSpec>& specs, int steps,
                               int threads);

std::string format_number(double v);
std::string trace_csv(const RunTrace& trace);

// Best run of each group: smallest loss reached on any step (NaN ignored).
struct GroupBest {
  std::string group;
  std::size_t run_index = 0;
  double best_loss = 0.0;
  double final_loss = 0.0;
  bool baseline = false;
};
std::vector<GroupBest> select_best(const std::vector<RunResult>& results);

// Commands. Return the process exit code; ConfigError is reported as 2 and
// any other error as 1.
int cmd_run(const std::string& config_path, const Options& opt);
int cmd_compare(const std::string& config_path, const Options& opt);
int cmd_tightness(const std::string& config_path, const Options& opt);

// Tightness study on h_1(eta) = f(x_1 - eta g_1) for softplus MLPs.
struct TightnessConfig {
  std::string name = "tightness";
  std::vector<std::size_t> depths{1, 2, 3, 4};
  std::size_t width = 8;
  std::size_t examples = 100;
  std::vector<int> degrees{2};
  std::vector<RemainderMethod> methods{RemainderMethod::Sharp, RemainderMethod::Lagrange};
  double etabar = 1.0;
  // When set, each depth uses etabar / |g_1| so the trust region is a ball
  // of radius etabar in parameter space rather than in eta.
  bool relative_trust = false;
  int samples = 201;
  std::uint64_t seed = 0;
  std::string data = "synthetic";
  std::string mnist_dir = "data/mnist";
};

struct TightnessCurve {
  std::size_t depth = 0;
  int k = 2;
  RemainderMethod method = RemainderMethod::Sharp;
  std::vector<double> eta, h, upper, lower;
  double etabar = 0.0;  // trust region actually used
  double eta1 = 0.0;     // minimizer of the upper bound on [0, etabar]
  double h_at_eta1 = 0.0;
  double rel_gap = 0.0;  // (upper - lower) / (1 + |h|) at eta1
};

struct TightnessResult {
  std::vector<TightnessCurve> curves;
  // eta1(sharp) / eta1(lagrange) per (depth, k), when both methods ran.
  struct Ratio {
    std::size_t depth;
    int k;
    double ratio;
  };
  std::vector<Ratio> ratios;
};

TightnessConfig parse_tightness_config(const std::string& json_text);
TightnessResult run_tightness(const TightnessConfig& c);

}  // namespace umm::bench
