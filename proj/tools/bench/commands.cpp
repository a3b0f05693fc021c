#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <limits>
#include <thread>

#include "bench.hpp"
#include "report.hpp"
#include "umm/errors.hpp"

namespace umm::bench {

Dataset load_dataset(const std::string& data, const std::string& mnist_dir, std::size_t n, std::uint64_t seed) {
  if (data == "mnist") {
    try {
      return load_mnist(mnist_dir, n);
    } catch (const FileNotFound& e) {
      std::cerr << "note: " << e.what() << "; using the synthetic stand-in\n";
    }
  }
  return synthetic_mnist(n, seed);
}

ProblemSpec build_problem(const ProblemConfig& p, std::uint64_t seed) {
  if (p.kind == "one_d") return one_d_problem(p.name);
  if (p.kind == "regression") return random_regression(regression_kind_from_string(p.loss), p.n, p.d, seed).problem;
  if (p.kind == "mlp") {
    const Dataset data = load_dataset(p.data, p.mnist_dir, p.examples, seed);
    return mlp_problem(p.depth, p.width, data, seed + 1);
  }
  if (p.kind == "pd_quadratic") return random_pd_quadratic(p.d, seed);
  throw ConfigError("unknown problem kind '" + p.kind + "'");
}

std::vector<RunResult> run_all(const ProblemSpec& problem, const std::vector<RunSpec>& specs, int steps,
                               int threads) {
  std::vector<RunResult> results(specs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < specs.size(); i = next++) {
      results[i].spec = specs[i];
      try {
        results[i].trace = run(problem, specs[i].config, steps);
      } catch (const Error& e) {
        results[i].trace.aborted = true;
        results[i].trace.error = std::string("setup: ") + e.what();
      }
    }
  };
  std::size_t n = threads > 0 ? static_cast<std::size_t>(threads) : std::thread::hardware_concurrency();
  n = std::max<std::size_t>(1, std::min(n, specs.size()));
  std::vector<std::thread> pool;
  for (std::size_t t = 1; t < n; ++t) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
  return results;
}

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace {

std::string join(const std::vector<double>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ';';
    out += format_number(v[i]);
  }
  return out;
}

std::string status(const RunTrace& t) {
  if (t.aborted) return "aborted";
  if (t.stalled) return "stalled";
  return "ok";
}

// Runs the config and writes trace_<name>.csv for every run plus runs.csv.
struct Executed {
  BenchConfig config;
  ProblemSpec problem;
  std::vector<RunResult> results;
  bool any_aborted = false;
};

Executed execute(const std::string& config_path, const Options& opt) {
  Executed ex;
  ex.config = load_bench_config(config_path);
  if (opt.seed) ex.config.seed = *opt.seed;
  ex.problem = build_problem(ex.config.problem, ex.config.seed);
  const std::vector<RunSpec> specs = expand_runs(ex.config);
  ex.results = run_all(ex.problem, specs, ex.config.steps, opt.threads);

  std::filesystem::create_directories(opt.out);
  const std::filesystem::path out(opt.out);
  std::string index = csv_row({"run", "group", "hyper", "status", "steps_completed", "error"});
  for (const RunResult& r : ex.results) {
    write_file((out / ("trace_" + r.spec.name + ".csv")).string(), trace_csv(r.trace));
    index += csv_row({r.spec.name, r.spec.group, r.spec.baseline ? format_number(r.spec.hyper) : "", status(r.trace),
                      std::to_string(r.trace.rows.empty() ? 0 : r.trace.rows.size() - 1), r.trace.error});
    if (r.trace.aborted) {
      ex.any_aborted = true;
      std::cerr << "run " << r.spec.name << " aborted: " << r.trace.error << "\n";
    }
  }
  write_file((out / "runs.csv").string(), index);
  return ex;
}

template <class F>
int guarded(F f) {
  try {
    return f();
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace

std::string trace_csv(const RunTrace& trace) {
  std::string out = csv_row({"step", "loss", "grad_norm", "eta", "etabar", "points_evaluated", "elapsed_s"});
  for (const TraceRow& r : trace.rows) {
    out += csv_row({std::to_string(r.step), format_number(r.loss), format_number(r.grad_norm), join(r.eta),
                    join(r.etabar), std::to_string(r.points), format_number(r.elapsed_s)});
  }
  return out;
}

std::vector<GroupBest> select_best(const std::vector<RunResult>& results) {
  std::vector<GroupBest> best;
  for (std::size_t i = 0; i < results.size(); ++i) {
    const RunResult& r = results[i];
    double m = std::numeric_limits<double>::infinity();
    for (const TraceRow& row : r.trace.rows)
      if (!std::isnan(row.loss)) m = std::min(m, row.loss);
    auto it = std::find_if(best.begin(), best.end(), [&](const GroupBest& b) { return b.group == r.spec.group; });
    const double final_loss = r.trace.rows.empty() ? std::numeric_limits<double>::quiet_NaN() : r.trace.rows.back().loss;
    if (it == best.end()) {
      best.push_back({r.spec.group, i, m, final_loss, r.spec.baseline});
    } else if (m < it->best_loss) {
      *it = {r.spec.group, i, m, final_loss, r.spec.baseline};
    }
  }
  return best;
}

int cmd_run(const std::string& config_path, const Options& opt) {
  return guarded([&] { return execute(config_path, opt).any_aborted ? 1 : 0; });
}

int cmd_compare(const std::string& config_path, const Options& opt) {
  return guarded([&] {
    const Executed ex = execute(config_path, opt);
    const std::vector<GroupBest> best = select_best(ex.results);
    const bool has_opt = ex.problem.optimum && !ex.problem.optimum->unbounded;
    const double fstar = has_opt ? ex.problem.optimum->value : 0.0;

    std::string summary = csv_row({"group", "kind", "best_run", "hyper", "best_loss", "final_loss", "final_gap",
                                   "points_evaluated", "status"});
    std::vector<Series> series;
    for (const GroupBest& b : best) {
      const RunResult& r = ex.results[b.run_index];
      const std::size_t points = r.trace.rows.empty() ? 0 : r.trace.rows.back().points;
      summary += csv_row({b.group, std::string(to_string(r.spec.config.kind)), r.spec.name,
                          b.baseline ? format_number(r.spec.hyper) : "", format_number(b.best_loss),
                          format_number(b.final_loss), has_opt ? format_number(b.final_loss - fstar) : "",
                          std::to_string(points), status(r.trace)});
      Series s{b.group + (b.baseline ? " (" + format_number(r.spec.hyper) + ")" : ""), {}, {}};
      for (const TraceRow& row : r.trace.rows) {
        s.x.push_back(static_cast<double>(row.points));
        s.y.push_back(row.loss - fstar);
      }
      series.push_back(std::move(s));
    }
    const std::filesystem::path out(opt.out);
    write_file((out / "summary.csv").string(), summary);
    write_file((out / "compare.svg").string(),
               line_chart_svg(ex.config.name, "points evaluated", has_opt ? "loss - optimum" : "loss", series, true,
                              true));
    return ex.any_aborted ? 1 : 0;
  });
}

int cmd_tightness(const std::string& config_path, const Options& opt) {
  return guarded([&] {
    TightnessConfig c = parse_tightness_config(read_text_file(config_path));
    if (opt.seed) c.seed = *opt.seed;
    const TightnessResult res = run_tightness(c);

    std::filesystem::create_directories(opt.out);
    const std::filesystem::path out(opt.out);
    std::string curves = csv_row({"depth", "k", "method", "eta", "h", "upper", "lower"});
    std::string summary = csv_row({"depth", "k", "method", "eta1", "h_at_eta1", "rel_gap"});
    for (const TightnessCurve& cv : res.curves) {
      const std::string m(to_string(cv.method));
      for (std::size_t i = 0; i < cv.eta.size(); ++i)
        curves += csv_row({std::to_string(cv.depth), std::to_string(cv.k), m, format_number(cv.eta[i]),
                           format_number(cv.h[i]), format_number(cv.upper[i]), format_number(cv.lower[i])});
      summary += csv_row({std::to_string(cv.depth), std::to_string(cv.k), m, format_number(cv.eta1),
                          format_number(cv.h_at_eta1), format_number(cv.rel_gap)});
    }
    std::string ratios = csv_row({"depth", "k", "eta1_sharp_over_lagrange"});
    for (const auto& r : res.ratios)
      ratios += csv_row({std::to_string(r.depth), std::to_string(r.k), format_number(r.ratio)});
    write_file((out / "tightness_curves.csv").string(), curves);
    write_file((out / "tightness_summary.csv").string(), summary);
    write_file((out / "tightness_ratios.csv").string(), ratios);

    for (std::size_t depth : c.depths) {
      for (int k : c.degrees) {
        std::vector<Series> series;
        for (const TightnessCurve& cv : res.curves) {
          if (cv.depth != depth || cv.k != k) continue;
          if (series.empty()) series.push_back({"h", cv.eta, cv.h});
          const std::string m(to_string(cv.method));
          series.push_back({"upper " + m, cv.eta, cv.upper});
          series.push_back({"lower " + m, cv.eta, cv.lower});
        }
        const std::string tag = "depth" + std::to_string(depth) + "_k" + std::to_string(k);
        write_file((out / ("tightness_" + tag + ".svg")).string(),
                   line_chart_svg(c.name + " " + tag, "eta", "h(eta)", series, false, false));
      }
    }
    return 0;
  });
}

}  // namespace umm::bench
