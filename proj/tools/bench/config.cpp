#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include "bench.hpp"
#include "json.hpp"
#include "umm/errors.hpp"

namespace umm::bench {

using nlohmann::json;

std::vector<double> default_lr_grid() { return {1e-4, 1e-3, 1e-2, 1e-1, 1e0, 1e1}; }

std::vector<double> default_alpha0_grid() { return {1e-5, 1e-4, 1e-3, 1e-2, 1e-1, 1e0, 1e1, 1e2, 1e3}; }

std::string read_text_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot open config " + path);
  std::ostringstream os;
  os << f.rdbuf();
  return os.str();
}

namespace {

void check_keys(const json& j, const std::set<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + " must be an object");
  for (const auto& [key, value] : j.items())
    if (!allowed.count(key)) throw ConfigError("unknown key '" + key + "' in " + where);
}

template <class T>
T get_or(const json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad value for '") + key + "': " + e.what());
  }
}

std::size_t positive_size(const json& j, const char* key, std::size_t fallback) {
  if (!j.contains(key)) return fallback;
  const json& v = j.at(key);
  if (!v.is_number_integer() || v.get<long long>() < 1) throw ConfigError(std::string("'") + key + "' must be a positive integer");
  return v.get<std::size_t>();
}

// A number, or the strings "inf" / "infinity".
double number(const json& v, const std::string& key) {
  if (v.is_number()) return v.get<double>();
  if (v.is_string() && (v == "inf" || v == "infinity")) return std::numeric_limits<double>::infinity();
  throw ConfigError("'" + key + "' must be a number");
}

std::vector<double> grid(const json& j, const char* key, std::vector<double> fallback) {
  if (!j.contains(key)) return fallback;
  const json& v = j.at(key);
  std::vector<double> out;
  if (v.is_array()) {
    for (const json& e : v) out.push_back(number(e, key));
  } else {
    out.push_back(number(v, key));
  }
  if (out.empty()) throw ConfigError(std::string("empty grid for '") + key + "'");
  for (double x : out)
    if (!(x > 0.0) || !std::isfinite(x)) throw ConfigError(std::string("grid values for '") + key + "' must be positive");
  return out;
}

template <class F>
auto convert(F f, const std::string& what) {
  try {
    return f();
  } catch (const umm::Error& e) {
    throw ConfigError(what + ": " + e.what());
  }
}

ProblemConfig parse_problem(const json& j) {
  ProblemConfig p;
  if (!j.is_object()) throw ConfigError("'problem' must be an object");
  p.kind = get_or<std::string>(j, "kind", p.kind);
  if (p.kind == "one_d") {
    check_keys(j, {"kind", "name"}, "problem");
    p.name = get_or<std::string>(j, "name", p.name);
    static const std::set<std::string> names{"lsq", "quartic", "logistic1d", "nnparam"};
    if (!names.count(p.name)) throw ConfigError("unknown one-dimensional problem '" + p.name + "'");
  } else if (p.kind == "regression") {
    check_keys(j, {"kind", "loss", "n", "d"}, "problem");
    p.loss = get_or<std::string>(j, "loss", p.loss);
    convert([&] { return regression_kind_from_string(p.loss); }, "problem.loss");
    p.n = positive_size(j, "n", p.n);
    p.d = positive_size(j, "d", p.d);
  } else if (p.kind == "mlp") {
    check_keys(j, {"kind", "depth", "width", "examples", "data", "mnist_dir"}, "problem");
    p.depth = positive_size(j, "depth", p.depth);
    p.width = positive_size(j, "width", p.width);
    p.examples = positive_size(j, "examples", p.examples);
    p.data = get_or<std::string>(j, "data", p.data);
    p.mnist_dir = get_or<std::string>(j, "mnist_dir", p.mnist_dir);
    if (p.data != "synthetic" && p.data != "mnist") throw ConfigError("problem.data must be synthetic or mnist");
  } else if (p.kind == "pd_quadratic") {
    check_keys(j, {"kind", "d"}, "problem");
    p.d = positive_size(j, "d", p.d);
  } else {
    throw ConfigError("unknown problem kind '" + p.kind + "'");
  }
  return p;
}

OptimizerEntry parse_optimizer(const json& j) {
  OptimizerEntry e;
  if (!j.is_object()) throw ConfigError("optimizer entries must be objects");
  const std::string kind = get_or<std::string>(j, "kind", "");
  OptimizerConfig& c = e.config;
  if (kind == "saferate" || kind == "safecombination") {
    check_keys(j, {"kind", "label", "oracle", "scale", "k", "method", "etabar0", "stack"}, "optimizer " + kind);
    c.kind = kind == "saferate" ? OptimizerKind::SafeRate : OptimizerKind::SafeCombination;
    const std::string oracle = get_or<std::string>(j, "oracle", "gd");
    c.oracle = default_oracle_config(convert([&] { return oracle_kind_from_string(oracle); }, "oracle"));
    if (j.contains("scale")) c.oracle.scale = number(j.at("scale"), "scale");
    c.k = get_or<int>(j, "k", 2);
    if (c.k < kMinDegree || c.k > kMaxDegree) throw ConfigError("k must be in [2, 6]");
    if (c.kind == OptimizerKind::SafeCombination && c.k != 2) throw ConfigError("safecombination uses k = 2");
    const std::string method = get_or<std::string>(j, "method", "sharp");
    c.method = convert([&] { return remainder_method_from_string(method); }, "method");
    if (j.contains("etabar0")) c.etabar0 = number(j.at("etabar0"), "etabar0");
    if (!(c.etabar0 > 0.0)) throw ConfigError("etabar0 must be positive");
    const std::string stack = get_or<std::string>(j, "stack", kind == "saferate" ? "whole" : "per_layer");
    c.stack = convert([&] { return stack_mode_from_string(stack); }, "stack");
    e.label = get_or<std::string>(j, "label", kind + "_" + oracle + (kind == "safecombination" ? "_" + stack : ""));
  } else if (kind == "gd" || kind == "adam" || kind == "adagrad") {
    check_keys(j, {"kind", "label", "lr"}, "optimizer " + kind);
    c.kind = OptimizerKind::Fixed;
    c.oracle = default_oracle_config(oracle_kind_from_string(kind));
    e.grid_param = "lr";
    e.grid = grid(j, "lr", default_lr_grid());
    e.label = get_or<std::string>(j, "label", kind);
  } else if (kind == "backtracking") {
    check_keys(j, {"kind", "label", "alpha0", "max_halvings"}, "optimizer backtracking");
    c.kind = OptimizerKind::Backtracking;
    c.max_halvings = get_or<int>(j, "max_halvings", c.max_halvings);
    e.grid_param = "alpha0";
    e.grid = grid(j, "alpha0", default_alpha0_grid());
    e.label = get_or<std::string>(j, "label", kind);
  } else {
    throw ConfigError("unknown optimizer kind '" + kind + "'");
  }
  return e;
}

std::string file_safe(const std::string& s) {
  std::string out;
  for (char ch : s) {
    const bool ok = (ch >= 'a' && ch <= 'z') || (ch >= 'A' && ch <= 'Z') || (ch >= '0' && ch <= '9') || ch == '-' ||
                    ch == '_' || ch == '.' || ch == '+';
    out += ok ? ch : '_';
  }
  return out;
}

json parse_json(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
}

}  // namespace

BenchConfig parse_bench_config(const std::string& json_text) {
  const json j = parse_json(json_text);
  check_keys(j, {"name", "problem", "steps", "seed", "record_wall_time", "optimizers"}, "config");
  BenchConfig c;
  c.name = get_or<std::string>(j, "name", c.name);
  if (!j.contains("problem")) throw ConfigError("config needs a 'problem'");
  c.problem = parse_problem(j.at("problem"));
  c.steps = get_or<int>(j, "steps", c.steps);
  if (c.steps < 0) throw ConfigError("'steps' must be non-negative");
  c.seed = get_or<std::uint64_t>(j, "seed", c.seed);
  c.record_wall_time = get_or<bool>(j, "record_wall_time", false);
  if (!j.contains("optimizers") || !j.at("optimizers").is_array()) throw ConfigError("config needs an 'optimizers' array");
  for (const json& e : j.at("optimizers")) c.optimizers.push_back(parse_optimizer(e));
  if (c.optimizers.empty()) throw ConfigError("empty optimizer grid");
  std::set<std::string> labels;
  for (const auto& e : c.optimizers)
    if (!labels.insert(e.label).second) throw ConfigError("duplicate optimizer label '" + e.label + "'");
  for (auto& e : c.optimizers) e.config.record_wall_time = c.record_wall_time;
  return c;
}

BenchConfig load_bench_config(const std::string& path) { return parse_bench_config(read_text_file(path)); }

std::vector<RunSpec> expand_runs(const BenchConfig& c) {
  std::vector<RunSpec> runs;
  for (const OptimizerEntry& e : c.optimizers) {
    if (e.grid_param.empty()) {
      runs.push_back({file_safe(e.label), e.label, 0.0, e.config, false});
      continue;
    }
    for (double v : e.grid) {
      RunSpec r{"", e.label, v, e.config, true};
      if (e.grid_param == "lr") r.config.oracle.scale = v;
      else r.config.alpha0 = v;
      char buf[32];
      std::snprintf(buf, sizeof buf, "%g", v);
      r.name = file_safe(e.label + "_" + e.grid_param + buf);
      runs.push_back(r);
    }
  }
  return runs;
}

TightnessConfig parse_tightness_config(const std::string& json_text) {
  const json j = parse_json(json_text);
  check_keys(j, {"name", "depths", "width", "examples", "degrees", "methods", "etabar", "relative_trust", "samples", "seed",
                 "data", "mnist_dir"},
             "tightness config");
  TightnessConfig c;
  c.name = get_or<std::string>(j, "name", c.name);
  c.depths = get_or<std::vector<std::size_t>>(j, "depths", c.depths);
  c.width = positive_size(j, "width", c.width);
  c.examples = positive_size(j, "examples", c.examples);
  c.degrees = get_or<std::vector<int>>(j, "degrees", c.degrees);
  if (j.contains("methods")) {
    c.methods.clear();
    for (const std::string& m : get_or<std::vector<std::string>>(j, "methods", {}))
      c.methods.push_back(convert([&] { return remainder_method_from_string(m); }, "methods"));
  }
  if (j.contains("etabar")) c.etabar = number(j.at("etabar"), "etabar");
  c.relative_trust = get_or<bool>(j, "relative_trust", c.relative_trust);
  c.samples = get_or<int>(j, "samples", c.samples);
  c.seed = get_or<std::uint64_t>(j, "seed", c.seed);
  c.data = get_or<std::string>(j, "data", c.data);
  c.mnist_dir = get_or<std::string>(j, "mnist_dir", c.mnist_dir);
  if (c.depths.empty() || c.degrees.empty() || c.methods.empty()) throw ConfigError("empty tightness grid");
  for (std::size_t d : c.depths)
    if (d < 1) throw ConfigError("depths must be >= 1");
  for (int k : c.degrees)
    if (k < kMinDegree || k > kMaxDegree) throw ConfigError("degrees must be in [2, 6]");
  if (!(c.etabar > 0.0) || !std::isfinite(c.etabar)) throw ConfigError("etabar must be positive and finite");
  if (c.samples < 2) throw ConfigError("samples must be >= 2");
  if (c.data != "synthetic" && c.data != "mnist") throw ConfigError("data must be synthetic or mnist");
  return c;
}

}  // namespace umm::bench
