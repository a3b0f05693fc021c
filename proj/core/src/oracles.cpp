#include "umm/oracles.hpp"

#include <cmath>
#include <string>

#include "umm/errors.hpp"

namespace umm {

std::string_view to_string(OracleKind k) {
  switch (k) {
    case OracleKind::GD: return "gd";
    case OracleKind::AdaGrad: return "adagrad";
    case OracleKind::Adam: return "adam";
  }
  return "?";
}

OracleKind oracle_kind_from_string(std::string_view name) {
  if (name == "gd") return OracleKind::GD;
  if (name == "adagrad") return OracleKind::AdaGrad;
  if (name == "adam") return OracleKind::Adam;
  throw DomainError("unknown oracle: " + std::string(name));
}

OracleConfig default_oracle_config(OracleKind kind) {
  OracleConfig c;
  c.kind = kind;
  c.scale = kind == OracleKind::GD ? 1.0 : 0.1;
  return c;
}

Bindings DirectionOracle::direction(const Bindings& g) {
  ++t_;
  Bindings v = zeros_like(g);
  if (m_.empty()) {
    m_ = zeros_like(g);
    v_ = zeros_like(g);
  }
  const double s = config_.scale;
  for (const auto& [name, gt] : g) {
    auto dst = v.at(name).data();
    auto m = m_.at(name).data();
    auto acc = v_.at(name).data();
    if (m.size() != gt.size()) throw ShapeError("oracle: gradient shape changed for " + name);
    for (std::size_t i = 0; i < gt.size(); ++i) {
      const double gi = gt[i];
      switch (config_.kind) {
        case OracleKind::GD: dst[i] = -s * gi; break;
        case OracleKind::AdaGrad: {
          acc[i] += gi * gi;
          const double denom = std::sqrt(acc[i] + config_.delta);
          dst[i] = denom > 0.0 ? -s * gi / denom : 0.0;
          break;
        }
        case OracleKind::Adam: {
          m[i] = config_.beta1 * m[i] + (1.0 - config_.beta1) * gi;
          acc[i] = config_.beta2 * acc[i] + (1.0 - config_.beta2) * gi * gi;
          const double mhat = m[i] / (1.0 - std::pow(config_.beta1, t_));
          const double vhat = acc[i] / (1.0 - std::pow(config_.beta2, t_));
          dst[i] = -s * mhat / (std::sqrt(vhat) + config_.epsilon);
          break;
        }
      }
    }
  }
  return v;
}

std::string_view to_string(StackMode m) {
  switch (m) {
    case StackMode::Whole: return "whole";
    case StackMode::PerLayer: return "per_layer";
    case StackMode::Identity: return "identity";
  }
  return "?";
}

StackMode stack_mode_from_string(std::string_view name) {
  if (name == "whole") return StackMode::Whole;
  if (name == "per_layer") return StackMode::PerLayer;
  if (name == "identity") return StackMode::Identity;
  throw DomainError("unknown direction stack mode: " + std::string(name));
}

DirectionStack direction_stack(const Bindings& v, StackMode mode) {
  DirectionStack s;
  switch (mode) {
    case StackMode::Whole: s.d = 1; break;
    case StackMode::PerLayer: s.d = v.size(); break;
    case StackMode::Identity: s.d = total_size(v); break;
  }
  std::size_t column = 0;
  for (const auto& [name, t] : v) {
    Shape shape = t.shape();
    shape.push_back(s.d);
    Tensor u(shape);
    auto dst = u.data();
    for (std::size_t i = 0; i < t.size(); ++i) {
      switch (mode) {
        case StackMode::Whole: dst[i] = t[i]; break;
        case StackMode::PerLayer: dst[i * s.d + column] = t[i]; break;
        case StackMode::Identity: dst[i * s.d + column + i] = 1.0; break;
      }
    }
    column += mode == StackMode::Identity ? t.size() : 1;
    s.U.emplace(name, std::move(u));
  }
  return s;
}

void apply_stack(Bindings& x, const DirectionStack& s, const std::vector<double>& eta) {
  if (eta.size() != s.d) throw ShapeError("apply_stack: eta has wrong length");
  for (auto& [name, t] : x) {
    auto it = s.U.find(name);
    if (it == s.U.end()) continue;
    auto dst = t.data();
    const auto u = it->second.data();
    for (std::size_t i = 0; i < t.size(); ++i) {
      double delta = 0.0;
      for (std::size_t j = 0; j < s.d; ++j) delta += u[i * s.d + j] * eta[j];
      dst[i] += delta;
    }
  }
}

}  // namespace umm
