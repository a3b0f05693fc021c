#pragma once

#include <string_view>

#include "umm/tensor.hpp"

namespace umm {

enum class OracleKind { GD, AdaGrad, Adam };

std::string_view to_string(OracleKind k);
OracleKind oracle_kind_from_string(std::string_view name);

struct OracleConfig {
  OracleKind kind = OracleKind::GD;
  // Multiplies the canonical direction. SafeRate and SafeCombination use 1
  // for GD and 0.1 for AdaGrad/Adam; baselines pass their learning rate.
  double scale = 1.0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  double delta = 0.0;  // AdaGrad
};

OracleConfig default_oracle_config(OracleKind kind);

// Maps the gradient history to an update direction. Sees only gradients;
// never evaluates the loss.
class DirectionOracle {
 public:
  explicit DirectionOracle(OracleConfig config) : config_(config) {}

  // Consumes g_t and returns v_t:
  //   gd      -scale * g
  //   adagrad -scale * g / sqrt(sum g^2 + delta)   (0 where the denominator is 0)
  //   adam    -scale * mhat / (sqrt(vhat) + epsilon), bias corrected
  Bindings direction(const Bindings& g);

  const OracleConfig& config() const { return config_; }
  int steps() const { return t_; }

 private:
  OracleConfig config_;
  int t_ = 0;
  Bindings m_, v_;
};

// How a direction becomes the columns of U_t.
enum class StackMode { Whole, PerLayer, Identity };

std::string_view to_string(StackMode m);
StackMode stack_mode_from_string(std::string_view name);

struct DirectionStack {
  Bindings U;  // U[w] has shape (shape(w)..., d)
  std::size_t d = 0;
};

// Whole: one column equal to v. PerLayer: one column per parameter tensor,
// holding v on that tensor and zero elsewhere (columns follow Bindings order).
// Identity: one unit column per scalar coordinate; v only supplies shapes.
DirectionStack direction_stack(const Bindings& v, StackMode mode);

// x += U eta
void apply_stack(Bindings& x, const DirectionStack& s, const std::vector<double>& eta);

}  // namespace umm
