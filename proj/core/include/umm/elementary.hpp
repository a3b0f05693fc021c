#pragma once

#include <string_view>
#include <vector>

namespace umm {

// The closed set of univariate elementary functions a loss graph may use.
enum class Elementary { Exp, Log, Softplus, Sigmoid };

std::string_view to_string(Elementary fn);
Elementary elementary_from_string(std::string_view name);

bool in_domain(Elementary fn, double z);

// Numerically stable f(z). Throws DomainError for log of a non-positive value.
double evaluate(Elementary fn, double z);

// Highest derivative order supported by derivative() and derivative_breakpoints().
inline constexpr int kMaxDerivativeOrder = 8;

struct DerivativeValue {
  double value = 0.0;
  double error = 0.0;  // absolute bound on the rounding error of `value`
};

// f^(order)(z). Infinite z gives the limit value.
DerivativeValue derivative(Elementary fn, int order, double z);

// Sorted points where f^(order) changes monotonicity, i.e. the real zeros of
// f^(order+1). Empty for exp and log.
const std::vector<double>& derivative_breakpoints(Elementary fn, int order);

}  // namespace umm
