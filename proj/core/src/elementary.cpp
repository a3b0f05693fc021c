#include "umm/elementary.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <string>

#include "umm/errors.hpp"
#include "umm/polymin.hpp"

namespace umm {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double softplus(double z) {
  if (std::isinf(z)) return z > 0 ? z : 0.0;
  return std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z)));
}

using Coeffs = std::vector<double>;

Coeffs poly_derivative(const Coeffs& p) {
  Coeffs d(p.size() > 1 ? p.size() - 1 : 1, 0.0);
  for (std::size_t i = 1; i < p.size(); ++i) d[i - 1] = static_cast<double>(i) * p[i];
  return d;
}

Coeffs poly_mul(const Coeffs& a, const Coeffs& b) {
  Coeffs out(a.size() + b.size() - 1, 0.0);
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j) out[i + j] += a[i] * b[j];
  return out;
}

// The j-th derivative of the logistic sigmoid is P_j(s) with s = sigmoid(z);
// for j >= 1, P_j(s) = s (1 - s) Q_j(s). Coefficients are integers, so the
// tables below are exact in double precision.
struct SigmoidTables {
  std::array<Coeffs, kMaxDerivativeOrder + 2> p;
  std::array<Coeffs, kMaxDerivativeOrder + 2> q;
  std::array<double, kMaxDerivativeOrder + 2> q_abs_sum{};
  // breakpoints[j]: zeros of P_{j+1} in z, i.e. where P_j changes monotonicity.
  std::array<std::vector<double>, kMaxDerivativeOrder + 1> breakpoints;

  SigmoidTables() {
    const Coeffs s_one_minus_s{0.0, 1.0, -1.0};
    p[0] = {0.0, 1.0};
    for (std::size_t j = 1; j < p.size(); ++j) p[j] = poly_mul(poly_derivative(p[j - 1]), s_one_minus_s);
    q[0] = {};
    for (std::size_t j = 1; j < p.size(); ++j) {
      // Synthetic division of P_j by (s - s^2): first by s (drop c_0 == 0),
      // then by (1 - s).
      Coeffs a(p[j].begin() + 1, p[j].end());
      const std::size_t m = a.size() - 1;  // degree of a
      Coeffs b(m, 0.0);                    // a = (1 - s) b
      // a_i = b_i - b_{i-1}  =>  b_i = a_i + b_{i-1}
      double prev = 0.0;
      for (std::size_t i = 0; i < m; ++i) {
        b[i] = a[i] + prev;
        prev = b[i];
      }
      q[j] = b;
      double acc = 0.0;
      for (double c : b) acc += std::abs(c);
      q_abs_sum[j] = acc;
    }
    for (std::size_t j = 0; j < breakpoints.size(); ++j) {
      const Coeffs& qn = q[j + 1];
      if (qn.empty() || RealPoly(qn).degree() < 1) continue;
      for (double s : poly_roots(RealPoly(qn))) {
        if (s > 1e-12 && s < 1.0 - 1e-12) breakpoints[j].push_back(std::log(s / (1.0 - s)));
      }
    }
  }
};

const SigmoidTables& tables() {
  static const SigmoidTables t;
  return t;
}

DerivativeValue sigmoid_derivative(int order, double z) {
  const SigmoidTables& t = tables();
  const double s = sigmoid(z);
  if (order == 0) return {s, 2.0 * kEps * s};
  const double sm = sigmoid(-z);
  const Coeffs& q = t.q[static_cast<std::size_t>(order)];
  double acc = 0.0, mag = 0.0;
  for (auto it = q.rbegin(); it != q.rend(); ++it) {
    acc = acc * s + *it;
    mag = mag * s + std::abs(*it);
  }
  const double v = s * sm * acc;
  const double err = s * sm * mag * (static_cast<double>(q.size()) + 6.0) * kEps + 4.0 * kEps * std::abs(v);
  return {v, err};
}

double factorial(int n) {
  double f = 1.0;
  for (int i = 2; i <= n; ++i) f *= i;
  return f;
}

}  // namespace

std::string_view to_string(Elementary fn) {
  switch (fn) {
    case Elementary::Exp: return "exp";
    case Elementary::Log: return "log";
    case Elementary::Softplus: return "softplus";
    case Elementary::Sigmoid: return "sigmoid";
  }
  return "?";
}

Elementary elementary_from_string(std::string_view name) {
  if (name == "exp") return Elementary::Exp;
  if (name == "log") return Elementary::Log;
  if (name == "softplus") return Elementary::Softplus;
  if (name == "sigmoid") return Elementary::Sigmoid;
  throw DomainError("unknown elementary function: " + std::string(name));
}

bool in_domain(Elementary fn, double z) {
  if (std::isnan(z)) return false;
  return fn != Elementary::Log || z > 0.0;
}

double evaluate(Elementary fn, double z) {
  switch (fn) {
    case Elementary::Exp: return std::exp(z);
    case Elementary::Log:
      if (!(z > 0.0)) throw DomainError("log of non-positive value " + std::to_string(z));
      return std::log(z);
    case Elementary::Softplus: return softplus(z);
    case Elementary::Sigmoid: return sigmoid(z);
  }
  return 0.0;
}

DerivativeValue derivative(Elementary fn, int order, double z) {
  if (order < 0 || order > kMaxDerivativeOrder) throw UnsupportedDegree("derivative order out of range");
  switch (fn) {
    case Elementary::Exp: {
      const double v = std::exp(z);
      return {v, 2.0 * kEps * v};
    }
    case Elementary::Log: {
      if (!(z > 0.0)) throw DomainError("log derivative at non-positive value");
      if (order == 0) {
        const double v = std::log(z);
        return {v, 2.0 * kEps * std::abs(v)};
      }
      // (-1)^(order-1) (order-1)! / z^order
      const double sign = (order % 2 == 1) ? 1.0 : -1.0;
      const double v = sign * factorial(order - 1) / std::pow(z, order);
      return {v, (order + 4.0) * kEps * std::abs(v)};
    }
    case Elementary::Softplus: {
      if (order == 0) {
        const double v = softplus(z);
        return {v, 4.0 * kEps * std::abs(v)};
      }
      return sigmoid_derivative(order - 1, z);
    }
    case Elementary::Sigmoid: return sigmoid_derivative(order, z);
  }
  return {};
}

const std::vector<double>& derivative_breakpoints(Elementary fn, int order) {
  static const std::vector<double> none;
  if (order < 0 || order > kMaxDerivativeOrder) throw UnsupportedDegree("breakpoint order out of range");
  switch (fn) {
    case Elementary::Exp:
    case Elementary::Log: return none;
    case Elementary::Softplus:
      // softplus^(order) = sigmoid^(order-1); softplus itself is monotone.
      if (order == 0) return none;
      return tables().breakpoints[static_cast<std::size_t>(order - 1)];
    case Elementary::Sigmoid: return tables().breakpoints[static_cast<std::size_t>(order)];
  }
  return none;
}

}  // namespace umm
