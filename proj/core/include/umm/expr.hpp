#pragma once

#include <string>
#include <vector>

#include "umm/elementary.hpp"
#include "umm/tensor.hpp"

namespace umm {

enum class OpKind { Constant, Variable, Add, Sub, Mul, MatMul, Sum, Unary, IntPow };

using NodeId = int;

struct Node {
  OpKind kind = OpKind::Constant;
  std::vector<NodeId> inputs;
  Shape shape;
  Tensor value;             // Constant
  std::string name;         // Variable
  Elementary fn = Elementary::Exp;  // Unary
  int exponent = 0;         // IntPow
};

// A DAG of tensor operations ending in a scalar. Nodes are appended in
// creation order and may only reference earlier nodes, so the node list is
// already a topological order.
//
// Add, Sub and Mul are elementwise; either operand may be a rank-0 scalar,
// which broadcasts. MatMul contracts the last axis of its left operand with
// the first axis of its right operand.
class ExprGraph {
 public:
  NodeId constant(Tensor value);
  NodeId scalar(double value) { return constant(Tensor::scalar(value)); }
  NodeId variable(const std::string& name, Shape shape);
  NodeId add(NodeId a, NodeId b);
  NodeId sub(NodeId a, NodeId b);
  NodeId mul(NodeId a, NodeId b);
  NodeId matmul(NodeId a, NodeId b);
  NodeId sum(NodeId a);
  NodeId unary(Elementary fn, NodeId a);
  NodeId pow(NodeId a, int exponent);

  void set_output(NodeId id);
  NodeId output() const;

  const std::vector<Node>& nodes() const { return nodes_; }
  const Node& node(NodeId id) const { return nodes_.at(static_cast<std::size_t>(id)); }
  std::size_t size() const { return nodes_.size(); }

  // Variables in creation order.
  std::vector<std::pair<std::string, Shape>> variables() const;

 private:
  NodeId push(Node n);
  void check_id(NodeId id) const;

  std::vector<Node> nodes_;
  NodeId output_ = -1;
};

// Value of every node, in node order. Throws UnboundVariable, ShapeError,
// DomainError.
std::vector<Tensor> forward(const ExprGraph& g, const Bindings& bindings);

double eval(const ExprGraph& g, const Bindings& bindings);

struct ValueAndGrad {
  double value = 0.0;
  Bindings grad;  // one entry per Variable
};

ValueAndGrad value_and_grad(const ExprGraph& g, const Bindings& bindings);
Tensor grad(const ExprGraph& g, const Bindings& bindings, const std::string& wrt);

// Name of the scalar (line) or vector (subspace) variable of a restricted graph.
inline constexpr const char* kEtaName = "eta";

// h(eta) = f(x0 + eta v): each Variable w becomes Constant(x0_w) + eta * Constant(v_w).
ExprGraph line_restrict(const ExprGraph& g, const Bindings& x0, const Bindings& v);

// h(eta) = f(x0 + U eta), eta in R^d: each Variable w becomes
// Constant(x0_w) + MatMul(Constant(U_w), eta) where U_w has shape (shape(w)..., d).
ExprGraph subspace_restrict(const ExprGraph& g, const Bindings& x0, const Bindings& U, std::size_t d);

}  // namespace umm
