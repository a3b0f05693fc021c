#include "umm/expr.hpp"

#include <cmath>

#include "umm/errors.hpp"

namespace umm {

namespace {

Shape broadcast_shape(const Shape& a, const Shape& b, const char* op) {
  if (a == b) return a;
  if (a.empty()) return b;
  if (b.empty()) return a;
  throw ShapeError(std::string(op) + ": incompatible shapes " + shape_string(a) + " and " + shape_string(b));
}

struct MatDims {
  std::size_t m, k, n;
};

MatDims matmul_dims(const Shape& a, const Shape& b) {
  if (a.empty() || b.empty()) throw ShapeError("matmul: operands must have rank >= 1");
  if (a.back() != b.front()) {
    throw ShapeError("matmul: contracted axes differ, " + shape_string(a) + " x " + shape_string(b));
  }
  const std::size_t k = a.back();
  return {numel(a) / std::max<std::size_t>(k, 1), k, numel(b) / std::max<std::size_t>(k, 1)};
}

// out[m, n] = sum_k a[m, k] b[k, n]
void matmul_raw(const double* a, const double* b, double* out, const MatDims& d) {
  for (std::size_t i = 0; i < d.m * d.n; ++i) out[i] = 0.0;
  for (std::size_t i = 0; i < d.m; ++i) {
    double* row = out + i * d.n;
    for (std::size_t p = 0; p < d.k; ++p) {
      const double aip = a[i * d.k + p];
      if (aip == 0.0) continue;
      const double* brow = b + p * d.n;
      for (std::size_t j = 0; j < d.n; ++j) row[j] += aip * brow[j];
    }
  }
}

template <typename F>
Tensor elementwise(const Tensor& a, const Tensor& b, const Shape& shape, F f) {
  Tensor out(shape);
  const bool sa = a.size() == 1 && a.rank() == 0;
  const bool sb = b.size() == 1 && b.rank() == 0;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = f(sa ? a[0] : a[i], sb ? b[0] : b[i]);
  return out;
}

double int_pow(double x, int n) {
  double r = 1.0;
  for (int i = 0; i < n; ++i) r *= x;
  return r;
}

// Accumulate an adjoint into a possibly broadcast (scalar) operand.
void accumulate(Tensor& dst, const Tensor& src) {
  if (dst.size() == src.size()) {
    for (std::size_t i = 0; i < src.size(); ++i) dst[i] += src[i];
  } else {
    double s = 0.0;
    for (double v : src.data()) s += v;
    dst[0] += s;
  }
}

}  // namespace

NodeId ExprGraph::push(Node n) {
  nodes_.push_back(std::move(n));
  return static_cast<NodeId>(nodes_.size() - 1);
}

void ExprGraph::check_id(NodeId id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= nodes_.size()) {
    throw ShapeError("node id " + std::to_string(id) + " out of range");
  }
}

NodeId ExprGraph::constant(Tensor value) {
  Node n;
  n.kind = OpKind::Constant;
  n.shape = value.shape();
  n.value = std::move(value);
  return push(std::move(n));
}

NodeId ExprGraph::variable(const std::string& name, Shape shape) {
  for (const Node& n : nodes_) {
    if (n.kind == OpKind::Variable && n.name == name) throw ShapeError("duplicate variable " + name);
  }
  if (shape.size() > Tensor::kMaxRank) throw ShapeError("variable rank exceeds 4");
  Node n;
  n.kind = OpKind::Variable;
  n.name = name;
  n.shape = std::move(shape);
  return push(std::move(n));
}

NodeId ExprGraph::add(NodeId a, NodeId b) {
  check_id(a);
  check_id(b);
  Node n;
  n.kind = OpKind::Add;
  n.inputs = {a, b};
  n.shape = broadcast_shape(node(a).shape, node(b).shape, "add");
  return push(std::move(n));
}

NodeId ExprGraph::sub(NodeId a, NodeId b) {
  check_id(a);
  check_id(b);
  Node n;
  n.kind = OpKind::Sub;
  n.inputs = {a, b};
  n.shape = broadcast_shape(node(a).shape, node(b).shape, "sub");
  return push(std::move(n));
}

NodeId ExprGraph::mul(NodeId a, NodeId b) {
  check_id(a);
  check_id(b);
  Node n;
  n.kind = OpKind::Mul;
  n.inputs = {a, b};
  n.shape = broadcast_shape(node(a).shape, node(b).shape, "mul");
  return push(std::move(n));
}

NodeId ExprGraph::matmul(NodeId a, NodeId b) {
  check_id(a);
  check_id(b);
  const Shape& sa = node(a).shape;
  const Shape& sb = node(b).shape;
  matmul_dims(sa, sb);
  Node n;
  n.kind = OpKind::MatMul;
  n.inputs = {a, b};
  n.shape.assign(sa.begin(), sa.end() - 1);
  n.shape.insert(n.shape.end(), sb.begin() + 1, sb.end());
  if (n.shape.size() > Tensor::kMaxRank) throw ShapeError("matmul result rank exceeds 4");
  return push(std::move(n));
}

NodeId ExprGraph::sum(NodeId a) {
  check_id(a);
  Node n;
  n.kind = OpKind::Sum;
  n.inputs = {a};
  return push(std::move(n));
}

NodeId ExprGraph::unary(Elementary fn, NodeId a) {
  check_id(a);
  Node n;
  n.kind = OpKind::Unary;
  n.inputs = {a};
  n.fn = fn;
  n.shape = node(a).shape;
  return push(std::move(n));
}

NodeId ExprGraph::pow(NodeId a, int exponent) {
  check_id(a);
  if (exponent < 0) throw DomainError("pow: negative exponent");
  Node n;
  n.kind = OpKind::IntPow;
  n.inputs = {a};
  n.exponent = exponent;
  n.shape = node(a).shape;
  return push(std::move(n));
}

void ExprGraph::set_output(NodeId id) {
  check_id(id);
  if (!node(id).shape.empty()) throw ShapeError("output node must be scalar, got " + shape_string(node(id).shape));
  output_ = id;
}

NodeId ExprGraph::output() const {
  if (output_ < 0) throw ShapeError("graph has no output");
  return output_;
}

std::vector<std::pair<std::string, Shape>> ExprGraph::variables() const {
  std::vector<std::pair<std::string, Shape>> out;
  for (const Node& n : nodes_)
    if (n.kind == OpKind::Variable) out.emplace_back(n.name, n.shape);
  return out;
}

std::vector<Tensor> forward(const ExprGraph& g, const Bindings& bindings) {
  const std::size_t last = static_cast<std::size_t>(g.output());
  std::vector<Tensor> val(last + 1);
  for (std::size_t id = 0; id <= last; ++id) {
    const Node& n = g.nodes()[id];
    auto in = [&](int i) -> const Tensor& { return val[static_cast<std::size_t>(n.inputs[static_cast<std::size_t>(i)])]; };
    switch (n.kind) {
      case OpKind::Constant: val[id] = n.value; break;
      case OpKind::Variable: {
        auto it = bindings.find(n.name);
        if (it == bindings.end()) throw UnboundVariable("variable '" + n.name + "' is not bound");
        if (it->second.shape() != n.shape) {
          throw ShapeError("variable '" + n.name + "' bound with shape " + shape_string(it->second.shape()) +
                           ", expected " + shape_string(n.shape));
        }
        val[id] = it->second;
        break;
      }
      case OpKind::Add: val[id] = elementwise(in(0), in(1), n.shape, [](double a, double b) { return a + b; }); break;
      case OpKind::Sub: val[id] = elementwise(in(0), in(1), n.shape, [](double a, double b) { return a - b; }); break;
      case OpKind::Mul: val[id] = elementwise(in(0), in(1), n.shape, [](double a, double b) { return a * b; }); break;
      case OpKind::MatMul: {
        const MatDims d = matmul_dims(in(0).shape(), in(1).shape());
        Tensor out(n.shape);
        matmul_raw(in(0).data().data(), in(1).data().data(), out.data().data(), d);
        val[id] = std::move(out);
        break;
      }
      case OpKind::Sum: {
        double s = 0.0;
        for (double v : in(0).data()) s += v;
        val[id] = Tensor::scalar(s);
        break;
      }
      case OpKind::Unary: {
        Tensor out(n.shape);
        for (std::size_t i = 0; i < out.size(); ++i) out[i] = evaluate(n.fn, in(0)[i]);
        val[id] = std::move(out);
        break;
      }
      case OpKind::IntPow: {
        Tensor out(n.shape);
        for (std::size_t i = 0; i < out.size(); ++i) out[i] = int_pow(in(0)[i], n.exponent);
        val[id] = std::move(out);
        break;
      }
    }
  }
  return val;
}

double eval(const ExprGraph& g, const Bindings& bindings) {
  return forward(g, bindings).back().item();
}

ValueAndGrad value_and_grad(const ExprGraph& g, const Bindings& bindings) {
  const std::vector<Tensor> val = forward(g, bindings);
  const std::size_t last = val.size() - 1;
  std::vector<Tensor> adj(val.size());
  std::vector<bool> live(val.size(), false);
  adj[last] = Tensor::scalar(1.0);
  live[last] = true;
  auto touch = [&](NodeId id) -> Tensor& {
    const auto i = static_cast<std::size_t>(id);
    if (!live[i]) {
      adj[i] = Tensor(val[i].shape());
      live[i] = true;
    }
    return adj[i];
  };

  ValueAndGrad out;
  out.value = val[last].item();
  for (std::size_t id = last + 1; id-- > 0;) {
    const Node& n = g.nodes()[id];
    if (n.kind == OpKind::Variable) {
      out.grad[n.name] = live[id] ? adj[id] : Tensor(n.shape);
      continue;
    }
    if (!live[id] || n.kind == OpKind::Constant) continue;
    const Tensor& a = adj[id];
    switch (n.kind) {
      case OpKind::Add:
      case OpKind::Sub: {
        accumulate(touch(n.inputs[0]), a);
        if (n.kind == OpKind::Add) {
          accumulate(touch(n.inputs[1]), a);
        } else {
          Tensor neg = a;
          for (double& v : neg.data()) v = -v;
          accumulate(touch(n.inputs[1]), neg);
        }
        break;
      }
      case OpKind::Mul: {
        const Tensor& x = val[static_cast<std::size_t>(n.inputs[0])];
        const Tensor& y = val[static_cast<std::size_t>(n.inputs[1])];
        accumulate(touch(n.inputs[0]), elementwise(a, y, n.shape, [](double p, double q) { return p * q; }));
        accumulate(touch(n.inputs[1]), elementwise(a, x, n.shape, [](double p, double q) { return p * q; }));
        break;
      }
      case OpKind::MatMul: {
        const Tensor& x = val[static_cast<std::size_t>(n.inputs[0])];
        const Tensor& y = val[static_cast<std::size_t>(n.inputs[1])];
        const MatDims d = matmul_dims(x.shape(), y.shape());
        // dX = dC Y^T, dY = X^T dC
        Tensor& ax = touch(n.inputs[0]);
        for (std::size_t i = 0; i < d.m; ++i)
          for (std::size_t p = 0; p < d.k; ++p) {
            double s = 0.0;
            for (std::size_t j = 0; j < d.n; ++j) s += a[i * d.n + j] * y[p * d.n + j];
            ax[i * d.k + p] += s;
          }
        Tensor& ay = touch(n.inputs[1]);
        for (std::size_t i = 0; i < d.m; ++i)
          for (std::size_t p = 0; p < d.k; ++p) {
            const double xip = x[i * d.k + p];
            if (xip == 0.0) continue;
            for (std::size_t j = 0; j < d.n; ++j) ay[p * d.n + j] += xip * a[i * d.n + j];
          }
        break;
      }
      case OpKind::Sum: {
        Tensor& ax = touch(n.inputs[0]);
        for (double& v : ax.data()) v += a[0];
        break;
      }
      case OpKind::Unary: {
        const Tensor& x = val[static_cast<std::size_t>(n.inputs[0])];
        Tensor& ax = touch(n.inputs[0]);
        for (std::size_t i = 0; i < x.size(); ++i) ax[i] += a[i] * derivative(n.fn, 1, x[i]).value;
        break;
      }
      case OpKind::IntPow: {
        const Tensor& x = val[static_cast<std::size_t>(n.inputs[0])];
        Tensor& ax = touch(n.inputs[0]);
        if (n.exponent == 0) break;
        for (std::size_t i = 0; i < x.size(); ++i) ax[i] += a[i] * n.exponent * int_pow(x[i], n.exponent - 1);
        break;
      }
      default: break;
    }
  }
  return out;
}

Tensor grad(const ExprGraph& g, const Bindings& bindings, const std::string& wrt) {
  ValueAndGrad vg = value_and_grad(g, bindings);
  auto it = vg.grad.find(wrt);
  if (it == vg.grad.end()) throw UnboundVariable("graph has no variable '" + wrt + "'");
  return it->second;
}

namespace {

template <typename MakeVar>
ExprGraph restrict_graph(const ExprGraph& g, MakeVar make) {
  ExprGraph out;
  std::vector<NodeId> map(g.size(), -1);
  const std::size_t last = static_cast<std::size_t>(g.output());
  for (std::size_t id = 0; id <= last; ++id) {
    const Node& n = g.nodes()[id];
    auto in = [&](int i) { return map[static_cast<std::size_t>(n.inputs[static_cast<std::size_t>(i)])]; };
    NodeId m = -1;
    switch (n.kind) {
      case OpKind::Constant: m = out.constant(n.value); break;
      case OpKind::Variable: m = make(out, n); break;
      case OpKind::Add: m = out.add(in(0), in(1)); break;
      case OpKind::Sub: m = out.sub(in(0), in(1)); break;
      case OpKind::Mul: m = out.mul(in(0), in(1)); break;
      case OpKind::MatMul: m = out.matmul(in(0), in(1)); break;
      case OpKind::Sum: m = out.sum(in(0)); break;
      case OpKind::Unary: m = out.unary(n.fn, in(0)); break;
      case OpKind::IntPow: m = out.pow(in(0), n.exponent); break;
    }
    map[id] = m;
  }
  out.set_output(map[last]);
  return out;
}

const Tensor& lookup(const Bindings& b, const std::string& name, const char* what) {
  auto it = b.find(name);
  if (it == b.end()) throw ShapeError(std::string(what) + " has no entry for variable '" + name + "'");
  return it->second;
}

}  // namespace

ExprGraph line_restrict(const ExprGraph& g, const Bindings& x0, const Bindings& v) {
  NodeId eta = -1;
  return restrict_graph(g, [&](ExprGraph& out, const Node& n) {
    const Tensor& base = lookup(x0, n.name, "x0");
    const Tensor& dir = lookup(v, n.name, "direction");
    if (base.shape() != n.shape || dir.shape() != n.shape) {
      throw ShapeError("line_restrict: shape mismatch for '" + n.name + "'");
    }
    if (eta < 0) eta = out.variable(kEtaName, {});
    return out.add(out.constant(base), out.mul(eta, out.constant(dir)));
  });
}

ExprGraph subspace_restrict(const ExprGraph& g, const Bindings& x0, const Bindings& U, std::size_t d) {
  if (d == 0) throw ShapeError("subspace_restrict: d must be positive");
  NodeId eta = -1;
  return restrict_graph(g, [&](ExprGraph& out, const Node& n) {
    const Tensor& base = lookup(x0, n.name, "x0");
    const Tensor& dirs = lookup(U, n.name, "direction stack");
    Shape expect = n.shape;
    expect.push_back(d);
    if (base.shape() != n.shape || dirs.shape() != expect) {
      throw ShapeError("subspace_restrict: '" + n.name + "' needs directions of shape " + shape_string(expect) +
                       ", got " + shape_string(dirs.shape()));
    }
    if (eta < 0) eta = out.variable(kEtaName, {d});
    return out.add(out.constant(base), out.matmul(out.constant(dirs), eta));
  });
}

}  // namespace umm
