#include "tnl/autodiff.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace tnl {

std::string_view op_name(Op op) {
  switch (op) {
    case Op::Const: return "const";
    case Op::Input: return "input";
    case Op::Param: return "param";
    case Op::Add: return "add";
    case Op::Sub: return "sub";
    case Op::Mul: return "mul";
    case Op::Div: return "div";
    case Op::Neg: return "neg";
    case Op::Min: return "min";
    case Op::Max: return "max";
    case Op::Clamp01: return "clamp01";
    case Op::Log: return "log";
    case Op::Exp: return "exp";
    case Op::Sum: return "sum";
    case Op::MatVec: return "matvec";
    case Op::Sigmoid: return "sigmoid";
    case Op::SoftmaxRow: return "softmax-row";
    case Op::Gather: return "onehot-gather";
  }
  return "?";
}

NodeId Tape::push_leaf(Op op, std::span<const double> v, std::uint32_t rows,
                       std::uint32_t cols) {
  if (v.size() != static_cast<std::size_t>(rows) * cols) {
    throw std::invalid_argument("leaf data size does not match shape");
  }
  const NodeId id = static_cast<NodeId>(nodes_.size());
  nodes_.push_back({op, -1, kNoNode, kNoNode, rows, cols,
                    static_cast<std::uint32_t>(values_.size())});
  values_.insert(values_.end(), v.begin(), v.end());
  check_finite(id);
  return id;
}

NodeId Tape::constant(double v) { return push_leaf(Op::Const, {&v, 1}, 1, 1); }

NodeId Tape::constant(std::span<const double> v, std::uint32_t rows, std::uint32_t cols) {
  return push_leaf(Op::Const, v, rows, cols);
}

NodeId Tape::input(std::span<const double> v, std::uint32_t rows, std::uint32_t cols) {
  return push_leaf(Op::Input, v, rows, cols);
}

NodeId Tape::param(std::span<const double> v, std::uint32_t rows, std::uint32_t cols) {
  const NodeId id = push_leaf(Op::Param, v, rows, cols);
  params_.push_back(id);
  return id;
}

NodeId Tape::record(Op op, std::span<const NodeId> inputs, int attr) {
  const auto expect_inputs = [&](std::size_t n) {
    if (inputs.size() != n) {
      throw std::invalid_argument(std::string(op_name(op)) + " expects " + std::to_string(n) +
                                  " input(s)");
    }
    for (NodeId in : inputs) {
      if (in >= nodes_.size()) throw std::invalid_argument("input id not on tape");
    }
  };

  Node node{op, attr, kNoNode, kNoNode, 0, 0, 0};
  switch (op) {
    case Op::Const:
    case Op::Input:
    case Op::Param:
      throw std::invalid_argument("leaves are created via constant/input/param");
    case Op::Add:
    case Op::Sub:
    case Op::Mul:
    case Op::Div:
    case Op::Min:
    case Op::Max: {
      expect_inputs(2);
      const Node& a = nodes_[inputs[0]];
      const Node& b = nodes_[inputs[1]];
      if (a.rows != b.rows || a.cols != b.cols) {
        throw std::invalid_argument(std::string(op_name(op)) + " requires equal shapes");
      }
      node.a = inputs[0];
      node.b = inputs[1];
      node.rows = a.rows;
      node.cols = a.cols;
      break;
    }
    case Op::Neg:
    case Op::Clamp01:
    case Op::Log:
    case Op::Exp:
    case Op::Sigmoid: {
      expect_inputs(1);
      const Node& a = nodes_[inputs[0]];
      node.a = inputs[0];
      node.rows = a.rows;
      node.cols = a.cols;
      break;
    }
    case Op::Sum: {
      expect_inputs(1);
      node.a = inputs[0];
      node.rows = 1;
      node.cols = 1;
      break;
    }
    case Op::MatVec: {
      expect_inputs(2);
      const Node& w = nodes_[inputs[0]];
      const Node& x = nodes_[inputs[1]];
      if (x.cols != 1 || w.cols != x.rows) {
        throw std::invalid_argument("matvec requires a rows*cols matrix and a cols vector");
      }
      node.a = inputs[0];
      node.b = inputs[1];
      node.rows = w.rows;
      node.cols = 1;
      break;
    }
    case Op::SoftmaxRow: {
      expect_inputs(1);
      const Node& a = nodes_[inputs[0]];
      if (a.cols != 1) throw std::invalid_argument("softmax-row expects a vector");
      node.a = inputs[0];
      node.rows = a.rows;
      node.cols = 1;
      break;
    }
    case Op::Gather: {
      expect_inputs(1);
      const Node& a = nodes_[inputs[0]];
      const std::size_t n = static_cast<std::size_t>(a.rows) * a.cols;
      if (attr < 0 || static_cast<std::size_t>(attr) >= n) {
        throw std::invalid_argument("onehot-gather index out of range");
      }
      node.a = inputs[0];
      node.rows = 1;
      node.cols = 1;
      break;
    }
  }
  node.offset = static_cast<std::uint32_t>(values_.size());
  values_.resize(values_.size() + static_cast<std::size_t>(node.rows) * node.cols);
  const NodeId id = static_cast<NodeId>(nodes_.size());
  nodes_.push_back(node);
  compute_forward(id);
  check_finite(id);
  return id;
}

void Tape::compute_forward(NodeId id) {
  const Node& node = nodes_[id];
  const std::size_t n = static_cast<std::size_t>(node.rows) * node.cols;
  double* out = values_.data() + node.offset;
  const double* a = node.a == kNoNode ? nullptr : values_.data() + nodes_[node.a].offset;
  const double* b = node.b == kNoNode ? nullptr : values_.data() + nodes_[node.b].offset;
  switch (node.op) {
    case Op::Const:
    case Op::Input:
    case Op::Param:
      return;
    case Op::Add:
      for (std::size_t i = 0; i < n; ++i) out[i] = a[i] + b[i];
      return;
    case Op::Sub:
      for (std::size_t i = 0; i < n; ++i) out[i] = a[i] - b[i];
      return;
    case Op::Mul:
      for (std::size_t i = 0; i < n; ++i) out[i] = a[i] * b[i];
      return;
    case Op::Div:
      for (std::size_t i = 0; i < n; ++i) {
        if (b[i] == 0.0) throw NumericError("division by exact zero on tape");
        out[i] = a[i] / b[i];
      }
      return;
    case Op::Neg:
      for (std::size_t i = 0; i < n; ++i) out[i] = -a[i];
      return;
    case Op::Min:
      for (std::size_t i = 0; i < n; ++i) out[i] = a[i] <= b[i] ? a[i] : b[i];
      return;
    case Op::Max:
      for (std::size_t i = 0; i < n; ++i) out[i] = a[i] >= b[i] ? a[i] : b[i];
      return;
    case Op::Clamp01:
      for (std::size_t i = 0; i < n; ++i) out[i] = a[i] < 0.0 ? 0.0 : (a[i] > 1.0 ? 1.0 : a[i]);
      return;
    case Op::Log:
      for (std::size_t i = 0; i < n; ++i) {
        if (a[i] <= 0.0) throw NumericError("log of a non-positive value on tape");
        out[i] = std::log(a[i]);
      }
      return;
    case Op::Exp:
      for (std::size_t i = 0; i < n; ++i) out[i] = std::exp(a[i]);
      return;
    case Op::Sum: {
      const Node& in = nodes_[node.a];
      const std::size_t m = static_cast<std::size_t>(in.rows) * in.cols;
      double acc = 0.0;
      for (std::size_t i = 0; i < m; ++i) acc += a[i];
      out[0] = acc;
      return;
    }
    case Op::MatVec: {
      const Node& w = nodes_[node.a];
      for (std::uint32_t i = 0; i < w.rows; ++i) {
        double acc = 0.0;
        const double* row = a + static_cast<std::size_t>(i) * w.cols;
        for (std::uint32_t j = 0; j < w.cols; ++j) acc += row[j] * b[j];
        out[i] = acc;
      }
      return;
    }
    case Op::Sigmoid:
      for (std::size_t i = 0; i < n; ++i) {
        const double x = a[i];
        out[i] = x >= 0.0 ? 1.0 / (1.0 + std::exp(-x))
                          : std::exp(x) / (1.0 + std::exp(x));
      }
      return;
    case Op::SoftmaxRow: {
      const Node& in = nodes_[node.a];
      double mx = a[0];
      for (std::uint32_t i = 1; i < in.rows; ++i) mx = std::max(mx, a[i]);
      double z = 0.0;
      for (std::uint32_t i = 0; i < in.rows; ++i) {
        out[i] = std::exp(a[i] - mx);
        z += out[i];
      }
      for (std::uint32_t i = 0; i < in.rows; ++i) out[i] /= z;
      return;
    }
    case Op::Gather:
      out[0] = a[node.attr];
      return;
  }
}

void Tape::check_finite(NodeId id) const {
  const Node& node = nodes_[id];
  const std::size_t n = static_cast<std::size_t>(node.rows) * node.cols;
  const double* v = values_.data() + node.offset;
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(v[i])) {
      throw NumericError("non-finite forward value in " + std::string(op_name(node.op)) +
                         " node " + std::to_string(id));
    }
  }
}

std::span<const double> Tape::value(NodeId id) const {
  const Node& node = nodes_.at(id);
  return {values_.data() + node.offset, static_cast<std::size_t>(node.rows) * node.cols};
}

double Tape::scalar(NodeId id) const {
  const Node& node = nodes_.at(id);
  if (node.rows != 1 || node.cols != 1) throw std::invalid_argument("node is not a scalar");
  return values_[node.offset];
}

std::size_t Tape::size(NodeId id) const {
  const Node& node = nodes_.at(id);
  return static_cast<std::size_t>(node.rows) * node.cols;
}

std::uint32_t Tape::rows(NodeId id) const { return nodes_.at(id).rows; }
std::uint32_t Tape::cols(NodeId id) const { return nodes_.at(id).cols; }
Op Tape::op(NodeId id) const { return nodes_.at(id).op; }
int Tape::attr(NodeId id) const { return nodes_.at(id).attr; }
NodeId Tape::input_a(NodeId id) const { return nodes_.at(id).a; }
NodeId Tape::input_b(NodeId id) const { return nodes_.at(id).b; }

std::span<const double> Gradient::adjoint(NodeId id) const {
  const Tape::Node& node = tape_->nodes_.at(id);
  return {adjoints_.data() + node.offset, static_cast<std::size_t>(node.rows) * node.cols};
}

double Gradient::adjoint_scalar(NodeId id) const {
  const Tape::Node& node = tape_->nodes_.at(id);
  if (node.rows != 1 || node.cols != 1) throw std::invalid_argument("node is not a scalar");
  return adjoints_[node.offset];
}

Gradient backward(const Tape& tape, NodeId root) {
  if (root >= tape.nodes_.size()) throw std::invalid_argument("root is not on the tape");
  if (tape.size(root) != 1) throw std::invalid_argument("backward root must be a scalar");

  Gradient grad;
  grad.tape_ = &tape;
  grad.adjoints_.assign(tape.values_.size(), 0.0);
  double* adj = grad.adjoints_.data();
  const double* val = tape.values_.data();
  adj[tape.nodes_[root].offset] = 1.0;

  for (NodeId id = root + 1; id-- > 0;) {
    const Tape::Node& node = tape.nodes_[id];
    if (node.a == kNoNode) continue;  // leaf
    const std::size_t n = static_cast<std::size_t>(node.rows) * node.cols;
    const double* g = adj + node.offset;
    const Tape::Node& an = tape.nodes_[node.a];
    double* ga = adj + an.offset;
    const double* va = val + an.offset;
    double* gb = nullptr;
    const double* vb = nullptr;
    if (node.b != kNoNode) {
      gb = adj + tape.nodes_[node.b].offset;
      vb = val + tape.nodes_[node.b].offset;
    }
    const double* out = val + node.offset;

    switch (node.op) {
      case Op::Const:
      case Op::Input:
      case Op::Param:
        break;
      case Op::Add:
        for (std::size_t i = 0; i < n; ++i) {
          ga[i] += g[i];
          gb[i] += g[i];
        }
        break;
      case Op::Sub:
        for (std::size_t i = 0; i < n; ++i) {
          ga[i] += g[i];
          gb[i] -= g[i];
        }
        break;
      case Op::Mul:
        for (std::size_t i = 0; i < n; ++i) {
          ga[i] += g[i] * vb[i];
          gb[i] += g[i] * va[i];
        }
        break;
      case Op::Div:
        for (std::size_t i = 0; i < n; ++i) {
          ga[i] += g[i] / vb[i];
          gb[i] -= g[i] * va[i] / (vb[i] * vb[i]);
        }
        break;
      case Op::Neg:
        for (std::size_t i = 0; i < n; ++i) ga[i] -= g[i];
        break;
      case Op::Min:
        for (std::size_t i = 0; i < n; ++i) {
          if (va[i] <= vb[i]) {
            ga[i] += g[i];
          } else {
            gb[i] += g[i];
          }
        }
        break;
      case Op::Max:
        for (std::size_t i = 0; i < n; ++i) {
          if (va[i] >= vb[i]) {
            ga[i] += g[i];
          } else {
            gb[i] += g[i];
          }
        }
        break;
      case Op::Clamp01:
        for (std::size_t i = 0; i < n; ++i) {
          if (va[i] > 0.0 && va[i] < 1.0) ga[i] += g[i];
        }
        break;
      case Op::Log:
        for (std::size_t i = 0; i < n; ++i) ga[i] += g[i] / va[i];
        break;
      case Op::Exp:
        for (std::size_t i = 0; i < n; ++i) ga[i] += g[i] * out[i];
        break;
      case Op::Sum: {
        const std::size_t m = static_cast<std::size_t>(an.rows) * an.cols;
        for (std::size_t i = 0; i < m; ++i) ga[i] += g[0];
        break;
      }
      case Op::MatVec: {
        for (std::uint32_t i = 0; i < an.rows; ++i) {
          const double gi = g[i];
          double* wrow = ga + static_cast<std::size_t>(i) * an.cols;
          const double* vrow = va + static_cast<std::size_t>(i) * an.cols;
          for (std::uint32_t j = 0; j < an.cols; ++j) {
            wrow[j] += gi * vb[j];
            gb[j] += gi * vrow[j];
          }
        }
        break;
      }
      case Op::Sigmoid:
        for (std::size_t i = 0; i < n; ++i) ga[i] += g[i] * out[i] * (1.0 - out[i]);
        break;
      case Op::SoftmaxRow: {
        double dot = 0.0;
        for (std::size_t i = 0; i < n; ++i) dot += g[i] * out[i];
        for (std::size_t i = 0; i < n; ++i) ga[i] += out[i] * (g[i] - dot);
        break;
      }
      case Op::Gather:
        ga[node.attr] += g[0];
        break;
    }
  }
  return grad;
}

namespace {

// A perturbation of size `step` must not be able to flip any branch: every
// min/max pair has to differ by more than 10*step, clamp inputs must stay
// clear of both boundaries, and divisions clear of zero.
void check_kink_margins(const Tape& tape, double step) {
  const double margin = 10.0 * step;
  for (NodeId id = 0; id < tape.node_count(); ++id) {
    const Op o = tape.op(id);
    if (o == Op::Min || o == Op::Max) {
      const auto a = tape.value(tape.input_a(id));
      const auto b = tape.value(tape.input_b(id));
      for (std::size_t i = 0; i < a.size(); ++i) {
        if (std::abs(a[i] - b[i]) <= margin) {
          throw KinkError("min/max operands within the kink margin");
        }
      }
    } else if (o == Op::Clamp01) {
      for (double x : tape.value(tape.input_a(id))) {
        if (std::abs(x) <= margin || std::abs(x - 1.0) <= margin) {
          throw KinkError("clamp input within the kink margin of a boundary");
        }
      }
    } else if (o == Op::Div) {
      for (double d : tape.value(tape.input_b(id))) {
        if (std::abs(d) <= margin) {
          throw KinkError("division denominator within the kink margin of zero");
        }
      }
    }
  }
}

}  // namespace

double grad_check(const TapeBuilder& build, const std::vector<double>& point, double step) {
  Tape base;
  const NodeId root = build(base, point);
  if (base.size(root) != 1) throw std::invalid_argument("grad_check root must be a scalar");
  check_kink_margins(base, step);

  const Gradient grad = backward(base, root);
  std::vector<double> analytic;
  std::size_t total = 0;
  for (NodeId p : base.params()) {
    const auto span = grad.adjoint(p);
    analytic.insert(analytic.end(), span.begin(), span.end());
    total += span.size();
  }
  if (total != point.size()) {
    throw std::invalid_argument("builder must consume the full point as trainable leaves");
  }

  double worst = 0.0;
  std::vector<double> shifted = point;
  for (std::size_t i = 0; i < point.size(); ++i) {
    shifted[i] = point[i] + step;
    Tape plus;
    const double f_plus = plus.scalar(build(plus, shifted));
    shifted[i] = point[i] - step;
    Tape minus;
    const double f_minus = minus.scalar(build(minus, shifted));
    shifted[i] = point[i];
    const double numeric = (f_plus - f_minus) / (2.0 * step);
    const double err = std::abs(analytic[i] - numeric) / std::max(1.0, std::abs(numeric));
    worst = std::max(worst, err);
  }
  return worst;
}

}  // namespace tnl
