#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "tnl/errors.hpp"

namespace tnl {

using NodeId = std::uint32_t;
inline constexpr NodeId kNoNode = 0xffffffffu;

enum class Op : std::uint8_t {
  Const,
  Input,
  Param,
  Add,
  Sub,
  Mul,
  Div,
  Neg,
  Min,
  Max,
  Clamp01,
  Log,
  Exp,
  Sum,
  MatVec,
  Sigmoid,
  SoftmaxRow,
  Gather,
};

std::string_view op_name(Op op);

class Tape;
class Gradient;
Gradient backward(const Tape& tape, NodeId root);

/// Append-only record of scalar/tensor operations with cached forward
/// values. Elementwise ops require equal shapes (no broadcasting); the only
/// structured ops are matvec, softmax over a vector, summation to a scalar
/// and scalar extraction by index. Every forward value is checked finite;
/// NaN/Inf raises NumericError. Construction and backward are
/// single-threaded; distinct tapes may live on distinct threads.
class Tape {
 public:
  NodeId constant(double v);
  NodeId constant(std::span<const double> v, std::uint32_t rows, std::uint32_t cols = 1);
  NodeId input(std::span<const double> v, std::uint32_t rows, std::uint32_t cols = 1);
  /// Leaf flagged trainable; listed by `params()` in creation order.
  NodeId param(std::span<const double> v, std::uint32_t rows, std::uint32_t cols = 1);

  /// Generic recorder; `attr` is the element index for Gather.
  NodeId record(Op op, std::span<const NodeId> inputs, int attr = -1);

  NodeId add(NodeId a, NodeId b) { return record2(Op::Add, a, b); }
  NodeId sub(NodeId a, NodeId b) { return record2(Op::Sub, a, b); }
  NodeId mul(NodeId a, NodeId b) { return record2(Op::Mul, a, b); }
  NodeId div(NodeId a, NodeId b) { return record2(Op::Div, a, b); }
  /// Elementwise; ties select the first argument in the backward pass.
  NodeId min(NodeId a, NodeId b) { return record2(Op::Min, a, b); }
  NodeId max(NodeId a, NodeId b) { return record2(Op::Max, a, b); }
  NodeId neg(NodeId a) { return record1(Op::Neg, a); }
  /// Subgradient 0 outside (0,1), boundary included in the flat region.
  NodeId clamp01(NodeId a) { return record1(Op::Clamp01, a); }
  NodeId log(NodeId a) { return record1(Op::Log, a); }
  NodeId exp(NodeId a) { return record1(Op::Exp, a); }
  NodeId sum(NodeId a) { return record1(Op::Sum, a); }
  NodeId matvec(NodeId w, NodeId x) { return record2(Op::MatVec, w, x); }
  NodeId sigmoid(NodeId a) { return record1(Op::Sigmoid, a); }
  NodeId softmax_row(NodeId a) { return record1(Op::SoftmaxRow, a); }
  NodeId gather(NodeId a, int index) {
    const NodeId in[1] = {a};
    return record(Op::Gather, in, index);
  }

  std::span<const double> value(NodeId id) const;
  double scalar(NodeId id) const;
  std::size_t size(NodeId id) const;
  std::uint32_t rows(NodeId id) const;
  std::uint32_t cols(NodeId id) const;
  Op op(NodeId id) const;
  int attr(NodeId id) const;
  NodeId input_a(NodeId id) const;  // kNoNode for leaves
  NodeId input_b(NodeId id) const;  // kNoNode for unary ops and leaves
  std::size_t node_count() const { return nodes_.size(); }
  const std::vector<NodeId>& params() const { return params_; }

 private:
  friend class Gradient;
  friend Gradient backward(const Tape&, NodeId);

  struct Node {
    Op op;
    int attr;
    NodeId a, b;
    std::uint32_t rows, cols;
    std::uint32_t offset;  // into the value arena
  };

  NodeId record1(Op op, NodeId a) {
    const NodeId in[1] = {a};
    return record(op, in);
  }
  NodeId record2(Op op, NodeId a, NodeId b) {
    const NodeId in[2] = {a, b};
    return record(op, in);
  }
  NodeId push_leaf(Op op, std::span<const double> v, std::uint32_t rows, std::uint32_t cols);
  void compute_forward(NodeId id);
  void check_finite(NodeId id) const;

  std::vector<Node> nodes_;
  std::vector<double> values_;
  std::vector<NodeId> params_;
};

/// Reverse-mode adjoints for every node of one tape; leaves not on the path
/// to the root keep adjoint 0.
class Gradient {
 public:
  std::span<const double> adjoint(NodeId id) const;
  double adjoint_scalar(NodeId id) const;

 private:
  friend Gradient backward(const Tape&, NodeId);
  const Tape* tape_ = nullptr;
  std::vector<double> adjoints_;
};

/// Builds a computation whose trainable leaves consume `point` in order;
/// returns the scalar root.
using TapeBuilder = std::function<NodeId(Tape&, const std::vector<double>&)>;

/// Compare the backward gradient against central finite differences.
/// Returns max_i |analytic_i - numeric_i| / max(1, |numeric_i|).
/// Throws KinkError when any min/max pair, clamp boundary or division
/// denominator sits within 10*step of a branch flip at the base point.
double grad_check(const TapeBuilder& build, const std::vector<double>& point,
                  double step = 1e-5);

}  // namespace tnl
