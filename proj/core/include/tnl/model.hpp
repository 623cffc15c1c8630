#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "tnl/autodiff.hpp"

namespace tnl {

struct MlpShape {
  int input_dim = 0;
  std::vector<int> hidden;
  int output_dim = 0;
};

/// Feed-forward classifier: sigmoid hidden layers, softmax output row.
/// Parameters live in one flat vector (per layer: weight matrix then bias).
class Mlp {
 public:
  Mlp(std::string name, MlpShape shape, std::uint64_t init_seed);

  const std::string& name() const noexcept { return name_; }
  const MlpShape& shape() const noexcept { return shape_; }
  std::span<double> parameters() noexcept { return {flat_.data(), flat_.size()}; }
  std::span<const double> parameters() const noexcept { return {flat_.data(), flat_.size()}; }
  void set_parameters(std::span<const double> values);

  struct TapeParams {
    std::vector<NodeId> nodes;  // per layer: W, b, W, b, ...
  };
  /// Create the trainable leaves for this model on a tape (once per tape).
  TapeParams bind(Tape& tape) const;
  /// Softmax probability row for one input vector.
  NodeId forward(Tape& tape, const TapeParams& params, std::span<const double> x) const;
  /// Flatten the adjoints of this model's leaves back into parameter order.
  std::vector<double> gradient(const Gradient& grad, const TapeParams& params) const;

  /// Tape-free inference.
  void predict(std::span<const double> x, std::span<double> probs_out) const;
  int predict_class(std::span<const double> x) const;

 private:
  struct Layer {
    int in = 0, out = 0;
    std::size_t w_offset = 0, b_offset = 0;
  };

  std::string name_;
  MlpShape shape_;
  std::vector<Layer> layers_;
  std::vector<double> flat_;
};

struct OptimizerConfig {
  std::string kind = "adam";  // "adam" | "sgd"
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  /// Cosine-annealed warm restarts; 0 disables the schedule.
  int restart_t0 = 0;
  int restart_tmult = 1;
};

class Optimizer {
 public:
  Optimizer(OptimizerConfig cfg, std::size_t n_params);

  void step(std::span<double> params, std::span<const double> grad);

 private:
  double lr_scale();

  OptimizerConfig cfg_;
  bool adam_;
  std::vector<double> m_, v_;
  long t_ = 0;
  int cycle_len_ = 0;
  int cycle_pos_ = 0;
};

}  // namespace tnl
