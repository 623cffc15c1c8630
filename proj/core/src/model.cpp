#include "tnl/model.hpp"

#include <cmath>
#include <stdexcept>

#include "tnl/rng.hpp"

namespace tnl {

Mlp::Mlp(std::string name, MlpShape shape, std::uint64_t init_seed)
    : name_(std::move(name)), shape_(std::move(shape)) {
  if (shape_.input_dim <= 0 || shape_.output_dim <= 0) {
    throw std::invalid_argument("mlp dimensions must be positive");
  }
  for (int h : shape_.hidden) {
    if (h <= 0) throw std::invalid_argument("mlp dimensions must be positive");
  }
  std::vector<int> dims;
  dims.push_back(shape_.input_dim);
  dims.insert(dims.end(), shape_.hidden.begin(), shape_.hidden.end());
  dims.push_back(shape_.output_dim);

  std::size_t total = 0;
  for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
    Layer layer;
    layer.in = dims[l];
    layer.out = dims[l + 1];
    layer.w_offset = total;
    total += static_cast<std::size_t>(layer.in) * layer.out;
    layer.b_offset = total;
    total += layer.out;
    layers_.push_back(layer);
  }
  flat_.assign(total, 0.0);

  CounterRng rng(init_seed, 0);
  for (const Layer& layer : layers_) {
    const double bound = std::sqrt(6.0 / (layer.in + layer.out));
    double* w = flat_.data() + layer.w_offset;
    const std::size_t nw = static_cast<std::size_t>(layer.in) * layer.out;
    for (std::size_t i = 0; i < nw; ++i) w[i] = (2.0 * rng.next_unit() - 1.0) * bound;
    // biases start at zero
  }
}

void Mlp::set_parameters(std::span<const double> values) {
  if (values.size() != flat_.size()) {
    throw std::invalid_argument("parameter size mismatch for model " + name_);
  }
  flat_.assign(values.begin(), values.end());
}

Mlp::TapeParams Mlp::bind(Tape& tape) const {
  TapeParams out;
  out.nodes.reserve(layers_.size() * 2);
  for (const Layer& layer : layers_) {
    out.nodes.push_back(tape.param(
        {flat_.data() + layer.w_offset, static_cast<std::size_t>(layer.in) * layer.out},
        static_cast<std::uint32_t>(layer.out), static_cast<std::uint32_t>(layer.in)));
    out.nodes.push_back(tape.param({flat_.data() + layer.b_offset,
                                    static_cast<std::size_t>(layer.out)},
                                   static_cast<std::uint32_t>(layer.out)));
  }
  return out;
}

NodeId Mlp::forward(Tape& tape, const TapeParams& params, std::span<const double> x) const {
  if (x.size() != static_cast<std::size_t>(shape_.input_dim)) {
    throw std::invalid_argument("input size mismatch for model " + name_);
  }
  NodeId h = tape.input(x, static_cast<std::uint32_t>(x.size()));
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    const NodeId w = params.nodes[2 * l];
    const NodeId b = params.nodes[2 * l + 1];
    h = tape.add(tape.matvec(w, h), b);
    if (l + 1 < layers_.size()) h = tape.sigmoid(h);
  }
  return tape.softmax_row(h);
}

std::vector<double> Mlp::gradient(const Gradient& grad, const TapeParams& params) const {
  std::vector<double> out;
  out.reserve(flat_.size());
  for (NodeId node : params.nodes) {
    const auto adj = grad.adjoint(node);
    out.insert(out.end(), adj.begin(), adj.end());
  }
  return out;
}

void Mlp::predict(std::span<const double> x, std::span<double> probs_out) const {
  std::vector<double> cur(x.begin(), x.end());
  std::vector<double> next;
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    const Layer& layer = layers_[l];
    next.assign(layer.out, 0.0);
    const double* w = flat_.data() + layer.w_offset;
    const double* b = flat_.data() + layer.b_offset;
    for (int i = 0; i < layer.out; ++i) {
      double acc = b[i];
      const double* row = w + static_cast<std::size_t>(i) * layer.in;
      for (int j = 0; j < layer.in; ++j) acc += row[j] * cur[j];
      next[i] = acc;
    }
    if (l + 1 < layers_.size()) {
      for (double& v : next) {
        v = v >= 0.0 ? 1.0 / (1.0 + std::exp(-v)) : std::exp(v) / (1.0 + std::exp(v));
      }
    }
    cur.swap(next);
  }
  double mx = cur[0];
  for (double v : cur) mx = std::max(mx, v);
  double z = 0.0;
  for (double& v : cur) {
    v = std::exp(v - mx);
    z += v;
  }
  for (std::size_t i = 0; i < cur.size(); ++i) probs_out[i] = cur[i] / z;
}

int Mlp::predict_class(std::span<const double> x) const {
  std::vector<double> probs(shape_.output_dim);
  predict(x, probs);
  int best = 0;
  for (int i = 1; i < shape_.output_dim; ++i) {
    if (probs[i] > probs[best]) best = i;
  }
  return best;
}

Optimizer::Optimizer(OptimizerConfig cfg, std::size_t n_params)
    : cfg_(std::move(cfg)), adam_(cfg_.kind == "adam") {
  if (cfg_.kind != "adam" && cfg_.kind != "sgd") {
    throw std::invalid_argument("unknown optimizer '" + cfg_.kind + "'");
  }
  if (cfg_.lr <= 0.0) throw std::invalid_argument("learning rate must be positive");
  if (adam_) {
    m_.assign(n_params, 0.0);
    v_.assign(n_params, 0.0);
  }
  cycle_len_ = cfg_.restart_t0;
}

double Optimizer::lr_scale() {
  if (cfg_.restart_t0 <= 0) return 1.0;
  const double scale =
      0.5 * (1.0 + std::cos(3.14159265358979323846 * cycle_pos_ / cycle_len_));
  ++cycle_pos_;
  if (cycle_pos_ >= cycle_len_) {
    cycle_pos_ = 0;
    cycle_len_ = std::max(1, cycle_len_ * std::max(1, cfg_.restart_tmult));
  }
  return scale;
}

void Optimizer::step(std::span<double> params, std::span<const double> grad) {
  if (params.size() != grad.size()) throw std::invalid_argument("gradient size mismatch");
  const double lr = cfg_.lr * lr_scale();
  if (!adam_) {
    for (std::size_t i = 0; i < params.size(); ++i) params[i] -= lr * grad[i];
    return;
  }
  ++t_;
  const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
  for (std::size_t i = 0; i < params.size(); ++i) {
    m_[i] = cfg_.beta1 * m_[i] + (1.0 - cfg_.beta1) * grad[i];
    v_[i] = cfg_.beta2 * v_[i] + (1.0 - cfg_.beta2) * grad[i] * grad[i];
    const double mhat = m_[i] / bc1;
    const double vhat = v_[i] / bc2;
    params[i] -= lr * mhat / (std::sqrt(vhat) + cfg_.eps);
  }
}

}  // namespace tnl
