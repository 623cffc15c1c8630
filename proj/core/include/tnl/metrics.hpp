#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace tnl {

struct Aggregate {
  double mean = 0.0;
  double stddev = 0.0;  // sample standard deviation, 0 for a single run
};

Aggregate aggregate(std::span<const double> values);

/// Measured outcomes of one training run. Fields not meaningful for the
/// task stay unset.
struct RunMetrics {
  std::uint64_t seed = 0;
  std::optional<double> digit_accuracy;
  std::optional<double> operator_accuracy;   // mean of Sum and Prod accuracy
  std::optional<double> coherence_fraction;  // mean of Sum and Prod coherence
  std::optional<double> commutativity;
  std::optional<double> associativity;
  std::optional<double> distributivity;
  std::optional<double> f1;
  std::optional<double> violation_rate;
  double final_loss = 0.0;
  bool zero_gradient_step1 = false;
};

struct Metrics {
  std::vector<RunMetrics> runs;
  std::optional<Aggregate> digit_accuracy;
  std::optional<Aggregate> operator_accuracy;
  std::optional<Aggregate> coherence_fraction;
  std::optional<Aggregate> commutativity;
  std::optional<Aggregate> associativity;
  std::optional<Aggregate> distributivity;
  std::optional<Aggregate> f1;
  std::optional<Aggregate> violation_rate;
  bool any_zero_gradient_step1 = false;

  static Metrics from_runs(std::vector<RunMetrics> runs);
};

}  // namespace tnl
