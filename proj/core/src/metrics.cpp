#include "tnl/metrics.hpp"

#include <cmath>

namespace tnl {

Aggregate aggregate(std::span<const double> values) {
  Aggregate out;
  if (values.empty()) return out;
  double sum = 0.0;
  for (double v : values) sum += v;
  out.mean = sum / static_cast<double>(values.size());
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - out.mean) * (v - out.mean);
    out.stddev = std::sqrt(ss / static_cast<double>(values.size() - 1));
  }
  return out;
}

namespace {

std::optional<Aggregate> collect(const std::vector<RunMetrics>& runs,
                                 std::optional<double> RunMetrics::*field) {
  std::vector<double> vals;
  for (const RunMetrics& run : runs) {
    if ((run.*field).has_value()) vals.push_back(*(run.*field));
  }
  if (vals.empty()) return std::nullopt;
  return aggregate(vals);
}

}  // namespace

Metrics Metrics::from_runs(std::vector<RunMetrics> runs) {
  Metrics m;
  m.runs = std::move(runs);
  m.digit_accuracy = collect(m.runs, &RunMetrics::digit_accuracy);
  m.operator_accuracy = collect(m.runs, &RunMetrics::operator_accuracy);
  m.coherence_fraction = collect(m.runs, &RunMetrics::coherence_fraction);
  m.commutativity = collect(m.runs, &RunMetrics::commutativity);
  m.associativity = collect(m.runs, &RunMetrics::associativity);
  m.distributivity = collect(m.runs, &RunMetrics::distributivity);
  m.f1 = collect(m.runs, &RunMetrics::f1);
  m.violation_rate = collect(m.runs, &RunMetrics::violation_rate);
  for (const RunMetrics& run : m.runs) {
    if (run.zero_gradient_step1) m.any_zero_gradient_step1 = true;
  }
  return m;
}

}  // namespace tnl
