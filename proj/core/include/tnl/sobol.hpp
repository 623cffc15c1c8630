#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace tnl {

/// Gray-code Sobol sequence over [0,1)^d. The direction-number table is
/// fixed and compiled into the library; `seek` positions the generator at an
/// arbitrary index so disjoint sample ranges can be produced independently
/// by parallel workers.
class SobolSequence {
 public:
  explicit SobolSequence(unsigned dimension);

  static unsigned max_dimension();

  unsigned dimension() const noexcept { return dimension_; }

  /// Position the generator so the next emitted point is point `index`.
  void seek(std::uint64_t index);

  /// Write the current point into `out` (size >= dimension) and advance.
  void next(std::span<double> out);

 private:
  unsigned dimension_;
  std::uint64_t index_ = 0;
  std::vector<std::uint64_t> state_;       // one accumulator per dimension
  std::vector<std::uint64_t> directions_;  // 64 entries per dimension
};

}  // namespace tnl
