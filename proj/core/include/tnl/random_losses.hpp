#pragma once

#include <cstdint>
#include <span>

#include "tnl/formula.hpp"
#include "tnl/rng.hpp"
#include "tnl/tnorm.hpp"

namespace tnl {

/// Random grounded formula over the given atoms, depth <= max_depth.
/// Immediate siblings are kept structurally distinct so Godel min/max folds
/// do not tie by construction.
Formula random_formula(CounterRng& rng, std::span<const Atom> atoms, int max_depth);

struct LossCheckReport {
  int n_checked = 0;
  double max_rel_error = 0.0;
  int resamples = 0;  // draws rejected for sitting on a kink
};

/// Gradient-check `count` randomly compiled losses for one family: a small
/// softmax model feeds a random LossSpec (data atoms + weighted random
/// constraint formulas); the analytic gradient is compared against central
/// finite differences at kink-safe points. Draws that violate the kink
/// margin are rejected and redrawn.
LossCheckReport check_random_losses(TNormFamily fam, std::uint64_t seed, int count,
                                    double step = 1e-5);

}  // namespace tnl
