#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "tnl/autodiff.hpp"
#include "tnl/formula.hpp"
#include "tnl/tnorm.hpp"

namespace tnl {

/// Where an atom's relaxed truth value comes from: one entry of a
/// probability row (softmax/sigmoid output) already on the tape.
struct ProbSource {
  NodeId head_row = kNoNode;
  int class_index = 0;
};

using AtomBinding = std::unordered_map<Atom, ProbSource, AtomHash>;

struct GodelOptions {
  int warm_start_epochs = 0;
  TNormFamily warm_start_family = TNormFamily::RProduct;
  /// Model names whose parameters stop updating once the warm start ends.
  std::vector<std::string> freeze_after_warmup;
};

struct ConstraintTerm {
  Formula formula;
  double weight = 1.0;  // lambda >= 0
};

struct LossSpec {
  Formula data_term;  // conjunction of labeled-example atoms
  std::vector<ConstraintTerm> constraint_terms;
  TNormFamily family = TNormFamily::RProduct;
  GodelOptions godel;

  explicit LossSpec(Formula data) : data_term(std::move(data)) {}
};

struct BatchLoss {
  NodeId loss = kNoNode;
  /// Family conjunction of the selected data conjuncts, in [0,1] (diagnostic
  /// value before any log transform).
  double data_value = 1.0;
  std::vector<double> constraint_values;  // one per constraint term
};

/// Top-level conjuncts of a formula: nested conjunctions are flattened, any
/// other node is a single conjunct.
std::vector<const Formula*> top_level_conjuncts(const Formula& f);

/// Build the relaxed truth value of a grounded formula as a tape node, using
/// the family's connectives from the binding's probability entries.
/// The R-Product implication is expressed as min(1, y / max(x, 1e-12)); the
/// floor only matters when the antecedent has collapsed to ~0.
NodeId formula_value_on_tape(const Formula& f, TNormFamily fam, const AtomBinding& binding,
                             Tape& tape);

/// Compile the training objective (to MINIMIZE) for one batch.
/// `data_batch` selects indices into the flattened data conjuncts; pass
/// std::nullopt for all of them. Constraint terms are expected to be
/// grounded over the current batch already and always enter whole.
///
/// Per family: Product relaxations sum -log over conjuncts (constraints
/// scaled by lambda inside each term's sum); strict Lukasiewicz negates the
/// single n-ary conjunction over everything; LukasiewiczRelaxed negates the
/// plain sum of conjunct values (constraints scaled by lambda); S-Godel
/// takes -log of the min conjunct per term. Terms with lambda = 0 are
/// excluded from the objective node so the result is exactly the data-only
/// loss. Throws std::invalid_argument for R-Godel or an unbound atom.
BatchLoss compile(const LossSpec& spec, const AtomBinding& binding, Tape& tape,
                  const std::optional<std::vector<std::uint32_t>>& data_batch = std::nullopt);

struct EffectivePhase {
  TNormFamily family;
  std::vector<std::string> frozen_models;
};

/// Training schedule for the S-Godel path: epochs before
/// `warm_start_epochs` run under the warm-start family; from the switch
/// epoch on, the configured freeze set applies. With warm_start_epochs = 0
/// the schedule is disabled (S-Godel throughout, nothing frozen).
EffectivePhase warmup_schedule(const LossSpec& spec, int epoch);

}  // namespace tnl
