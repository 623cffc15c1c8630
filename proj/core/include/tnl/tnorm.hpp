#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "tnl/formula.hpp"

namespace tnl {

/// The relaxation families. The residuated (R-) families use the involutive
/// negation 1-x for all other connectives; LukasiewiczRelaxed evaluates
/// formulas exactly like Lukasiewicz and differs only in how the loss
/// compiler treats top-level training conjunctions.
enum class TNormFamily {
  SGodel,
  RGodel,
  SProduct,
  RProduct,
  Lukasiewicz,
  LukasiewiczRelaxed,
};

constexpr std::array<TNormFamily, 6> kAllFamilies = {
    TNormFamily::SGodel,      TNormFamily::RGodel,      TNormFamily::SProduct,
    TNormFamily::RProduct,    TNormFamily::Lukasiewicz, TNormFamily::LukasiewiczRelaxed,
};

std::string_view family_name(TNormFamily fam);
std::optional<TNormFamily> family_from_name(std::string_view name);

/// R-Godel implications are step functions; they are accepted by the
/// consistency integrator but rejected by the loss compiler.
constexpr bool subdifferentiable(TNormFamily fam) { return fam != TNormFamily::RGodel; }

double conj2(TNormFamily fam, double x, double y);
double disj2(TNormFamily fam, double x, double y);
constexpr double negation(double x) { return 1.0 - x; }
/// x is the antecedent, y the consequent. Branch predicates compare with
/// exact IEEE `<=`; in particular the R-Product division is reached only
/// when x > y >= 0, so it never divides by zero.
double implication(TNormFamily fam, double x, double y);

/// max(0, sum(values) - (n-1)); identical to the left fold of the binary
/// Lukasiewicz conjunction. Throws std::invalid_argument on an empty list.
double eval_nary_lukasiewicz_conjunction(std::span<const double> values);

using Assignment = std::unordered_map<Atom, double, AtomHash>;

/// Evaluate a grounded formula at an assignment of atom truth values in
/// [0,1]. Throws std::invalid_argument on a missing atom or a value outside
/// [0,1]. N-ary conjunction/disjunction folds left-to-right for the Godel
/// and Product families and uses the direct n-ary form for Lukasiewicz.
double eval(const Formula& f, TNormFamily fam, const Assignment& a);

/// Flattened evaluator for hot loops (integration). Atom values are passed
/// positionally in `free_atoms` order; no range checks are performed.
class CompiledFormula {
 public:
  explicit CompiledFormula(const Formula& f);  // requires a grounded formula

  std::size_t arity() const noexcept { return atoms_.size(); }
  const std::vector<Atom>& atoms() const noexcept { return atoms_; }

  double eval(TNormFamily fam, std::span<const double> values) const;

 private:
  enum class Code : std::uint8_t { PushAtom, Not, And, Or, Implies, Iff };
  struct Instr {
    Code code;
    std::uint32_t arg;  // atom index or operand count
  };

  std::vector<Atom> atoms_;
  std::vector<Instr> program_;
  std::size_t max_stack_ = 0;
};

}  // namespace tnl
