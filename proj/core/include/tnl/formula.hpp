#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "tnl/errors.hpp"

namespace tnl {

/// A ground term: either an identifier or an integer.
using Term = std::variant<std::string, std::int64_t>;

std::string term_to_string(const Term& t);

/// A named predicate instance, e.g. `P`, `Digit(7, 3)`. Two atoms denote the
/// same variable of integration iff predicate name and argument list agree.
struct Atom {
  std::string predicate;
  std::vector<Term> args;

  bool operator==(const Atom&) const = default;
  std::string to_string() const;
};

struct AtomHash {
  std::size_t operator()(const Atom& a) const noexcept;
};

enum class FormulaKind { Atom, Not, And, Or, Implies, Iff, ForAll };

/// Immutable propositional/grounded first-order formula tree. And/Or are
/// n-ary (kept flat, never desugared to binary); Implies and Iff are binary;
/// ForAll quantifies one variable over a finite term domain.
class Formula {
 public:
  static Formula atom(Atom a);
  static Formula atom(std::string predicate, std::vector<Term> args = {});
  static Formula negation(Formula f);
  static Formula conjunction(std::vector<Formula> operands);  // size >= 2
  static Formula disjunction(std::vector<Formula> operands);  // size >= 2
  static Formula implication(Formula antecedent, Formula consequent);
  static Formula biconditional(Formula lhs, Formula rhs);
  static Formula forall(std::string variable, std::vector<Term> domain, Formula body);

  FormulaKind kind() const noexcept { return kind_; }
  const Atom& atom_ref() const;
  const std::vector<Formula>& operands() const { return operands_; }
  const Formula& antecedent() const;
  const Formula& consequent() const;
  const Formula& body() const;
  const std::string& variable() const { return variable_; }
  const std::vector<Term>& domain() const { return domain_; }

  bool operator==(const Formula& other) const;

 private:
  Formula() = default;

  FormulaKind kind_ = FormulaKind::Atom;
  Atom atom_;
  std::vector<Formula> operands_;
  std::string variable_;
  std::vector<Term> domain_;
};

using DomainBindings = std::map<std::string, std::vector<Term>>;

/// Parse a formula from text. Grammar (loosest to tightest): `<->` (left
/// associative), `->` (right associative), `|`, `&`, `~`; parentheses
/// override; `forall VAR in {t, ...}: BODY` extends to the end of the
/// enclosing formula. Throws ParseError with a byte offset on bad input.
Formula parse_formula(std::string_view text);

/// Render a formula so that `parse_formula(to_text(f)) == f`.
std::string to_text(const Formula& f);

/// True iff the formula contains no ForAll node.
bool is_grounded(const Formula& f);

/// Expand every ForAll over its finite domain (taken from the node, or from
/// `bindings` when the node carries none) into a flat conjunction of
/// instantiated bodies; a singleton domain yields the body directly.
/// Throws std::invalid_argument when a variable lacks a domain or the
/// domain is empty. Idempotent on grounded formulas.
Formula ground(const Formula& f, const DomainBindings& bindings = {});

/// Atoms of a grounded formula in first-occurrence (depth-first,
/// left-to-right) order, without duplicates. This ordering defines the
/// integration-variable ordering everywhere downstream.
/// Throws std::invalid_argument on non-grounded input.
std::vector<Atom> free_atoms(const Formula& f);

/// Canonical JSON tree with a `kind` tag per node.
std::string formula_to_json(const Formula& f);
Formula formula_from_json(std::string_view json_text);

}  // namespace tnl
