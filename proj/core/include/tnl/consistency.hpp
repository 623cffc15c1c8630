#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tnl/formula.hpp"
#include "tnl/tnorm.hpp"

namespace tnl {

enum class IntegrationMethod { MonteCarlo, LowDiscrepancy, Grid };

std::string_view method_name(IntegrationMethod m);                       // mc | sobol | grid
std::optional<IntegrationMethod> method_from_name(std::string_view name);

struct IntegrationConfig {
  IntegrationMethod method = IntegrationMethod::MonteCarlo;
  /// Sample count; for the grid method, points per dimension (midpoint rule).
  std::uint64_t samples = 1'000'000;
  std::uint64_t seed = 0;
  unsigned workers = 1;
};

struct ConsistencyEstimate {
  double value = 0.0;
  double std_error = 0.0;  // 0 for the deterministic grid method
  std::uint64_t n_evals = 0;
  IntegrationMethod method = IntegrationMethod::MonteCarlo;
};

/// Estimate the integral of the relaxed formula over independent
/// Uniform[0,1] values for its atoms. Identical (formula, family, config)
/// inputs give bit-identical results regardless of `workers`. The grid
/// method is limited to 4 atoms.
ConsistencyEstimate consistency(const Formula& f, TNormFamily fam,
                                const IntegrationConfig& cfg);

/// Degree to which a formula implies itself: the consistency of f <-> f,
/// built over a single shared copy of f's atoms.
ConsistencyEstimate self_consistency(const Formula& f, TNormFamily fam,
                                     const IntegrationConfig& cfg);

struct ExactRational {
  std::string numerator;
  std::string denominator;
  double value = 0.0;  // nearest double
};

/// Closed form for the self-consistency of an n-atom monotone conjunction
/// under S-Product: 1 - 2/2^n + 3/3^n - 2/4^n + 1/5^n, as an exact reduced
/// rational. Throws std::invalid_argument for n = 0.
ExactRational sproduct_monotone_conjunction_selfconsistency(unsigned n);

struct TautologyRow {
  std::string name;
  std::string text;
};

/// The 22 built-in tautologies: 3 axiom schemata, 5 primitive propositions,
/// excluded middle, contradiction, double negation, 2 transposition laws,
/// 2 tautology laws, 2 absorption laws, 2 distribution laws, 2 De Morgan
/// laws, and the material excluded middle.
const std::vector<TautologyRow>& tautology_suite_rows();

/// Column order used by the suite CSV.
std::vector<TNormFamily> suite_default_families();

struct SuiteCell {
  double value = 0.0;
  double std_error = 0.0;
  std::uint64_t n_evals = 0;
};

struct SuiteTable {
  std::vector<TautologyRow> rows;
  std::vector<TNormFamily> families;
  std::vector<std::vector<SuiteCell>> cells;  // [row][family]

  const SuiteCell& cell(std::string_view row_name, TNormFamily fam) const;
  std::string to_csv() const;
};

/// Integrate every suite row under every requested family. Per-cell seeds
/// are derived from cfg.seed, so the table is deterministic for a fixed
/// seed independent of worker count.
SuiteTable tautology_suite(std::span<const TNormFamily> families,
                           const IntegrationConfig& cfg);

}  // namespace tnl
