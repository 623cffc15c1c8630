#include <cstdio>
#include <stdexcept>

#include "tnl/consistency.hpp"
#include "tnl/rng.hpp"

namespace tnl {

const std::vector<TautologyRow>& tautology_suite_rows() {
  static const std::vector<TautologyRow> rows = {
      {"axiom-1", "P -> (Q -> P)"},
      {"axiom-2", "(P -> (Q -> R)) -> ((P -> Q) -> (P -> R))"},
      {"axiom-3", "(~P -> ~Q) -> (Q -> P)"},
      {"primitive-1", "(P | P) -> P"},
      {"primitive-2", "Q -> (P | Q)"},
      {"primitive-3", "(P | Q) -> (Q | P)"},
      {"primitive-4", "(P | (Q | R)) -> (Q | (P | R))"},
      {"primitive-5", "(Q -> R) -> ((P | Q) -> (P | R))"},
      {"excluded-middle", "P | ~P"},
      {"contradiction", "~(P & ~P)"},
      {"double-negation", "P <-> ~(~P)"},
      {"transposition-1", "(P <-> Q) <-> (~P <-> ~Q)"},
      {"transposition-2", "((P & Q) -> R) <-> ((P & ~R) -> ~Q)"},
      {"tautology-law-1", "P <-> (P & P)"},
      {"tautology-law-2", "P <-> (P | P)"},
      {"absorption-1", "(P -> Q) <-> (P <-> (P & Q))"},
      {"absorption-2", "Q -> (P <-> (P & Q))"},
      {"distribution-1", "(P & (Q | R)) <-> ((P & Q) | (P & R))"},
      {"distribution-2", "(P | (Q & R)) <-> ((P | Q) & (P | R))"},
      {"de-morgan-1", "(P & Q) <-> ~(~P | ~Q)"},
      {"de-morgan-2", "~(P & Q) <-> (~P | ~Q)"},
      {"material-excluded-middle", "(P -> Q) | (Q -> P)"},
  };
  return rows;
}

std::vector<TNormFamily> suite_default_families() {
  return {TNormFamily::SProduct, TNormFamily::SGodel, TNormFamily::Lukasiewicz,
          TNormFamily::RProduct, TNormFamily::RGodel};
}

const SuiteCell& SuiteTable::cell(std::string_view row_name, TNormFamily fam) const {
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].name != row_name) continue;
    for (std::size_t c = 0; c < families.size(); ++c) {
      if (families[c] == fam) return cells[r][c];
    }
  }
  throw std::out_of_range("no suite cell for row '" + std::string(row_name) + "'");
}

std::string SuiteTable::to_csv() const {
  std::string out = "name,formula";
  for (TNormFamily fam : families) {
    out += ',';
    out += family_name(fam);
    out += ',';
    out += family_name(fam);
    out += "_stderr";
  }
  out += '\n';
  char buf[64];
  for (std::size_t r = 0; r < rows.size(); ++r) {
    out += rows[r].name;
    out += ",\"";
    out += rows[r].text;
    out += '"';
    for (std::size_t c = 0; c < families.size(); ++c) {
      std::snprintf(buf, sizeof(buf), ",%.6f,%.6f", cells[r][c].value, cells[r][c].std_error);
      out += buf;
    }
    out += '\n';
  }
  return out;
}

SuiteTable tautology_suite(std::span<const TNormFamily> families,
                           const IntegrationConfig& cfg) {
  SuiteTable table;
  table.rows = tautology_suite_rows();
  table.families.assign(families.begin(), families.end());
  table.cells.resize(table.rows.size());
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const Formula f = parse_formula(table.rows[r].text);
    table.cells[r].resize(table.families.size());
    for (std::size_t c = 0; c < table.families.size(); ++c) {
      IntegrationConfig cell_cfg = cfg;
      // Independent sample stream per cell, fixed by (seed, row, column).
      cell_cfg.seed = derive_stream(cfg.seed, r * 64 + c);
      const ConsistencyEstimate est = consistency(f, table.families[c], cell_cfg);
      table.cells[r][c] = {est.value, est.std_error, est.n_evals};
    }
  }
  return table;
}

}  // namespace tnl
