#include "tnl/formula.hpp"

#include <json.hpp>

#include <functional>
#include <stdexcept>
#include <unordered_set>
#include <utility>

namespace tnl {

std::string term_to_string(const Term& t) {
  if (std::holds_alternative<std::string>(t)) return std::get<std::string>(t);
  return std::to_string(std::get<std::int64_t>(t));
}

std::string Atom::to_string() const {
  if (args.empty()) return predicate;
  std::string out = predicate;
  out += '(';
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (i) out += ", ";
    out += term_to_string(args[i]);
  }
  out += ')';
  return out;
}

std::size_t AtomHash::operator()(const Atom& a) const noexcept {
  std::size_t h = std::hash<std::string>{}(a.predicate);
  for (const Term& t : a.args) {
    std::size_t th;
    if (std::holds_alternative<std::string>(t)) {
      th = std::hash<std::string>{}(std::get<std::string>(t)) * 2 + 1;
    } else {
      th = std::hash<std::int64_t>{}(std::get<std::int64_t>(t)) * 2;
    }
    h ^= th + 0x9e3779b9 + (h << 6) + (h >> 2);
  }
  return h;
}

Formula Formula::atom(Atom a) {
  if (a.predicate.empty()) throw std::invalid_argument("atom predicate name is empty");
  Formula f;
  f.kind_ = FormulaKind::Atom;
  f.atom_ = std::move(a);
  return f;
}

Formula Formula::atom(std::string predicate, std::vector<Term> args) {
  return atom(Atom{std::move(predicate), std::move(args)});
}

Formula Formula::negation(Formula f) {
  Formula out;
  out.kind_ = FormulaKind::Not;
  out.operands_.push_back(std::move(f));
  return out;
}

Formula Formula::conjunction(std::vector<Formula> operands) {
  if (operands.size() < 2) throw std::invalid_argument("conjunction needs at least 2 operands");
  Formula out;
  out.kind_ = FormulaKind::And;
  out.operands_ = std::move(operands);
  return out;
}

Formula Formula::disjunction(std::vector<Formula> operands) {
  if (operands.size() < 2) throw std::invalid_argument("disjunction needs at least 2 operands");
  Formula out;
  out.kind_ = FormulaKind::Or;
  out.operands_ = std::move(operands);
  return out;
}

Formula Formula::implication(Formula antecedent, Formula consequent) {
  Formula out;
  out.kind_ = FormulaKind::Implies;
  out.operands_.push_back(std::move(antecedent));
  out.operands_.push_back(std::move(consequent));
  return out;
}

Formula Formula::biconditional(Formula lhs, Formula rhs) {
  Formula out;
  out.kind_ = FormulaKind::Iff;
  out.operands_.push_back(std::move(lhs));
  out.operands_.push_back(std::move(rhs));
  return out;
}

Formula Formula::forall(std::string variable, std::vector<Term> domain, Formula body) {
  if (variable.empty()) throw std::invalid_argument("quantifier variable name is empty");
  Formula out;
  out.kind_ = FormulaKind::ForAll;
  out.variable_ = std::move(variable);
  out.domain_ = std::move(domain);
  out.operands_.push_back(std::move(body));
  return out;
}

const Atom& Formula::atom_ref() const {
  if (kind_ != FormulaKind::Atom) throw std::logic_error("not an atom node");
  return atom_;
}

const Formula& Formula::antecedent() const {
  if (kind_ != FormulaKind::Implies) throw std::logic_error("not an implication node");
  return operands_[0];
}

const Formula& Formula::consequent() const {
  if (kind_ != FormulaKind::Implies) throw std::logic_error("not an implication node");
  return operands_[1];
}

const Formula& Formula::body() const {
  if (kind_ != FormulaKind::ForAll) throw std::logic_error("not a quantifier node");
  return operands_[0];
}

bool Formula::operator==(const Formula& other) const {
  if (kind_ != other.kind_) return false;
  switch (kind_) {
    case FormulaKind::Atom:
      return atom_ == other.atom_;
    case FormulaKind::ForAll:
      if (variable_ != other.variable_ || domain_ != other.domain_) return false;
      [[fallthrough]];
    default:
      return operands_ == other.operands_;
  }
}

bool is_grounded(const Formula& f) {
  if (f.kind() == FormulaKind::ForAll) return false;
  for (const Formula& child : f.operands()) {
    if (!is_grounded(child)) return false;
  }
  return true;
}

namespace {

// Substitute `value` for the identifier `var` in atom arguments. Does not
// descend into a quantifier that rebinds the same variable.
Formula substitute(const Formula& f, const std::string& var, const Term& value) {
  switch (f.kind()) {
    case FormulaKind::Atom: {
      Atom a = f.atom_ref();
      for (Term& t : a.args) {
        if (std::holds_alternative<std::string>(t) && std::get<std::string>(t) == var) {
          t = value;
        }
      }
      return Formula::atom(std::move(a));
    }
    case FormulaKind::Not:
      return Formula::negation(substitute(f.operands()[0], var, value));
    case FormulaKind::And:
    case FormulaKind::Or: {
      std::vector<Formula> kids;
      kids.reserve(f.operands().size());
      for (const Formula& child : f.operands()) kids.push_back(substitute(child, var, value));
      return f.kind() == FormulaKind::And ? Formula::conjunction(std::move(kids))
                                          : Formula::disjunction(std::move(kids));
    }
    case FormulaKind::Implies:
      return Formula::implication(substitute(f.antecedent(), var, value),
                                  substitute(f.consequent(), var, value));
    case FormulaKind::Iff:
      return Formula::biconditional(substitute(f.operands()[0], var, value),
                                    substitute(f.operands()[1], var, value));
    case FormulaKind::ForAll:
      if (f.variable() == var) return f;  // shadowed
      return Formula::forall(f.variable(), f.domain(), substitute(f.body(), var, value));
  }
  throw std::logic_error("unreachable formula kind");
}

}  // namespace

Formula ground(const Formula& f, const DomainBindings& bindings) {
  switch (f.kind()) {
    case FormulaKind::Atom:
      return f;
    case FormulaKind::Not:
      return Formula::negation(ground(f.operands()[0], bindings));
    case FormulaKind::And:
    case FormulaKind::Or: {
      std::vector<Formula> kids;
      kids.reserve(f.operands().size());
      for (const Formula& child : f.operands()) kids.push_back(ground(child, bindings));
      return f.kind() == FormulaKind::And ? Formula::conjunction(std::move(kids))
                                          : Formula::disjunction(std::move(kids));
    }
    case FormulaKind::Implies:
      return Formula::implication(ground(f.antecedent(), bindings),
                                  ground(f.consequent(), bindings));
    case FormulaKind::Iff:
      return Formula::biconditional(ground(f.operands()[0], bindings),
                                    ground(f.operands()[1], bindings));
    case FormulaKind::ForAll: {
      const std::vector<Term>* domain = &f.domain();
      if (domain->empty()) {
        auto it = bindings.find(f.variable());
        if (it == bindings.end()) {
          throw std::invalid_argument("variable '" + f.variable() + "' has no domain");
        }
        domain = &it->second;
      }
      if (domain->empty()) {
        throw std::invalid_argument("empty domain for variable '" + f.variable() + "'");
      }
      std::vector<Formula> instances;
      instances.reserve(domain->size());
      for (const Term& t : *domain) {
        instances.push_back(ground(substitute(f.body(), f.variable(), t), bindings));
      }
      if (instances.size() == 1) return std::move(instances[0]);
      return Formula::conjunction(std::move(instances));
    }
  }
  throw std::logic_error("unreachable formula kind");
}

std::vector<Atom> free_atoms(const Formula& f) {
  std::vector<Atom> out;
  std::unordered_set<Atom, AtomHash> seen;
  std::function<void(const Formula&)> walk = [&](const Formula& node) {
    if (node.kind() == FormulaKind::ForAll) {
      throw std::invalid_argument("free_atoms requires a grounded formula");
    }
    if (node.kind() == FormulaKind::Atom) {
      if (seen.insert(node.atom_ref()).second) out.push_back(node.atom_ref());
      return;
    }
    for (const Formula& child : node.operands()) walk(child);
  };
  walk(f);
  return out;
}

namespace {

using nlohmann::json;

json term_to_json(const Term& t) {
  if (std::holds_alternative<std::string>(t)) return json(std::get<std::string>(t));
  return json(std::get<std::int64_t>(t));
}

Term term_from_json(const json& j) {
  if (j.is_string()) return Term(j.get<std::string>());
  if (j.is_number_integer()) return Term(j.get<std::int64_t>());
  throw std::invalid_argument("term must be a string or an integer");
}

json node_to_json(const Formula& f) {
  json j;
  switch (f.kind()) {
    case FormulaKind::Atom: {
      j["kind"] = "atom";
      j["predicate"] = f.atom_ref().predicate;
      json args = json::array();
      for (const Term& t : f.atom_ref().args) args.push_back(term_to_json(t));
      j["args"] = std::move(args);
      break;
    }
    case FormulaKind::Not:
      j["kind"] = "not";
      j["child"] = node_to_json(f.operands()[0]);
      break;
    case FormulaKind::And:
    case FormulaKind::Or: {
      j["kind"] = f.kind() == FormulaKind::And ? "and" : "or";
      json kids = json::array();
      for (const Formula& child : f.operands()) kids.push_back(node_to_json(child));
      j["children"] = std::move(kids);
      break;
    }
    case FormulaKind::Implies:
      j["kind"] = "implies";
      j["antecedent"] = node_to_json(f.antecedent());
      j["consequent"] = node_to_json(f.consequent());
      break;
    case FormulaKind::Iff:
      j["kind"] = "iff";
      j["left"] = node_to_json(f.operands()[0]);
      j["right"] = node_to_json(f.operands()[1]);
      break;
    case FormulaKind::ForAll: {
      j["kind"] = "forall";
      j["var"] = f.variable();
      json dom = json::array();
      for (const Term& t : f.domain()) dom.push_back(term_to_json(t));
      j["domain"] = std::move(dom);
      j["body"] = node_to_json(f.body());
      break;
    }
  }
  return j;
}

Formula node_from_json(const json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "atom") {
    std::vector<Term> args;
    for (const json& a : j.at("args")) args.push_back(term_from_json(a));
    return Formula::atom(j.at("predicate").get<std::string>(), std::move(args));
  }
  if (kind == "not") return Formula::negation(node_from_json(j.at("child")));
  if (kind == "and" || kind == "or") {
    std::vector<Formula> kids;
    for (const json& c : j.at("children")) kids.push_back(node_from_json(c));
    return kind == "and" ? Formula::conjunction(std::move(kids))
                         : Formula::disjunction(std::move(kids));
  }
  if (kind == "implies") {
    return Formula::implication(node_from_json(j.at("antecedent")),
                                node_from_json(j.at("consequent")));
  }
  if (kind == "iff") {
    return Formula::biconditional(node_from_json(j.at("left")), node_from_json(j.at("right")));
  }
  if (kind == "forall") {
    std::vector<Term> dom;
    for (const json& t : j.at("domain")) dom.push_back(term_from_json(t));
    return Formula::forall(j.at("var").get<std::string>(), std::move(dom),
                           node_from_json(j.at("body")));
  }
  throw std::invalid_argument("unknown formula node kind '" + kind + "'");
}

}  // namespace

std::string formula_to_json(const Formula& f) { return node_to_json(f).dump(); }

Formula formula_from_json(std::string_view json_text) {
  return node_from_json(json::parse(json_text));
}

}  // namespace tnl
