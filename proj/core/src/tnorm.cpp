#include "tnl/tnorm.hpp"

#include <algorithm>
#include <functional>
#include <stdexcept>
#include <unordered_map>

namespace tnl {

std::string_view family_name(TNormFamily fam) {
  switch (fam) {
    case TNormFamily::SGodel: return "s-godel";
    case TNormFamily::RGodel: return "r-godel";
    case TNormFamily::SProduct: return "s-product";
    case TNormFamily::RProduct: return "r-product";
    case TNormFamily::Lukasiewicz: return "lukasiewicz";
    case TNormFamily::LukasiewiczRelaxed: return "lukasiewicz-relaxed";
  }
  return "?";
}

std::optional<TNormFamily> family_from_name(std::string_view name) {
  for (TNormFamily fam : kAllFamilies) {
    if (family_name(fam) == name) return fam;
  }
  return std::nullopt;
}

double conj2(TNormFamily fam, double x, double y) {
  switch (fam) {
    case TNormFamily::SGodel:
    case TNormFamily::RGodel:
      return std::min(x, y);
    case TNormFamily::SProduct:
    case TNormFamily::RProduct:
      return x * y;
    case TNormFamily::Lukasiewicz:
    case TNormFamily::LukasiewiczRelaxed:
      return std::max(0.0, x + y - 1.0);
  }
  return 0.0;
}

double disj2(TNormFamily fam, double x, double y) {
  switch (fam) {
    case TNormFamily::SGodel:
    case TNormFamily::RGodel:
      return std::max(x, y);
    case TNormFamily::SProduct:
    case TNormFamily::RProduct:
      return x + y - x * y;
    case TNormFamily::Lukasiewicz:
    case TNormFamily::LukasiewiczRelaxed:
      return std::min(1.0, x + y);
  }
  return 0.0;
}

double implication(TNormFamily fam, double x, double y) {
  switch (fam) {
    case TNormFamily::SGodel:
      return std::max(1.0 - x, y);
    case TNormFamily::RGodel:
      return x <= y ? 1.0 : y;
    case TNormFamily::SProduct:
      return 1.0 - x + x * y;
    case TNormFamily::RProduct:
      return x <= y ? 1.0 : y / x;
    case TNormFamily::Lukasiewicz:
    case TNormFamily::LukasiewiczRelaxed:
      return std::min(1.0, 1.0 - x + y);
  }
  return 0.0;
}

double eval_nary_lukasiewicz_conjunction(std::span<const double> values) {
  if (values.empty()) {
    throw std::invalid_argument("n-ary lukasiewicz conjunction of an empty list");
  }
  double sum = 0.0;
  for (double v : values) sum += v;
  return std::max(0.0, sum - static_cast<double>(values.size() - 1));
}

namespace {

bool lukasiewicz(TNormFamily fam) {
  return fam == TNormFamily::Lukasiewicz || fam == TNormFamily::LukasiewiczRelaxed;
}

double nary_conj(TNormFamily fam, std::span<const double> values) {
  if (lukasiewicz(fam)) return eval_nary_lukasiewicz_conjunction(values);
  double acc = values[0];
  for (std::size_t i = 1; i < values.size(); ++i) acc = conj2(fam, acc, values[i]);
  return acc;
}

double nary_disj(TNormFamily fam, std::span<const double> values) {
  if (lukasiewicz(fam)) {
    double sum = 0.0;
    for (double v : values) sum += v;
    return std::min(1.0, sum);
  }
  double acc = values[0];
  for (std::size_t i = 1; i < values.size(); ++i) acc = disj2(fam, acc, values[i]);
  return acc;
}

double iff2(TNormFamily fam, double x, double y) {
  return conj2(fam, implication(fam, x, y), implication(fam, y, x));
}

}  // namespace

double eval(const Formula& f, TNormFamily fam, const Assignment& a) {
  std::function<double(const Formula&)> walk = [&](const Formula& node) -> double {
    switch (node.kind()) {
      case FormulaKind::Atom: {
        auto it = a.find(node.atom_ref());
        if (it == a.end()) {
          throw std::invalid_argument("no assignment for atom " + node.atom_ref().to_string());
        }
        const double v = it->second;
        if (!(v >= 0.0 && v <= 1.0)) {
          throw std::invalid_argument("assignment for " + node.atom_ref().to_string() +
                                      " outside [0,1]");
        }
        return v;
      }
      case FormulaKind::Not:
        return negation(walk(node.operands()[0]));
      case FormulaKind::And:
      case FormulaKind::Or: {
        std::vector<double> vals;
        vals.reserve(node.operands().size());
        for (const Formula& child : node.operands()) vals.push_back(walk(child));
        return node.kind() == FormulaKind::And ? nary_conj(fam, vals) : nary_disj(fam, vals);
      }
      case FormulaKind::Implies:
        return implication(fam, walk(node.antecedent()), walk(node.consequent()));
      case FormulaKind::Iff:
        return iff2(fam, walk(node.operands()[0]), walk(node.operands()[1]));
      case FormulaKind::ForAll:
        throw std::invalid_argument("eval requires a grounded formula");
    }
    return 0.0;
  };
  return walk(f);
}

CompiledFormula::CompiledFormula(const Formula& f) {
  atoms_ = free_atoms(f);  // rejects non-grounded input
  std::unordered_map<Atom, std::uint32_t, AtomHash> index;
  for (std::uint32_t i = 0; i < atoms_.size(); ++i) index.emplace(atoms_[i], i);

  std::size_t depth = 0;
  std::function<void(const Formula&)> emit = [&](const Formula& node) {
    switch (node.kind()) {
      case FormulaKind::Atom:
        program_.push_back({Code::PushAtom, index.at(node.atom_ref())});
        ++depth;
        max_stack_ = std::max(max_stack_, depth);
        return;
      case FormulaKind::Not:
        emit(node.operands()[0]);
        program_.push_back({Code::Not, 0});
        return;
      case FormulaKind::And:
      case FormulaKind::Or: {
        for (const Formula& child : node.operands()) emit(child);
        const auto n = static_cast<std::uint32_t>(node.operands().size());
        program_.push_back({node.kind() == FormulaKind::And ? Code::And : Code::Or, n});
        depth -= n - 1;
        return;
      }
      case FormulaKind::Implies:
        emit(node.antecedent());
        emit(node.consequent());
        program_.push_back({Code::Implies, 0});
        --depth;
        return;
      case FormulaKind::Iff:
        emit(node.operands()[0]);
        emit(node.operands()[1]);
        program_.push_back({Code::Iff, 0});
        --depth;
        return;
      case FormulaKind::ForAll:
        throw std::invalid_argument("cannot compile a non-grounded formula");
    }
  };
  emit(f);
}

double CompiledFormula::eval(TNormFamily fam, std::span<const double> values) const {
  thread_local std::vector<double> stack;
  stack.clear();
  stack.reserve(max_stack_);
  for (const Instr& ins : program_) {
    switch (ins.code) {
      case Code::PushAtom:
        stack.push_back(values[ins.arg]);
        break;
      case Code::Not:
        stack.back() = negation(stack.back());
        break;
      case Code::And:
      case Code::Or: {
        const std::size_t n = ins.arg;
        std::span<const double> args(stack.data() + stack.size() - n, n);
        const double v = ins.code == Code::And ? nary_conj(fam, args) : nary_disj(fam, args);
        stack.resize(stack.size() - n);
        stack.push_back(v);
        break;
      }
      case Code::Implies: {
        const double y = stack.back();
        stack.pop_back();
        stack.back() = implication(fam, stack.back(), y);
        break;
      }
      case Code::Iff: {
        const double y = stack.back();
        stack.pop_back();
        stack.back() = iff2(fam, stack.back(), y);
        break;
      }
    }
  }
  return stack.back();
}

}  // namespace tnl
