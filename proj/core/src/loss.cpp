#include "tnl/loss.hpp"

#include <cmath>
#include <stdexcept>

namespace tnl {

namespace {

constexpr double kLogFloor = 1e-12;

bool product_family(TNormFamily fam) {
  return fam == TNormFamily::SProduct || fam == TNormFamily::RProduct;
}

bool lukasiewicz_family(TNormFamily fam) {
  return fam == TNormFamily::Lukasiewicz || fam == TNormFamily::LukasiewiczRelaxed;
}

// Shared node cache so repeated connective structure does not balloon the
// tape within one compile call.
struct TapeCtx {
  TapeCtx(Tape& t, TNormFamily f, const AtomBinding& b) : tape(t), fam(f), binding(b) {}

  Tape& tape;
  TNormFamily fam;
  const AtomBinding& binding;
  NodeId one = kNoNode;
  NodeId floor = kNoNode;
  std::unordered_map<std::uint64_t, NodeId> gathers;

  NodeId const_one() {
    if (one == kNoNode) one = tape.constant(1.0);
    return one;
  }
  NodeId const_floor() {
    if (floor == kNoNode) floor = tape.constant(kLogFloor);
    return floor;
  }
  NodeId atom_value(const Atom& atom) {
    auto it = binding.find(atom);
    if (it == binding.end()) {
      throw std::invalid_argument("unbound atom " + atom.to_string());
    }
    const std::uint64_t key =
        (static_cast<std::uint64_t>(it->second.head_row) << 16) ^
        static_cast<std::uint64_t>(it->second.class_index);
    auto cached = gathers.find(key);
    if (cached != gathers.end()) return cached->second;
    const NodeId id = tape.gather(it->second.head_row, it->second.class_index);
    gathers.emplace(key, id);
    return id;
  }
};

NodeId build_value(TapeCtx& ctx, const Formula& f);

NodeId build_conj2(TapeCtx& ctx, NodeId x, NodeId y) {
  Tape& t = ctx.tape;
  switch (ctx.fam) {
    case TNormFamily::SGodel:
      return t.min(x, y);
    case TNormFamily::SProduct:
    case TNormFamily::RProduct:
      return t.mul(x, y);
    case TNormFamily::Lukasiewicz:
    case TNormFamily::LukasiewiczRelaxed:
      return t.clamp01(t.sub(t.add(x, y), ctx.const_one()));
    case TNormFamily::RGodel:
      break;
  }
  throw std::invalid_argument("family not supported on tape");
}

NodeId build_disj2(TapeCtx& ctx, NodeId x, NodeId y) {
  Tape& t = ctx.tape;
  switch (ctx.fam) {
    case TNormFamily::SGodel:
      return t.max(x, y);
    case TNormFamily::SProduct:
    case TNormFamily::RProduct:
      return t.sub(t.add(x, y), t.mul(x, y));
    case TNormFamily::Lukasiewicz:
    case TNormFamily::LukasiewiczRelaxed:
      return t.clamp01(t.add(x, y));
    case TNormFamily::RGodel:
      break;
  }
  throw std::invalid_argument("family not supported on tape");
}

NodeId build_impl(TapeCtx& ctx, NodeId x, NodeId y) {
  Tape& t = ctx.tape;
  switch (ctx.fam) {
    case TNormFamily::SGodel:
      return t.max(t.sub(ctx.const_one(), x), y);
    case TNormFamily::SProduct:
      return t.add(t.sub(ctx.const_one(), x), t.mul(x, y));
    case TNormFamily::RProduct:
      // min(1, y/x); the antecedent floor only engages when the antecedent
      // has collapsed below the log floor.
      return t.min(ctx.const_one(), t.div(y, t.max(x, ctx.const_floor())));
    case TNormFamily::Lukasiewicz:
    case TNormFamily::LukasiewiczRelaxed:
      return t.clamp01(t.add(t.sub(ctx.const_one(), x), y));
    case TNormFamily::RGodel:
      break;
  }
  throw std::invalid_argument("family not supported on tape");
}

NodeId build_nary_conj(TapeCtx& ctx, const std::vector<NodeId>& vals) {
  Tape& t = ctx.tape;
  if (lukasiewicz_family(ctx.fam)) {
    NodeId acc = vals[0];
    for (std::size_t i = 1; i < vals.size(); ++i) acc = t.add(acc, vals[i]);
    const NodeId offset = t.constant(static_cast<double>(vals.size() - 1));
    return t.clamp01(t.sub(acc, offset));
  }
  NodeId acc = vals[0];
  for (std::size_t i = 1; i < vals.size(); ++i) acc = build_conj2(ctx, acc, vals[i]);
  return acc;
}

NodeId build_nary_disj(TapeCtx& ctx, const std::vector<NodeId>& vals) {
  Tape& t = ctx.tape;
  if (lukasiewicz_family(ctx.fam)) {
    NodeId acc = vals[0];
    for (std::size_t i = 1; i < vals.size(); ++i) acc = t.add(acc, vals[i]);
    return t.clamp01(acc);
  }
  NodeId acc = vals[0];
  for (std::size_t i = 1; i < vals.size(); ++i) acc = build_disj2(ctx, acc, vals[i]);
  return acc;
}

NodeId build_value(TapeCtx& ctx, const Formula& f) {
  Tape& t = ctx.tape;
  switch (f.kind()) {
    case FormulaKind::Atom:
      return ctx.atom_value(f.atom_ref());
    case FormulaKind::Not:
      return t.sub(ctx.const_one(), build_value(ctx, f.operands()[0]));
    case FormulaKind::And:
    case FormulaKind::Or: {
      std::vector<NodeId> vals;
      vals.reserve(f.operands().size());
      for (const Formula& child : f.operands()) vals.push_back(build_value(ctx, child));
      return f.kind() == FormulaKind::And ? build_nary_conj(ctx, vals)
                                          : build_nary_disj(ctx, vals);
    }
    case FormulaKind::Implies:
      return build_impl(ctx, build_value(ctx, f.antecedent()), build_value(ctx, f.consequent()));
    case FormulaKind::Iff: {
      const NodeId x = build_value(ctx, f.operands()[0]);
      const NodeId y = build_value(ctx, f.operands()[1]);
      return build_conj2(ctx, build_impl(ctx, x, y), build_impl(ctx, y, x));
    }
    case FormulaKind::ForAll:
      throw std::invalid_argument("loss compilation requires a grounded formula");
  }
  throw std::logic_error("unreachable formula kind");
}

// Connective outputs are in [0,1] up to FP dust, so only the floor is
// needed to keep the log finite; a cap at 1 would tie against saturated
// implications and kill the kink margin for gradient checks.
NodeId clamped_log(TapeCtx& ctx, NodeId x) {
  Tape& t = ctx.tape;
  return t.log(t.max(x, ctx.const_floor()));
}

// Diagnostic conjunction value over forward values; relaxed Lukasiewicz
// reports the true (strict) conjunction value.
double diagnostic_conj(TNormFamily fam, const std::vector<double>& vals) {
  if (lukasiewicz_family(fam)) return eval_nary_lukasiewicz_conjunction(vals);
  double acc = vals[0];
  for (std::size_t i = 1; i < vals.size(); ++i) acc = conj2(fam, acc, vals[i]);
  return acc;
}

}  // namespace

std::vector<const Formula*> top_level_conjuncts(const Formula& f) {
  std::vector<const Formula*> out;
  if (f.kind() == FormulaKind::And) {
    for (const Formula& child : f.operands()) {
      for (const Formula* leaf : top_level_conjuncts(child)) out.push_back(leaf);
    }
  } else {
    out.push_back(&f);
  }
  return out;
}

NodeId formula_value_on_tape(const Formula& f, TNormFamily fam, const AtomBinding& binding,
                             Tape& tape) {
  if (fam == TNormFamily::RGodel) {
    throw std::invalid_argument("r-godel implication is not sub-differentiable; "
                                "it cannot be compiled to a trainable objective");
  }
  TapeCtx ctx(tape, fam, binding);
  return build_value(ctx, f);
}

BatchLoss compile(const LossSpec& spec, const AtomBinding& binding, Tape& tape,
                  const std::optional<std::vector<std::uint32_t>>& data_batch) {
  if (spec.family == TNormFamily::RGodel) {
    throw std::invalid_argument("r-godel implication is not sub-differentiable; "
                                "it cannot be compiled to a trainable objective");
  }
  for (const ConstraintTerm& term : spec.constraint_terms) {
    if (term.weight < 0.0) throw std::invalid_argument("constraint weight must be >= 0");
  }

  TapeCtx ctx(tape, spec.family, binding);
  Tape& t = tape;

  const std::vector<const Formula*> all_data = top_level_conjuncts(spec.data_term);
  std::vector<const Formula*> data;
  if (data_batch.has_value()) {
    data.reserve(data_batch->size());
    for (std::uint32_t idx : *data_batch) {
      if (idx >= all_data.size()) throw std::invalid_argument("data batch index out of range");
      data.push_back(all_data[idx]);
    }
  } else {
    data = all_data;
  }
  if (data.empty()) throw std::invalid_argument("empty data batch");

  std::vector<NodeId> data_nodes;
  data_nodes.reserve(data.size());
  for (const Formula* conjunct : data) data_nodes.push_back(build_value(ctx, *conjunct));

  struct TermNodes {
    std::vector<NodeId> nodes;
    double weight;
  };
  std::vector<TermNodes> term_nodes;
  term_nodes.reserve(spec.constraint_terms.size());
  for (const ConstraintTerm& term : spec.constraint_terms) {
    TermNodes tn;
    tn.weight = term.weight;
    for (const Formula* conjunct : top_level_conjuncts(term.formula)) {
      tn.nodes.push_back(build_value(ctx, *conjunct));
    }
    term_nodes.push_back(std::move(tn));
  }

  BatchLoss out;
  {
    std::vector<double> vals;
    vals.reserve(data_nodes.size());
    for (NodeId id : data_nodes) vals.push_back(t.scalar(id));
    out.data_value = diagnostic_conj(spec.family, vals);
    for (const TermNodes& tn : term_nodes) {
      vals.clear();
      for (NodeId id : tn.nodes) vals.push_back(t.scalar(id));
      out.constraint_values.push_back(diagnostic_conj(spec.family, vals));
    }
  }

  const TNormFamily fam = spec.family;
  if (product_family(fam)) {
    // -sum log over data conjuncts, -lambda * sum log per constraint term.
    NodeId acc = kNoNode;
    for (NodeId id : data_nodes) {
      const NodeId term = clamped_log(ctx, id);
      acc = acc == kNoNode ? term : t.add(acc, term);
    }
    for (const TermNodes& tn : term_nodes) {
      if (tn.weight == 0.0) continue;
      NodeId sum = kNoNode;
      for (NodeId id : tn.nodes) {
        const NodeId term = clamped_log(ctx, id);
        sum = sum == kNoNode ? term : t.add(sum, term);
      }
      acc = t.add(acc, t.mul(t.constant(tn.weight), sum));
    }
    out.loss = t.neg(acc);
  } else if (fam == TNormFamily::Lukasiewicz) {
    // Strict: the single n-ary conjunction over every conjunct.
    std::vector<NodeId> everything = data_nodes;
    for (const TermNodes& tn : term_nodes) {
      everything.insert(everything.end(), tn.nodes.begin(), tn.nodes.end());
    }
    out.loss = t.neg(build_nary_conj(ctx, everything));
  } else if (fam == TNormFamily::LukasiewiczRelaxed) {
    NodeId acc = kNoNode;
    for (NodeId id : data_nodes) acc = acc == kNoNode ? id : t.add(acc, id);
    for (const TermNodes& tn : term_nodes) {
      if (tn.weight == 0.0) continue;
      NodeId sum = kNoNode;
      for (NodeId id : tn.nodes) sum = sum == kNoNode ? id : t.add(sum, id);
      acc = t.add(acc, t.mul(t.constant(tn.weight), sum));
    }
    out.loss = t.neg(acc);
  } else {  // SGodel
    NodeId batch_min = data_nodes[0];
    for (std::size_t i = 1; i < data_nodes.size(); ++i) {
      batch_min = t.min(batch_min, data_nodes[i]);
    }
    NodeId acc = clamped_log(ctx, batch_min);
    for (const TermNodes& tn : term_nodes) {
      if (tn.weight == 0.0) continue;
      NodeId term_min = tn.nodes[0];
      for (std::size_t i = 1; i < tn.nodes.size(); ++i) {
        term_min = t.min(term_min, tn.nodes[i]);
      }
      acc = t.add(acc, t.mul(t.constant(tn.weight), clamped_log(ctx, term_min)));
    }
    out.loss = t.neg(acc);
  }
  return out;
}

EffectivePhase warmup_schedule(const LossSpec& spec, int epoch) {
  if (spec.family != TNormFamily::SGodel || spec.godel.warm_start_epochs <= 0) {
    return {spec.family, {}};
  }
  if (epoch < spec.godel.warm_start_epochs) {
    return {spec.godel.warm_start_family, {}};
  }
  return {TNormFamily::SGodel, spec.godel.freeze_after_warmup};
}

}  // namespace tnl
