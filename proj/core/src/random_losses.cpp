#include "tnl/random_losses.hpp"

#include <stdexcept>

#include "tnl/autodiff.hpp"
#include "tnl/loss.hpp"

namespace tnl {

Formula random_formula(CounterRng& rng, std::span<const Atom> atoms, int max_depth) {
  if (atoms.empty()) throw std::invalid_argument("atom pool is empty");
  auto rand_atom = [&] {
    return Formula::atom(atoms[rng.next_below(atoms.size())]);
  };
  std::function<Formula(int)> gen = [&](int depth) -> Formula {
    if (depth <= 0) return rand_atom();
    const std::uint64_t pick = rng.next_below(100);
    if (pick < 15) return rand_atom();
    if (pick < 30) return Formula::negation(gen(depth - 1));
    auto distinct_children = [&](std::size_t n) {
      std::vector<Formula> kids;
      while (kids.size() < n) {
        Formula candidate = gen(depth - 1);
        bool dup = false;
        for (const Formula& k : kids) {
          if (k == candidate) dup = true;
        }
        if (!dup) kids.push_back(std::move(candidate));
      }
      return kids;
    };
    if (pick < 50) return Formula::conjunction(distinct_children(2 + rng.next_below(2)));
    if (pick < 70) return Formula::disjunction(distinct_children(2 + rng.next_below(2)));
    if (pick < 90) {
      auto kids = distinct_children(2);
      return Formula::implication(std::move(kids[0]), std::move(kids[1]));
    }
    auto kids = distinct_children(2);
    return Formula::biconditional(std::move(kids[0]), std::move(kids[1]));
  };
  return gen(max_depth);
}

namespace {

// Two tiny softmax heads: 6 -> 8 (sigmoid) -> 5 (softmax). 101 parameters
// per head; the flat point carves into [W1 b1 W2 b2] per head.
constexpr int kIn = 6, kHidden = 8, kClasses = 5, kHeads = 2;
constexpr int kParamsPerHead = kIn * kHidden + kHidden + kHidden * kClasses + kClasses;

NodeId head_forward(Tape& tape, const std::vector<double>& point, int head,
                    std::span<const double> x) {
  std::size_t off = static_cast<std::size_t>(head) * kParamsPerHead;
  const NodeId w1 = tape.param({point.data() + off, kIn * kHidden}, kHidden, kIn);
  off += kIn * kHidden;
  const NodeId b1 = tape.param({point.data() + off, kHidden}, kHidden);
  off += kHidden;
  const NodeId w2 = tape.param({point.data() + off, kHidden * kClasses}, kClasses, kHidden);
  off += kHidden * kClasses;
  const NodeId b2 = tape.param({point.data() + off, kClasses}, kClasses);
  const NodeId in = tape.input(x, kIn);
  const NodeId h = tape.sigmoid(tape.add(tape.matvec(w1, in), b1));
  return tape.softmax_row(tape.add(tape.matvec(w2, h), b2));
}

}  // namespace

LossCheckReport check_random_losses(TNormFamily fam, std::uint64_t seed, int count,
                                    double step) {
  if (fam == TNormFamily::RGodel) {
    throw std::invalid_argument("r-godel losses cannot be compiled");
  }
  LossCheckReport report;
  std::vector<Atom> pool;
  for (int h = 0; h < kHeads; ++h) {
    for (int c = 0; c < kClasses; ++c) {
      pool.push_back(Atom{"A", {Term(std::int64_t(h)), Term(std::int64_t(c))}});
    }
  }

  int attempts = 0;
  std::uint64_t draw = 0;
  while (report.n_checked < count) {
    if (++attempts > 50 * count) {
      throw std::runtime_error("could not find enough kink-safe points");
    }
    CounterRng rng(seed, draw++);

    std::vector<double> point(kHeads * kParamsPerHead);
    for (double& p : point) p = 2.0 * rng.next_unit() - 1.0;
    std::vector<double> x(kIn);
    for (double& v : x) v = 2.0 * rng.next_unit() - 1.0;

    // Data term: 3 distinct atoms. Constraints: 1-2 random formulas.
    std::vector<Formula> data_atoms;
    std::vector<std::size_t> chosen;
    while (data_atoms.size() < 3) {
      const std::size_t i = rng.next_below(pool.size());
      bool dup = false;
      for (std::size_t c : chosen) {
        if (c == i) dup = true;
      }
      if (dup) continue;
      chosen.push_back(i);
      data_atoms.push_back(Formula::atom(pool[i]));
    }
    LossSpec spec(Formula::conjunction(std::move(data_atoms)));
    spec.family = fam;
    const int n_constraints = 1 + static_cast<int>(rng.next_below(2));
    for (int c = 0; c < n_constraints; ++c) {
      const double lambda = 0.25 + 1.5 * rng.next_unit();
      spec.constraint_terms.push_back({random_formula(rng, pool, 3), lambda});
    }

    const TapeBuilder builder = [&](Tape& tape, const std::vector<double>& p) {
      const NodeId row0 = head_forward(tape, p, 0, x);
      const NodeId row1 = head_forward(tape, p, 1, x);
      AtomBinding binding;
      for (int c = 0; c < kClasses; ++c) {
        binding[pool[c]] = {row0, c};
        binding[pool[kClasses + c]] = {row1, c};
      }
      return compile(spec, binding, tape).loss;
    };

    try {
      const double err = grad_check(builder, point, step);
      report.max_rel_error = std::max(report.max_rel_error, err);
      ++report.n_checked;
    } catch (const KinkError&) {
      ++report.resamples;
    }
  }
  return report;
}

}  // namespace tnl
