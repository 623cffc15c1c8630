#include "tnl/tagging_task.hpp"

#include <algorithm>
#include <numeric>
#include <set>
#include <stdexcept>
#include <tuple>

#include "tnl/parallel.hpp"
#include "tnl/rng.hpp"

namespace tnl {

namespace {

constexpr int kWindow = 2;  // context tokens on each side

// group 0 tokens cue phrase type X, group 1 type Y, group 2 outside
int tag_group(int tag) {
  switch (tag) {
    case kTagBX:
    case kTagIX:
      return 0;
    case kTagBY:
    case kTagIY:
      return 1;
    default:
      return 2;
  }
}

std::int64_t position_id(int sentence, int pos) {
  return static_cast<std::int64_t>(sentence) * 1024 + pos;
}

Formula make_conjunction(std::vector<Formula> fs) {
  if (fs.empty()) throw std::invalid_argument("empty conjunction");
  if (fs.size() == 1) return std::move(fs[0]);
  return Formula::conjunction(std::move(fs));
}

struct Spans {
  std::set<std::tuple<int, int, int, int>> spans;  // (sentence, type, begin, end)
};

Spans extract_spans(const std::vector<std::vector<int>>& tags) {
  Spans out;
  for (std::size_t s = 0; s < tags.size(); ++s) {
    const std::vector<int>& seq = tags[s];
    int open_type = -1;
    int open_begin = -1;
    for (std::size_t i = 0; i <= seq.size(); ++i) {
      const int tag = i < seq.size() ? seq[i] : kTagO;
      const bool is_b = tag == kTagBX || tag == kTagBY;
      const bool is_i = tag == kTagIX || tag == kTagIY;
      const int type = is_b || is_i ? (tag_group(tag)) : -1;
      const bool continues = is_i && open_type == type;
      if (open_type >= 0 && !continues) {
        out.spans.emplace(static_cast<int>(s), open_type, open_begin, static_cast<int>(i));
        open_type = -1;
      }
      if (is_b || (is_i && !continues)) {
        // An I tag without a matching open phrase starts a new span.
        open_type = type;
        open_begin = static_cast<int>(i);
      }
    }
  }
  return out;
}

}  // namespace

std::string_view tag_name(int tag) {
  switch (tag) {
    case kTagO: return "O";
    case kTagBX: return "B-X";
    case kTagIX: return "I-X";
    case kTagBY: return "B-Y";
    case kTagIY: return "I-Y";
  }
  return "?";
}

std::string_view tag_term(int tag) {
  switch (tag) {
    case kTagO: return "O";
    case kTagBX: return "B_X";
    case kTagIX: return "I_X";
    case kTagBY: return "B_Y";
    case kTagIY: return "I_Y";
  }
  return "?";
}

bool forbidden_transition(int tag, int next_tag) {
  if (next_tag == kTagIY) return tag == kTagBX || tag == kTagIX;
  if (next_tag == kTagIX) return tag == kTagBY || tag == kTagIY;
  return false;
}

namespace {

void generate_split(const TaggingConfig& cfg, std::uint64_t stream, int n_sentences,
                    std::vector<std::vector<int>>& tokens_out,
                    std::vector<std::vector<int>>& tags_out) {
  CounterRng rng(cfg.seed, stream);
  const int vocab = 3 * cfg.tokens_per_group;
  tokens_out.clear();
  tags_out.clear();
  for (int s = 0; s < n_sentences; ++s) {
    const int len =
        cfg.min_len + static_cast<int>(rng.next_below(cfg.max_len - cfg.min_len + 1));
    std::vector<int> tags, tokens;
    int state = kTagO;  // current tag, drives the automaton
    for (int i = 0; i < len; ++i) {
      const bool inside_x = state == kTagBX || state == kTagIX;
      const bool inside_y = state == kTagBY || state == kTagIY;
      const double u = rng.next_unit();
      int tag;
      if ((inside_x || inside_y) && u < 0.5) {
        tag = inside_x ? kTagIX : kTagIY;
      } else {
        const double v = rng.next_unit();
        tag = v < 0.3 ? kTagBX : (v < 0.6 ? kTagBY : kTagO);
      }
      int token;
      if (rng.next_unit() < cfg.token_noise) {
        token = static_cast<int>(rng.next_below(vocab));
      } else {
        token = tag_group(tag) * cfg.tokens_per_group +
                static_cast<int>(rng.next_below(cfg.tokens_per_group));
      }
      tags.push_back(tag);
      tokens.push_back(token);
      state = tag;
    }
    tokens_out.push_back(std::move(tokens));
    tags_out.push_back(std::move(tags));
  }
}

}  // namespace

SequenceDataset generate_sequence_task(const TaggingConfig& cfg) {
  if (cfg.n_train_sentences < 1 || cfg.n_eval_sentences < 1) {
    throw std::invalid_argument("sentence counts must be >= 1");
  }
  if (cfg.min_len < 2 || cfg.max_len < cfg.min_len) {
    throw std::invalid_argument("bad sentence length range");
  }
  if (cfg.train_fraction <= 0.0 || cfg.train_fraction > 1.0) {
    throw std::invalid_argument("train_fraction must be in (0, 1]");
  }
  SequenceDataset ds;
  ds.config = cfg;
  generate_split(cfg, 100, cfg.n_train_sentences, ds.train_tokens, ds.train_tags);
  generate_split(cfg, 200, cfg.n_eval_sentences, ds.eval_tokens, ds.eval_tags);
  if (cfg.train_fraction < 1.0) {
    const int keep = std::max(
        1, static_cast<int>(cfg.train_fraction * cfg.n_train_sentences + 0.5));
    ds.train_tokens.resize(keep);
    ds.train_tags.resize(keep);
  }
  return ds;
}

double span_f1(const std::vector<std::vector<int>>& gold,
               const std::vector<std::vector<int>>& pred) {
  if (gold.size() != pred.size()) throw std::invalid_argument("split size mismatch");
  const Spans gs = extract_spans(gold);
  const Spans ps = extract_spans(pred);
  std::size_t hits = 0;
  for (const auto& span : ps.spans) {
    if (gs.spans.count(span)) ++hits;
  }
  if (ps.spans.empty() || gs.spans.empty()) return hits > 0 ? 1.0 : 0.0;
  const double precision = static_cast<double>(hits) / ps.spans.size();
  const double recall = static_cast<double>(hits) / gs.spans.size();
  if (precision + recall == 0.0) return 0.0;
  return 2.0 * precision * recall / (precision + recall);
}

double transition_violation_rate(const std::vector<std::vector<int>>& tags) {
  std::size_t total = 0, bad = 0;
  for (const std::vector<int>& seq : tags) {
    for (std::size_t i = 0; i + 1 < seq.size(); ++i) {
      ++total;
      if (forbidden_transition(seq[i], seq[i + 1])) ++bad;
    }
  }
  return total == 0 ? 0.0 : static_cast<double>(bad) / static_cast<double>(total);
}

namespace {

// One-hot window features: (2*kWindow+1) slots of (vocab+1) with a padding
// index for positions outside the sentence.
void window_features(const std::vector<int>& tokens, int pos, int vocab,
                     std::vector<double>& out) {
  const int slot = vocab + 1;
  std::fill(out.begin(), out.end(), 0.0);
  for (int w = -kWindow; w <= kWindow; ++w) {
    const int p = pos + w;
    const int token =
        (p < 0 || p >= static_cast<int>(tokens.size())) ? vocab : tokens[p];
    out[static_cast<std::size_t>(w + kWindow) * slot + token] = 1.0;
  }
}

RunMetrics run_tagger_seed(const SequenceDataset& ds, const TrainConfig& cfg,
                           TNormFamily family, bool use_constraints, std::uint64_t seed,
                           Mlp* tagger_out) {
  const int vocab = ds.vocab_size();
  const int input_dim = (2 * kWindow + 1) * (vocab + 1);
  Mlp tagger("tagger", {input_dim, cfg.hidden, kNumTags}, derive_stream(seed, 7));
  Optimizer opt(cfg.optimizer, tagger.parameters().size());

  const int n = static_cast<int>(ds.train_tokens.size());
  const int batch = std::max(1, cfg.batch_size);
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::vector<double> feats(input_dim);

  LossSpec proto(Formula::atom("Tag", {Term(std::int64_t(0)), Term("O")}));
  proto.family = family;
  proto.godel = cfg.godel;

  RunMetrics metrics;
  metrics.seed = seed;
  double last_loss = 0.0;

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    const EffectivePhase phase = warmup_schedule(proto, epoch);
    {
      CounterRng rng(seed, 5000 + static_cast<std::uint64_t>(epoch));
      rng.shuffle(order.data(), order.size());
    }
    const int steps = (n + batch - 1) / batch;
    for (int step = 0; step < steps; ++step) {
      Tape tape;
      const Mlp::TapeParams params = tagger.bind(tape);
      AtomBinding binding;
      std::vector<Formula> data_atoms;
      std::vector<Formula> constraint_impls;

      const int begin = step * batch;
      const int end = std::min(begin + batch, n);
      for (int k = begin; k < end; ++k) {
        const int s = order[k];
        const std::vector<int>& tokens = ds.train_tokens[s];
        const std::vector<int>& tags = ds.train_tags[s];
        std::vector<NodeId> rows(tokens.size());
        for (std::size_t i = 0; i < tokens.size(); ++i) {
          window_features(tokens, static_cast<int>(i), vocab, feats);
          rows[i] = tagger.forward(tape, params, feats);
          const std::int64_t pid = position_id(s, static_cast<int>(i));
          for (int tag = 0; tag < kNumTags; ++tag) {
            binding[Atom{"Tag", {Term(pid), Term(std::string(tag_term(tag)))}}] = {rows[i],
                                                                                   tag};
          }
          data_atoms.push_back(
              Formula::atom("Tag", {Term(pid), Term(std::string(tag_term(tags[i])))}));
        }
        if (use_constraints) {
          for (std::size_t i = 0; i + 1 < tokens.size(); ++i) {
            const std::int64_t pid = position_id(s, static_cast<int>(i));
            const std::int64_t nid = position_id(s, static_cast<int>(i) + 1);
            for (int t1 : {kTagBX, kTagIX, kTagBY, kTagIY}) {
              const int t2 = (t1 == kTagBX || t1 == kTagIX) ? kTagIY : kTagIX;
              constraint_impls.push_back(Formula::implication(
                  Formula::atom("Tag", {Term(pid), Term(std::string(tag_term(t1)))}),
                  Formula::negation(Formula::atom(
                      "Tag", {Term(nid), Term(std::string(tag_term(t2)))}))));
            }
          }
        }
      }

      LossSpec spec(make_conjunction(std::move(data_atoms)));
      spec.family = phase.family;
      spec.godel = cfg.godel;
      if (use_constraints && !constraint_impls.empty()) {
        spec.constraint_terms.push_back(
            {make_conjunction(std::move(constraint_impls)), cfg.lambda});
      }
      const BatchLoss bl = compile(spec, binding, tape);
      last_loss = tape.scalar(bl.loss);
      const Gradient grad = backward(tape, bl.loss);
      if (epoch == 0 && step == 0) {
        bool all_zero = true;
        for (double g : tagger.gradient(grad, params)) {
          if (g != 0.0) all_zero = false;
        }
        metrics.zero_gradient_step1 = all_zero;
      }
      bool frozen = false;
      for (const std::string& name : phase.frozen_models) {
        if (name == tagger.name()) frozen = true;
      }
      if (!frozen) opt.step(tagger.parameters(), tagger.gradient(grad, params));
    }
  }

  std::vector<std::vector<int>> predictions;
  predictions.reserve(ds.eval_tokens.size());
  for (const std::vector<int>& tokens : ds.eval_tokens) {
    predictions.push_back(predict_tags(tagger, tokens, vocab));
  }
  metrics.f1 = span_f1(ds.eval_tags, predictions);
  metrics.violation_rate = transition_violation_rate(predictions);
  metrics.final_loss = last_loss;
  if (tagger_out != nullptr) *tagger_out = std::move(tagger);
  return metrics;
}

}  // namespace

std::vector<int> predict_tags(const Mlp& tagger, const std::vector<int>& tokens,
                              int vocab_size) {
  std::vector<int> tags(tokens.size());
  std::vector<double> feats(tagger.shape().input_dim);
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    window_features(tokens, static_cast<int>(i), vocab_size, feats);
    tags[i] = tagger.predict_class(feats);
  }
  return tags;
}

TagTrainResult train_tagger(const SequenceDataset& ds, const TrainConfig& cfg,
                            TNormFamily family, bool use_constraints) {
  if (family == TNormFamily::RGodel) {
    throw std::invalid_argument("r-godel cannot be used for training");
  }
  if (cfg.seeds.empty()) throw std::invalid_argument("at least one seed is required");
  const int vocab = ds.vocab_size();
  const int input_dim = (2 * kWindow + 1) * (vocab + 1);

  std::vector<RunMetrics> runs(cfg.seeds.size());
  std::vector<Mlp> taggers(cfg.seeds.size(), Mlp("tagger", {input_dim, cfg.hidden, kNumTags}, 0));
  parallel_chunks(cfg.seeds.size(), cfg.workers, [&](std::size_t i) {
    runs[i] = run_tagger_seed(ds, cfg, family, use_constraints, cfg.seeds[i], &taggers[i]);
  });

  TagTrainResult out;
  out.metrics = Metrics::from_runs(std::move(runs));
  out.taggers = std::move(taggers);
  return out;
}

}  // namespace tnl
