#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

#include "tnl/digit_task.hpp"  // TrainConfig
#include "tnl/metrics.hpp"
#include "tnl/model.hpp"

namespace tnl {

// Tags: O, then B/I for the two synthetic phrase types X and Y.
inline constexpr int kNumTags = 5;
enum : int { kTagO = 0, kTagBX = 1, kTagIX = 2, kTagBY = 3, kTagIY = 4 };

std::string_view tag_name(int tag);  // "O", "B-X", "I-X", "B-Y", "I-Y"
std::string_view tag_term(int tag);  // identifier-safe: "O", "B_X", ...

/// True for the four forbidden transitions: a B/I tag of one phrase type
/// followed by the I tag of the other type.
bool forbidden_transition(int tag, int next_tag);

struct TaggingConfig {
  std::uint64_t seed = 20;
  int n_train_sentences = 400;
  double train_fraction = 1.0;  // e.g. 0.1 for the low-data regime
  int n_eval_sentences = 200;
  int min_len = 8;
  int max_len = 14;
  double token_noise = 0.25;
  int tokens_per_group = 10;  // vocab = 3 groups (X-ish, Y-ish, O-ish)
};

/// Sentences emitted by a phrase automaton whose gold tag sequences always
/// satisfy the transition constraints; tokens are drawn from the tag's
/// group with probability 1-noise, otherwise uniformly from the vocabulary.
struct SequenceDataset {
  TaggingConfig config;
  std::vector<std::vector<int>> train_tokens, train_tags;
  std::vector<std::vector<int>> eval_tokens, eval_tags;

  int vocab_size() const { return 3 * config.tokens_per_group; }
};

SequenceDataset generate_sequence_task(const TaggingConfig& cfg);

/// Span-level F1 of predicted BIO sequences against gold.
double span_f1(const std::vector<std::vector<int>>& gold,
               const std::vector<std::vector<int>>& pred);

/// Fraction of adjacent tag pairs that violate a transition constraint.
double transition_violation_rate(const std::vector<std::vector<int>>& tags);

struct TagTrainResult {
  Metrics metrics;
  std::vector<Mlp> taggers;  // one per seed
};

/// Windowed feed-forward tagger (2 tokens of context each side, one-hot
/// inputs, per-position softmax). With `use_constraints`, the pairwise B/I
/// transition constraints are grounded per adjacent position of each batch
/// and weighted by lambda.
TagTrainResult train_tagger(const SequenceDataset& ds, const TrainConfig& cfg,
                            TNormFamily family, bool use_constraints);

/// Predict the tag sequence of one sentence with a trained tagger.
std::vector<int> predict_tags(const Mlp& tagger, const std::vector<int>& tokens,
                              int vocab_size);

}  // namespace tnl
