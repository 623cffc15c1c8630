#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "tnl/loss.hpp"
#include "tnl/metrics.hpp"
#include "tnl/model.hpp"

namespace tnl {

struct DigitTaskConfig {
  std::uint64_t seed = 20;
  int n_labeled = 1000;
  int n_pairs = 5000;
  int feature_dim = 32;  // >= 10; first 10 coordinates carry the class signal
  double noise_sigma = 0.5;
  int n_eval_digits = 2000;
  int n_eval_pairs = 2000;
};

/// Synthetic stand-in for image digits: feature = one-hot(label) + Gaussian
/// noise. Pair features are unlabeled for training; the eval split keeps the
/// true digits so operator accuracy and coherence can be measured.
struct SyntheticDigitDataset {
  DigitTaskConfig config;
  std::vector<double> labeled_x;  // n_labeled x d, row-major
  std::vector<int> labeled_y;
  std::vector<double> pair_a, pair_b;  // n_pairs x d each
  std::vector<double> eval_x;
  std::vector<int> eval_y;
  std::vector<double> eval_pair_a, eval_pair_b;
  std::vector<int> eval_pair_ya, eval_pair_yb;

  std::span<const double> labeled_row(int i) const;
  std::span<const double> pair_a_row(int i) const;
  std::span<const double> pair_b_row(int i) const;
  std::span<const double> eval_row(int i) const;
  std::span<const double> eval_pair_a_row(int i) const;
  std::span<const double> eval_pair_b_row(int i) const;
};

SyntheticDigitDataset generate_digit_task(const DigitTaskConfig& cfg);

struct TrainConfig {
  std::vector<int> hidden = {64};
  OptimizerConfig optimizer;
  int batch_size = 32;
  int epochs = 10;
  double lambda = 1.0;
  std::vector<std::uint64_t> seeds = {0, 20, 50};
  GodelOptions godel;
  unsigned workers = 1;
};

struct DigitModels {
  Mlp digit, sum, prod;
};

struct DigitTrainResult {
  Metrics metrics;
  std::vector<DigitModels> models;  // one triple per seed, in seed order
};

/// Train Digit from labels and Sum/Prod from coherence constraints grounded
/// over the unlabeled pairs of each batch, under one relaxation family.
DigitTrainResult joint_train(const SyntheticDigitDataset& ds, const TrainConfig& cfg,
                             TNormFamily family);

/// Train Digit supervised, label the pairs with its argmax predictions and
/// mod-10 arithmetic, then train Sum/Prod supervised on the noisy labels.
DigitTrainResult pipeline_train(const SyntheticDigitDataset& ds, const TrainConfig& cfg,
                                TNormFamily family);

/// Argmax decision of a two-argument head on a concatenated feature pair.
using PairHead = std::function<int(std::span<const double>, std::span<const double>)>;
PairHead make_pair_head(const Mlp& model);

struct PropertyScores {
  double commutativity = 0.0;
  double associativity = 0.0;
  double distributivity = 0.0;
};

/// Arithmetic-property evaluation: commutativity by swapping inputs;
/// associativity and distributivity by predicting the intermediate digit,
/// resampling `repeats` eval features of that digit, and comparing the
/// majority outcome of both sides. Throws std::invalid_argument when a
/// predicted digit has no eval examples to resample.
PropertyScores evaluate_properties(const PairHead& sum_head, const PairHead& prod_head,
                                   const SyntheticDigitDataset& ds, std::uint64_t seed,
                                   int repeats = 6);

/// The coherence constraint for one pair: the 10x10 grounding of
/// Digit(a,y1) & Digit(b,y2) -> Op(a,b,op(y1,y2)) with op either mod-10 sum
/// or product. Atom ids: labeled example i is Digit(i, y); pair j members
/// use negative ids -(2j+1), -(2j+2).
Formula pair_coherence_constraint(int pair_index, bool product_op);

}  // namespace tnl
