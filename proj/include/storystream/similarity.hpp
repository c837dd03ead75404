#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "storystream/corpus.hpp"
#include "storystream/language.hpp"
#include "storystream/sparse_vector.hpp"

namespace storystream {

using SlotFeatures = std::array<double, kSlotCount>;

// Learned per-language combination weights. `beta` is aligned with the
// FeatureSet slot order; the intercept is kept for diagnostics only and is
// not part of pair scoring.
struct WeightVector {
  Language language = Language::kEn;
  SlotFeatures beta{};
  double intercept = 0.0;

  static WeightVector uniform(Language lang);
};

// Divides beta and the intercept by sum_k |beta_k|. Pair-score rankings and
// Louvain partitions are unchanged; the score scale becomes that of a
// weighted mean of cosines, which is where T1 thresholds live.
WeightVector unit_l1(const WeightVector& w);

// Cosine of two non-negative sparse vectors, in [0, 1]; 0 when either is empty.
double cosine(const SparseVector& a, const SparseVector& b);

// Per-slot cosines of two feature sets.
SlotFeatures slot_cosines(const FeatureSet& a, const FeatureSet& b);

// sum_k beta_k * cos(a^k, b^k). No intercept.
double pair_similarity(const FeatureSet& a, const FeatureSet& b, const WeightVector& w);

struct LabeledPair {
  SlotFeatures features{};
  bool same_story = false;
};

struct PairSamplingOptions {
  std::int64_t window_seconds = 24 * 3600;
  double negative_ratio = 1.0;
  std::uint64_t seed = 0;
};

// Positives: every same-story pair whose timestamps differ by less than one
// window. Negatives: a uniform sample (without replacement) of different-story
// pairs under the same constraint, negative_ratio times as many as positives
// (or all of them if fewer exist). `features` is aligned with `docs`.
std::vector<LabeledPair> build_training_pairs(std::span<const Document> docs,
                                              std::span<const FeatureSet> features,
                                              const PairSamplingOptions& options);

struct LogisticFitOptions {
  double learning_rate = 1.0;
  int max_iters = 5000;
  double tolerance = 1e-9;
};

struct LogisticFitResult {
  WeightVector weights;
  int iterations = 0;
  std::vector<double> loss_history;  // loss after every accepted step, [0] = start
};

// Mean binary log-loss of sigmoid(beta . x + intercept).
double log_loss(std::span<const LabeledPair> pairs, const SlotFeatures& beta,
                double intercept);

// Gradient of log_loss; element kSlotCount is d/d intercept.
std::array<double, kSlotCount + 1> log_loss_gradient(std::span<const LabeledPair> pairs,
                                                     const SlotFeatures& beta,
                                                     double intercept);

// Full-batch gradient descent with backtracking, so the loss never increases.
// Stops when an accepted step improves the loss by less than `tolerance`.
// Throws ValidationError when only one label is present.
LogisticFitResult fit_beta(std::span<const LabeledPair> pairs, Language lang,
                           const LogisticFitOptions& options = {});

// {"lang": "en", "beta": [...9], "intercept": x}
std::string to_json(const WeightVector& w);
WeightVector weights_from_json(const std::string& text);

// A weights file holds one object or an array of objects, one per language.
std::vector<WeightVector> load_weights(const std::string& path);
void save_weights(const std::string& path, std::span<const WeightVector> weights);

}  // namespace storystream
