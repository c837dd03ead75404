#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "storystream/config.hpp"
#include "storystream/crosslink.hpp"
#include "storystream/metrics.hpp"
#include "storystream/similarity.hpp"

namespace storystream {

struct TrainingOptions {
  std::int64_t window_seconds = 24 * 3600;
  double negative_ratio = 1.0;
  std::uint64_t seed = 0;
  LogisticFitOptions fit;
  // Rescale each fitted weight vector with unit_l1.
  bool unit_scale = true;
  std::optional<Language> language;  // train only this language
};

struct TrainedWeights {
  WeightVector weights;
  std::size_t pairs = 0;
  int iterations = 0;
  double final_loss = 0.0;
};

// Featurizes the labeled corpus as a stream, then fits one weight vector per
// language present.
std::vector<TrainedWeights> train_weights(std::span<const Document> docs,
                                          const TrainingOptions& options);

struct ParameterGrid {
  std::vector<double> t1;
  std::vector<double> resolution;
  std::vector<double> t2;  // non-empty: score the crosslingual clustering
  // When set, only this language's documents are used and only its T1 varies.
  std::optional<Language> language;
};

struct GridRow {
  double t1 = 0.0;
  double resolution = 1.0;
  std::optional<double> t2;
  Scores standard;
  Scores bcubed;
  std::size_t clusters = 0;
  double objective = 0.0;  // (standard F1 + BCubed F1) / 2
};

struct GridSearchResult {
  RunConfig best;
  std::size_t best_index = 0;
  std::vector<GridRow> table;  // grid order: t1 outer, then resolution, then t2
};

// Returns true when `a` should be preferred over `b`: higher objective, then
// fewer predicted clusters, then lower T1.
bool better(const GridRow& a, const GridRow& b);

// Runs the stream once per grid point on a labeled dev corpus.
GridSearchResult grid_search(std::span<const Document> dev, std::span<const WeightVector> weights,
                             const EmbeddingStore* embeddings, const RunConfig& base,
                             const ParameterGrid& grid);

// Tab-separated score table with a header row.
std::string score_table(const GridSearchResult& result);

}  // namespace storystream
