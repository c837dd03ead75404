#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "storystream/corpus.hpp"
#include "storystream/louvain.hpp"
#include "storystream/similarity.hpp"

namespace storystream {

struct TopicParams {
  double resolution = 1.0;
  double prune_epsilon = 0.0;
  unsigned workers = 1;
};

// A within-batch community of same-language documents.
struct Topic {
  Language language = Language::kEn;
  BatchIndex batch = 0;
  std::vector<std::string> members;
};

// Edge (i, j) iff max(pair_similarity, 0) > prune_epsilon, weighted by the
// clamped similarity. Rows are split across `workers` threads; the result
// does not depend on the worker count.
SimilarityGraph build_graph(std::span<const FeatureSet* const> features,
                            const WeightVector& w, double prune_epsilon,
                            unsigned workers = 1);

// Louvain communities of the batch graph. Topics are ordered by their first
// member's input position; members keep input order.
std::vector<Topic> detect_topics(std::span<const std::string> ids,
                                 std::span<const FeatureSet* const> features,
                                 Language lang, BatchIndex batch, const WeightVector& w,
                                 const TopicParams& params, std::uint64_t seed);

}  // namespace storystream
