#include "storystream/topics.hpp"

#include <algorithm>
#include <thread>

#include "storystream/error.hpp"

namespace storystream {

SimilarityGraph build_graph(std::span<const FeatureSet* const> features,
                            const WeightVector& w, double prune_epsilon,
                            unsigned workers) {
  if (!(prune_epsilon >= 0.0)) throw ValidationError("prune epsilon must be >= 0");
  const std::size_t n = features.size();
  SimilarityGraph graph(n);
  if (n < 2) return graph;

  // rows[i] holds (j, weight) for j > i.
  std::vector<std::vector<std::pair<std::size_t, double>>> rows(n);
  auto fill_row = [&](std::size_t i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double s = std::max(pair_similarity(*features[i], *features[j], w), 0.0);
      if (s > prune_epsilon) rows[i].emplace_back(j, s);
    }
  };

  workers = std::clamp<unsigned>(workers, 1, static_cast<unsigned>(n));
  if (workers == 1) {
    for (std::size_t i = 0; i < n; ++i) fill_row(i);
  } else {
    // Interleaved rows balance the triangular workload.
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < workers; ++t) {
      pool.emplace_back([&, t] {
        for (std::size_t i = t; i < n; i += workers) fill_row(i);
      });
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (const auto& [j, s] : rows[i]) graph.add_edge(i, j, s);
  }
  return graph;
}

std::vector<Topic> detect_topics(std::span<const std::string> ids,
                                 std::span<const FeatureSet* const> features,
                                 Language lang, BatchIndex batch, const WeightVector& w,
                                 const TopicParams& params, std::uint64_t seed) {
  if (ids.size() != features.size())
    throw InvariantError("topic detection inputs are not aligned");
  const SimilarityGraph graph = build_graph(features, w, params.prune_epsilon, params.workers);
  const LouvainResult communities = louvain(graph, params.resolution, seed);

  // canonical_partition numbers communities by first member position.
  std::vector<Topic> topics(community_count(communities.partition));
  for (auto& t : topics) {
    t.language = lang;
    t.batch = batch;
  }
  for (std::size_t i = 0; i < ids.size(); ++i)
    topics[communities.partition[i]].members.push_back(ids[i]);
  return topics;
}

}  // namespace storystream
