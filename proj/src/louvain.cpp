#include "storystream/louvain.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "storystream/error.hpp"
#include "storystream/random.hpp"

namespace storystream {

namespace {

// Graph of one aggregation level. `loop[i]` is the total weight of edges
// folded inside super-node i, each counted once.
struct LevelGraph {
  std::vector<std::vector<SimilarityGraph::Neighbor>> adjacency;
  std::vector<double> loop;
  std::vector<double> degree;  // sum of incident weights + 2 * loop
  double m2 = 0.0;

  std::size_t size() const { return adjacency.size(); }
};

LevelGraph from_graph(const SimilarityGraph& g) {
  LevelGraph level;
  const std::size_t n = g.node_count();
  level.adjacency.resize(n);
  level.loop.assign(n, 0.0);
  level.degree.assign(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const auto nb = g.neighbors(i);
    level.adjacency[i].assign(nb.begin(), nb.end());
    level.degree[i] = g.degree(i);
  }
  level.m2 = 2.0 * g.total_weight();
  return level;
}

// Phase one. Returns true when at least one node changed community.
bool move_nodes(const LevelGraph& g, double resolution, Rng& rng,
                std::vector<std::size_t>& community) {
  const std::size_t n = g.size();
  std::vector<double> total(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) total[community[i]] += g.degree[i];

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  shuffle(order, rng);

  std::vector<double> link_weight(n, 0.0);
  std::vector<std::uint8_t> is_touched(n, 0);
  std::vector<std::size_t> touched;
  bool any_move = false;
  bool moved = true;
  while (moved) {
    moved = false;
    for (std::size_t node : order) {
      const std::size_t own = community[node];
      const double k = g.degree[node];

      touched.clear();
      touched.push_back(own);
      is_touched[own] = 1;
      for (const auto& [nb, w] : g.adjacency[node]) {
        const std::size_t c = community[nb];
        if (!is_touched[c]) {
          is_touched[c] = 1;
          touched.push_back(c);
        }
        link_weight[c] += w;
      }

      total[own] -= k;
      std::size_t best = own;
      double best_gain = link_weight[own] - resolution * total[own] * k / g.m2;
      for (std::size_t c : touched) {
        if (c == own) continue;
        const double gain = link_weight[c] - resolution * total[c] * k / g.m2;
        if (gain > best_gain + 1e-12 * (1.0 + std::abs(best_gain))) {
          best = c;
          best_gain = gain;
        }
      }
      total[best] += k;
      if (best != own) {
        community[node] = best;
        moved = true;
        any_move = true;
      }
      for (std::size_t c : touched) {
        link_weight[c] = 0.0;
        is_touched[c] = 0;
      }
    }
  }
  return any_move;
}

LevelGraph aggregate(const LevelGraph& g, const std::vector<std::size_t>& community,
                     std::size_t communities) {
  LevelGraph next;
  next.adjacency.resize(communities);
  next.loop.assign(communities, 0.0);
  next.degree.assign(communities, 0.0);
  next.m2 = g.m2;

  std::vector<std::vector<SimilarityGraph::Neighbor>> raw(communities);
  for (std::size_t u = 0; u < g.size(); ++u) {
    const std::size_t cu = community[u];
    next.loop[cu] += g.loop[u];
    next.degree[cu] += g.degree[u];
    for (const auto& [v, w] : g.adjacency[u]) {
      const std::size_t cv = community[v];
      if (cu == cv) {
        next.loop[cu] += 0.5 * w;  // each undirected edge is seen from both ends
      } else {
        raw[cu].emplace_back(cv, w);
      }
    }
  }
  for (std::size_t c = 0; c < communities; ++c) {
    auto& edges = raw[c];
    std::stable_sort(edges.begin(), edges.end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });
    for (const auto& [v, w] : edges) {
      if (!next.adjacency[c].empty() && next.adjacency[c].back().first == v) {
        next.adjacency[c].back().second += w;
      } else {
        next.adjacency[c].emplace_back(v, w);
      }
    }
  }
  return next;
}

}  // namespace

LouvainResult louvain(const SimilarityGraph& g, double resolution, std::uint64_t seed) {
  if (!(resolution > 0.0) || !std::isfinite(resolution))
    throw ValidationError("Louvain resolution must be finite and > 0");
  LouvainResult result;
  const std::size_t n = g.node_count();
  result.partition.resize(n);
  std::iota(result.partition.begin(), result.partition.end(), 0);
  if (n == 0 || !(g.total_weight() > 0.0)) return result;

  Rng rng(seed);
  LevelGraph level = from_graph(g);
  result.pass_modularity.push_back(modularity(g, result.partition, resolution));

  while (true) {
    std::vector<std::size_t> community(level.size());
    std::iota(community.begin(), community.end(), 0);
    if (!move_nodes(level, resolution, rng, community)) break;

    const Partition dense = canonical_partition(community);
    const std::size_t communities = community_count(dense);
    for (auto& c : result.partition) c = dense[c];
    result.pass_modularity.push_back(modularity(g, result.partition, resolution));
    if (communities == level.size()) break;
    level = aggregate(level, dense, communities);
  }
  result.partition = canonical_partition(result.partition);
  return result;
}

}  // namespace storystream
