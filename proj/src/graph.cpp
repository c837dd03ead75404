#include <cmath>
#include <ostream>
#include <string>
#include <unordered_map>
#include <vector>

#include "storystream/error.hpp"
#include "storystream/louvain.hpp"

namespace storystream {

SimilarityGraph::SimilarityGraph(std::size_t nodes) : adjacency_(nodes), degree_(nodes, 0.0) {}

void SimilarityGraph::add_edge(std::size_t a, std::size_t b, double weight) {
  if (a >= node_count() || b >= node_count())
    throw InvariantError("edge endpoint out of range");
  if (a == b) throw InvariantError("self-loops are not allowed in a similarity graph");
  if (!std::isfinite(weight) || weight <= 0.0)
    throw InvariantError("edge weight must be finite and positive, got " +
                         std::to_string(weight));
  adjacency_[a].emplace_back(b, weight);
  adjacency_[b].emplace_back(a, weight);
  degree_[a] += weight;
  degree_[b] += weight;
  edges_.push_back({std::min(a, b), std::max(a, b), weight});
  total_weight_ += weight;
}

void SimilarityGraph::write_edge_list(std::ostream& out) const {
  const auto precision = out.precision(17);
  for (const auto& e : edges_) out << e.a << ' ' << e.b << ' ' << e.weight << '\n';
  out.precision(precision);
}

Partition canonical_partition(std::span<const std::size_t> labels) {
  Partition out(labels.size());
  std::unordered_map<std::size_t, std::size_t> remap;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    auto [it, inserted] = remap.try_emplace(labels[i], remap.size());
    out[i] = it->second;
  }
  return out;
}

std::size_t community_count(const Partition& p) {
  std::size_t count = 0;
  for (std::size_t c : p) count = std::max(count, c + 1);
  return count;
}

double modularity(const SimilarityGraph& g, std::span<const std::size_t> p,
                  double resolution) {
  if (p.size() != g.node_count())
    throw ValidationError("partition does not cover every node");
  const double m2 = 2.0 * g.total_weight();
  if (!(m2 > 0.0)) throw ValidationError("modularity is undefined for a graph without weight");
  const Partition dense = canonical_partition(p);
  const std::size_t communities = community_count(dense);
  std::vector<double> internal(communities, 0.0);  // sum of A_ij within c, both directions
  std::vector<double> total(communities, 0.0);     // sum of degrees in c
  for (const auto& e : g.edges()) {
    if (dense[e.a] == dense[e.b]) internal[dense[e.a]] += 2.0 * e.weight;
  }
  for (std::size_t i = 0; i < g.node_count(); ++i) total[dense[i]] += g.degree(i);
  double q = 0.0;
  for (std::size_t c = 0; c < communities; ++c)
    q += internal[c] / m2 - resolution * (total[c] / m2) * (total[c] / m2);
  return q;
}

}  // namespace storystream
