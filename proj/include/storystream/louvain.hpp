#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <utility>
#include <vector>

namespace storystream {

// Undirected weighted graph without self-loops. Weights are finite and > 0.
class SimilarityGraph {
 public:
  struct Edge {
    std::size_t a;
    std::size_t b;
    double weight;
  };
  using Neighbor = std::pair<std::size_t, double>;

  SimilarityGraph() = default;
  explicit SimilarityGraph(std::size_t nodes);

  // Throws InvariantError on self-loops, out-of-range nodes, or weights that
  // are not finite and positive.
  void add_edge(std::size_t a, std::size_t b, double weight);

  std::size_t node_count() const { return adjacency_.size(); }
  std::size_t edge_count() const { return edges_.size(); }
  const std::vector<Edge>& edges() const { return edges_; }
  std::span<const Neighbor> neighbors(std::size_t node) const { return adjacency_[node]; }
  double degree(std::size_t node) const { return degree_[node]; }
  // m: the sum of edge weights, each edge counted once.
  double total_weight() const { return total_weight_; }

  // "i j weight" per line.
  void write_edge_list(std::ostream& out) const;

 private:
  std::vector<std::vector<Neighbor>> adjacency_;
  std::vector<double> degree_;
  std::vector<Edge> edges_;
  double total_weight_ = 0.0;
};

// Community id per node, dense in 0..C-1.
using Partition = std::vector<std::size_t>;

// Relabels communities densely in order of first appearance.
Partition canonical_partition(std::span<const std::size_t> labels);
std::size_t community_count(const Partition& p);

// Q = (1/2m) sum_ij [A_ij - gamma k_i k_j / 2m] delta(c_i, c_j).
// Throws ValidationError when the graph has no weight or `p` is not total.
double modularity(const SimilarityGraph& g, std::span<const std::size_t> p,
                  double resolution = 1.0);

struct LouvainResult {
  Partition partition;
  // Modularity of the singleton partition followed by the value after each
  // aggregation pass. Empty when the graph has no edges.
  std::vector<double> pass_modularity;
};

// Two-phase Louvain: local moving in a seeded shuffled order until no move
// improves modularity, then aggregation, repeated until a pass moves nothing.
// On equal gains the earliest candidate wins, the node's own community first.
LouvainResult louvain(const SimilarityGraph& g, double resolution, std::uint64_t seed);

}  // namespace storystream
