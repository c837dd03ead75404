#include <doctest.h>

#include <cmath>
#include <set>
#include <sstream>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "storystream/error.hpp"
#include "storystream/random.hpp"
#include "storystream/synthetic.hpp"
#include "storystream/topics.hpp"

using namespace storystream;

namespace {

// Cliques of the given sizes with intra weights in [0.9, 1] and every
// cross pair at weight `inter` (skipped when 0).
SimilarityGraph cliques(const std::vector<std::size_t>& sizes, double inter, Rng& rng,
                        std::vector<std::size_t>* truth = nullptr) {
  std::vector<std::size_t> label;
  for (std::size_t c = 0; c < sizes.size(); ++c) label.insert(label.end(), sizes[c], c);
  SimilarityGraph g(label.size());
  for (std::size_t i = 0; i < label.size(); ++i) {
    for (std::size_t j = i + 1; j < label.size(); ++j) {
      if (label[i] == label[j]) {
        g.add_edge(i, j, uniform_real(rng, 0.9, 1.0));
      } else if (inter > 0.0) {
        g.add_edge(i, j, inter);
      }
    }
  }
  if (truth) *truth = label;
  return g;
}

std::vector<const FeatureSet*> pointers(const std::vector<FeatureSet>& v) {
  std::vector<const FeatureSet*> out;
  for (const auto& f : v) out.push_back(&f);
  return out;
}

}  // namespace

TEST_SUITE("topics") {

TEST_CASE("graphs reject self-loops and non-positive weights") {
  SimilarityGraph g(3);
  CHECK_THROWS_AS(g.add_edge(1, 1, 0.5), InvariantError);
  CHECK_THROWS_AS(g.add_edge(0, 1, 0.0), InvariantError);
  CHECK_THROWS_AS(g.add_edge(0, 1, -0.1), InvariantError);
  CHECK_THROWS_AS(g.add_edge(0, 3, 0.5), InvariantError);
  CHECK_THROWS_AS(g.add_edge(0, 1, std::nan("")), InvariantError);
  g.add_edge(0, 2, 0.25);
  CHECK(g.degree(0) == 0.25);
  CHECK(g.degree(2) == 0.25);
  CHECK(g.total_weight() == 0.25);
  std::ostringstream out;
  g.write_edge_list(out);
  CHECK(out.str() == "0 2 0.25\n");
}

TEST_CASE("one document gives one node and no edges") {
  std::vector<FeatureSet> f(1);
  const auto g = build_graph(pointers(f), fixture::even_weights(Language::kEn), 0.0);
  CHECK(g.node_count() == 1);
  CHECK(g.edge_count() == 0);
}

TEST_CASE("identical documents are joined with weight one") {
  const std::vector<Document> docs = {
      fixture::doc("a", 0, Language::kEn, {}, {"x", "y"}, {"z"}),
      fixture::doc("b", 0, Language::kEn, {}, {"x", "y"}, {"z"}),
  };
  const auto f = featurize_stream(docs, 86400);
  WeightVector w;
  // Beta sums to one over the six non-empty slots (no entities).
  for (std::size_t k : {0, 1, 3, 4, 6, 7}) w.beta[k] = 1.0 / 6.0;
  const auto g = build_graph(pointers(f), w, 0.0);
  REQUIRE(g.edge_count() == 1);
  CHECK(g.edges()[0].weight == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("graph edges equal a brute-force pairwise evaluation") {
  SyntheticSpec spec;
  spec.documents = 60;
  spec.stories = 4;
  spec.days = 1;
  spec.es_probability = 0.0;
  spec.de_probability = 0.0;
  const auto docs = generate_synthetic(spec).documents;
  const auto all = featurize_stream(docs, 86400);
  Rng rng(5);
  WeightVector w;
  for (double& b : w.beta) b = uniform_real(rng, -0.2, 0.4);

  for (std::size_t n : {5u, 60u}) {
    const std::vector<FeatureSet> f(all.begin(), all.begin() + static_cast<long>(n));
    for (double eps : {0.0, 0.05}) {
      std::map<std::pair<std::size_t, std::size_t>, double> expected;
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
          const double s = std::max(pair_similarity(f[i], f[j], w), 0.0);
          if (s > eps) expected[{i, j}] = s;
        }
      }
      for (unsigned workers : {1u, 3u}) {
        const auto g = build_graph(pointers(f), w, eps, workers);
        std::map<std::pair<std::size_t, std::size_t>, double> got;
        for (const auto& e : g.edges()) {
          got[{std::min(e.a, e.b), std::max(e.a, e.b)}] = e.weight;
        }
        CHECK(got == expected);
      }
    }
  }
}

TEST_CASE("modularity of small closed-form cases") {
  Rng rng(1);
  SimilarityGraph g(8);
  for (std::size_t base : {0u, 4u}) {
    for (std::size_t i = 0; i < 4; ++i) {
      for (std::size_t j = i + 1; j < 4; ++j) g.add_edge(base + i, base + j, 1.0);
    }
  }
  const Partition halves = {0, 0, 0, 0, 1, 1, 1, 1};
  const Partition one(8, 0);
  const Partition singletons = {0, 1, 2, 3, 4, 5, 6, 7};
  CHECK(modularity(g, halves, 1.0) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(modularity(g, one, 1.0) == doctest::Approx(0.0).epsilon(1e-15));
  // Each node has degree 3 and 2m = 24.
  CHECK(modularity(g, singletons, 1.0) == doctest::Approx(-8.0 * (3.0 / 24.0) * (3.0 / 24.0)));
  CHECK_THROWS_AS(modularity(SimilarityGraph(3), Partition{0, 1, 2}, 1.0), ValidationError);
  CHECK_THROWS_AS(modularity(g, Partition{0, 1}, 1.0), ValidationError);
}

TEST_CASE("modularity matches the double-sum definition on random graphs") {
  for (std::uint64_t seed = 1; seed <= 30; ++seed) {
    Rng rng(seed);
    const std::size_t n = 2 + uniform_index(rng, 12);
    SimilarityGraph g(n);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        if (uniform_real(rng) < 0.5) g.add_edge(i, j, uniform_real(rng, 0.01, 1.0));
      }
    }
    if (g.edge_count() == 0) continue;
    Partition p(n);
    for (auto& c : p) c = uniform_index(rng, 4);
    const double gamma = uniform_real(rng, 0.5, 2.0);
    CHECK(modularity(g, p, gamma) ==
          doctest::Approx(oracle::modularity(oracle::adjacency(g), p, gamma)).epsilon(1e-12));
  }
}

TEST_CASE("two weakly joined six-cliques split into the planted pair") {
  SimilarityGraph g(12);
  for (std::size_t base : {0u, 6u}) {
    for (std::size_t i = 0; i < 6; ++i) {
      for (std::size_t j = i + 1; j < 6; ++j) g.add_edge(base + i, base + j, 0.9);
    }
  }
  g.add_edge(2, 9, 0.05);
  const Partition planted = {0, 0, 0, 0, 0, 0, 1, 1, 1, 1, 1, 1};
  const auto brute = oracle::brute_max_modularity(g, 1.0);
  CHECK(oracle::same_partition(brute.partition, planted));
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto r = louvain(g, 1.0, seed);
    CHECK(r.partition == planted);
    CHECK(modularity(g, r.partition, 1.0) == doctest::Approx(brute.q).epsilon(1e-12));
  }
}

TEST_CASE("a complete uniform graph stays one community") {
  for (std::size_t n = 2; n <= 8; ++n) {
    SimilarityGraph g(n);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) g.add_edge(i, j, 0.7);
    }
    const auto brute = oracle::brute_max_modularity(g, 1.0);
    CHECK(community_count(brute.partition) == 1);
    const auto r = louvain(g, 1.0, n);
    CHECK(community_count(r.partition) == 1);
  }
}

TEST_CASE("isolated nodes stay apart and the empty graph has no partition") {
  const auto r = louvain(SimilarityGraph(4), 1.0, 0);
  CHECK(r.partition == Partition{0, 1, 2, 3});
  CHECK(r.pass_modularity.empty());
  CHECK(louvain(SimilarityGraph(0), 1.0, 0).partition.empty());
}

TEST_CASE("louvain is seeded, total and never loses modularity") {
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    Rng rng(seed);
    const std::size_t n = 10 + uniform_index(rng, 40);
    SimilarityGraph g(n);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        if (uniform_real(rng) < 0.2) g.add_edge(i, j, uniform_real(rng, 0.01, 1.0));
      }
    }
    if (g.edge_count() == 0) continue;
    const double gamma = uniform_real(rng, 0.5, 1.5);
    const auto a = louvain(g, gamma, seed);
    const auto b = louvain(g, gamma, seed);
    CHECK(a.partition == b.partition);
    REQUIRE(a.partition.size() == n);
    CHECK(a.partition == canonical_partition(a.partition));
    const std::size_t c = community_count(a.partition);
    for (auto x : a.partition) CHECK(x < c);
    REQUIRE(!a.pass_modularity.empty());
    for (std::size_t i = 1; i < a.pass_modularity.size(); ++i) {
      CHECK(a.pass_modularity[i] >= a.pass_modularity[i - 1] - 1e-12);
    }
    Partition singletons(n);
    std::iota(singletons.begin(), singletons.end(), 0);
    CHECK(a.pass_modularity.front() == doctest::Approx(modularity(g, singletons, gamma)));
    CHECK(a.pass_modularity.back() == doctest::Approx(modularity(g, a.partition, gamma)));
  }
}

TEST_CASE("separated planted partitions of at most ten nodes reach the brute-force optimum") {
  const std::vector<std::vector<std::size_t>> layouts = {{5, 5}, {4, 6}, {3, 3, 4}, {2, 3, 5}, {3, 7}};
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    for (const auto& sizes : layouts) {
      Rng rng(seed);
      std::vector<std::size_t> truth;
      const auto g = cliques(sizes, 0.04, rng, &truth);
      const auto brute = oracle::brute_max_modularity(g, 1.0);
      const auto r = louvain(g, 1.0, seed);
      CHECK(modularity(g, r.partition, 1.0) >= brute.q - 1e-9);
      CHECK(oracle::same_partition(r.partition, brute.partition));
      CHECK(oracle::same_partition(r.partition, truth));
    }
  }
}

TEST_CASE("higher resolution never yields fewer communities on planted cliques") {
  Rng rng(4);
  const auto g = cliques({6, 6, 6}, 0.05, rng);
  CHECK(community_count(louvain(g, 0.05, 1).partition) <= community_count(louvain(g, 1.0, 1).partition));
  CHECK(community_count(louvain(g, 1.0, 1).partition) == 3);
}

TEST_CASE("vocabulary-disjoint stories become separate topics") {
  std::vector<Document> docs;
  for (int i = 0; i < 4; ++i) {
    docs.push_back(fixture::doc("a" + std::to_string(i), i, Language::kEn, "A", {"alpha", "beta"},
                                {"gamma", "delta", "w" + std::to_string(i)}));
    docs.push_back(fixture::doc("b" + std::to_string(i), i, Language::kEn, "B", {"one", "two"},
                                {"three", "four", "v" + std::to_string(i)}));
  }
  const auto f = featurize_stream(docs, 86400);
  std::vector<std::string> ids;
  for (const auto& d : docs) ids.push_back(d.id);
  const auto topics = detect_topics(ids, pointers(f), Language::kEn, 0,
                                    fixture::even_weights(Language::kEn), {}, 1);
  REQUIRE(topics.size() == 2);
  CHECK(topics[0].members == std::vector<std::string>{"a0", "a1", "a2", "a3"});
  CHECK(topics[1].members == std::vector<std::string>{"b0", "b1", "b2", "b3"});
  CHECK(topics[0].language == Language::kEn);
}

TEST_CASE("a single document is its own topic") {
  const std::vector<std::string> ids = {"x"};
  const std::vector<FeatureSet> f(1);
  const auto topics = detect_topics(ids, pointers(f), Language::kDe, 3,
                                    fixture::even_weights(Language::kDe), {}, 0);
  REQUIRE(topics.size() == 1);
  CHECK(topics[0].members == ids);
  CHECK(topics[0].batch == 3);
}

TEST_CASE("a story and a copy of its documents form one topic") {
  // Alone in a graph a story has Q = 0 as one community, so any noise split
  // wins; other stories in the batch supply the null-model contrast.
  SyntheticSpec spec;
  spec.stories = 4;
  spec.documents = 48;
  spec.days = 1;
  spec.es_probability = 0.0;
  spec.de_probability = 0.0;
  auto docs = generate_synthetic(spec).documents;
  const std::size_t n = docs.size();
  for (std::size_t i = 0; i < n; ++i) {
    if (docs[i].gold_story != "c0") continue;
    Document copy = docs[i];
    copy.id += "-copy";
    docs.push_back(copy);
  }
  const auto f = featurize_stream(docs, 86400);
  std::vector<std::string> ids;
  std::set<std::string> story;
  for (const auto& d : docs) {
    ids.push_back(d.id);
    if (d.gold_story == "c0") story.insert(d.id);
  }
  REQUIRE(story.size() > 4);
  const auto topics = detect_topics(ids, pointers(f), Language::kEn, 0,
                                    fixture::even_weights(Language::kEn), {}, 2);
  std::size_t holding = 0;
  for (const auto& t : topics) {
    const std::set<std::string> members(t.members.begin(), t.members.end());
    if (members.count(*story.begin())) {
      CHECK(members == story);
      ++holding;
    }
  }
  CHECK(holding == 1);
  CHECK(topics.size() == 4);
}

TEST_CASE("every input document lands in exactly one topic") {
  const auto corpus = generate_synthetic(SyntheticSpec{});
  std::vector<Document> en;
  for (const auto& d : corpus.documents) {
    if (d.language == Language::kEn && en.size() < 150) en.push_back(d);
  }
  const auto f = featurize_stream(en, 86400);
  std::vector<std::string> ids;
  for (const auto& d : en) ids.push_back(d.id);
  TopicParams params;
  params.workers = 2;
  const auto topics = detect_topics(ids, pointers(f), Language::kEn, 0,
                                    fixture::even_weights(Language::kEn), params, 7);
  std::multiset<std::string> seen;
  for (const auto& t : topics) {
    CHECK_FALSE(t.members.empty());
    seen.insert(t.members.begin(), t.members.end());
  }
  CHECK(seen == std::multiset<std::string>(ids.begin(), ids.end()));
}

}  // TEST_SUITE
