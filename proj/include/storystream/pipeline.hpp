#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "storystream/config.hpp"
#include "storystream/corpus.hpp"
#include "storystream/crosslink.hpp"
#include "storystream/metrics.hpp"
#include "storystream/similarity.hpp"

namespace storystream {

struct DocAssignment {
  std::string id;
  Language language = Language::kEn;
  std::string story;
  std::optional<std::string> multilingual_story;
};

struct LanguageStats {
  std::uint64_t replayed_docs = 0;
  std::uint64_t total_docs = 0;
  std::size_t stories = 0;
};

struct RunStats {
  std::uint64_t replayed_docs = 0;
  std::uint64_t total_docs = 0;
  double replay_rate = 0.0;
  std::size_t stories = 0;  // active monolingual stories
  std::size_t batches = 0;  // windows processed, empty ones included
  std::optional<std::size_t> multilingual_stories;
  std::array<LanguageStats, kLanguageCount> per_language{};
  std::vector<std::string> merge_conflicts;
};

struct BatchLog {
  BatchIndex index = 0;
  std::size_t documents = 0;
  std::size_t replayed_docs = 0;
  std::size_t topics = 0;
  double seconds = 0.0;
};

struct PipelineResult {
  std::vector<DocAssignment> assignments;  // input order
  RunStats stats;
  std::vector<BatchLog> batches;           // timing; not part of the written outputs
};

// Returns the weights for `lang`, or uniform weights when none are given.
WeightVector weights_for(std::span<const WeightVector> weights, Language lang);

// Streams the corpus batch by batch: per language, update DF, featurize,
// advance the story registry; then, with embeddings, link crosslingually.
// Per-batch progress goes to `log` when given.
PipelineResult run_stream(std::span<const Document> docs, std::span<const WeightVector> weights,
                          const EmbeddingStore* embeddings, const RunConfig& cfg,
                          std::ostream* log = nullptr);

// {"id", "story"} lines, plus "multilingual_story" when linked.
void write_assignments(std::ostream& out, std::span<const DocAssignment> assignments);
std::vector<DocAssignment> read_assignments(std::istream& in);
std::string stats_json(const RunStats& stats);

// Predicted clusterings: monolingual story ids, or multilingual ids (falling
// back to the story id when a document's story is unlinked).
Clustering story_clustering(std::span<const DocAssignment> assignments);
Clustering multilingual_clustering(std::span<const DocAssignment> assignments);

// Gold clusterings. Monolingual gold keys each label by language so that a
// crosslingual story counts as one cluster per language. Throws
// ValidationError when a document has no label.
Clustering gold_clustering(std::span<const Document> docs, bool per_language);
std::map<std::string, Language> language_map(std::span<const Document> docs);

// Crosslingual linking replayed over a finished monolingual assignment:
// each story's membership at batch t is its documents dated up to the end of
// window t. Used by the standalone `link` command.
std::vector<DocAssignment> link_assignments(std::span<const Document> docs,
                                            std::span<const DocAssignment> assignments,
                                            const EmbeddingStore& embeddings,
                                            const RunConfig& cfg);

// Loads inputs named in `cfg`, runs, and writes the assignment, stats and
// (for labeled corpora, when requested) report files.
PipelineResult run_pipeline(const RunConfig& cfg, std::ostream* log = nullptr);

}  // namespace storystream
