#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "storystream/corpus.hpp"
#include "storystream/similarity.hpp"
#include "storystream/topics.hpp"

namespace storystream {

// A monolingual story persisted across batches.
struct StoryRecord {
  std::string id;
  Language language = Language::kEn;
  std::vector<std::string> members;  // original documents, each once
  FeatureSet centroid;               // unnormalized mean of member features
  BatchIndex created_batch = 0;
  BatchIndex last_active = 0;
  std::optional<std::string> merged_into;

  bool active() const { return !merged_into.has_value(); }
};

struct ReplayConfig {
  // Replay threshold per language, indexed by index_of(Language).
  std::array<double, kLanguageCount> t1 = {0.43, 0.52, 0.61};
  // Only stories active within the last `recency` batches are replayed.
  BatchIndex recency = 1;

  double threshold(Language lang) const { return t1[index_of(lang)]; }
};

void validate(const ReplayConfig& cfg);

struct LineageReport;
struct AdvanceResult;

// Per-language story state: documents seen so far with their frozen feature
// sets, the stories, and replay accounting.
class StoryRegistry {
 public:
  explicit StoryRegistry(Language lang) : language_(lang) {}

  Language language() const { return language_; }
  // -1 before the first batch.
  BatchIndex last_batch() const { return last_batch_; }

  const std::map<std::string, StoryRecord>& stories() const { return stories_; }
  const StoryRecord& story(std::string_view id) const;
  std::size_t active_story_count() const;

  bool has_document(std::string_view doc_id) const;
  const FeatureSet& features(std::string_view doc_id) const;
  Timestamp timestamp(std::string_view doc_id) const;
  // Current story of a document, nullptr while it is unassigned.
  const std::string* story_of(std::string_view doc_id) const;
  // Follows merged_into links to the active story.
  const std::string& resolve(std::string_view story_id) const;

  // Adds the documents of a new batch. Features are stored as given and never
  // recomputed. Throws on duplicate ids or a language mismatch.
  void register_documents(std::span<const Document* const> docs,
                          std::span<const FeatureSet> features);

  std::uint64_t replayed_docs() const { return replayed_docs_; }
  std::uint64_t total_docs() const { return docs_.size(); }
  double replay_rate() const;

 private:
  struct DocEntry {
    Timestamp timestamp = 0;
    FeatureSet features;
    std::optional<std::string> story;
  };

  const DocEntry& entry(std::string_view doc_id) const;
  std::string next_story_id(BatchIndex t);
  void recompute_centroid(StoryRecord& story) const;

  Language language_;
  BatchIndex last_batch_ = -1;
  std::map<std::string, StoryRecord> stories_;
  std::unordered_map<std::string, DocEntry> docs_;
  std::uint64_t replayed_docs_ = 0;
  BatchIndex id_batch_ = -1;
  std::size_t id_counter_ = 0;

  friend LineageReport resolve_lineage(std::span<const Topic>, const std::set<std::string>&,
                                       StoryRegistry&, BatchIndex);
  friend AdvanceResult advance(StoryRegistry&, BatchIndex, std::span<const Document* const>,
                               std::span<const FeatureSet>, const WeightVector&,
                               const TopicParams&, const ReplayConfig&, std::uint64_t);
};

// Active stories with last_active >= t - recency whose centroid scores above
// T1 against at least one new article.
std::set<std::string> select_replays(std::span<const FeatureSet* const> new_articles,
                                     const StoryRegistry& registry, const ReplayConfig& cfg,
                                     const WeightVector& w, BatchIndex t);

enum class LineageKind {
  kNew,        // no replayed documents
  kContinued,  // inherits exactly one prior story
  kSplit,      // holds replayed documents but inherits no prior story
  kMerged,     // inherits two or more prior stories
};

std::string_view to_string(LineageKind kind);

struct TopicLineage {
  std::string story;
  LineageKind kind = LineageKind::kNew;
  std::vector<std::string> inherited;  // prior story ids, survivor first
  std::size_t new_docs = 0;
  std::size_t replayed_docs = 0;
};

struct LineageReport {
  BatchIndex batch = 0;
  std::vector<TopicLineage> topics;                       // aligned with input topics
  std::vector<std::pair<std::string, std::string>> merges;  // (merged, survivor)
};

// Maps the topics of an augmented batch onto stories and updates the
// registry. A prior story's id goes to the topic holding the plurality of its
// replayed documents (tie: the topic holding its earliest document); other
// topics get fresh ids. When one topic inherits several ids the oldest story
// survives (tie: smallest id) and the rest become merged_into(survivor).
// Every story's members become exactly the documents of its topic.
// Throws InvariantError when the topics do not partition the registered,
// unassigned documents plus the members of the replayed stories.
LineageReport resolve_lineage(std::span<const Topic> topics,
                              const std::set<std::string>& replayed,
                              StoryRegistry& registry, BatchIndex t);

struct AdvanceResult {
  LineageReport lineage;
  std::set<std::string> replayed_stories;
  std::size_t replayed_docs = 0;
  std::size_t new_docs = 0;
  std::size_t topics = 0;
};

// One batch for one language: register, select replays, detect topics on the
// augmented batch, resolve lineage. `t` must be last_batch() + 1; an empty
// batch only advances the counter.
AdvanceResult advance(StoryRegistry& registry, BatchIndex t,
                      std::span<const Document* const> docs,
                      std::span<const FeatureSet> features, const WeightVector& w,
                      const TopicParams& params, const ReplayConfig& cfg,
                      std::uint64_t seed);

}  // namespace storystream
