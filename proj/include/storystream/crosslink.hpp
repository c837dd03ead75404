#pragma once

#include <array>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "storystream/corpus.hpp"
#include "storystream/stories.hpp"

namespace storystream {

using DenseVector = std::vector<double>;

// Dense multilingual article embeddings, all of one dimension.
class EmbeddingStore {
 public:
  explicit EmbeddingStore(std::size_t dim = 0) : dim_(dim) {}

  std::size_t dim() const { return dim_; }
  std::size_t size() const { return vectors_.size(); }
  // Throws ValidationError on a dimension mismatch or non-finite component.
  void add(const std::string& doc_id, DenseVector vector);
  const DenseVector* find(std::string_view doc_id) const;
  // Throws ValidationError naming the id when absent.
  const DenseVector& at(std::string_view doc_id) const;

  // Header line {"dim": D} followed by {"id": ..., "vector": [...]} lines.
  static EmbeddingStore parse(std::istream& in);
  static EmbeddingStore load(const std::string& path);
  // Rows in the given id order.
  void write(std::ostream& out, std::span<const std::string> ids) const;

 private:
  std::size_t dim_;
  std::unordered_map<std::string, DenseVector> vectors_;
};

// Componentwise mean of the member embeddings.
DenseVector story_embedding(const StoryRecord& story, const EmbeddingStore& store);
DenseVector mean_embedding(std::span<const std::string> doc_ids, const EmbeddingStore& store);

// 0 when either vector is all zeros.
double dense_cosine(std::span<const double> a, std::span<const double> b);

struct MultilingualStory {
  std::string id;
  std::array<std::optional<std::string>, kLanguageCount> members;  // by language
  BatchIndex created_batch = 0;

  const std::optional<std::string>& member(Language lang) const {
    return members[index_of(lang)];
  }
  std::size_t size() const;
};

struct CrosslinkConfig {
  double t2 = 0.22;         // maximum admissible distance, exclusive
  BatchIndex max_age = 4;   // batches since last activity
};

void validate(const CrosslinkConfig& cfg);

// Stories per language, indexed by index_of(Language).
using StoryViews = std::array<std::vector<const StoryRecord*>, kLanguageCount>;

// Null registries contribute no stories.
StoryViews story_views(std::span<const StoryRegistry* const> registries);

struct LinkEvent {
  Language language = Language::kEs;
  std::string story;
  std::string pivot_story;
  std::string multilingual_story;
  double distance = 0.0;
};

class MultilingualRegistry {
 public:
  const std::vector<MultilingualStory>& stories() const { return stories_; }
  const MultilingualStory* find(std::string_view ml_id) const;
  // Multilingual story holding a monolingual story, nullptr if none.
  const MultilingualStory* of(std::string_view story_id) const;

  // A story merged away monolingually hands its slot to the survivor when the
  // survivor has none; otherwise the survivor keeps its own assignment and the
  // conflict is recorded.
  void on_merge(Language lang, const std::string& merged, const std::string& survivor);
  const std::vector<std::string>& conflicts() const { return conflicts_; }

  // Gives every active, unlinked story its own singleton multilingual story.
  void finalize(const StoryViews& stories, BatchIndex t);

 private:
  friend std::vector<LinkEvent> link_stories(const StoryViews&, MultilingualRegistry&,
                                             const EmbeddingStore&, const CrosslinkConfig&,
                                             BatchIndex);

  std::size_t create(BatchIndex t);
  void assign(std::size_t ml, Language lang, const std::string& story);

  std::vector<MultilingualStory> stories_;
  std::unordered_map<std::string, std::size_t> by_id_;
  std::unordered_map<std::string, std::size_t> by_story_;
  std::vector<std::string> conflicts_;
  BatchIndex id_batch_ = -1;
  std::size_t id_counter_ = 0;
};

// Pivot linking for batch t. For each non-pivot language, rows are its
// eligible stories and columns the eligible pivot anchors: unlinked English
// stories, and multilingual stories with an English member and a free slot
// for that language. Cost is 1 - cosine of story embeddings; cells at or
// above T2 are forbidden. Afterwards, unlinked stories that aged out become
// singletons.
std::vector<LinkEvent> link_stories(const StoryViews& stories, MultilingualRegistry& ml,
                                    const EmbeddingStore& store, const CrosslinkConfig& cfg,
                                    BatchIndex t);

}  // namespace storystream
