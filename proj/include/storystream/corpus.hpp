#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "storystream/language.hpp"
#include "storystream/sparse_vector.hpp"

namespace storystream {

// Seconds since the Unix epoch, UTC.
using Timestamp = std::int64_t;
// Index t of a time window in the stream.
using BatchIndex = std::int64_t;

struct Section {
  std::vector<std::string> tokens;
  std::vector<std::string> lemmas;
  std::vector<std::string> entities;

  const std::vector<std::string>& field(FieldKind kind) const;
};

struct Document {
  std::string id;
  Timestamp timestamp = 0;
  Language language = Language::kEn;
  std::optional<std::string> gold_story;
  Section title;
  Section body;
};

// Parses "YYYY-MM-DD", "YYYY-MM-DDTHH:MM[:SS[.fff]]" with optional "Z" or
// "+HH:MM" offset. A space may replace the 'T'.
Timestamp parse_iso8601(std::string_view text);
std::string format_iso8601(Timestamp ts);

// One JSON object per line; blank lines are skipped. Throws ParseError with
// the 1-based line number on malformed records.
std::vector<Document> parse_corpus(std::istream& in);
std::vector<Document> load_corpus(const std::string& path);

std::string to_json_line(const Document& doc);
void write_corpus(std::ostream& out, std::span<const Document> docs);

struct Batch {
  BatchIndex index = 0;
  Timestamp window_start = 0;
  Timestamp window_end = 0;  // exclusive
  std::vector<const Document*> documents;
};

// Fixed windows of `window_seconds` anchored at the earliest timestamp.
// Empty windows yield no batch, but indices count windows, so they skip.
// Within a batch documents keep input order.
std::vector<Batch> make_batches(std::span<const Document> docs,
                                std::int64_t window_seconds);

// Per-language streaming document frequencies, one table per field kind.
class DfTable {
 public:
  explicit DfTable(Language lang) : language_(lang) {}

  Language language() const { return language_; }
  std::size_t total_docs() const { return total_docs_; }
  // 0 for unseen terms.
  std::size_t count(FieldKind field, std::string_view term) const;
  std::size_t vocabulary_size(FieldKind field) const;

  // Counts each term once per document over the union of title and body.
  // Throws InvariantError if a document has another language.
  void update(std::span<const Document* const> docs);
  void update(const Document& doc);

 private:
  Language language_;
  std::size_t total_docs_ = 0;
  std::array<std::unordered_map<std::string, std::size_t>, kFieldKinds> counts_;
};

// TF-IDF features: tf = raw count in the section, idf = ln((1+N)/(1+df))+1,
// each sub-vector L2-normalized.
FeatureSet featurize(const Document& doc, const DfTable& df);

// Streams `docs` through make_batches, updating one DfTable per language at
// the end of each batch and featurizing that batch's documents against it.
// The result is aligned with `docs`.
std::vector<FeatureSet> featurize_stream(std::span<const Document> docs,
                                         std::int64_t window_seconds);

}  // namespace storystream
