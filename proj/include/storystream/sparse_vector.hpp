#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

namespace storystream {

// Terms are identified by a 64-bit FNV-1a hash of their UTF-8 bytes, so
// featurization needs no shared dictionary.
using TermId = std::uint64_t;

TermId term_id(std::string_view term);

// Sparse non-negative vector stored as entries sorted by term id. Holds no
// explicit zeros; the L2 norm is cached.
class SparseVector {
 public:
  using Entry = std::pair<TermId, double>;

  SparseVector() = default;

  // Sums duplicate ids and drops zero entries. Throws ValidationError on
  // negative or non-finite weights.
  static SparseVector from_entries(std::vector<Entry> entries);

  std::span<const Entry> entries() const { return entries_; }
  bool empty() const { return entries_.empty(); }
  std::size_t size() const { return entries_.size(); }
  double norm() const { return norm_; }

  double dot(const SparseVector& other) const;
  // Weight for a term, 0 when absent.
  double at(TermId id) const;

  void scale(double factor);
  SparseVector normalized() const;

  friend bool operator==(const SparseVector&, const SparseVector&) = default;

 private:
  std::vector<Entry> entries_;
  double norm_ = 0.0;
};

// Arithmetic mean of sparse vectors. Each coordinate is summed in input
// order, so the result is deterministic.
SparseVector mean_of(std::span<const SparseVector* const> vectors);

enum class SectionKind { kTitle = 0, kBody = 1, kTitleBody = 2 };
enum class FieldKind { kTokens = 0, kLemmas = 1, kEntities = 2 };

inline constexpr std::size_t kSectionKinds = 3;
inline constexpr std::size_t kFieldKinds = 3;
inline constexpr std::size_t kSlotCount = kSectionKinds * kFieldKinds;

// Slot order is row-major, section outer and field inner:
//   0 title/tokens   1 title/lemmas   2 title/entities
//   3 body/tokens    4 body/lemmas    5 body/entities
//   6 both/tokens    7 both/lemmas    8 both/entities
constexpr std::size_t slot_index(SectionKind section, FieldKind field) {
  return static_cast<std::size_t>(section) * kFieldKinds +
         static_cast<std::size_t>(field);
}

std::string_view slot_name(std::size_t slot);

// The nine TF-IDF sub-vectors of one document, or their mean for a story.
struct FeatureSet {
  std::array<SparseVector, kSlotCount> slots;

  SparseVector& operator[](std::size_t k) { return slots[k]; }
  const SparseVector& operator[](std::size_t k) const { return slots[k]; }

  friend bool operator==(const FeatureSet&, const FeatureSet&) = default;
};

FeatureSet mean_of(std::span<const FeatureSet* const> sets);

}  // namespace storystream
