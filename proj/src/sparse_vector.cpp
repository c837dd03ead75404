#include "storystream/sparse_vector.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "storystream/error.hpp"

namespace storystream {

TermId term_id(std::string_view term) {
  std::uint64_t hash = 14695981039346656037ull;
  for (unsigned char c : term) {
    hash ^= c;
    hash *= 1099511628211ull;
  }
  return hash;
}

namespace {

double norm_of(std::span<const SparseVector::Entry> entries) {
  double sum = 0.0;
  for (const auto& [id, w] : entries) sum += w * w;
  return std::sqrt(sum);
}

}  // namespace

SparseVector SparseVector::from_entries(std::vector<Entry> entries) {
  for (const auto& [id, w] : entries) {
    if (!std::isfinite(w) || w < 0.0)
      throw ValidationError("sparse vector weight must be finite and >= 0, got " +
                            std::to_string(w));
  }
  std::stable_sort(entries.begin(), entries.end(),
                   [](const Entry& a, const Entry& b) { return a.first < b.first; });
  SparseVector out;
  out.entries_.reserve(entries.size());
  for (const auto& [id, w] : entries) {
    if (!out.entries_.empty() && out.entries_.back().first == id) {
      out.entries_.back().second += w;
    } else {
      out.entries_.emplace_back(id, w);
    }
  }
  std::erase_if(out.entries_, [](const Entry& e) { return e.second == 0.0; });
  out.entries_.shrink_to_fit();
  out.norm_ = norm_of(out.entries_);
  return out;
}

double SparseVector::dot(const SparseVector& other) const {
  double sum = 0.0;
  auto a = entries_.begin();
  auto b = other.entries_.begin();
  while (a != entries_.end() && b != other.entries_.end()) {
    if (a->first < b->first) {
      ++a;
    } else if (b->first < a->first) {
      ++b;
    } else {
      sum += a->second * b->second;
      ++a;
      ++b;
    }
  }
  return sum;
}

double SparseVector::at(TermId id) const {
  auto it = std::lower_bound(
      entries_.begin(), entries_.end(), id,
      [](const Entry& e, TermId key) { return e.first < key; });
  return (it != entries_.end() && it->first == id) ? it->second : 0.0;
}

void SparseVector::scale(double factor) {
  if (!std::isfinite(factor) || factor < 0.0)
    throw ValidationError("sparse vector scale factor must be finite and >= 0");
  if (factor == 0.0) {
    entries_.clear();
    norm_ = 0.0;
    return;
  }
  for (auto& e : entries_) e.second *= factor;
  std::erase_if(entries_, [](const Entry& e) { return e.second == 0.0; });
  norm_ = norm_of(entries_);
}

SparseVector SparseVector::normalized() const {
  SparseVector out = *this;
  if (norm_ > 0.0) out.scale(1.0 / norm_);
  return out;
}

SparseVector mean_of(std::span<const SparseVector* const> vectors) {
  if (vectors.empty()) return {};
  std::vector<SparseVector::Entry> all;
  for (const SparseVector* v : vectors) {
    all.insert(all.end(), v->entries().begin(), v->entries().end());
  }
  // from_entries sorts stably, so each coordinate is summed in input order.
  SparseVector sum = SparseVector::from_entries(std::move(all));
  sum.scale(1.0 / static_cast<double>(vectors.size()));
  return sum;
}

std::string_view slot_name(std::size_t slot) {
  static constexpr std::string_view kNames[kSlotCount] = {
      "title.tokens", "title.lemmas", "title.entities",
      "body.tokens",  "body.lemmas",  "body.entities",
      "both.tokens",  "both.lemmas",  "both.entities"};
  return slot < kSlotCount ? kNames[slot] : std::string_view("?");
}

FeatureSet mean_of(std::span<const FeatureSet* const> sets) {
  FeatureSet out;
  std::vector<const SparseVector*> column(sets.size());
  for (std::size_t k = 0; k < kSlotCount; ++k) {
    for (std::size_t i = 0; i < sets.size(); ++i) column[i] = &(*sets[i])[k];
    out[k] = mean_of(std::span<const SparseVector* const>(column));
  }
  return out;
}

}  // namespace storystream
