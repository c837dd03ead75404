#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "storystream/language.hpp"

namespace storystream {

// Document id -> cluster label.
using Clustering = std::map<std::string, std::string>;

struct Scores {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

// Instance-pair precision/recall over all unordered pairs. P or R is 1 when
// its denominator has no pairs.
Scores pairwise_scores(const Clustering& pred, const Clustering& gold);

// Per-item BCubed precision/recall, averaged over items.
Scores bcubed_scores(const Clustering& pred, const Clustering& gold);

struct EvaluationRow {
  std::string name;  // "en", "es", "de" or "all"
  std::size_t documents = 0;
  Scores bcubed;
  Scores standard;
  std::size_t predicted_clusters = 0;
  std::size_t gold_clusters = 0;
};

struct EvaluationReport {
  std::vector<EvaluationRow> rows;  // per language present, then "all"

  const EvaluationRow& overall() const { return rows.back(); }
  const EvaluationRow* row(const std::string& name) const;
};

// Throws ValidationError on an empty or mismatched document set. With
// `languages`, adds one row per language present.
EvaluationReport report(const Clustering& pred, const Clustering& gold,
                        const std::map<std::string, Language>* languages = nullptr);

std::string to_json(const EvaluationReport& r);
// Aligned text table: BCubed F1/P/R, Standard F1/P/R, cluster counts (percent).
std::string to_table(const EvaluationReport& r);

}  // namespace storystream
