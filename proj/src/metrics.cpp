#include "storystream/metrics.hpp"

#include <cstdint>
#include <cstdio>
#include <sstream>
#include <unordered_map>

#include <json.hpp>

#include "storystream/error.hpp"

namespace storystream {

namespace {

void check_same_documents(const Clustering& pred, const Clustering& gold) {
  if (pred.empty() && gold.empty()) throw ValidationError("cannot evaluate an empty document set");
  std::vector<std::string> only_pred, only_gold;
  auto p = pred.begin();
  auto g = gold.begin();
  while (p != pred.end() || g != gold.end()) {
    if (g == gold.end() || (p != pred.end() && p->first < g->first)) {
      only_pred.push_back((p++)->first);
    } else if (p == pred.end() || g->first < p->first) {
      only_gold.push_back((g++)->first);
    } else {
      ++p;
      ++g;
    }
  }
  if (only_pred.empty() && only_gold.empty()) return;
  auto list = [](const std::vector<std::string>& ids) {
    std::string s;
    for (std::size_t i = 0; i < ids.size() && i < 10; ++i) s += (i ? ", " : "") + ids[i];
    if (ids.size() > 10) s += ", ... (" + std::to_string(ids.size()) + " total)";
    return s;
  };
  throw ValidationError("document sets differ; only predicted: [" + list(only_pred) +
                        "]; only gold: [" + list(only_gold) + "]");
}

// Cluster sizes and the contingency table between the two labelings.
struct Contingency {
  std::unordered_map<std::string, std::uint64_t> pred_size;
  std::unordered_map<std::string, std::uint64_t> gold_size;
  std::map<std::pair<std::string, std::string>, std::uint64_t> joint;
  std::uint64_t n = 0;
};

Contingency contingency(const Clustering& pred, const Clustering& gold) {
  check_same_documents(pred, gold);
  Contingency c;
  for (auto p = pred.begin(), g = gold.begin(); p != pred.end(); ++p, ++g) {
    ++c.pred_size[p->second];
    ++c.gold_size[g->second];
    ++c.joint[{p->second, g->second}];
    ++c.n;
  }
  return c;
}

std::uint64_t pairs_of(std::uint64_t k) { return k * (k - (k > 0 ? 1 : 0)) / 2; }

double harmonic(double p, double r) { return p + r > 0.0 ? 2.0 * p * r / (p + r) : 0.0; }

}  // namespace

Scores pairwise_scores(const Clustering& pred, const Clustering& gold) {
  const Contingency c = contingency(pred, gold);
  // Counts stay below 2^63 for any corpus of fewer than ~4e9 documents.
  std::uint64_t tp = 0, pred_pairs = 0, gold_pairs = 0;
  for (const auto& [key, k] : c.joint) tp += pairs_of(k);
  for (const auto& [label, k] : c.pred_size) pred_pairs += pairs_of(k);
  for (const auto& [label, k] : c.gold_size) gold_pairs += pairs_of(k);
  Scores s;
  s.precision = pred_pairs == 0 ? 1.0 : static_cast<double>(tp) / static_cast<double>(pred_pairs);
  s.recall = gold_pairs == 0 ? 1.0 : static_cast<double>(tp) / static_cast<double>(gold_pairs);
  s.f1 = harmonic(s.precision, s.recall);
  return s;
}

Scores bcubed_scores(const Clustering& pred, const Clustering& gold) {
  const Contingency c = contingency(pred, gold);
  // Each of the n_pg items in cell (p, g) has precision n_pg/|p| and recall n_pg/|g|.
  double p_sum = 0.0, r_sum = 0.0;
  for (const auto& [key, k] : c.joint) {
    const double nk = static_cast<double>(k);
    p_sum += nk * nk / static_cast<double>(c.pred_size.at(key.first));
    r_sum += nk * nk / static_cast<double>(c.gold_size.at(key.second));
  }
  Scores s;
  s.precision = p_sum / static_cast<double>(c.n);
  s.recall = r_sum / static_cast<double>(c.n);
  s.f1 = harmonic(s.precision, s.recall);
  return s;
}

const EvaluationRow* EvaluationReport::row(const std::string& name) const {
  for (const auto& r : rows) {
    if (r.name == name) return &r;
  }
  return nullptr;
}

namespace {

std::size_t distinct_labels(const Clustering& c) {
  std::unordered_map<std::string, int> seen;
  for (const auto& [id, label] : c) seen.emplace(label, 0);
  return seen.size();
}

EvaluationRow make_row(const std::string& name, const Clustering& pred, const Clustering& gold) {
  EvaluationRow row;
  row.name = name;
  row.documents = pred.size();
  row.standard = pairwise_scores(pred, gold);
  row.bcubed = bcubed_scores(pred, gold);
  row.predicted_clusters = distinct_labels(pred);
  row.gold_clusters = distinct_labels(gold);
  return row;
}

}  // namespace

EvaluationReport report(const Clustering& pred, const Clustering& gold,
                        const std::map<std::string, Language>* languages) {
  check_same_documents(pred, gold);
  EvaluationReport out;
  if (languages != nullptr) {
    for (Language lang : kAllLanguages) {
      Clustering p, g;
      for (const auto& [id, label] : pred) {
        auto it = languages->find(id);
        if (it == languages->end())
          throw ValidationError("no language known for document '" + id + "'");
        if (it->second != lang) continue;
        p.emplace(id, label);
        g.emplace(id, gold.at(id));
      }
      if (!p.empty()) out.rows.push_back(make_row(std::string(to_string(lang)), p, g));
    }
  }
  out.rows.push_back(make_row("all", pred, gold));
  return out;
}

std::string to_json(const EvaluationReport& r) {
  using nlohmann::json;
  auto scores = [](const Scores& s) {
    return json{{"precision", s.precision}, {"recall", s.recall}, {"f1", s.f1}};
  };
  json rows = json::array();
  for (const auto& row : r.rows) {
    rows.push_back({{"name", row.name},
                    {"documents", row.documents},
                    {"bcubed", scores(row.bcubed)},
                    {"standard", scores(row.standard)},
                    {"predicted_clusters", row.predicted_clusters},
                    {"gold_clusters", row.gold_clusters}});
  }
  return json{{"rows", rows}}.dump(2);
}

std::string to_table(const EvaluationReport& r) {
  std::ostringstream out;
  char line[256];
  std::snprintf(line, sizeof(line), "%-6s %8s | %7s %7s %7s | %7s %7s %7s | %9s %9s\n", "", "docs",
                "B3 F1", "B3 P", "B3 R", "F1", "P", "R", "clusters", "gold");
  out << line;
  for (const auto& row : r.rows) {
    std::snprintf(line, sizeof(line),
                  "%-6s %8zu | %7.2f %7.2f %7.2f | %7.2f %7.2f %7.2f | %9zu %9zu\n",
                  row.name.c_str(), row.documents, 100 * row.bcubed.f1, 100 * row.bcubed.precision,
                  100 * row.bcubed.recall, 100 * row.standard.f1, 100 * row.standard.precision,
                  100 * row.standard.recall, row.predicted_clusters, row.gold_clusters);
    out << line;
  }
  return out.str();
}

}  // namespace storystream
