#include "storystream/tuning.hpp"

#include <cstdio>

#include "storystream/error.hpp"
#include "storystream/pipeline.hpp"

namespace storystream {

std::vector<TrainedWeights> train_weights(std::span<const Document> docs,
                                          const TrainingOptions& options) {
  const auto features = featurize_stream(docs, options.window_seconds);
  std::vector<TrainedWeights> out;
  for (Language lang : kAllLanguages) {
    if (options.language && *options.language != lang) continue;
    std::vector<Document> subset;
    std::vector<FeatureSet> subset_features;
    for (std::size_t i = 0; i < docs.size(); ++i) {
      if (docs[i].language != lang) continue;
      subset.push_back(docs[i]);
      subset_features.push_back(features[i]);
    }
    if (subset.empty()) continue;
    const auto pairs = build_training_pairs(
        subset, subset_features, {options.window_seconds, options.negative_ratio, options.seed});
    const auto fit = fit_beta(pairs, lang, options.fit);
    out.push_back({options.unit_scale ? unit_l1(fit.weights) : fit.weights, pairs.size(),
                   fit.iterations, fit.loss_history.back()});
  }
  if (out.empty()) throw ValidationError("no documents to train on");
  return out;
}

bool better(const GridRow& a, const GridRow& b) {
  if (a.objective != b.objective) return a.objective > b.objective;
  if (a.clusters != b.clusters) return a.clusters < b.clusters;
  return a.t1 < b.t1;
}

GridSearchResult grid_search(std::span<const Document> dev, std::span<const WeightVector> weights,
                             const EmbeddingStore* embeddings, const RunConfig& base,
                             const ParameterGrid& grid) {
  if (grid.t1.empty() || grid.resolution.empty())
    throw ValidationError("parameter grid needs at least one T1 and one resolution value");
  if (!grid.t2.empty() && embeddings == nullptr)
    throw ValidationError("a T2 grid needs an embedding file");
  std::vector<Document> subset;
  if (grid.language) {
    for (const auto& d : dev) {
      if (d.language == *grid.language) subset.push_back(d);
    }
    dev = subset;
  }
  if (dev.empty()) throw ValidationError("dev corpus is empty");
  const bool crosslingual = !grid.t2.empty();
  const Clustering gold = gold_clustering(dev, !crosslingual);

  std::vector<std::optional<double>> t2_values;
  if (crosslingual) {
    for (double t2 : grid.t2) t2_values.emplace_back(t2);
  } else {
    t2_values.emplace_back(std::nullopt);
  }

  GridSearchResult result;
  for (double t1 : grid.t1) {
    for (double gamma : grid.resolution) {
      for (const auto& t2 : t2_values) {
        RunConfig cfg = base;
        if (grid.language) {
          cfg.replay.t1[index_of(*grid.language)] = t1;
        } else {
          cfg.replay.t1.fill(t1);
        }
        cfg.resolution = gamma;
        if (t2) cfg.crosslink.t2 = *t2;
        const PipelineResult run =
            run_stream(dev, weights, crosslingual ? embeddings : nullptr, cfg);
        const Clustering pred = crosslingual ? multilingual_clustering(run.assignments)
                                             : story_clustering(run.assignments);
        GridRow row;
        row.t1 = t1;
        row.resolution = gamma;
        row.t2 = t2;
        row.standard = pairwise_scores(pred, gold);
        row.bcubed = bcubed_scores(pred, gold);
        row.clusters = report(pred, gold).overall().predicted_clusters;
        row.objective = 0.5 * (row.standard.f1 + row.bcubed.f1);
        if (result.table.empty() || better(row, result.table[result.best_index])) {
          result.best_index = result.table.size();
          result.best = cfg;
        }
        result.table.push_back(row);
      }
    }
  }
  return result;
}

std::string score_table(const GridSearchResult& result) {
  std::string out = "t1\tgamma\tt2\tstandard_f1\tbcubed_f1\tobjective\tclusters\tbest\n";
  char line[256];
  for (std::size_t i = 0; i < result.table.size(); ++i) {
    const GridRow& r = result.table[i];
    const std::string t2 = r.t2 ? std::to_string(*r.t2) : "-";
    std::snprintf(line, sizeof(line), "%.6g\t%.6g\t%s\t%.17g\t%.17g\t%.17g\t%zu\t%d\n", r.t1,
                  r.resolution, t2.c_str(), r.standard.f1, r.bcubed.f1, r.objective, r.clusters,
                  i == result.best_index ? 1 : 0);
    out += line;
  }
  return out;
}

}  // namespace storystream
