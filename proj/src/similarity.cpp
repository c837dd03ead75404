#include "storystream/similarity.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "storystream/error.hpp"
#include "storystream/random.hpp"

namespace storystream {

using nlohmann::json;

WeightVector WeightVector::uniform(Language lang) {
  WeightVector w;
  w.language = lang;
  w.beta.fill(1.0 / static_cast<double>(kSlotCount));
  return w;
}

WeightVector unit_l1(const WeightVector& w) {
  double norm = 0.0;
  for (double b : w.beta) norm += std::abs(b);
  if (norm == 0.0) return w;
  WeightVector out = w;
  for (double& b : out.beta) b /= norm;
  out.intercept /= norm;
  return out;
}

double cosine(const SparseVector& a, const SparseVector& b) {
  if (a.empty() || b.empty()) return 0.0;
  const double c = a.dot(b) / (a.norm() * b.norm());
  return std::clamp(c, 0.0, 1.0);
}

SlotFeatures slot_cosines(const FeatureSet& a, const FeatureSet& b) {
  SlotFeatures out{};
  for (std::size_t k = 0; k < kSlotCount; ++k) out[k] = cosine(a[k], b[k]);
  return out;
}

double pair_similarity(const FeatureSet& a, const FeatureSet& b, const WeightVector& w) {
  double sum = 0.0;
  for (std::size_t k = 0; k < kSlotCount; ++k) {
    if (w.beta[k] == 0.0) continue;
    sum += w.beta[k] * cosine(a[k], b[k]);
  }
  return sum;
}

std::vector<LabeledPair> build_training_pairs(std::span<const Document> docs,
                                              std::span<const FeatureSet> features,
                                              const PairSamplingOptions& options) {
  if (docs.size() != features.size())
    throw InvariantError("documents and feature sets are not aligned");
  if (options.window_seconds <= 0) throw ValidationError("window length must be positive");
  if (!(options.negative_ratio >= 0.0) || !std::isfinite(options.negative_ratio))
    throw ValidationError("negative ratio must be finite and >= 0");
  if (docs.size() < 2)
    throw ValidationError("need at least 2 documents to build training pairs");
  for (const auto& d : docs) {
    if (!d.gold_story)
      throw ValidationError("document '" + d.id + "' has no gold story label");
  }

  std::vector<std::size_t> order(docs.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return docs[a].timestamp < docs[b].timestamp;
  });

  // Visits every temporally co-windowed pair in a fixed order.
  auto for_each_pair = [&](auto&& fn) {
    for (std::size_t x = 0; x < order.size(); ++x) {
      for (std::size_t y = x + 1; y < order.size(); ++y) {
        const std::size_t i = order[x], j = order[y];
        if (docs[j].timestamp - docs[i].timestamp >= options.window_seconds) break;
        fn(i, j, *docs[i].gold_story == *docs[j].gold_story);
      }
    }
  };

  std::vector<LabeledPair> pairs;
  std::uint64_t negatives_available = 0;
  for_each_pair([&](std::size_t i, std::size_t j, bool same) {
    if (same) {
      pairs.push_back({slot_cosines(features[i], features[j]), true});
    } else {
      ++negatives_available;
    }
  });
  if (pairs.empty())
    throw ValidationError("no same-story document pairs within one window");

  const auto wanted = static_cast<std::uint64_t>(
      std::llround(options.negative_ratio * static_cast<double>(pairs.size())));
  const std::uint64_t k = std::min(wanted, negatives_available);

  // Reservoir sampling (Algorithm R) over the negative pair stream.
  std::vector<std::pair<std::size_t, std::size_t>> reservoir;
  reservoir.reserve(k);
  Rng rng(options.seed);
  std::uint64_t seen = 0;
  if (k > 0) {
    for_each_pair([&](std::size_t i, std::size_t j, bool same) {
      if (same) return;
      if (seen < k) {
        reservoir.emplace_back(i, j);
      } else {
        const std::uint64_t r = uniform_index(rng, seen + 1);
        if (r < k) reservoir[r] = {i, j};
      }
      ++seen;
    });
  }
  std::sort(reservoir.begin(), reservoir.end());
  for (const auto& [i, j] : reservoir)
    pairs.push_back({slot_cosines(features[i], features[j]), false});
  return pairs;
}

namespace {

double softplus(double x) {
  return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double score(const LabeledPair& p, const SlotFeatures& beta, double intercept) {
  double z = intercept;
  for (std::size_t k = 0; k < kSlotCount; ++k) z += beta[k] * p.features[k];
  return z;
}

}  // namespace

double log_loss(std::span<const LabeledPair> pairs, const SlotFeatures& beta,
                double intercept) {
  if (pairs.empty()) return 0.0;
  double sum = 0.0;
  for (const auto& p : pairs) {
    const double z = score(p, beta, intercept);
    sum += p.same_story ? softplus(-z) : softplus(z);
  }
  return sum / static_cast<double>(pairs.size());
}

std::array<double, kSlotCount + 1> log_loss_gradient(std::span<const LabeledPair> pairs,
                                                     const SlotFeatures& beta,
                                                     double intercept) {
  std::array<double, kSlotCount + 1> grad{};
  if (pairs.empty()) return grad;
  for (const auto& p : pairs) {
    const double residual = sigmoid(score(p, beta, intercept)) - (p.same_story ? 1.0 : 0.0);
    for (std::size_t k = 0; k < kSlotCount; ++k) grad[k] += residual * p.features[k];
    grad[kSlotCount] += residual;
  }
  for (auto& g : grad) g /= static_cast<double>(pairs.size());
  return grad;
}

LogisticFitResult fit_beta(std::span<const LabeledPair> pairs, Language lang,
                           const LogisticFitOptions& options) {
  const auto positives = std::count_if(pairs.begin(), pairs.end(),
                                       [](const LabeledPair& p) { return p.same_story; });
  if (positives == 0 || positives == static_cast<std::ptrdiff_t>(pairs.size()))
    throw ValidationError("logistic regression needs both positive and negative pairs");
  if (!(options.learning_rate > 0.0) || options.max_iters < 0 || !(options.tolerance >= 0.0))
    throw ValidationError("invalid logistic regression options");

  LogisticFitResult result;
  result.weights.language = lang;
  SlotFeatures beta{};
  double intercept = 0.0;
  double loss = log_loss(pairs, beta, intercept);
  result.loss_history.push_back(loss);
  double step = options.learning_rate;

  for (int iter = 0; iter < options.max_iters; ++iter) {
    const auto grad = log_loss_gradient(pairs, beta, intercept);
    double grad_sq = 0.0;
    for (double g : grad) grad_sq += g * g;
    if (grad_sq == 0.0) break;

    bool accepted = false;
    for (int halving = 0; halving < 60; ++halving) {
      SlotFeatures trial_beta;
      for (std::size_t k = 0; k < kSlotCount; ++k) trial_beta[k] = beta[k] - step * grad[k];
      const double trial_intercept = intercept - step * grad[kSlotCount];
      const double trial_loss = log_loss(pairs, trial_beta, trial_intercept);
      // Armijo sufficient decrease.
      if (trial_loss <= loss - 0.5 * step * grad_sq) {
        const double improvement = loss - trial_loss;
        beta = trial_beta;
        intercept = trial_intercept;
        loss = trial_loss;
        result.loss_history.push_back(loss);
        result.iterations = iter + 1;
        accepted = true;
        step *= 1.5;
        if (improvement < options.tolerance) iter = options.max_iters;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;
  }
  result.weights.beta = beta;
  result.weights.intercept = intercept;
  return result;
}

std::string to_json(const WeightVector& w) {
  json j = {{"lang", std::string(to_string(w.language))},
            {"beta", std::vector<double>(w.beta.begin(), w.beta.end())},
            {"intercept", w.intercept}};
  return j.dump();
}

namespace {

WeightVector weights_from(const json& j) {
  if (!j.is_object()) throw ValidationError("weights entry must be an object");
  WeightVector w;
  if (!j.contains("lang") || !j["lang"].is_string())
    throw ValidationError("weights entry needs a string 'lang'");
  w.language = parse_language(j["lang"].get<std::string>());
  if (!j.contains("beta") || !j["beta"].is_array() || j["beta"].size() != kSlotCount)
    throw ValidationError("weights entry needs 'beta' with exactly 9 numbers");
  for (std::size_t k = 0; k < kSlotCount; ++k) {
    if (!j["beta"][k].is_number()) throw ValidationError("beta values must be numbers");
    w.beta[k] = j["beta"][k].get<double>();
    if (!std::isfinite(w.beta[k])) throw ValidationError("beta values must be finite");
  }
  if (j.contains("intercept")) {
    if (!j["intercept"].is_number()) throw ValidationError("intercept must be a number");
    w.intercept = j["intercept"].get<double>();
  }
  return w;
}

std::vector<WeightVector> weights_list(const json& j) {
  std::vector<WeightVector> out;
  if (j.is_array()) {
    for (const auto& e : j) out.push_back(weights_from(e));
  } else {
    out.push_back(weights_from(j));
  }
  return out;
}

}  // namespace

WeightVector weights_from_json(const std::string& text) {
  try {
    return weights_from(json::parse(text));
  } catch (const json::exception& e) {
    throw ValidationError(std::string("malformed weights JSON: ") + e.what());
  }
}

std::vector<WeightVector> load_weights(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open weights file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  try {
    return weights_list(json::parse(buf.str()));
  } catch (const json::exception& e) {
    throw ValidationError("malformed weights file '" + path + "': " + e.what());
  }
}

void save_weights(const std::string& path, std::span<const WeightVector> weights) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write weights file '" + path + "'");
  out << "[\n";
  for (std::size_t i = 0; i < weights.size(); ++i) {
    out << "  " << to_json(weights[i]) << (i + 1 < weights.size() ? ",\n" : "\n");
  }
  out << "]\n";
}

}  // namespace storystream
