#include "storystream/stories.hpp"

#include <algorithm>
#include <cmath>
#include <tuple>
#include <unordered_set>

#include "storystream/error.hpp"
#include "storystream/random.hpp"

namespace storystream {

void validate(const ReplayConfig& cfg) {
  for (double t1 : cfg.t1) {
    if (!std::isfinite(t1)) throw ValidationError("replay threshold T1 must be finite");
  }
  if (cfg.recency < 1) throw ValidationError("replay recency must be >= 1");
}

const StoryRecord& StoryRegistry::story(std::string_view id) const {
  auto it = stories_.find(std::string(id));
  if (it == stories_.end()) throw InvariantError("unknown story '" + std::string(id) + "'");
  return it->second;
}

std::size_t StoryRegistry::active_story_count() const {
  return static_cast<std::size_t>(std::count_if(
      stories_.begin(), stories_.end(), [](const auto& kv) { return kv.second.active(); }));
}

const StoryRegistry::DocEntry& StoryRegistry::entry(std::string_view doc_id) const {
  auto it = docs_.find(std::string(doc_id));
  if (it == docs_.end())
    throw InvariantError("document '" + std::string(doc_id) + "' is not registered");
  return it->second;
}

bool StoryRegistry::has_document(std::string_view doc_id) const {
  return docs_.contains(std::string(doc_id));
}

const FeatureSet& StoryRegistry::features(std::string_view doc_id) const {
  return entry(doc_id).features;
}

Timestamp StoryRegistry::timestamp(std::string_view doc_id) const {
  return entry(doc_id).timestamp;
}

const std::string* StoryRegistry::story_of(std::string_view doc_id) const {
  auto it = docs_.find(std::string(doc_id));
  if (it == docs_.end() || !it->second.story) return nullptr;
  return &*it->second.story;
}

const std::string& StoryRegistry::resolve(std::string_view story_id) const {
  const StoryRecord* s = &story(story_id);
  for (std::size_t hops = 0; s->merged_into; ++hops) {
    if (hops > stories_.size()) throw InvariantError("merged_into chain does not terminate");
    s = &story(*s->merged_into);
  }
  return s->id;
}

void StoryRegistry::register_documents(std::span<const Document* const> docs,
                                       std::span<const FeatureSet> features) {
  if (docs.size() != features.size())
    throw InvariantError("documents and feature sets are not aligned");
  for (const Document* d : docs) {
    if (d->language != language_)
      throw InvariantError("document '" + d->id + "' is not " +
                           std::string(to_string(language_)));
    if (docs_.contains(d->id))
      throw InvariantError("document '" + d->id + "' registered twice");
  }
  for (std::size_t i = 0; i < docs.size(); ++i)
    docs_.emplace(docs[i]->id, DocEntry{docs[i]->timestamp, features[i], std::nullopt});
}

double StoryRegistry::replay_rate() const {
  return docs_.empty() ? 0.0
                       : static_cast<double>(replayed_docs_) / static_cast<double>(docs_.size());
}

std::string StoryRegistry::next_story_id(BatchIndex t) {
  if (t != id_batch_) {
    id_batch_ = t;
    id_counter_ = 0;
  }
  return "s-" + std::string(to_string(language_)) + "-" + std::to_string(t) + "-" +
         std::to_string(id_counter_++);
}

void StoryRegistry::recompute_centroid(StoryRecord& story) const {
  std::vector<const FeatureSet*> sets;
  sets.reserve(story.members.size());
  for (const auto& m : story.members) sets.push_back(&entry(m).features);
  story.centroid = mean_of(std::span<const FeatureSet* const>(sets));
}

std::set<std::string> select_replays(std::span<const FeatureSet* const> new_articles,
                                     const StoryRegistry& registry, const ReplayConfig& cfg,
                                     const WeightVector& w, BatchIndex t) {
  std::set<std::string> selected;
  const double threshold = cfg.threshold(registry.language());
  for (const auto& [id, story] : registry.stories()) {
    if (!story.active() || story.last_active < t - cfg.recency) continue;
    for (const FeatureSet* article : new_articles) {
      if (pair_similarity(*article, story.centroid, w) > threshold) {
        selected.insert(id);
        break;
      }
    }
  }
  return selected;
}

std::string_view to_string(LineageKind kind) {
  switch (kind) {
    case LineageKind::kNew:
      return "new";
    case LineageKind::kContinued:
      return "continued";
    case LineageKind::kSplit:
      return "split";
    case LineageKind::kMerged:
      return "merged";
  }
  return "?";
}

LineageReport resolve_lineage(std::span<const Topic> topics,
                              const std::set<std::string>& replayed,
                              StoryRegistry& registry, BatchIndex t) {
  // Which replayed story each replayed document comes from.
  std::unordered_map<std::string, std::string> source;
  for (const auto& sid : replayed) {
    const StoryRecord& s = registry.story(sid);
    if (!s.active()) throw InvariantError("replayed story '" + sid + "' is not active");
    for (const auto& m : s.members) source.emplace(m, sid);
  }

  std::unordered_set<std::string> placed;
  std::size_t unassigned_seen = 0;
  // counts[topic][story] = replayed documents of story in topic.
  std::vector<std::map<std::string, std::size_t>> counts(topics.size());
  for (std::size_t ti = 0; ti < topics.size(); ++ti) {
    if (topics[ti].members.empty()) throw InvariantError("empty topic");
    for (const auto& doc : topics[ti].members) {
      if (!placed.insert(doc).second)
        throw InvariantError("document '" + doc + "' appears in two topics");
      if (auto it = source.find(doc); it != source.end()) {
        ++counts[ti][it->second];
      } else if (registry.has_document(doc) && registry.story_of(doc) == nullptr) {
        ++unassigned_seen;
      } else {
        throw InvariantError("topic document '" + doc +
                             "' is neither new in this batch nor replayed");
      }
    }
  }
  if (placed.size() - unassigned_seen != source.size())
    throw InvariantError("topics do not cover every replayed document");
  std::size_t unassigned_total = 0;
  for (const auto& [id, e] : registry.docs_) unassigned_total += e.story ? 0 : 1;
  if (unassigned_seen != unassigned_total)
    throw InvariantError("topics do not cover every new document");

  // Rule (b): plurality inheritance.
  std::vector<std::vector<std::string>> inherited(topics.size());
  for (const auto& sid : replayed) {
    std::size_t best_count = 0;
    std::vector<std::size_t> tied;
    for (std::size_t ti = 0; ti < topics.size(); ++ti) {
      auto it = counts[ti].find(sid);
      if (it == counts[ti].end()) continue;
      if (it->second > best_count) {
        best_count = it->second;
        tied.assign(1, ti);
      } else if (it->second == best_count) {
        tied.push_back(ti);
      }
    }
    std::size_t winner = tied.front();
    if (tied.size() > 1) {
      // The tied topic holding the story's earliest document.
      std::tuple<Timestamp, std::string> earliest{0, ""};
      bool first = true;
      for (std::size_t ti : tied) {
        for (const auto& doc : topics[ti].members) {
          auto it = source.find(doc);
          if (it == source.end() || it->second != sid) continue;
          std::tuple<Timestamp, std::string> key{registry.timestamp(doc), doc};
          if (first || key < earliest) {
            earliest = key;
            winner = ti;
            first = false;
          }
        }
      }
    }
    inherited[winner].push_back(sid);
  }

  LineageReport report;
  report.batch = t;
  report.topics.resize(topics.size());
  for (std::size_t ti = 0; ti < topics.size(); ++ti) {
    TopicLineage& line = report.topics[ti];
    for (const auto& [sid, c] : counts[ti]) line.replayed_docs += c;
    line.new_docs = topics[ti].members.size() - line.replayed_docs;

    auto& heirs = inherited[ti];
    if (heirs.empty()) {
      line.story = registry.next_story_id(t);
      line.kind = line.replayed_docs > 0 ? LineageKind::kSplit : LineageKind::kNew;
      StoryRecord fresh;
      fresh.id = line.story;
      fresh.language = registry.language();
      fresh.created_batch = t;
      registry.stories_.emplace(fresh.id, std::move(fresh));
    } else {
      // Rule (c): oldest creation batch survives, then smallest id.
      std::sort(heirs.begin(), heirs.end(), [&](const std::string& a, const std::string& b) {
        const auto ca = registry.story(a).created_batch;
        const auto cb = registry.story(b).created_batch;
        return ca != cb ? ca < cb : a < b;
      });
      line.story = heirs.front();
      line.kind = heirs.size() == 1 ? LineageKind::kContinued : LineageKind::kMerged;
      for (std::size_t h = 1; h < heirs.size(); ++h) {
        StoryRecord& merged = registry.stories_.at(heirs[h]);
        merged.merged_into = line.story;
        merged.members.clear();
        merged.centroid = FeatureSet{};
        merged.last_active = t;
        report.merges.emplace_back(heirs[h], line.story);
      }
    }
    line.inherited = heirs;

    StoryRecord& story = registry.stories_.at(line.story);
    story.members = topics[ti].members;
    story.last_active = t;
    for (const auto& doc : story.members) registry.docs_.at(doc).story = story.id;
    registry.recompute_centroid(story);
  }
  return report;
}

AdvanceResult advance(StoryRegistry& registry, BatchIndex t,
                      std::span<const Document* const> docs,
                      std::span<const FeatureSet> features, const WeightVector& w,
                      const TopicParams& params, const ReplayConfig& cfg,
                      std::uint64_t seed) {
  if (t != registry.last_batch_ + 1)
    throw InvariantError("batch " + std::to_string(t) + " out of order for " +
                         std::string(to_string(registry.language())) + " (expected " +
                         std::to_string(registry.last_batch_ + 1) + ")");
  if (w.language != registry.language())
    throw InvariantError("weight vector language does not match the registry");
  AdvanceResult result;
  result.lineage.batch = t;
  if (docs.empty()) {
    registry.last_batch_ = t;
    return result;
  }

  registry.register_documents(docs, features);
  result.new_docs = docs.size();

  std::vector<const FeatureSet*> new_features;
  new_features.reserve(features.size());
  for (const auto& f : features) new_features.push_back(&f);
  result.replayed_stories = select_replays(new_features, registry, cfg, w, t);

  // Augmented batch: replayed members in story order, then the new documents.
  std::vector<std::string> ids;
  std::vector<const FeatureSet*> augmented;
  for (const auto& sid : result.replayed_stories) {
    for (const auto& m : registry.story(sid).members) {
      ids.push_back(m);
      augmented.push_back(&registry.features(m));
    }
  }
  result.replayed_docs = ids.size();
  for (std::size_t i = 0; i < docs.size(); ++i) {
    ids.push_back(docs[i]->id);
    augmented.push_back(&registry.features(docs[i]->id));
  }
  registry.replayed_docs_ += result.replayed_docs;

  const std::uint64_t batch_seed =
      mix_seed(mix_seed(seed, static_cast<std::uint64_t>(t)), index_of(registry.language()));
  const std::vector<Topic> topics =
      detect_topics(ids, augmented, registry.language(), t, w, params, batch_seed);
  result.topics = topics.size();
  result.lineage = resolve_lineage(topics, result.replayed_stories, registry, t);
  registry.last_batch_ = t;
  return result;
}

}  // namespace storystream
