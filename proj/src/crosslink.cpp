#include "storystream/crosslink.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>

#include <json.hpp>

#include "storystream/error.hpp"
#include "storystream/hungarian.hpp"

namespace storystream {

using nlohmann::json;

void EmbeddingStore::add(const std::string& doc_id, DenseVector vector) {
  if (vector.size() != dim_)
    throw ValidationError("embedding for '" + doc_id + "' has dimension " +
                          std::to_string(vector.size()) + ", expected " + std::to_string(dim_));
  for (double x : vector) {
    if (!std::isfinite(x))
      throw ValidationError("embedding for '" + doc_id + "' has a non-finite component");
  }
  if (!vectors_.emplace(doc_id, std::move(vector)).second)
    throw ValidationError("duplicate embedding for '" + doc_id + "'");
}

const DenseVector* EmbeddingStore::find(std::string_view doc_id) const {
  auto it = vectors_.find(std::string(doc_id));
  return it == vectors_.end() ? nullptr : &it->second;
}

const DenseVector& EmbeddingStore::at(std::string_view doc_id) const {
  const DenseVector* v = find(doc_id);
  if (v == nullptr)
    throw ValidationError("no embedding for document '" + std::string(doc_id) + "'");
  return *v;
}

EmbeddingStore EmbeddingStore::parse(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  std::optional<EmbeddingStore> store;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const json record = json::parse(line);
      if (!record.is_object()) throw ValidationError("record must be a JSON object");
      if (!store) {
        if (!record.contains("dim") || !record["dim"].is_number_unsigned())
          throw ValidationError("first record must be a {\"dim\": D} header");
        store.emplace(record["dim"].get<std::size_t>());
        continue;
      }
      if (!record.contains("id") || !record["id"].is_string())
        throw ValidationError("missing string field 'id'");
      if (!record.contains("vector") || !record["vector"].is_array())
        throw ValidationError("missing array field 'vector'");
      DenseVector v;
      v.reserve(record["vector"].size());
      for (const auto& x : record["vector"]) {
        if (!x.is_number()) throw ValidationError("vector components must be numbers");
        v.push_back(x.get<double>());
      }
      store->add(record["id"].get<std::string>(), std::move(v));
    } catch (const json::exception& e) {
      throw ParseError(line_no, std::string("malformed JSON: ") + e.what());
    } catch (const ParseError&) {
      throw;
    } catch (const ValidationError& e) {
      throw ParseError(line_no, e.what());
    }
  }
  if (!store) throw ValidationError("embedding file has no {\"dim\": D} header");
  return std::move(*store);
}

EmbeddingStore EmbeddingStore::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open embedding file '" + path + "'");
  return parse(in);
}

void EmbeddingStore::write(std::ostream& out, std::span<const std::string> ids) const {
  out << json{{"dim", dim_}}.dump() << '\n';
  for (const auto& id : ids) out << json{{"id", id}, {"vector", at(id)}}.dump() << '\n';
}

DenseVector mean_embedding(std::span<const std::string> doc_ids, const EmbeddingStore& store) {
  DenseVector mean(store.dim(), 0.0);
  if (doc_ids.empty()) return mean;
  for (const auto& id : doc_ids) {
    const DenseVector& v = store.at(id);
    for (std::size_t d = 0; d < mean.size(); ++d) mean[d] += v[d];
  }
  for (double& x : mean) x /= static_cast<double>(doc_ids.size());
  return mean;
}

DenseVector story_embedding(const StoryRecord& story, const EmbeddingStore& store) {
  return mean_embedding(story.members, store);
}

double dense_cosine(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw InvariantError("dense vectors differ in dimension");
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0.0 || nb == 0.0) return 0.0;
  return std::clamp(dot / (std::sqrt(na) * std::sqrt(nb)), -1.0, 1.0);
}

std::size_t MultilingualStory::size() const {
  return static_cast<std::size_t>(
      std::count_if(members.begin(), members.end(), [](const auto& m) { return m.has_value(); }));
}

void validate(const CrosslinkConfig& cfg) {
  if (!(cfg.t2 >= 0.0 && cfg.t2 <= 2.0)) throw ValidationError("T2 must lie in [0, 2]");
  if (cfg.max_age < 1) throw ValidationError("max_age must be >= 1");
}

const MultilingualStory* MultilingualRegistry::find(std::string_view ml_id) const {
  auto it = by_id_.find(std::string(ml_id));
  return it == by_id_.end() ? nullptr : &stories_[it->second];
}

const MultilingualStory* MultilingualRegistry::of(std::string_view story_id) const {
  auto it = by_story_.find(std::string(story_id));
  return it == by_story_.end() ? nullptr : &stories_[it->second];
}

std::size_t MultilingualRegistry::create(BatchIndex t) {
  if (t != id_batch_) {
    id_batch_ = t;
    id_counter_ = 0;
  }
  MultilingualStory ml;
  ml.id = "m-" + std::to_string(t) + "-" + std::to_string(id_counter_++);
  ml.created_batch = t;
  by_id_.emplace(ml.id, stories_.size());
  stories_.push_back(std::move(ml));
  return stories_.size() - 1;
}

void MultilingualRegistry::assign(std::size_t ml, Language lang, const std::string& story) {
  auto& slot = stories_[ml].members[index_of(lang)];
  if (slot) throw InvariantError("multilingual story " + stories_[ml].id + " already has a " +
                                 std::string(to_string(lang)) + " member");
  if (by_story_.contains(story))
    throw InvariantError("story '" + story + "' is already linked");
  slot = story;
  by_story_.emplace(story, ml);
}

void MultilingualRegistry::on_merge(Language lang, const std::string& merged,
                                    const std::string& survivor) {
  auto it = by_story_.find(merged);
  if (it == by_story_.end()) return;
  const std::size_t ml = it->second;
  auto survivor_it = by_story_.find(survivor);
  if (survivor_it == by_story_.end()) {
    stories_[ml].members[index_of(lang)] = survivor;
    by_story_.erase(it);
    by_story_.emplace(survivor, ml);
  } else if (survivor_it->second != ml) {
    conflicts_.push_back("story " + merged + " (in " + stories_[ml].id + ") merged into " +
                         survivor + " (in " + stories_[survivor_it->second].id +
                         "); survivor assignment kept");
  }
}

StoryViews story_views(std::span<const StoryRegistry* const> registries) {
  StoryViews views;
  for (const StoryRegistry* reg : registries) {
    if (reg == nullptr) continue;
    for (const auto& [id, story] : reg->stories())
      views[index_of(reg->language())].push_back(&story);
  }
  return views;
}

void MultilingualRegistry::finalize(const StoryViews& stories, BatchIndex t) {
  for (Language lang : kAllLanguages) {
    for (const StoryRecord* s : stories[index_of(lang)]) {
      if (!s->active() || by_story_.contains(s->id)) continue;
      assign(create(t), lang, s->id);
    }
  }
}

std::vector<LinkEvent> link_stories(const StoryViews& stories, MultilingualRegistry& ml,
                                    const EmbeddingStore& store, const CrosslinkConfig& cfg,
                                    BatchIndex t) {
  validate(cfg);
  std::vector<LinkEvent> events;
  const auto& pivot = stories[index_of(kPivotLanguage)];
  auto recent = [&](const StoryRecord& s) { return s.last_active >= t - cfg.max_age; };

  for (Language lang : kAllLanguages) {
    if (lang == kPivotLanguage) continue;

    std::vector<const StoryRecord*> rows;
    for (const StoryRecord* s : stories[index_of(lang)]) {
      if (s->active() && ml.of(s->id) == nullptr && recent(*s)) rows.push_back(s);
    }
    // Anchors: pivot stories either unlinked or in a group missing `lang`.
    std::vector<const StoryRecord*> cols;
    for (const StoryRecord* s : pivot) {
      if (!s->active() || !recent(*s)) continue;
      const MultilingualStory* group = ml.of(s->id);
      if (group == nullptr || !group->member(lang)) cols.push_back(s);
    }
    if (rows.empty() || cols.empty()) continue;

    std::vector<DenseVector> row_vec, col_vec;
    for (const auto* s : rows) row_vec.push_back(story_embedding(*s, store));
    for (const auto* s : cols) col_vec.push_back(story_embedding(*s, store));

    CostMatrix cost(rows.size(), cols.size());
    for (std::size_t r = 0; r < rows.size(); ++r) {
      for (std::size_t c = 0; c < cols.size(); ++c) {
        const double d = 1.0 - dense_cosine(row_vec[r], col_vec[c]);
        cost(r, c) = d < cfg.t2 ? d : kForbidden;
      }
    }
    for (const auto& [r, c] : hungarian(cost).pairs) {
      const double d = cost(r, c);
      if (!(d < cfg.t2)) throw InvariantError("accepted link violates the T2 threshold");
      const StoryRecord& anchor = *cols[c];
      std::size_t group;
      if (const MultilingualStory* existing = ml.of(anchor.id)) {
        group = ml.by_id_.at(existing->id);
      } else {
        group = ml.create(t);
        ml.assign(group, kPivotLanguage, anchor.id);
      }
      ml.assign(group, lang, rows[r]->id);
      events.push_back({lang, rows[r]->id, anchor.id, ml.stories_[group].id, d});
    }
  }

  // Unlinked stories that aged out will never link; close them as singletons.
  for (Language lang : kAllLanguages) {
    for (const StoryRecord* s : stories[index_of(lang)]) {
      if (s->active() && ml.of(s->id) == nullptr && !recent(*s)) ml.assign(ml.create(t), lang, s->id);
    }
  }
  return events;
}

}  // namespace storystream
