#include "storystream/pipeline.hpp"

#include <chrono>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <unordered_map>

#include <json.hpp>

#include "storystream/error.hpp"
#include "storystream/stories.hpp"

namespace storystream {

using nlohmann::json;

WeightVector weights_for(std::span<const WeightVector> weights, Language lang) {
  for (const auto& w : weights) {
    if (w.language == lang) return w;
  }
  return WeightVector::uniform(lang);
}

PipelineResult run_stream(std::span<const Document> docs, std::span<const WeightVector> weights,
                          const EmbeddingStore* embeddings, const RunConfig& cfg,
                          std::ostream* log) {
  validate(cfg);
  PipelineResult result;
  const std::vector<Batch> batches = make_batches(docs, cfg.window_seconds());

  std::array<DfTable, kLanguageCount> tables = {DfTable(Language::kEn), DfTable(Language::kEs),
                                                DfTable(Language::kDe)};
  std::array<StoryRegistry, kLanguageCount> registries = {
      StoryRegistry(Language::kEn), StoryRegistry(Language::kEs), StoryRegistry(Language::kDe)};
  std::array<WeightVector, kLanguageCount> w;
  for (Language lang : kAllLanguages) w[index_of(lang)] = weights_for(weights, lang);
  std::array<const StoryRegistry*, kLanguageCount> registry_ptrs = {
      &registries[0], &registries[1], &registries[2]};
  MultilingualRegistry ml;
  const TopicParams params = cfg.topic_params();

  const BatchIndex last = batches.empty() ? -1 : batches.back().index;
  std::size_t next = 0;
  for (BatchIndex t = 0; t <= last; ++t) {
    const auto started = std::chrono::steady_clock::now();
    const Batch* batch = (next < batches.size() && batches[next].index == t) ? &batches[next++] : nullptr;
    BatchLog entry;
    entry.index = t;
    for (Language lang : kAllLanguages) {
      const std::size_t li = index_of(lang);
      std::vector<const Document*> lang_docs;
      if (batch != nullptr) {
        for (const Document* d : batch->documents) {
          if (d->language == lang) lang_docs.push_back(d);
        }
      }
      tables[li].update(lang_docs);
      std::vector<FeatureSet> features;
      features.reserve(lang_docs.size());
      for (const Document* d : lang_docs) features.push_back(featurize(*d, tables[li]));

      const AdvanceResult step = advance(registries[li], t, lang_docs, features, w[li], params,
                                         cfg.replay, cfg.seed);
      for (const auto& [merged, survivor] : step.lineage.merges) ml.on_merge(lang, merged, survivor);
      entry.documents += step.new_docs;
      entry.replayed_docs += step.replayed_docs;
      entry.topics += step.topics;
    }
    if (embeddings != nullptr)
      link_stories(story_views(registry_ptrs), ml, *embeddings, cfg.crosslink, t);
    entry.seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    if (log != nullptr && entry.documents > 0) {
      std::uint64_t replayed = 0, total = 0;
      for (const auto& r : registries) {
        replayed += r.replayed_docs();
        total += r.total_docs();
      }
      *log << "batch " << t << ": docs=" << entry.documents << " replayed=" << entry.replayed_docs
           << " topics=" << entry.topics << " replay_rate="
           << (total ? static_cast<double>(replayed) / static_cast<double>(total) : 0.0)
           << " time=" << entry.seconds << "s\n";
    }
    result.batches.push_back(entry);
  }
  if (embeddings != nullptr) ml.finalize(story_views(registry_ptrs), last < 0 ? 0 : last);

  result.assignments.reserve(docs.size());
  for (const Document& d : docs) {
    const StoryRegistry& reg = registries[index_of(d.language)];
    const std::string* story = reg.story_of(d.id);
    if (story == nullptr) throw InvariantError("document '" + d.id + "' ended without a story");
    DocAssignment a{d.id, d.language, reg.resolve(*story), std::nullopt};
    if (embeddings != nullptr) {
      const MultilingualStory* group = ml.of(a.story);
      if (group == nullptr) throw InvariantError("story '" + a.story + "' has no multilingual story");
      a.multilingual_story = group->id;
    }
    result.assignments.push_back(std::move(a));
  }

  RunStats& stats = result.stats;
  for (Language lang : kAllLanguages) {
    const StoryRegistry& reg = registries[index_of(lang)];
    auto& ls = stats.per_language[index_of(lang)];
    ls.replayed_docs = reg.replayed_docs();
    ls.total_docs = reg.total_docs();
    ls.stories = reg.active_story_count();
    stats.replayed_docs += ls.replayed_docs;
    stats.total_docs += ls.total_docs;
    stats.stories += ls.stories;
  }
  stats.replay_rate = stats.total_docs == 0 ? 0.0
                                            : static_cast<double>(stats.replayed_docs) /
                                                  static_cast<double>(stats.total_docs);
  stats.batches = static_cast<std::size_t>(last + 1);
  if (embeddings != nullptr) stats.multilingual_stories = ml.stories().size();
  stats.merge_conflicts = ml.conflicts();
  return result;
}

void write_assignments(std::ostream& out, std::span<const DocAssignment> assignments) {
  for (const auto& a : assignments) {
    json line = {{"id", a.id}, {"story", a.story}};
    if (a.multilingual_story) line["multilingual_story"] = *a.multilingual_story;
    out << line.dump() << '\n';
  }
}

std::vector<DocAssignment> read_assignments(std::istream& in) {
  std::vector<DocAssignment> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const json j = json::parse(line);
      if (!j.is_object() || !j.contains("id") || !j["id"].is_string() || !j.contains("story") ||
          !j["story"].is_string())
        throw ParseError(line_no, "assignment needs string fields 'id' and 'story'");
      DocAssignment a;
      a.id = j["id"].get<std::string>();
      a.story = j["story"].get<std::string>();
      if (j.contains("multilingual_story")) {
        if (!j["multilingual_story"].is_string())
          throw ParseError(line_no, "'multilingual_story' must be a string");
        a.multilingual_story = j["multilingual_story"].get<std::string>();
      }
      out.push_back(std::move(a));
    } catch (const json::exception& e) {
      throw ParseError(line_no, std::string("malformed JSON: ") + e.what());
    }
  }
  return out;
}

std::string stats_json(const RunStats& stats) {
  json j = {{"replayed_docs", stats.replayed_docs},
            {"total_docs", stats.total_docs},
            {"replay_rate", stats.replay_rate},
            {"stories", stats.stories},
            {"batches", stats.batches}};
  if (stats.multilingual_stories) j["multilingual_stories"] = *stats.multilingual_stories;
  json per = json::object();
  for (Language lang : kAllLanguages) {
    const auto& ls = stats.per_language[index_of(lang)];
    per[std::string(to_string(lang))] = {
        {"replayed_docs", ls.replayed_docs}, {"total_docs", ls.total_docs}, {"stories", ls.stories}};
  }
  j["per_language"] = per;
  j["merge_conflicts"] = stats.merge_conflicts;
  return j.dump(2);
}

Clustering story_clustering(std::span<const DocAssignment> assignments) {
  Clustering c;
  for (const auto& a : assignments) c.emplace(a.id, a.story);
  return c;
}

Clustering multilingual_clustering(std::span<const DocAssignment> assignments) {
  Clustering c;
  for (const auto& a : assignments) c.emplace(a.id, a.multilingual_story.value_or(a.story));
  return c;
}

Clustering gold_clustering(std::span<const Document> docs, bool per_language) {
  Clustering c;
  for (const auto& d : docs) {
    if (!d.gold_story) throw ValidationError("document '" + d.id + "' has no gold cluster label");
    c.emplace(d.id, per_language ? *d.gold_story + "@" + std::string(to_string(d.language))
                                 : *d.gold_story);
  }
  return c;
}

std::map<std::string, Language> language_map(std::span<const Document> docs) {
  std::map<std::string, Language> m;
  for (const auto& d : docs) m.emplace(d.id, d.language);
  return m;
}

std::vector<DocAssignment> link_assignments(std::span<const Document> docs,
                                            std::span<const DocAssignment> assignments,
                                            const EmbeddingStore& embeddings,
                                            const RunConfig& cfg) {
  validate(cfg);
  std::unordered_map<std::string, std::string> story_of;
  for (const auto& a : assignments) story_of[a.id] = a.story;

  std::map<std::string, StoryRecord> stories;
  MultilingualRegistry ml;
  const std::vector<Batch> batches = make_batches(docs, cfg.window_seconds());
  for (const Batch& batch : batches) {
    for (const Document* d : batch.documents) {
      auto it = story_of.find(d->id);
      if (it == story_of.end())
        throw ValidationError("no assignment for document '" + d->id + "'");
      auto [sit, inserted] = stories.try_emplace(it->second);
      StoryRecord& s = sit->second;
      if (inserted) {
        s.id = it->second;
        s.language = d->language;
        s.created_batch = batch.index;
      } else if (s.language != d->language) {
        throw ValidationError("story '" + s.id + "' mixes languages");
      }
      s.members.push_back(d->id);
      s.last_active = batch.index;
    }
    StoryViews views;
    for (const auto& [id, s] : stories) views[index_of(s.language)].push_back(&s);
    link_stories(views, ml, embeddings, cfg.crosslink, batch.index);
  }
  StoryViews views;
  for (const auto& [id, s] : stories) views[index_of(s.language)].push_back(&s);
  ml.finalize(views, batches.empty() ? 0 : batches.back().index);

  std::vector<DocAssignment> out;
  out.reserve(docs.size());
  for (const Document& d : docs) {
    const std::string& story = story_of.at(d.id);
    out.push_back({d.id, d.language, story, ml.of(story)->id});
  }
  return out;
}

namespace {

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path + "'");
  out << content;
  if (!out) throw IoError("failed writing '" + path + "'");
}

}  // namespace

PipelineResult run_pipeline(const RunConfig& cfg, std::ostream* log) {
  validate(cfg);
  if (cfg.corpus.empty()) throw ValidationError("no corpus path configured");
  if (cfg.assignments.empty()) throw ValidationError("no assignments output path configured");

  const std::vector<Document> docs = load_corpus(cfg.corpus);
  std::vector<WeightVector> weights;
  if (!cfg.weights.empty()) {
    weights = load_weights(cfg.weights);
  } else if (log != nullptr) {
    *log << "warning: no weights file, using uniform weights\n";
  }
  std::optional<EmbeddingStore> embeddings;
  if (!cfg.embeddings.empty()) embeddings = EmbeddingStore::load(cfg.embeddings);

  PipelineResult result =
      run_stream(docs, weights, embeddings ? &*embeddings : nullptr, cfg, log);

  std::ostringstream assignments;
  write_assignments(assignments, result.assignments);
  write_file(cfg.assignments, assignments.str());
  if (!cfg.stats.empty()) write_file(cfg.stats, stats_json(result.stats) + "\n");
  if (!cfg.report.empty() && !docs.empty()) {
    const auto langs = language_map(docs);
    json j;
    j["monolingual"] = json::parse(to_json(
        report(story_clustering(result.assignments), gold_clustering(docs, true), &langs)));
    if (embeddings) {
      j["crosslingual"] = json::parse(to_json(report(
          multilingual_clustering(result.assignments), gold_clustering(docs, false), &langs)));
    }
    write_file(cfg.report, j.dump(2) + "\n");
  }
  return result;
}

}  // namespace storystream
