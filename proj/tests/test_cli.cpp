#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "fixtures.hpp"
#include "storystream/config.hpp"
#include "storystream/error.hpp"
#include "storystream/pipeline.hpp"
#include "storystream/synthetic.hpp"
#include "storystream/tuning.hpp"

using namespace storystream;

namespace {

SyntheticSpec small_spec(std::uint64_t seed = 1) {
  SyntheticSpec spec;
  spec.stories = 8;
  spec.documents = 240;
  spec.days = 4;
  spec.seed = seed;
  return spec;
}

std::string corpus_bytes(const SyntheticCorpus& c) {
  std::ostringstream out;
  write_corpus(out, c.documents);
  std::vector<std::string> ids;
  for (const auto& d : c.documents) ids.push_back(d.id);
  c.embeddings.write(out, ids);
  return out.str();
}

std::vector<WeightVector> trained(const std::vector<Document>& docs) {
  std::vector<WeightVector> out;
  for (const auto& t : train_weights(docs, {})) out.push_back(t.weights);
  return out;
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("run configuration defaults") {
  const RunConfig cfg;
  CHECK(cfg.window_hours == 24.0);
  CHECK(cfg.window_seconds() == 86400);
  CHECK(cfg.resolution == 1.0);
  CHECK(cfg.prune_epsilon == 0.0);
  CHECK(cfg.replay.threshold(Language::kEn) == 0.43);
  CHECK(cfg.replay.threshold(Language::kEs) == 0.52);
  CHECK(cfg.replay.threshold(Language::kDe) == 0.61);
  CHECK(cfg.replay.recency == 1);
  CHECK(cfg.crosslink.t2 == 0.22);
  CHECK(cfg.crosslink.max_age == 4);
  CHECK_NOTHROW(validate(cfg));
}

TEST_CASE("config text parsing") {
  const auto kv = parse_config_text(
      "# a comment\n"
      "\n"
      "gamma = 0.8   # trailing comment\n"
      "corpus = \"data/test.jsonl\"\n"
      "t1_es=0.5\n");
  CHECK(kv.size() == 3);
  CHECK(kv.at("gamma") == "0.8");
  CHECK(kv.at("corpus") == "data/test.jsonl");
  CHECK(kv.at("t1_es") == "0.5");
  try {
    parse_config_text("gamma = 1\nnot a setting\n");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 2);
  }
}

TEST_CASE("settings apply by key and reject nonsense") {
  RunConfig cfg;
  apply_settings(cfg, {{"gamma", "0.7"}, {"t1_de", "0.3"}, {"max_age", "2"}, {"seed", "99"},
                       {"window_hours", "12"}, {"weights", "w.json"}});
  CHECK(cfg.resolution == 0.7);
  CHECK(cfg.replay.threshold(Language::kDe) == 0.3);
  CHECK(cfg.crosslink.max_age == 2);
  CHECK(cfg.seed == 99);
  CHECK(cfg.window_seconds() == 12 * 3600);
  CHECK(cfg.weights == "w.json");
  CHECK_THROWS_AS(apply_setting(cfg, "colour", "blue"), ValidationError);
  CHECK_THROWS_AS(apply_setting(cfg, "gamma", "fast"), ValidationError);
  CHECK_THROWS_AS(apply_setting(cfg, "gamma", "nan"), ValidationError);
  CHECK_THROWS_AS(apply_setting(cfg, "seed", "-3"), ValidationError);
  CHECK_THROWS_AS(apply_setting(cfg, "max_age", "2.5"), ValidationError);
}

TEST_CASE("every key round-trips through the config text") {
  RunConfig cfg;
  cfg.window_hours = 6.5;
  cfg.resolution = 1.25;
  cfg.prune_epsilon = 0.01;
  cfg.replay.t1 = {0.1, 0.2, 0.3};
  cfg.replay.recency = 3;
  cfg.crosslink.t2 = 0.4;
  cfg.crosslink.max_age = 7;
  cfg.seed = 12345678901234ull;
  cfg.workers = 3;
  cfg.corpus = "c.jsonl";
  cfg.weights = "w.json";
  cfg.embeddings = "e.jsonl";
  cfg.assignments = "a.jsonl";
  cfg.stats = "s.json";
  cfg.report = "r.json";
  const std::string text = to_config_text(cfg);
  for (const auto& key : config_keys()) CHECK(text.find(key + " = ") != std::string::npos);
  RunConfig back;
  apply_settings(back, parse_config_text(text));
  CHECK(to_config_text(back) == text);
  CHECK(back.seed == cfg.seed);
  CHECK(back.replay.t1 == cfg.replay.t1);
  CHECK(back.window_hours == cfg.window_hours);

  fixture::TempDir dir("config");
  std::ofstream(dir.file("run.conf")) << text;
  CHECK(to_config_text(load_config(dir.file("run.conf"))) == text);
  CHECK_THROWS_AS(load_config(dir.file("absent.conf")), IoError);
}

TEST_CASE("the seed environment variable overrides the config") {
  RunConfig cfg;
  cfg.seed = 5;
  ::setenv("STORYSTREAM_SEED", "77", 1);
  apply_environment(cfg);
  CHECK(cfg.seed == 77);
  ::setenv("STORYSTREAM_SEED", "x", 1);
  CHECK_THROWS_AS(apply_environment(cfg), ValidationError);
  ::unsetenv("STORYSTREAM_SEED");
  cfg.seed = 5;
  apply_environment(cfg);
  CHECK(cfg.seed == 5);
}

TEST_CASE("numeric invariants are validated") {
  RunConfig cfg;
  cfg.window_hours = 0.0;
  CHECK_THROWS_AS(validate(cfg), ValidationError);
  cfg = RunConfig{};
  cfg.resolution = 0.0;
  CHECK_THROWS_AS(validate(cfg), ValidationError);
  cfg = RunConfig{};
  cfg.prune_epsilon = -1.0;
  CHECK_THROWS_AS(validate(cfg), ValidationError);
  cfg = RunConfig{};
  cfg.crosslink.t2 = 3.0;
  CHECK_THROWS_AS(validate(cfg), ValidationError);
  cfg = RunConfig{};
  cfg.replay.recency = 0;
  CHECK_THROWS_AS(validate(cfg), ValidationError);
  cfg = RunConfig{};
  cfg.workers = 0;
  CHECK_THROWS_AS(validate(cfg), ValidationError);
}

TEST_CASE("a one-story synthetic corpus shares its signature") {
  SyntheticSpec spec;
  spec.stories = 1;
  spec.documents = 3;
  spec.days = 1;
  spec.es_probability = 0.0;
  spec.de_probability = 0.0;
  const auto c = generate_synthetic(spec);
  REQUIRE(c.documents.size() == 3);
  std::set<std::string> common;
  for (const auto& t : c.documents[0].body.tokens) common.insert(t);
  for (std::size_t i = 1; i < 3; ++i) {
    std::set<std::string> mine(c.documents[i].body.tokens.begin(), c.documents[i].body.tokens.end());
    mine.insert(c.documents[i].title.tokens.begin(), c.documents[i].title.tokens.end());
    std::set<std::string> kept;
    for (const auto& t : common) {
      if (mine.count(t)) kept.insert(t);
    }
    common = kept;
  }
  CHECK_FALSE(common.empty());
  for (const auto& d : c.documents) CHECK(d.gold_story == c.documents[0].gold_story);
  CHECK(c.documents[0].language == Language::kEn);
}

TEST_CASE("synthetic corpora are byte-identical under a fixed seed") {
  const auto a = corpus_bytes(generate_synthetic(small_spec(3)));
  const auto b = corpus_bytes(generate_synthetic(small_spec(3)));
  const auto c = corpus_bytes(generate_synthetic(small_spec(4)));
  CHECK(a == b);
  CHECK(a != c);
}

TEST_CASE("the default synthetic stream has the planted shape") {
  const auto c = generate_synthetic(SyntheticSpec{});
  CHECK(c.documents.size() == 1000);
  std::map<std::string, std::set<Language>> langs;
  for (const auto& d : c.documents) {
    REQUIRE(d.gold_story.has_value());
    langs[*d.gold_story].insert(d.language);
    REQUIRE(c.embeddings.find(d.id) != nullptr);
    CHECK(c.embeddings.at(d.id).size() == 32);
  }
  CHECK(langs.size() == 30);
  std::set<Language> all;
  for (const auto& [story, ls] : langs) {
    CHECK(ls.count(Language::kEn));
    all.insert(ls.begin(), ls.end());
  }
  CHECK(all.size() == 3);
  for (std::size_t i = 1; i < c.documents.size(); ++i) {
    CHECK(c.documents[i - 1].timestamp <= c.documents[i].timestamp);
  }
  const auto gold = gold_clustering(c.documents, true);
  CHECK(report(gold, gold).overall().standard.f1 == 1.0);
  const auto cross = gold_clustering(c.documents, false);
  CHECK(report(cross, cross).overall().bcubed.f1 == 1.0);
}

TEST_CASE("invalid synthetic specs are rejected") {
  SyntheticSpec spec;
  spec.vocabulary = 100;
  CHECK_THROWS_AS(generate_synthetic(spec), ValidationError);
  spec = SyntheticSpec{};
  spec.stories = 0;
  CHECK_THROWS_AS(generate_synthetic(spec), ValidationError);
  spec = SyntheticSpec{};
  spec.documents = 10;
  spec.stories = 30;
  CHECK_THROWS_AS(generate_synthetic(spec), ValidationError);
}

TEST_CASE("gold clusterings key labels by language when asked") {
  const std::vector<Document> docs = {
      fixture::doc("a", 0, Language::kEn, "s", {}, {}),
      fixture::doc("b", 0, Language::kEs, "s", {}, {}),
  };
  CHECK(gold_clustering(docs, true).at("a") == "s@en");
  CHECK(gold_clustering(docs, true).at("b") == "s@es");
  CHECK(gold_clustering(docs, false).at("b") == "s");
  auto unlabeled = docs;
  unlabeled[0].gold_story.reset();
  CHECK_THROWS_AS(gold_clustering(unlabeled, false), ValidationError);
}

TEST_CASE("assignments round-trip and fall back to story ids") {
  const std::vector<DocAssignment> in = {{"a", Language::kEn, "s-en-0-0", std::string("m-0-0")},
                                         {"b", Language::kDe, "s-de-1-0", std::nullopt}};
  std::ostringstream out;
  write_assignments(out, in);
  CHECK(out.str() ==
        "{\"id\":\"a\",\"multilingual_story\":\"m-0-0\",\"story\":\"s-en-0-0\"}\n"
        "{\"id\":\"b\",\"story\":\"s-de-1-0\"}\n");
  std::istringstream back(out.str());
  const auto read = read_assignments(back);
  REQUIRE(read.size() == 2);
  CHECK(read[0].multilingual_story == "m-0-0");
  CHECK_FALSE(read[1].multilingual_story.has_value());
  CHECK(multilingual_clustering(in).at("b") == "s-de-1-0");
  CHECK(story_clustering(in).at("a") == "s-en-0-0");
  std::istringstream bad("{\"id\":\"a\"}\n");
  CHECK_THROWS_AS(read_assignments(bad), ParseError);
}

TEST_CASE("missing weights fall back to uniform") {
  std::vector<WeightVector> ws = {WeightVector::uniform(Language::kEs)};
  ws[0].beta[0] = 5.0;
  CHECK(weights_for(ws, Language::kEs).beta[0] == 5.0);
  CHECK(weights_for(ws, Language::kDe).beta == WeightVector::uniform(Language::kDe).beta);
}

TEST_CASE("the stream assigns every document, deterministically") {
  const auto c = generate_synthetic(small_spec());
  const auto weights = trained(generate_synthetic(small_spec(2)).documents);
  RunConfig cfg;
  const auto a = run_stream(c.documents, weights, &c.embeddings, cfg);
  const auto b = run_stream(c.documents, weights, &c.embeddings, cfg);
  REQUIRE(a.assignments.size() == c.documents.size());
  std::ostringstream sa, sb;
  write_assignments(sa, a.assignments);
  write_assignments(sb, b.assignments);
  CHECK(sa.str() == sb.str());
  CHECK(stats_json(a.stats) == stats_json(b.stats));
  for (std::size_t i = 0; i < c.documents.size(); ++i) {
    CHECK(a.assignments[i].id == c.documents[i].id);
    CHECK(a.assignments[i].multilingual_story.has_value());
    CHECK(a.assignments[i].story.rfind("s-" + std::string(to_string(c.documents[i].language)), 0) == 0);
  }
  CHECK(a.stats.total_docs == c.documents.size());
  CHECK(a.stats.batches == 4);
  REQUIRE(a.stats.multilingual_stories.has_value());
  CHECK(*a.stats.multilingual_stories <= a.stats.stories);
  std::set<std::string> stories;
  for (const auto& x : a.assignments) stories.insert(x.story);
  CHECK(stories.size() == a.stats.stories);

  const auto mono = report(story_clustering(a.assignments), gold_clustering(c.documents, true));
  const auto cross = report(multilingual_clustering(a.assignments), gold_clustering(c.documents, false));
  CHECK(mono.overall().standard.f1 > 0.9);
  CHECK(cross.overall().standard.f1 > 0.9);

  // Without embeddings no multilingual ids are produced.
  const auto plain = run_stream(c.documents, weights, nullptr, cfg);
  CHECK_FALSE(plain.assignments[0].multilingual_story.has_value());
  CHECK_FALSE(plain.stats.multilingual_stories.has_value());
  CHECK(plain.assignments[5].story == a.assignments[5].story);

  // Worker threads do not change the result.
  cfg.workers = 4;
  const auto threaded = run_stream(c.documents, weights, &c.embeddings, cfg);
  std::ostringstream st;
  write_assignments(st, threaded.assignments);
  CHECK(st.str() == sa.str());
}

TEST_CASE("stats JSON carries the documented fields") {
  const auto c = generate_synthetic(small_spec());
  const auto r = run_stream(c.documents, {}, &c.embeddings, RunConfig{});
  const auto j = nlohmann::json::parse(stats_json(r.stats));
  for (const char* key : {"replayed_docs", "total_docs", "replay_rate", "stories"}) {
    CHECK(j.contains(key));
  }
  CHECK(j["total_docs"] == c.documents.size());
  CHECK(j["replay_rate"].get<double>() ==
        doctest::Approx(static_cast<double>(r.stats.replayed_docs) / c.documents.size()));
}

TEST_CASE("standalone linking over finished assignments") {
  const auto c = generate_synthetic(small_spec());
  const auto weights = trained(generate_synthetic(small_spec(2)).documents);
  const auto mono = run_stream(c.documents, weights, nullptr, RunConfig{});
  const auto linked = link_assignments(c.documents, mono.assignments, c.embeddings, RunConfig{});
  REQUIRE(linked.size() == mono.assignments.size());
  for (std::size_t i = 0; i < linked.size(); ++i) {
    CHECK(linked[i].story == mono.assignments[i].story);
    CHECK(linked[i].multilingual_story.has_value());
  }
  const auto cross = report(multilingual_clustering(linked), gold_clustering(c.documents, false));
  CHECK(cross.overall().standard.f1 > 0.9);
  auto missing = mono.assignments;
  missing.pop_back();
  CHECK_THROWS_AS(link_assignments(c.documents, missing, c.embeddings, RunConfig{}), ValidationError);
}

TEST_CASE("run_pipeline writes outputs and handles an empty corpus") {
  fixture::TempDir dir("pipeline");
  const auto c = generate_synthetic(small_spec());
  {
    std::ofstream out(dir.file("corpus.jsonl"));
    write_corpus(out, c.documents);
    std::ofstream emb(dir.file("emb.jsonl"));
    std::vector<std::string> ids;
    for (const auto& d : c.documents) ids.push_back(d.id);
    c.embeddings.write(emb, ids);
    std::ofstream(dir.file("empty.jsonl"));
  }
  RunConfig cfg;
  cfg.corpus = dir.file("corpus.jsonl");
  cfg.embeddings = dir.file("emb.jsonl");
  cfg.assignments = dir.file("out.jsonl");
  cfg.stats = dir.file("stats.json");
  cfg.report = dir.file("report.json");
  const auto result = run_pipeline(cfg);
  std::ifstream written(cfg.assignments);
  CHECK(read_assignments(written).size() == c.documents.size());
  const auto rep = nlohmann::json::parse(fixture::slurp(cfg.report));
  CHECK(rep.contains("monolingual"));
  CHECK(rep.contains("crosslingual"));
  CHECK(nlohmann::json::parse(fixture::slurp(cfg.stats))["stories"] == result.stats.stories);

  cfg.corpus = dir.file("empty.jsonl");
  cfg.embeddings.clear();
  const auto empty = run_pipeline(cfg);
  CHECK(empty.assignments.empty());
  CHECK(empty.stats.stories == 0);
  CHECK(fixture::slurp(cfg.assignments).empty());

  cfg.corpus = dir.file("nope.jsonl");
  CHECK_THROWS_AS(run_pipeline(cfg), IoError);
  cfg.corpus = dir.file("corpus.jsonl");
  cfg.weights = dir.file("nope.json");
  CHECK_THROWS_AS(run_pipeline(cfg), IoError);
  cfg.weights.clear();
  cfg.resolution = -1.0;
  CHECK_THROWS_AS(run_pipeline(cfg), ValidationError);
}

TEST_CASE("trained weights are unit L1 per language") {
  const auto docs = generate_synthetic(small_spec(2)).documents;
  const auto t = train_weights(docs, {});
  REQUIRE(t.size() == 3);
  for (const auto& x : t) {
    double sum = 0.0;
    for (double b : x.weights.beta) sum += std::abs(b);
    CHECK(sum == doctest::Approx(1.0));
    CHECK(x.pairs > 0);
  }
  TrainingOptions raw;
  raw.unit_scale = false;
  raw.language = Language::kDe;
  const auto r = train_weights(docs, raw);
  REQUIRE(r.size() == 1);
  CHECK(r[0].weights.language == Language::kDe);
  double sum = 0.0;
  for (double b : r[0].weights.beta) sum += std::abs(b);
  for (std::size_t k = 0; k < kSlotCount; ++k) {
    CHECK(t[2].weights.beta[k] == doctest::Approx(r[0].weights.beta[k] / sum));
  }
}

TEST_CASE("grid preference: objective, then fewer clusters, then lower T1") {
  GridRow a, b;
  a.objective = 0.9;
  b.objective = 0.8;
  CHECK(better(a, b));
  CHECK_FALSE(better(b, a));
  b.objective = 0.9;
  a.clusters = 10;
  b.clusters = 12;
  CHECK(better(a, b));
  b.clusters = 10;
  a.t1 = 0.3;
  b.t1 = 0.4;
  CHECK(better(a, b));
  CHECK_FALSE(better(b, a));
}

TEST_CASE("grid search over T1 and resolution") {
  SyntheticSpec spec = small_spec(6);
  spec.documents = 300;
  spec.stories = 10;
  const auto dev = generate_synthetic(spec);
  const auto weights = trained(generate_synthetic(small_spec(2)).documents);

  SUBCASE("single point") {
    ParameterGrid grid{{0.43}, {1.0}, {}, {}};
    const auto r = grid_search(dev.documents, weights, nullptr, RunConfig{}, grid);
    REQUIRE(r.table.size() == 1);
    CHECK(r.best_index == 0);
    CHECK(r.best.replay.threshold(Language::kEn) == 0.43);
    CHECK(r.table[0].objective ==
          doctest::Approx((r.table[0].standard.f1 + r.table[0].bcubed.f1) / 2.0));
  }
  SUBCASE("three by three, argmax reproduced from the table") {
    ParameterGrid grid{{0.2, 0.43, 5.0}, {0.05, 1.0, 3.0}, {}, {}};
    const auto r = grid_search(dev.documents, weights, nullptr, RunConfig{}, grid);
    REQUIRE(r.table.size() == 9);
    std::size_t best = 0;
    for (std::size_t i = 0; i < r.table.size(); ++i) {
      const auto& row = r.table[i];
      CHECK(row.objective == (row.standard.f1 + row.bcubed.f1) / 2.0);
      if (better(row, r.table[best])) best = i;
    }
    CHECK(r.best_index == best);
    CHECK(r.best.resolution == r.table[best].resolution);
    CHECK(r.best.replay.threshold(Language::kEn) == r.table[best].t1);
    // Index 1 (T1 0.2, resolution 1.0) dominates index 7 (T1 5.0 never replays).
    CHECK(r.table[1].objective > r.table[7].objective);
    const auto tsv = score_table(r);
    CHECK(std::count(tsv.begin(), tsv.end(), '\n') == 10);
  }
  SUBCASE("crosslingual grid and single language") {
    ParameterGrid grid{{0.43}, {1.0}, {0.1, 0.22}, {}};
    const auto r = grid_search(dev.documents, weights, &dev.embeddings, RunConfig{}, grid);
    CHECK(r.table.size() == 2);
    CHECK(r.table[0].t2 == 0.1);
    CHECK_THROWS_AS(grid_search(dev.documents, weights, nullptr, RunConfig{}, grid), ValidationError);
    ParameterGrid es{{0.3, 0.52}, {1.0}, {}, Language::kEs};
    const auto re = grid_search(dev.documents, weights, nullptr, RunConfig{}, es);
    CHECK(re.table.size() == 2);
    CHECK(re.best.replay.threshold(Language::kEs) == re.table[re.best_index].t1);
  }
  SUBCASE("unusable inputs") {
    auto unlabeled = dev.documents;
    unlabeled[3].gold_story.reset();
    ParameterGrid grid{{0.43}, {1.0}, {}, {}};
    CHECK_THROWS_AS(grid_search(unlabeled, weights, nullptr, RunConfig{}, grid), ValidationError);
    ParameterGrid empty{{}, {1.0}, {}, {}};
    CHECK_THROWS_AS(grid_search(dev.documents, weights, nullptr, RunConfig{}, empty), ValidationError);
  }
}

}  // TEST_SUITE
