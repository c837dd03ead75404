// storystream: command-line entry point for training, tuning, streaming,
// linking and evaluation.

#include <cmath>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "storystream/config.hpp"
#include "storystream/corpus.hpp"
#include "storystream/error.hpp"
#include "storystream/metrics.hpp"
#include "storystream/pipeline.hpp"
#include "storystream/similarity.hpp"
#include "storystream/synthetic.hpp"
#include "storystream/tuning.hpp"

namespace ss = storystream;

namespace {

std::vector<double> parse_list(const std::string& text, const std::string& what) {
  std::vector<double> out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    char* end = nullptr;
    const double x = std::strtod(item.c_str(), &end);
    if (item.empty() || *end != '\0' || !std::isfinite(x))
      throw ss::ValidationError("bad value '" + item + "' in " + what);
    out.push_back(x);
  }
  return out;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ss::IoError("cannot write '" + path + "'");
  out << text;
}

// Config file, then STORYSTREAM_SEED, then explicit flags.
struct ConfigOptions {
  std::string config_path;
  std::map<std::string, std::string> flags;

  void attach(CLI::App* cmd) {
    cmd->add_option("--config", config_path, "key = value configuration file");
    for (const auto& key : ss::config_keys()) cmd->add_option("--" + key, flags[key]);
  }

  ss::RunConfig resolve() const {
    ss::RunConfig cfg = config_path.empty() ? ss::RunConfig{} : ss::load_config(config_path);
    ss::apply_environment(cfg);
    for (const auto& [k, v] : flags) {
      if (!v.empty()) ss::apply_setting(cfg, k, v);
    }
    ss::validate(cfg);
    return cfg;
  }
};

int cmd_run(const ConfigOptions& opts, bool verbose) {
  const ss::RunConfig cfg = opts.resolve();
  const auto result = ss::run_pipeline(cfg, verbose ? &std::cerr : nullptr);
  std::cerr << "wrote " << result.assignments.size() << " assignments, "
            << result.stats.stories << " stories, replay rate " << result.stats.replay_rate << "\n";
  return 0;
}

struct TrainOptions {
  std::string corpus, output, lang;
  double window_hours = 24.0;
  double negative_ratio = 1.0;
  double learning_rate = 1.0;
  int max_iters = 5000;
  double tolerance = 1e-9;
  std::uint64_t seed = 0;
  bool raw = false;
};

int cmd_train(const TrainOptions& o) {
  const auto docs = ss::load_corpus(o.corpus);
  ss::TrainingOptions opts;
  opts.window_seconds = static_cast<std::int64_t>(std::llround(o.window_hours * 3600.0));
  opts.negative_ratio = o.negative_ratio;
  opts.seed = o.seed;
  opts.fit = {o.learning_rate, o.max_iters, o.tolerance};
  opts.unit_scale = !o.raw;
  if (!o.lang.empty()) opts.language = ss::parse_language(o.lang);
  std::vector<ss::WeightVector> out;
  for (const auto& t : ss::train_weights(docs, opts)) {
    std::cerr << ss::to_string(t.weights.language) << ": " << t.pairs << " pairs, "
              << t.iterations << " iterations, loss " << t.final_loss << "\n";
    out.push_back(t.weights);
  }
  ss::save_weights(o.output, out);
  return 0;
}

struct TuneOptions {
  std::string t1 = "0.3,0.4,0.5,0.6", gamma = "1.0", t2, lang, table, best;
};

int cmd_tune(const ConfigOptions& opts, const TuneOptions& o) {
  const ss::RunConfig base = opts.resolve();
  if (base.corpus.empty()) throw ss::ValidationError("tune needs --corpus (the dev corpus)");
  const auto docs = ss::load_corpus(base.corpus);
  std::vector<ss::WeightVector> weights;
  if (!base.weights.empty()) weights = ss::load_weights(base.weights);
  std::optional<ss::EmbeddingStore> embeddings;
  if (!base.embeddings.empty()) embeddings = ss::EmbeddingStore::load(base.embeddings);

  ss::ParameterGrid grid;
  grid.t1 = parse_list(o.t1, "--t1-grid");
  grid.resolution = parse_list(o.gamma, "--gamma-grid");
  if (!o.t2.empty()) grid.t2 = parse_list(o.t2, "--t2-grid");
  if (!o.lang.empty()) grid.language = ss::parse_language(o.lang);

  const auto result =
      ss::grid_search(docs, weights, embeddings ? &*embeddings : nullptr, base, grid);
  const std::string table = ss::score_table(result);
  if (o.table.empty()) {
    std::cout << table;
  } else {
    write_text(o.table, table);
  }
  if (!o.best.empty()) write_text(o.best, ss::to_config_text(result.best));
  const auto& row = result.table[result.best_index];
  std::cerr << "best: t1=" << row.t1 << " gamma=" << row.resolution
            << " objective=" << row.objective << "\n";
  return 0;
}

int cmd_link(const ConfigOptions& opts, const std::string& input, const std::string& output) {
  const ss::RunConfig cfg = opts.resolve();
  if (cfg.corpus.empty() || cfg.embeddings.empty() || input.empty() || output.empty())
    throw ss::ValidationError("link needs --corpus, --embeddings, --input and --output");
  const auto docs = ss::load_corpus(cfg.corpus);
  std::ifstream in(input);
  if (!in) throw ss::IoError("cannot open assignments '" + input + "'");
  const auto assignments = ss::read_assignments(in);
  const auto store = ss::EmbeddingStore::load(cfg.embeddings);
  const auto linked = ss::link_assignments(docs, assignments, store, cfg);
  std::ostringstream out;
  ss::write_assignments(out, linked);
  write_text(output, out.str());
  return 0;
}

int cmd_eval(const std::string& corpus, const std::string& input, const std::string& level,
             const std::string& output) {
  const auto docs = ss::load_corpus(corpus);
  std::ifstream in(input);
  if (!in) throw ss::IoError("cannot open assignments '" + input + "'");
  const auto assignments = ss::read_assignments(in);
  const bool cross = level == "cross";
  if (!cross && level != "mono") throw ss::ValidationError("--level must be mono or cross");
  const auto langs = ss::language_map(docs);
  const auto rep = ss::report(
      cross ? ss::multilingual_clustering(assignments) : ss::story_clustering(assignments),
      ss::gold_clustering(docs, !cross), &langs);
  std::cout << ss::to_table(rep);
  if (!output.empty()) write_text(output, ss::to_json(rep) + "\n");
  return 0;
}

int cmd_synth(const ss::SyntheticSpec& spec, const std::string& corpus_out,
              const std::string& embeddings_out) {
  const auto synth = ss::generate_synthetic(spec);
  std::ostringstream corpus;
  ss::write_corpus(corpus, synth.documents);
  write_text(corpus_out, corpus.str());
  if (!embeddings_out.empty()) {
    std::vector<std::string> ids;
    for (const auto& d : synth.documents) ids.push_back(d.id);
    std::ostringstream emb;
    synth.embeddings.write(emb, ids);
    write_text(embeddings_out, emb.str());
  }
  return 0;
}

// Corpus statistics per language: documents, words, clusters, cluster sizes.
int cmd_stats(const std::string& corpus) {
  const auto docs = ss::load_corpus(corpus);
  auto mean_std = [](const std::vector<double>& xs) {
    double mean = 0.0, var = 0.0;
    for (double x : xs) mean += x;
    mean /= xs.empty() ? 1.0 : static_cast<double>(xs.size());
    for (double x : xs) var += (x - mean) * (x - mean);
    var /= xs.empty() ? 1.0 : static_cast<double>(xs.size());
    return std::pair{mean, std::sqrt(var)};
  };
  nlohmann::json out = nlohmann::json::array();
  auto row = [&](const std::string& name, auto keep) {
    std::vector<double> words;
    std::map<std::string, double> clusters;
    for (const auto& d : docs) {
      if (!keep(d)) continue;
      words.push_back(static_cast<double>(d.title.tokens.size() + d.body.tokens.size()));
      if (d.gold_story) clusters[*d.gold_story] += 1.0;
    }
    std::vector<double> sizes;
    for (const auto& [c, n] : clusters) sizes.push_back(n);
    const auto [wm, ws] = mean_std(words);
    const auto [cm, cs] = mean_std(sizes);
    out.push_back({{"language", name}, {"documents", words.size()}, {"avg_words", wm},
                   {"std_words", ws}, {"clusters", clusters.size()}, {"avg_cluster_size", cm},
                   {"std_cluster_size", cs}});
  };
  for (ss::Language lang : ss::kAllLanguages)
    row(std::string(ss::to_string(lang)), [lang](const ss::Document& d) { return d.language == lang; });
  row("all", [](const ss::Document&) { return true; });
  std::cout << out.dump(2) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"storystream: multilingual news stream clustering"};
  app.require_subcommand(1);

  ConfigOptions run_opts, tune_opts, link_opts;
  bool verbose = false;
  auto* run = app.add_subcommand("run", "cluster a corpus into stories");
  run_opts.attach(run);
  run->add_flag("-v,--verbose", verbose, "log per-batch progress");

  TrainOptions train;
  auto* tw = app.add_subcommand("train-weights", "fit per-language similarity weights");
  tw->add_option("--corpus", train.corpus, "labeled training corpus")->required();
  tw->add_option("--output", train.output, "weights JSON output")->required();
  tw->add_option("--lang", train.lang, "train one language only");
  tw->add_option("--window_hours", train.window_hours);
  tw->add_option("--negative_ratio", train.negative_ratio);
  tw->add_option("--learning_rate", train.learning_rate);
  tw->add_option("--max_iters", train.max_iters);
  tw->add_option("--tolerance", train.tolerance);
  tw->add_option("--seed", train.seed);
  tw->add_flag("--raw", train.raw, "keep raw coefficients instead of unit L1 scale");

  TuneOptions tune;
  auto* tn = app.add_subcommand("tune", "grid search T1/gamma(/T2) on a dev corpus");
  tune_opts.attach(tn);
  tn->add_option("--t1-grid", tune.t1, "comma-separated T1 values");
  tn->add_option("--gamma-grid", tune.gamma, "comma-separated resolution values");
  tn->add_option("--t2-grid", tune.t2, "comma-separated T2 values (crosslingual objective)");
  tn->add_option("--lang", tune.lang, "tune one language's T1 on its documents only");
  tn->add_option("--table", tune.table, "score table output (TSV)");
  tn->add_option("--best", tune.best, "best configuration output");

  std::string link_in, link_out;
  auto* ln = app.add_subcommand("link", "crosslingually link a monolingual assignment file");
  link_opts.attach(ln);
  ln->add_option("--input", link_in, "monolingual assignments JSONL")->required();
  ln->add_option("--output", link_out, "linked assignments JSONL")->required();

  std::string eval_corpus, eval_in, eval_level = "mono", eval_out;
  auto* ev = app.add_subcommand("eval", "score assignments against gold labels");
  ev->add_option("--corpus", eval_corpus, "labeled corpus")->required();
  ev->add_option("--input", eval_in, "assignments JSONL")->required();
  ev->add_option("--level", eval_level, "mono or cross");
  ev->add_option("--output", eval_out, "report JSON output");

  ss::SyntheticSpec spec;
  std::string synth_corpus, synth_emb;
  auto* sy = app.add_subcommand("synth", "generate a planted synthetic stream");
  sy->add_option("--output", synth_corpus, "corpus JSONL output")->required();
  sy->add_option("--embeddings", synth_emb, "embedding JSONL output");
  sy->add_option("--stories", spec.stories);
  sy->add_option("--documents", spec.documents);
  sy->add_option("--days", spec.days);
  sy->add_option("--dim", spec.dim);
  sy->add_option("--vocabulary", spec.vocabulary);
  sy->add_option("--signature_tokens", spec.signature_tokens);
  sy->add_option("--signature_rate", spec.signature_rate);
  sy->add_option("--story_hours", spec.story_hours);
  sy->add_option("--straddle_fraction", spec.straddle_fraction);
  sy->add_option("--embedding_noise", spec.embedding_noise);
  sy->add_option("--es_probability", spec.es_probability);
  sy->add_option("--de_probability", spec.de_probability);
  sy->add_option("--seed", spec.seed);
  sy->add_option("--id_prefix", spec.id_prefix);

  std::string stats_corpus;
  auto* st = app.add_subcommand("stats", "per-language corpus statistics");
  st->add_option("--corpus", stats_corpus, "corpus JSONL")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return static_cast<int>(ss::ErrorKind::kValidation);
  }

  try {
    if (*run) return cmd_run(run_opts, verbose);
    if (*tw) return cmd_train(train);
    if (*tn) return cmd_tune(tune_opts, tune);
    if (*ln) return cmd_link(link_opts, link_in, link_out);
    if (*ev) return cmd_eval(eval_corpus, eval_in, eval_level, eval_out);
    if (*sy) return cmd_synth(spec, synth_corpus, synth_emb);
    if (*st) return cmd_stats(stats_corpus);
  } catch (const ss::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return static_cast<int>(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return static_cast<int>(ss::ErrorKind::kInvariant);
  }
  return 0;
}
