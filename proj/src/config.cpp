#include "storystream/config.hpp"

#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <sstream>

#include "storystream/error.hpp"

namespace storystream {

std::int64_t RunConfig::window_seconds() const {
  return static_cast<std::int64_t>(std::llround(window_hours * 3600.0));
}

TopicParams RunConfig::topic_params() const {
  return TopicParams{resolution, prune_epsilon, workers};
}

namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double to_double(std::string_view key, std::string_view value) {
  const std::string text(value);
  char* end = nullptr;
  const double x = std::strtod(text.c_str(), &end);
  if (text.empty() || end != text.c_str() + text.size() || !std::isfinite(x))
    throw ValidationError("'" + std::string(key) + "' expects a finite number, got '" + text + "'");
  return x;
}

std::int64_t to_int(std::string_view key, std::string_view value) {
  std::int64_t x = 0;
  auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), x);
  if (value.empty() || ec != std::errc() || ptr != value.data() + value.size())
    throw ValidationError("'" + std::string(key) + "' expects an integer, got '" +
                          std::string(value) + "'");
  return x;
}

std::uint64_t to_uint(std::string_view key, std::string_view value) {
  std::uint64_t x = 0;
  auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), x);
  if (value.empty() || ec != std::errc() || ptr != value.data() + value.size())
    throw ValidationError("'" + std::string(key) + "' expects a non-negative integer, got '" +
                          std::string(value) + "'");
  return x;
}

struct Setting {
  std::string key;
  std::function<void(RunConfig&, std::string_view)> set;
  std::function<std::string(const RunConfig&)> get;
};

// Shortest text that parses back to the same double.
std::string number(double x) {
  char buf[32];
  const auto [end, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, end);
}

const std::vector<Setting>& settings() {
  static const std::vector<Setting> table = [] {
    std::vector<Setting> t;
    auto real = [&t](std::string key, double RunConfig::*field) {
      t.push_back({key, [key, field](RunConfig& c, std::string_view v) { c.*field = to_double(key, v); },
                   [field](const RunConfig& c) { return number(c.*field); }});
    };
    auto path = [&t](std::string key, std::string RunConfig::*field) {
      t.push_back({key, [field](RunConfig& c, std::string_view v) { c.*field = std::string(v); },
                   [field](const RunConfig& c) { return c.*field; }});
    };
    real("window_hours", &RunConfig::window_hours);
    real("gamma", &RunConfig::resolution);
    real("prune_epsilon", &RunConfig::prune_epsilon);
    for (Language lang : kAllLanguages) {
      const std::string key = "t1_" + std::string(to_string(lang));
      const std::size_t i = index_of(lang);
      t.push_back({key, [key, i](RunConfig& c, std::string_view v) { c.replay.t1[i] = to_double(key, v); },
                   [i](const RunConfig& c) { return number(c.replay.t1[i]); }});
    }
    t.push_back({"replay_recency",
                 [](RunConfig& c, std::string_view v) { c.replay.recency = to_int("replay_recency", v); },
                 [](const RunConfig& c) { return std::to_string(c.replay.recency); }});
    t.push_back({"t2", [](RunConfig& c, std::string_view v) { c.crosslink.t2 = to_double("t2", v); },
                 [](const RunConfig& c) { return number(c.crosslink.t2); }});
    t.push_back({"max_age",
                 [](RunConfig& c, std::string_view v) { c.crosslink.max_age = to_int("max_age", v); },
                 [](const RunConfig& c) { return std::to_string(c.crosslink.max_age); }});
    t.push_back({"seed", [](RunConfig& c, std::string_view v) { c.seed = to_uint("seed", v); },
                 [](const RunConfig& c) { return std::to_string(c.seed); }});
    t.push_back({"workers",
                 [](RunConfig& c, std::string_view v) {
                   c.workers = static_cast<unsigned>(to_uint("workers", v));
                 },
                 [](const RunConfig& c) { return std::to_string(c.workers); }});
    path("corpus", &RunConfig::corpus);
    path("weights", &RunConfig::weights);
    path("embeddings", &RunConfig::embeddings);
    path("assignments", &RunConfig::assignments);
    path("stats", &RunConfig::stats);
    path("report", &RunConfig::report);
    return t;
  }();
  return table;
}

}  // namespace

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys = [] {
    std::vector<std::string> k;
    for (const auto& s : settings()) k.push_back(s.key);
    return k;
  }();
  return keys;
}

std::map<std::string, std::string> parse_config_text(std::string_view text) {
  std::map<std::string, std::string> out;
  std::size_t line_no = 0;
  while (!text.empty()) {
    ++line_no;
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ParseError(line_no, "expected 'key = value'");
    const std::string key(trim(line.substr(0, eq)));
    std::string_view value = trim(line.substr(eq + 1));
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"')
      value = value.substr(1, value.size() - 2);
    if (key.empty()) throw ParseError(line_no, "empty key");
    out[key] = std::string(value);
  }
  return out;
}

void apply_setting(RunConfig& cfg, std::string_view key, std::string_view value) {
  for (const auto& s : settings()) {
    if (s.key == key) {
      s.set(cfg, value);
      return;
    }
  }
  throw ValidationError("unknown configuration key '" + std::string(key) + "'");
}

void apply_settings(RunConfig& cfg, const std::map<std::string, std::string>& values) {
  for (const auto& [k, v] : values) apply_setting(cfg, k, v);
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  RunConfig cfg;
  apply_settings(cfg, parse_config_text(buf.str()));
  return cfg;
}

std::string to_config_text(const RunConfig& cfg) {
  std::string out;
  for (const auto& s : settings()) {
    const std::string v = s.get(cfg);
    if (v.empty()) continue;
    out += s.key + " = " + v + "\n";
  }
  return out;
}

void apply_environment(RunConfig& cfg) {
  if (const char* seed = std::getenv("STORYSTREAM_SEED"); seed != nullptr && *seed != '\0')
    cfg.seed = to_uint("STORYSTREAM_SEED", seed);
}

void validate(const RunConfig& cfg) {
  if (!(cfg.window_hours > 0.0) || cfg.window_seconds() <= 0)
    throw ValidationError("window_hours must be positive");
  if (!(cfg.resolution > 0.0)) throw ValidationError("gamma must be > 0");
  if (!(cfg.prune_epsilon >= 0.0)) throw ValidationError("prune_epsilon must be >= 0");
  if (cfg.workers < 1) throw ValidationError("workers must be >= 1");
  validate(cfg.replay);
  validate(cfg.crosslink);
}

}  // namespace storystream
