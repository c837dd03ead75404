#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "storystream/crosslink.hpp"
#include "storystream/stories.hpp"
#include "storystream/topics.hpp"

namespace storystream {

struct RunConfig {
  double window_hours = 24.0;
  double resolution = 1.0;
  double prune_epsilon = 0.0;
  ReplayConfig replay;
  CrosslinkConfig crosslink;
  std::uint64_t seed = 0;
  unsigned workers = 1;

  std::string corpus;
  std::string weights;
  std::string embeddings;   // optional; enables crosslingual linking
  std::string assignments;  // output JSONL
  std::string stats;        // output JSON
  std::string report;       // optional evaluation output JSON

  std::int64_t window_seconds() const;
  TopicParams topic_params() const;
};

// Names of every configuration key, in a stable order.
const std::vector<std::string>& config_keys();

// Flat "key = value" lines; '#' starts a comment. Throws ParseError.
std::map<std::string, std::string> parse_config_text(std::string_view text);

// Throws ValidationError on unknown keys or unparsable values.
void apply_setting(RunConfig& cfg, std::string_view key, std::string_view value);
void apply_settings(RunConfig& cfg, const std::map<std::string, std::string>& settings);
RunConfig load_config(const std::string& path);
std::string to_config_text(const RunConfig& cfg);

// STORYSTREAM_SEED, when set, replaces the configured seed.
void apply_environment(RunConfig& cfg);

// Numeric invariants only; path requirements are checked by each command.
void validate(const RunConfig& cfg);

}  // namespace storystream
