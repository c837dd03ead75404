#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <unistd.h>
#include <optional>
#include <string>
#include <vector>

#include "storystream/corpus.hpp"
#include "storystream/similarity.hpp"

namespace fixture {

namespace ss = storystream;

// Tokens double as lemmas; entities are the capitalized tokens.
inline ss::Section section(const std::vector<std::string>& tokens) {
  ss::Section s;
  s.tokens = tokens;
  s.lemmas = tokens;
  for (const auto& t : tokens) {
    if (!t.empty() && t[0] >= 'A' && t[0] <= 'Z') s.entities.push_back(t);
  }
  return s;
}

inline ss::Document doc(std::string id, ss::Timestamp ts, ss::Language lang,
                        std::optional<std::string> label, const std::vector<std::string>& title,
                        const std::vector<std::string>& body) {
  ss::Document d;
  d.id = std::move(id);
  d.timestamp = ts;
  d.language = lang;
  d.gold_story = std::move(label);
  d.title = section(title);
  d.body = section(body);
  return d;
}

// Beta spread evenly over all nine slots, summing to 1.
inline ss::WeightVector even_weights(ss::Language lang) {
  ss::WeightVector w;
  w.language = lang;
  w.beta.fill(1.0 / 9.0);
  return w;
}

inline std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    path_ = std::filesystem::temp_directory_path() /
            ("storystream-" + tag + "-" + std::to_string(::getpid()));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  std::string file(const std::string& name) const { return (path_ / name).string(); }
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

}  // namespace fixture
