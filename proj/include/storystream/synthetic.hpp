#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "storystream/corpus.hpp"
#include "storystream/crosslink.hpp"

namespace storystream {

// Parameters of a planted multilingual story stream. Every story has English
// articles; Spanish and German join with the given probabilities.
struct SyntheticSpec {
  std::size_t stories = 30;
  std::size_t documents = 1000;
  double size_spread = 0.5;          // story sizes vary by +-spread around the mean
  double es_probability = 0.6;
  double de_probability = 0.6;
  double pivot_share = 0.5;          // share of English articles in multilingual stories

  std::size_t vocabulary = 4000;     // token universe, signatures included
  std::size_t signature_tokens = 20; // reserved tokens per story
  std::size_t signature_entities = 5;
  std::size_t entity_vocabulary = 600;
  std::size_t title_tokens = 8;
  std::size_t body_tokens = 80;
  double signature_rate = 0.35;      // chance a body token comes from the signature

  std::size_t days = 10;             // one batch window per day
  double story_hours = 8.0;          // maximum story duration
  double straddle_fraction = 0.1;    // stories placed across a day boundary

  std::size_t dim = 32;
  double embedding_noise = 0.1;      // uniform per-component noise bound

  std::uint64_t seed = 1;
  std::string id_prefix = "d";
  Timestamp start = 1420070400;      // 2015-01-01T00:00:00Z
};

struct SyntheticCorpus {
  std::vector<Document> documents;  // sorted by timestamp, labeled "c<story>"
  EmbeddingStore embeddings;
};

// Deterministic in the spec. Throws ValidationError on invalid counts or a
// vocabulary too small for the signatures.
SyntheticCorpus generate_synthetic(const SyntheticSpec& spec);

}  // namespace storystream
