#include "storystream/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "storystream/error.hpp"
#include "storystream/random.hpp"

namespace storystream {

namespace {

void check(const SyntheticSpec& s) {
  if (s.stories == 0 || s.documents == 0 || s.days == 0 || s.dim == 0)
    throw ValidationError("synthetic spec counts must be positive");
  if (s.documents < s.stories) throw ValidationError("need at least one document per story");
  if (s.signature_tokens == 0 || s.title_tokens == 0 || s.body_tokens == 0)
    throw ValidationError("synthetic token counts must be positive");
  if (s.vocabulary <= s.stories * s.signature_tokens)
    throw ValidationError("vocabulary of " + std::to_string(s.vocabulary) +
                          " tokens cannot hold " + std::to_string(s.stories) + " signatures of " +
                          std::to_string(s.signature_tokens) + " plus noise");
  if (s.entity_vocabulary <= s.stories * s.signature_entities)
    throw ValidationError("entity vocabulary too small for the signatures");
  auto unit = [](double x) { return x >= 0.0 && x <= 1.0; };
  if (!unit(s.size_spread) || !unit(s.es_probability) || !unit(s.de_probability) ||
      !unit(s.pivot_share) || !unit(s.signature_rate) || !unit(s.straddle_fraction))
    throw ValidationError("synthetic probabilities must lie in [0, 1]");
  if (!(s.story_hours > 0.0) || s.story_hours > 24.0)
    throw ValidationError("story_hours must lie in (0, 24]");
  if (!(s.embedding_noise >= 0.0)) throw ValidationError("embedding noise must be >= 0");
}

// Story sizes summing exactly to the document count.
std::vector<std::size_t> story_sizes(const SyntheticSpec& s, Rng& rng) {
  const double mean = static_cast<double>(s.documents) / static_cast<double>(s.stories);
  std::vector<double> raw(s.stories);
  for (auto& r : raw) r = mean * uniform_real(rng, 1.0 - s.size_spread, 1.0 + s.size_spread);
  const double total = std::accumulate(raw.begin(), raw.end(), 0.0);
  std::vector<std::size_t> sizes(s.stories);
  std::size_t assigned = 0;
  for (std::size_t i = 0; i < s.stories; ++i) {
    sizes[i] = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::floor(raw[i] / total * static_cast<double>(s.documents))));
    assigned += sizes[i];
  }
  for (std::size_t i = 0; assigned < s.documents; i = (i + 1) % s.stories, ++assigned) ++sizes[i];
  for (std::size_t i = 0; assigned > s.documents; i = (i + 1) % s.stories) {
    if (sizes[i] > 1) {
      --sizes[i];
      --assigned;
    }
  }
  return sizes;
}

struct Story {
  std::vector<std::size_t> tokens;
  std::vector<std::size_t> entities;
  std::vector<Language> languages;
  Timestamp begin = 0;
  Timestamp duration = 1;
  DenseVector planted;
};

std::string token_text(Language lang, std::size_t k, bool inflected) {
  return std::string(to_string(lang)) + ":w" + std::to_string(k) + (inflected ? "s" : "");
}

std::string lemma_text(Language lang, std::size_t k) {
  return std::string(to_string(lang)) + ":w" + std::to_string(k);
}

std::string entity_text(std::size_t k) { return "E" + std::to_string(k); }

void fill_section(Section& section, const Story& story, Language lang, std::size_t length,
                  double rate, std::size_t entity_count, const SyntheticSpec& spec,
                  std::size_t noise_begin, Rng& rng) {
  for (std::size_t i = 0; i < length; ++i) {
    std::size_t k;
    if (uniform_real(rng) < rate) {
      k = story.tokens[uniform_index(rng, story.tokens.size())];
    } else {
      k = noise_begin + uniform_index(rng, spec.vocabulary - noise_begin);
    }
    const bool inflected = uniform_real(rng) < 0.3;
    section.tokens.push_back(token_text(lang, k, inflected));
    section.lemmas.push_back(lemma_text(lang, k));
  }
  const std::size_t entity_noise_begin = spec.stories * spec.signature_entities;
  for (std::size_t i = 0; i < entity_count; ++i) {
    std::size_t k;
    if (!story.entities.empty() && uniform_real(rng) < std::min(1.0, rate + 0.3)) {
      k = story.entities[uniform_index(rng, story.entities.size())];
    } else {
      k = entity_noise_begin + uniform_index(rng, spec.entity_vocabulary - entity_noise_begin);
    }
    section.entities.push_back(entity_text(k));
  }
}

}  // namespace

SyntheticCorpus generate_synthetic(const SyntheticSpec& spec) {
  check(spec);
  Rng rng(spec.seed);
  const std::int64_t day = 86400;
  const auto duration_max = static_cast<std::int64_t>(spec.story_hours * 3600.0);

  std::vector<Story> stories(spec.stories);
  std::vector<std::size_t> straddlers(spec.stories);
  std::iota(straddlers.begin(), straddlers.end(), 0);
  shuffle(straddlers, rng);
  straddlers.resize(static_cast<std::size_t>(
      std::llround(spec.straddle_fraction * static_cast<double>(spec.stories))));
  std::sort(straddlers.begin(), straddlers.end());

  for (std::size_t s = 0; s < spec.stories; ++s) {
    Story& story = stories[s];
    for (std::size_t i = 0; i < spec.signature_tokens; ++i)
      story.tokens.push_back(s * spec.signature_tokens + i);
    for (std::size_t i = 0; i < spec.signature_entities; ++i)
      story.entities.push_back(s * spec.signature_entities + i);
    story.languages.push_back(Language::kEn);
    if (uniform_real(rng) < spec.es_probability) story.languages.push_back(Language::kEs);
    if (uniform_real(rng) < spec.de_probability) story.languages.push_back(Language::kDe);

    story.duration = std::max<std::int64_t>(
        3600, static_cast<std::int64_t>(uniform_real(rng, 0.5, 1.0) * static_cast<double>(duration_max)));
    const auto d = static_cast<std::int64_t>(s % spec.days);
    const bool straddle = std::binary_search(straddlers.begin(), straddlers.end(), s) &&
                          d + 1 < static_cast<std::int64_t>(spec.days);
    if (straddle) {
      story.begin = spec.start + (d + 1) * day - story.duration / 2;
    } else {
      const auto slack = std::max<std::int64_t>(1, day - story.duration);
      story.begin = spec.start + d * day +
                    static_cast<std::int64_t>(uniform_index(rng, static_cast<std::uint64_t>(slack)));
    }

    story.planted.resize(spec.dim);
    double norm = 0.0;
    for (auto& x : story.planted) {
      x = standard_normal(rng);
      norm += x * x;
    }
    norm = std::sqrt(norm);
    for (auto& x : story.planted) x /= norm;
  }

  const std::vector<std::size_t> sizes = story_sizes(spec, rng);
  const std::size_t noise_begin = spec.stories * spec.signature_tokens;

  struct Draft {
    Document doc;
    DenseVector vector;
  };
  std::vector<Draft> drafts;
  drafts.reserve(spec.documents);
  for (std::size_t s = 0; s < spec.stories; ++s) {
    const Story& story = stories[s];
    for (std::size_t i = 0; i < sizes[s]; ++i) {
      Draft draft;
      Document& doc = draft.doc;
      if (story.languages.size() == 1 || uniform_real(rng) < spec.pivot_share) {
        doc.language = Language::kEn;
      } else {
        doc.language = story.languages[1 + uniform_index(rng, story.languages.size() - 1)];
      }
      doc.timestamp =
          story.begin + static_cast<std::int64_t>(uniform_index(rng, static_cast<std::uint64_t>(story.duration)));
      doc.gold_story = "c" + std::to_string(s);
      fill_section(doc.title, story, doc.language, spec.title_tokens,
                   std::min(1.0, spec.signature_rate * 1.5), 2, spec, noise_begin, rng);
      const auto body_len = static_cast<std::size_t>(std::max(
          1.0, std::round(static_cast<double>(spec.body_tokens) * uniform_real(rng, 0.7, 1.3))));
      fill_section(doc.body, story, doc.language, body_len, spec.signature_rate,
                   4 + uniform_index(rng, 5), spec, noise_begin, rng);

      draft.vector = story.planted;
      for (auto& x : draft.vector) x += uniform_real(rng, -spec.embedding_noise, spec.embedding_noise);
      drafts.push_back(std::move(draft));
    }
  }

  std::stable_sort(drafts.begin(), drafts.end(), [](const Draft& a, const Draft& b) {
    return a.doc.timestamp < b.doc.timestamp;
  });
  // Batch windows are anchored at the earliest timestamp; pin it to the start
  // so that windows coincide with days.
  if (!drafts.empty()) drafts.front().doc.timestamp = spec.start;

  SyntheticCorpus out;
  out.embeddings = EmbeddingStore(spec.dim);
  const std::size_t width = std::to_string(drafts.size()).size();
  for (std::size_t i = 0; i < drafts.size(); ++i) {
    std::string num = std::to_string(i);
    drafts[i].doc.id = spec.id_prefix + std::string(width - num.size(), '0') + num;
    out.embeddings.add(drafts[i].doc.id, std::move(drafts[i].vector));
    out.documents.push_back(std::move(drafts[i].doc));
  }
  return out;
}

}  // namespace storystream
