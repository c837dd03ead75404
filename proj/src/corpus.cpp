#include "storystream/corpus.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <unordered_set>

#include <json.hpp>

#include "storystream/error.hpp"

namespace storystream {

using nlohmann::json;

const std::vector<std::string>& Section::field(FieldKind kind) const {
  switch (kind) {
    case FieldKind::kTokens:
      return tokens;
    case FieldKind::kLemmas:
      return lemmas;
    case FieldKind::kEntities:
      return entities;
  }
  return tokens;
}

namespace {

// Days since 1970-01-01 for a proleptic Gregorian date.
std::int64_t days_from_civil(std::int64_t y, unsigned m, unsigned d) {
  y -= m <= 2;
  const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
  const unsigned yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

void civil_from_days(std::int64_t z, std::int64_t& y, unsigned& m, unsigned& d) {
  z += 719468;
  const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
  const unsigned doe = static_cast<unsigned>(z - era * 146097);
  const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  y = static_cast<std::int64_t>(yoe) + era * 400;
  const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const unsigned mp = (5 * doy + 2) / 153;
  d = doy - (153 * mp + 2) / 5 + 1;
  m = mp < 10 ? mp + 3 : mp - 9;
  y += m <= 2;
}

class DateScanner {
 public:
  explicit DateScanner(std::string_view text) : text_(text) {}

  int digits(std::size_t n) {
    if (pos_ + n > text_.size()) fail();
    int value = 0;
    auto [ptr, ec] = std::from_chars(text_.data() + pos_, text_.data() + pos_ + n, value);
    if (ec != std::errc() || ptr != text_.data() + pos_ + n) fail();
    pos_ += n;
    return value;
  }
  void expect(char c) {
    if (!accept(c)) fail();
  }
  bool accept(char c) {
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }
  bool done() const { return pos_ == text_.size(); }
  char peek() const { return pos_ < text_.size() ? text_[pos_] : '\0'; }
  void skip_digits() {
    while (pos_ < text_.size() && text_[pos_] >= '0' && text_[pos_] <= '9') ++pos_;
  }
  [[noreturn]] void fail() const {
    throw ValidationError("invalid ISO-8601 timestamp '" + std::string(text_) + "'");
  }

 private:
  std::string_view text_;
  std::size_t pos_ = 0;
};

}  // namespace

Timestamp parse_iso8601(std::string_view text) {
  DateScanner s(text);
  const int year = s.digits(4);
  s.expect('-');
  const int month = s.digits(2);
  s.expect('-');
  const int day = s.digits(2);
  if (month < 1 || month > 12 || day < 1 || day > 31) s.fail();
  int hour = 0, minute = 0, second = 0;
  if (s.accept('T') || s.accept(' ')) {
    hour = s.digits(2);
    s.expect(':');
    minute = s.digits(2);
    if (s.accept(':')) {
      second = s.digits(2);
      if (s.accept('.')) s.skip_digits();
    }
  }
  if (hour > 23 || minute > 59 || second > 60) s.fail();
  std::int64_t offset = 0;
  if (s.accept('Z')) {
  } else if (s.peek() == '+' || s.peek() == '-') {
    const int sign = s.peek() == '-' ? -1 : 1;
    s.accept(s.peek());
    const int oh = s.digits(2);
    s.accept(':');
    const int om = s.digits(2);
    offset = sign * (oh * 3600 + om * 60);
  }
  if (!s.done()) s.fail();
  const std::int64_t days = days_from_civil(year, static_cast<unsigned>(month),
                                            static_cast<unsigned>(day));
  return days * 86400 + hour * 3600 + minute * 60 + second - offset;
}

std::string format_iso8601(Timestamp ts) {
  std::int64_t days = ts >= 0 ? ts / 86400 : -((-ts + 86399) / 86400);
  std::int64_t rem = ts - days * 86400;
  std::int64_t y;
  unsigned m, d;
  civil_from_days(days, y, m, d);
  char buf[96];
  std::snprintf(buf, sizeof(buf), "%04lld-%02u-%02uT%02lld:%02lld:%02lldZ",
                static_cast<long long>(y), m, d, static_cast<long long>(rem / 3600),
                static_cast<long long>(rem % 3600 / 60), static_cast<long long>(rem % 60));
  return buf;
}

namespace {

std::vector<std::string> string_list(const json& obj, const char* key,
                                     const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end()) throw ValidationError("missing field '" + where + key + "'");
  if (!it->is_array()) throw ValidationError("field '" + where + key + "' must be an array");
  std::vector<std::string> out;
  out.reserve(it->size());
  for (const auto& v : *it) {
    if (!v.is_string())
      throw ValidationError("field '" + where + key + "' must contain strings");
    out.push_back(v.get<std::string>());
  }
  return out;
}

Section parse_section(const json& record, const char* key) {
  auto it = record.find(key);
  if (it == record.end()) throw ValidationError(std::string("missing field '") + key + "'");
  if (!it->is_object())
    throw ValidationError(std::string("field '") + key + "' must be an object");
  const std::string where = std::string(key) + ".";
  Section s;
  s.tokens = string_list(*it, "tokens", where);
  s.lemmas = string_list(*it, "lemmas", where);
  s.entities = string_list(*it, "entities", where);
  return s;
}

const std::string& required_string(const json& record, const char* key) {
  auto it = record.find(key);
  if (it == record.end()) throw ValidationError(std::string("missing field '") + key + "'");
  if (!it->is_string())
    throw ValidationError(std::string("field '") + key + "' must be a string");
  return it->get_ref<const std::string&>();
}

Document parse_record(const std::string& line) {
  json record;
  try {
    record = json::parse(line);
  } catch (const json::parse_error& e) {
    throw ValidationError(std::string("malformed JSON: ") + e.what());
  }
  if (!record.is_object()) throw ValidationError("record must be a JSON object");
  Document doc;
  doc.id = required_string(record, "id");
  doc.timestamp = parse_iso8601(required_string(record, "date"));
  doc.language = parse_language(required_string(record, "lang"));
  if (auto it = record.find("cluster"); it != record.end() && !it->is_null()) {
    if (it->is_string()) {
      doc.gold_story = it->get<std::string>();
    } else if (it->is_number_integer()) {
      doc.gold_story = std::to_string(it->get<long long>());
    } else {
      throw ValidationError("field 'cluster' must be a string");
    }
  }
  doc.title = parse_section(record, "title");
  doc.body = parse_section(record, "body");
  return doc;
}

json section_json(const Section& s) {
  return json{{"tokens", s.tokens}, {"lemmas", s.lemmas}, {"entities", s.entities}};
}

}  // namespace

std::vector<Document> parse_corpus(std::istream& in) {
  std::vector<Document> docs;
  std::unordered_set<std::string> seen;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      Document doc = parse_record(line);
      if (!seen.insert(doc.id).second)
        throw ValidationError("duplicate document id '" + doc.id + "'");
      docs.push_back(std::move(doc));
    } catch (const ParseError&) {
      throw;
    } catch (const ValidationError& e) {
      throw ParseError(line_no, e.what());
    }
  }
  return docs;
}

std::vector<Document> load_corpus(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open corpus '" + path + "'");
  return parse_corpus(in);
}

std::string to_json_line(const Document& doc) {
  json record = {{"id", doc.id},
                 {"date", format_iso8601(doc.timestamp)},
                 {"lang", std::string(to_string(doc.language))}};
  if (doc.gold_story) record["cluster"] = *doc.gold_story;
  record["title"] = section_json(doc.title);
  record["body"] = section_json(doc.body);
  return record.dump();
}

void write_corpus(std::ostream& out, std::span<const Document> docs) {
  for (const auto& doc : docs) out << to_json_line(doc) << '\n';
}

std::vector<Batch> make_batches(std::span<const Document> docs,
                                std::int64_t window_seconds) {
  if (window_seconds <= 0) throw ValidationError("window length must be positive");
  if (docs.empty()) return {};
  Timestamp start = docs.front().timestamp;
  for (const auto& d : docs) start = std::min(start, d.timestamp);

  std::vector<BatchIndex> index(docs.size());
  for (std::size_t i = 0; i < docs.size(); ++i)
    index[i] = (docs[i].timestamp - start) / window_seconds;

  std::vector<std::size_t> order(docs.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return index[a] < index[b]; });

  std::vector<Batch> batches;
  for (std::size_t i : order) {
    if (batches.empty() || batches.back().index != index[i]) {
      Batch b;
      b.index = index[i];
      b.window_start = start + index[i] * window_seconds;
      b.window_end = b.window_start + window_seconds;
      batches.push_back(std::move(b));
    }
    batches.back().documents.push_back(&docs[i]);
  }
  return batches;
}

std::size_t DfTable::count(FieldKind field, std::string_view term) const {
  const auto& table = counts_[static_cast<std::size_t>(field)];
  auto it = table.find(std::string(term));
  return it == table.end() ? 0 : it->second;
}

std::size_t DfTable::vocabulary_size(FieldKind field) const {
  return counts_[static_cast<std::size_t>(field)].size();
}

void DfTable::update(const Document& doc) {
  if (doc.language != language_)
    throw InvariantError("document '" + doc.id + "' has language " +
                         std::string(to_string(doc.language)) + ", table is " +
                         std::string(to_string(language_)));
  for (std::size_t f = 0; f < kFieldKinds; ++f) {
    const auto kind = static_cast<FieldKind>(f);
    std::unordered_set<std::string_view> terms;
    for (const auto& t : doc.title.field(kind)) terms.insert(t);
    for (const auto& t : doc.body.field(kind)) terms.insert(t);
    for (std::string_view t : terms) ++counts_[f][std::string(t)];
  }
  ++total_docs_;
}

void DfTable::update(std::span<const Document* const> docs) {
  for (const Document* d : docs) {
    if (d->language != language_)
      throw InvariantError("document '" + d->id + "' does not match table language " +
                           std::string(to_string(language_)));
  }
  for (const Document* d : docs) update(*d);
}

namespace {

SparseVector tfidf(const DfTable& df, FieldKind field,
                   std::span<const std::string* const> terms) {
  std::unordered_map<std::string_view, std::size_t> tf;
  for (const std::string* t : terms) ++tf[*t];
  const double n = static_cast<double>(df.total_docs());
  std::vector<SparseVector::Entry> entries;
  entries.reserve(tf.size());
  for (const auto& [term, count] : tf) {
    const double dft = static_cast<double>(df.count(field, term));
    const double idf = std::log((1.0 + n) / (1.0 + dft)) + 1.0;
    entries.emplace_back(term_id(term), static_cast<double>(count) * idf);
  }
  return SparseVector::from_entries(std::move(entries)).normalized();
}

}  // namespace

FeatureSet featurize(const Document& doc, const DfTable& df) {
  FeatureSet out;
  std::vector<const std::string*> terms;
  for (std::size_t f = 0; f < kFieldKinds; ++f) {
    const auto kind = static_cast<FieldKind>(f);
    const auto& title = doc.title.field(kind);
    const auto& body = doc.body.field(kind);

    terms.clear();
    for (const auto& t : title) terms.push_back(&t);
    out[slot_index(SectionKind::kTitle, kind)] = tfidf(df, kind, terms);

    terms.clear();
    for (const auto& t : body) terms.push_back(&t);
    out[slot_index(SectionKind::kBody, kind)] = tfidf(df, kind, terms);

    terms.clear();
    for (const auto& t : title) terms.push_back(&t);
    for (const auto& t : body) terms.push_back(&t);
    out[slot_index(SectionKind::kTitleBody, kind)] = tfidf(df, kind, terms);
  }
  return out;
}

std::vector<FeatureSet> featurize_stream(std::span<const Document> docs,
                                         std::int64_t window_seconds) {
  std::vector<FeatureSet> out(docs.size());
  std::array<DfTable, kLanguageCount> tables = {
      DfTable(Language::kEn), DfTable(Language::kEs), DfTable(Language::kDe)};
  for (const Batch& batch : make_batches(docs, window_seconds)) {
    for (const Document* d : batch.documents) tables[index_of(d->language)].update(*d);
    for (const Document* d : batch.documents) {
      const auto pos = static_cast<std::size_t>(d - docs.data());
      out[pos] = featurize(*d, tables[index_of(d->language)]);
    }
  }
  return out;
}

}  // namespace storystream
