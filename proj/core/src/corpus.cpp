#include "arggen/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "arggen/error.hpp"
#include "arggen/random.hpp"
#include "json_util.hpp"

namespace arggen::corpus {

namespace {

using detail::json;

constexpr std::array<std::string_view, kNumLabels> kLabelNames = {
    "Facts", "RulingLower", "Argument", "Statute", "Precedent", "RatioOfDecision", "RulingPresent",
};

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }

bool starts_sentence(char c) {
  auto u = static_cast<unsigned char>(c);
  return std::isupper(u) || std::isdigit(u);
}

std::string trim(std::string_view s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && is_space(s[b])) ++b;
  while (e > b && is_space(s[e - 1])) --e;
  return std::string(s.substr(b, e - b));
}

// Token ending at `end` (inclusive), with leading brackets/quotes removed.
std::string_view token_ending_at(std::string_view text, std::size_t end) {
  std::size_t begin = end;
  while (begin > 0 && !is_space(text[begin - 1])) --begin;
  while (begin < end && (text[begin] == '(' || text[begin] == '"' || text[begin] == '\'' ||
                         text[begin] == '[')) {
    ++begin;
  }
  return text.substr(begin, end - begin + 1);
}

bool is_abbreviation(std::string_view token) {
  const auto& list = abbreviation_list();
  return std::find(list.begin(), list.end(), token) != list.end();
}

json sentence_to_json(const SentenceRecord& s) {
  json j = {
      {"index", s.index},
      {"text", s.text},
      {"label", s.label ? json(std::string(to_string(*s.label))) : json(nullptr)},
      {"label_source", std::string(to_string(s.label_source))},
  };
  if (s.gold_label) j["gold_label"] = std::string(to_string(*s.gold_label));
  return j;
}

std::optional<RhetoricalLabel> optional_label(const json& obj, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return std::nullopt;
  if (!it->is_string()) {
    throw Error(ErrorCode::InvalidRecord, std::string("field '") + key + "' must be a string or null");
  }
  return parse_label(it->get<std::string>());
}

CaseDocument document_from_json(const json& j) {
  if (!j.is_object()) throw Error(ErrorCode::InvalidRecord, "record is not an object");
  CaseDocument doc;
  doc.doc_id = detail::require<std::string>(j, "doc_id");
  doc.provenance = parse_provenance(detail::require<std::string>(j, "provenance"));
  doc.split = parse_split(detail::require<std::string>(j, "split"));
  auto sentences = j.find("sentences");
  if (sentences == j.end() || !sentences->is_array()) {
    throw Error(ErrorCode::InvalidRecord, "missing array field 'sentences'");
  }
  for (const auto& s : *sentences) {
    if (!s.is_object()) throw Error(ErrorCode::InvalidRecord, "sentence is not an object");
    SentenceRecord rec;
    rec.index = detail::require<std::size_t>(s, "index");
    rec.text = detail::require<std::string>(s, "text");
    rec.label = optional_label(s, "label");
    rec.label_source = parse_label_source(detail::require<std::string>(s, "label_source"));
    rec.gold_label = optional_label(s, "gold_label");
    doc.sentences.push_back(std::move(rec));
  }
  return doc;
}

void load_stream(std::istream& in, const std::string& origin, std::optional<Provenance> provenance,
                 std::vector<CaseDocument>& out) {
  detail::for_each_line(in, [&](std::string_view line, std::size_t number) {
    try {
      auto j = detail::parse_json(line, number);
      if (provenance && j.is_object() && !j.contains("provenance")) {
        j["provenance"] = std::string(to_string(*provenance));
      }
      auto doc = document_from_json(j);
      if (provenance && doc.provenance != *provenance) {
        throw Error(ErrorCode::InvalidRecord,
                    "provenance '" + std::string(to_string(doc.provenance)) + "' where '" +
                        std::string(to_string(*provenance)) + "' was requested");
      }
      validate(doc);
      out.push_back(std::move(doc));
    } catch (const ParseError& e) {
      throw ParseError(number, origin + ": " + e.detail());
    } catch (const Error& e) {
      throw ParseError(number, origin + ": " + e.what());
    }
  });
}

}  // namespace

RhetoricalLabel label_from_code(int code) {
  if (code < 0 || code >= static_cast<int>(kNumLabels)) {
    throw Error(ErrorCode::InvalidLabel, "label code out of range: " + std::to_string(code));
  }
  return static_cast<RhetoricalLabel>(code);
}

std::string_view to_string(RhetoricalLabel label) { return kLabelNames[label_code(label)]; }

RhetoricalLabel parse_label(std::string_view name) {
  for (std::size_t i = 0; i < kNumLabels; ++i) {
    if (kLabelNames[i] == name) return static_cast<RhetoricalLabel>(i);
  }
  throw Error(ErrorCode::InvalidLabel, "unknown label '" + std::string(name) + "'");
}

std::string_view to_string(LabelSource source) {
  switch (source) {
    case LabelSource::Gold: return "gold";
    case LabelSource::Predicted: return "predicted";
    case LabelSource::None: return "none";
  }
  return "none";
}

std::string_view to_string(Split split) {
  switch (split) {
    case Split::Train: return "train";
    case Split::Validation: return "validation";
    case Split::Test: return "test";
    case Split::Unassigned: return "unassigned";
  }
  return "unassigned";
}

std::string_view to_string(Provenance provenance) {
  return provenance == Provenance::GoldAnnotated ? "gold_annotated" : "auto_labeled";
}

LabelSource parse_label_source(std::string_view name) {
  if (name == "gold") return LabelSource::Gold;
  if (name == "predicted") return LabelSource::Predicted;
  if (name == "none") return LabelSource::None;
  throw Error(ErrorCode::InvalidRecord, "unknown label_source '" + std::string(name) + "'");
}

Split parse_split(std::string_view name) {
  if (name == "train") return Split::Train;
  if (name == "validation") return Split::Validation;
  if (name == "test") return Split::Test;
  if (name == "unassigned") return Split::Unassigned;
  throw Error(ErrorCode::InvalidRecord, "unknown split '" + std::string(name) + "'");
}

Provenance parse_provenance(std::string_view name) {
  if (name == "gold_annotated") return Provenance::GoldAnnotated;
  if (name == "auto_labeled") return Provenance::AutoLabeled;
  throw Error(ErrorCode::InvalidRecord, "unknown provenance '" + std::string(name) + "'");
}

std::optional<RhetoricalLabel> SentenceRecord::gold() const {
  if (label_source == LabelSource::Gold) return label;
  return gold_label;
}

void validate(const CaseDocument& doc) {
  if (doc.doc_id.empty()) throw Error(ErrorCode::InvalidRecord, "empty doc_id");
  for (std::size_t i = 0; i < doc.sentences.size(); ++i) {
    const auto& s = doc.sentences[i];
    const std::string where = doc.doc_id + " sentence " + std::to_string(i);
    if (s.index != i) {
      throw Error(ErrorCode::InvalidRecord, where + ": index " + std::to_string(s.index) +
                                                " breaks the 0..n-1 sequence");
    }
    if (std::all_of(s.text.begin(), s.text.end(), is_space)) {
      throw Error(ErrorCode::InvalidRecord, where + ": blank text");
    }
    if (!s.label && s.label_source != LabelSource::None) {
      throw Error(ErrorCode::InvalidRecord, where + ": label_source set without a label");
    }
    if (s.label && s.label_source == LabelSource::None) {
      throw Error(ErrorCode::InvalidRecord, where + ": label without a label_source");
    }
    if (doc.provenance == Provenance::GoldAnnotated && !s.gold()) {
      throw Error(ErrorCode::InvalidRecord, where + ": gold document sentence lacks a gold label");
    }
  }
}

const std::vector<std::string>& abbreviation_list() {
  static const std::vector<std::string> list = {"v.",   "vs.",  "No.", "Sec.", "Art.", "Hon.",
                                                "Dr.",  "Mr.",  "Mrs.", "Sr.", "Jr."};
  return list;
}

std::vector<std::string> segment_sentences(std::string_view raw_text) {
  std::vector<std::string> out;
  std::size_t start = 0;
  const std::size_t n = raw_text.size();
  for (std::size_t i = 0; i < n; ++i) {
    const char c = raw_text[i];
    if (c != '.' && c != '?' && c != '!') continue;
    if (i + 1 >= n || !is_space(raw_text[i + 1])) continue;
    std::size_t next = i + 1;
    while (next < n && is_space(raw_text[next])) ++next;
    if (next >= n || !starts_sentence(raw_text[next])) continue;
    if (c == '.' && is_abbreviation(token_ending_at(raw_text, i))) continue;
    auto sentence = trim(raw_text.substr(start, i + 1 - start));
    if (!sentence.empty()) out.push_back(std::move(sentence));
    start = next;
    i = next - 1;
  }
  auto tail = trim(raw_text.substr(std::min(start, n)));
  if (!tail.empty()) out.push_back(std::move(tail));
  if (out.empty()) throw Error(ErrorCode::EmptyDocument, "document has no non-whitespace text");
  return out;
}

std::size_t count_words(std::string_view text) {
  std::size_t count = 0;
  bool in_word = false;
  for (char c : text) {
    if (is_space(c)) {
      in_word = false;
    } else if (!in_word) {
      in_word = true;
      ++count;
    }
  }
  return count;
}

CaseDocument make_document(std::string doc_id, std::string_view raw_text, Provenance provenance) {
  CaseDocument doc;
  doc.doc_id = std::move(doc_id);
  doc.provenance = provenance;
  auto sentences = segment_sentences(raw_text);
  doc.sentences.reserve(sentences.size());
  for (std::size_t i = 0; i < sentences.size(); ++i) {
    doc.sentences.push_back({i, std::move(sentences[i]), std::nullopt, LabelSource::None, std::nullopt});
  }
  return doc;
}

std::string to_json_line(const CaseDocument& doc) {
  json sentences = json::array();
  for (const auto& s : doc.sentences) sentences.push_back(sentence_to_json(s));
  json j = {
      {"doc_id", doc.doc_id},
      {"provenance", std::string(to_string(doc.provenance))},
      {"split", std::string(to_string(doc.split))},
      {"sentences", std::move(sentences)},
  };
  return j.dump();
}

CaseDocument parse_json_line(std::string_view line, std::size_t line_number) {
  try {
    auto doc = document_from_json(detail::parse_json(line, line_number));
    validate(doc);
    return doc;
  } catch (const ParseError&) {
    throw;
  } catch (const Error& e) {
    throw ParseError(line_number, e.what());
  }
}

void write_corpus(std::ostream& out, const std::vector<CaseDocument>& docs) {
  for (const auto& doc : docs) out << to_json_line(doc) << '\n';
}

void write_corpus(const std::filesystem::path& path, const std::vector<CaseDocument>& docs) {
  std::ostringstream out;
  write_corpus(out, docs);
  detail::write_text_file(path, out.str());
}

std::vector<CaseDocument> read_corpus(std::istream& in) {
  std::vector<CaseDocument> docs;
  load_stream(in, "<stream>", std::nullopt, docs);
  std::set<std::string> seen;
  for (const auto& doc : docs) {
    if (!seen.insert(doc.doc_id).second) {
      throw Error(ErrorCode::DuplicateId, "duplicate doc_id '" + doc.doc_id + "'");
    }
  }
  return docs;
}

std::vector<CaseDocument> load_corpus(const std::filesystem::path& path,
                                      std::optional<Provenance> provenance) {
  namespace fs = std::filesystem;
  if (!fs::exists(path)) throw Error(ErrorCode::IoError, "no such path: " + path.string());

  std::vector<fs::path> files;
  if (fs::is_directory(path)) {
    for (const auto& entry : fs::directory_iterator(path)) {
      auto ext = entry.path().extension();
      if (entry.is_regular_file() && (ext == ".jsonl" || ext == ".txt")) files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
  } else {
    files.push_back(path);
  }

  std::vector<CaseDocument> docs;
  for (const auto& file : files) {
    std::ifstream in(file);
    if (!in) throw Error(ErrorCode::IoError, "cannot open " + file.string());
    if (file.extension() == ".txt") {
      std::stringstream buffer;
      buffer << in.rdbuf();
      docs.push_back(make_document(file.stem().string(), buffer.str(),
                                   provenance.value_or(Provenance::AutoLabeled)));
    } else {
      load_stream(in, file.string(), provenance, docs);
    }
  }

  std::set<std::string> seen;
  for (const auto& doc : docs) {
    if (!seen.insert(doc.doc_id).second) {
      throw Error(ErrorCode::DuplicateId, "duplicate doc_id '" + doc.doc_id + "'");
    }
  }
  return docs;
}

std::vector<CaseDocument> split_corpus(std::vector<CaseDocument> docs, std::uint64_t seed,
                                       const SplitCounts& counts) {
  if (counts.total() != docs.size()) {
    throw Error(ErrorCode::SplitArity, "split counts sum to " + std::to_string(counts.total()) +
                                           " but the corpus has " + std::to_string(docs.size()) +
                                           " documents");
  }

  // Work on doc_id order so that the assignment does not depend on load order.
  std::vector<std::size_t> order(docs.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return docs[a].doc_id < docs[b].doc_id; });

  std::vector<std::size_t> gold;
  std::vector<std::size_t> rest;
  for (auto i : order) {
    (docs[i].provenance == Provenance::GoldAnnotated ? gold : rest).push_back(i);
  }
  if (gold.size() < counts.test) {
    throw Error(ErrorCode::InsufficientGold, "need " + std::to_string(counts.test) +
                                                 " gold documents for the test split, have " +
                                                 std::to_string(gold.size()));
  }

  Rng rng(seed);
  rng.shuffle(gold);
  for (std::size_t i = 0; i < counts.test; ++i) docs[gold[i]].split = Split::Test;
  rest.insert(rest.end(), gold.begin() + static_cast<std::ptrdiff_t>(counts.test), gold.end());
  std::sort(rest.begin(), rest.end(),
            [&](std::size_t a, std::size_t b) { return docs[a].doc_id < docs[b].doc_id; });
  rng.shuffle(rest);
  for (std::size_t i = 0; i < rest.size(); ++i) {
    docs[rest[i]].split = i < counts.train ? Split::Train : Split::Validation;
  }
  return docs;
}

std::vector<CorpusStats> corpus_stats(const std::vector<CaseDocument>& docs) {
  constexpr std::array<Split, 4> kOrder = {Split::Train, Split::Validation, Split::Test,
                                           Split::Unassigned};
  std::vector<CorpusStats> rows;
  for (auto split : kOrder) {
    CorpusStats row;
    row.split = split;
    double words = 0.0;
    double sentences = 0.0;
    for (const auto& doc : docs) {
      if (doc.split != split) continue;
      ++row.doc_count;
      sentences += static_cast<double>(doc.sentences.size());
      for (const auto& s : doc.sentences) words += static_cast<double>(count_words(s.text));
    }
    if (row.doc_count == 0) continue;
    row.avg_words = words / static_cast<double>(row.doc_count);
    row.avg_sentences = sentences / static_cast<double>(row.doc_count);
    rows.push_back(row);
  }
  return rows;
}

}  // namespace arggen::corpus
