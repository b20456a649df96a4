#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace arggen::corpus {

// Integer codes are stable: 0..6 in declaration order.
enum class RhetoricalLabel : std::uint8_t {
  Facts = 0,
  RulingLower = 1,
  Argument = 2,
  Statute = 3,
  Precedent = 4,
  RatioOfDecision = 5,
  RulingPresent = 6,
};

inline constexpr std::size_t kNumLabels = 7;

inline constexpr std::array<RhetoricalLabel, kNumLabels> kAllLabels = {
    RhetoricalLabel::Facts,     RhetoricalLabel::RulingLower,     RhetoricalLabel::Argument,
    RhetoricalLabel::Statute,   RhetoricalLabel::Precedent,       RhetoricalLabel::RatioOfDecision,
    RhetoricalLabel::RulingPresent,
};

constexpr int label_code(RhetoricalLabel label) { return static_cast<int>(label); }
RhetoricalLabel label_from_code(int code);  // throws InvalidLabel
std::string_view to_string(RhetoricalLabel label);
RhetoricalLabel parse_label(std::string_view name);  // throws InvalidLabel

enum class LabelSource { Gold, Predicted, None };
enum class Split { Train, Validation, Test, Unassigned };
enum class Provenance { GoldAnnotated, AutoLabeled };

std::string_view to_string(LabelSource source);
std::string_view to_string(Split split);
std::string_view to_string(Provenance provenance);
LabelSource parse_label_source(std::string_view name);
Split parse_split(std::string_view name);
Provenance parse_provenance(std::string_view name);

struct SentenceRecord {
  std::size_t index = 0;
  std::string text;
  std::optional<RhetoricalLabel> label;
  LabelSource label_source = LabelSource::None;
  // Gold label kept next to a prediction once a document has been relabeled.
  std::optional<RhetoricalLabel> gold_label;

  // Gold annotation if one exists, either as the active label or preserved.
  std::optional<RhetoricalLabel> gold() const;

  bool operator==(const SentenceRecord&) const = default;
};

struct CaseDocument {
  std::string doc_id;
  std::vector<SentenceRecord> sentences;
  Split split = Split::Unassigned;
  Provenance provenance = Provenance::AutoLabeled;

  bool operator==(const CaseDocument&) const = default;
};

// Throws InvalidRecord when a document breaks the record invariants.
void validate(const CaseDocument& doc);

// Builds an unlabeled document from raw text.
CaseDocument make_document(std::string doc_id, std::string_view raw_text,
                           Provenance provenance = Provenance::AutoLabeled);

// Rule-based splitter; see abbreviation_list() for the suppressed tokens.
std::vector<std::string> segment_sentences(std::string_view raw_text);
const std::vector<std::string>& abbreviation_list();

std::size_t count_words(std::string_view text);

// JSONL I/O. One document per line.
std::string to_json_line(const CaseDocument& doc);
CaseDocument parse_json_line(std::string_view line, std::size_t line_number = 1);
void write_corpus(std::ostream& out, const std::vector<CaseDocument>& docs);
void write_corpus(const std::filesystem::path& path, const std::vector<CaseDocument>& docs);
std::vector<CaseDocument> read_corpus(std::istream& in);

// Loads a JSONL file, or every *.jsonl / *.txt file of a directory in name
// order. Plain-text files become unlabeled documents named after their stem.
// When `provenance` is set, records declaring a different provenance are
// rejected and records without one inherit it.
std::vector<CaseDocument> load_corpus(const std::filesystem::path& path,
                                      std::optional<Provenance> provenance = std::nullopt);

struct SplitCounts {
  std::size_t train = 70;
  std::size_t validation = 10;
  std::size_t test = 20;

  std::size_t total() const { return train + validation + test; }
};

// Test documents are drawn from gold-annotated documents only; the remaining
// documents are shuffled into train and validation. Deterministic in `seed`
// and independent of input order.
std::vector<CaseDocument> split_corpus(std::vector<CaseDocument> docs, std::uint64_t seed,
                                       const SplitCounts& counts = {});

struct CorpusStats {
  Split split = Split::Unassigned;
  std::size_t doc_count = 0;
  double avg_words = 0.0;
  double avg_sentences = 0.0;
};

// One row per non-empty split, ordered train, validation, test, unassigned.
std::vector<CorpusStats> corpus_stats(const std::vector<CaseDocument>& docs);

}  // namespace arggen::corpus
