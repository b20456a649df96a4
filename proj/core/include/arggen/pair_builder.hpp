#pragma once

#include <filesystem>
#include <functional>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "arggen/corpus.hpp"
#include "arggen/embedding.hpp"
#include "arggen/summarizer.hpp"

namespace arggen::pairs {

inline constexpr std::string_view kFactsToken = "[Facts]";
inline constexpr std::string_view kArgumentsToken = "[Arguments]";

enum class Source { Original, Rewritten };
enum class RewriteStatus { NotApplicable, Pending, Approved, Rejected };
enum class Family { Causal, Seq2Seq };

std::string_view to_string(Source source);
std::string_view to_string(RewriteStatus status);  // "n/a", "pending", ...
std::string_view to_string(Family family);
Source parse_source(std::string_view name);
RewriteStatus parse_rewrite_status(std::string_view name);
Family parse_family(std::string_view name);

struct FactArgumentPair {
  std::string doc_id;
  std::string facts_summary;
  std::string argument_summary;
  std::size_t k = 0;
  Source source = Source::Original;
  RewriteStatus rewrite_status = RewriteStatus::NotApplicable;

  bool operator==(const FactArgumentPair&) const = default;
};

// Throws InvalidRecord on empty summaries or inconsistent source/status, and
// ReservedToken when a summary contains a special token.
void validate(const FactArgumentPair& pair);

struct RoleSentences {
  std::vector<std::string> facts;
  std::vector<std::string> ratio;
};

RoleSentences extract_role_sentences(const corpus::CaseDocument& doc);

// Throws MissingRole naming the absent role when either block is empty.
FactArgumentPair build_pair(const corpus::CaseDocument& doc, const embedding::EmbeddingProvider& provider,
                            const summarizer::SummaryConfig& config);

struct Exclusion {
  std::string doc_id;
  std::string reason;
};

struct PairDataset {
  std::vector<FactArgumentPair> pairs;
  std::vector<Exclusion> excluded;
};

// build_pair over many documents; documents missing a role are excluded with
// a logged warning rather than failing the batch.
PairDataset build_pairs(const std::vector<corpus::CaseDocument>& docs,
                        const embedding::EmbeddingProvider& provider,
                        const summarizer::SummaryConfig& config);

// A serialized example. For the causal family the model sees text(); for
// seq2seq it sees (source(), target()).
struct TrainingExample {
  Family family = Family::Causal;
  std::string facts;
  std::string argument;

  // "[Facts] <facts> [Arguments]" -- the causal inference prompt and the
  // seq2seq source.
  std::string source() const;
  const std::string& target() const { return argument; }
  // Causal training string; equals source() when the argument is empty.
  std::string text() const;

  bool operator==(const TrainingExample&) const = default;
};

TrainingExample serialize_example(const FactArgumentPair& pair, Family family);
TrainingExample inference_example(const FactArgumentPair& pair, Family family);

// Splits a causal string at the " [Arguments] " boundary.
FactArgumentPair parse_causal_example(std::string_view text);

using TokenCounter = std::function<std::size_t(std::string_view)>;

std::size_t whitespace_token_count(std::string_view text);

struct TokenBudget {
  Family family = Family::Causal;
  std::size_t max_tokens = 1024;
  TokenCounter counter = whitespace_token_count;

  static constexpr std::size_t kMinimum = 16;
  static std::size_t default_max_tokens(Family family) { return family == Family::Causal ? 1024 : 512; }
  static TokenBudget for_family(Family family, TokenCounter counter = whitespace_token_count);
};

// True when the example fits: the causal text as a whole, or seq2seq source
// and target each.
bool fits(const TrainingExample& example, const TokenBudget& budget);

// Drops trailing facts sentences, then trailing argument words, until the
// example fits. Throws BudgetTooSmall if the budget is below the minimum or
// cannot hold the special tokens.
TrainingExample enforce_budget(TrainingExample example, const TokenBudget& budget);

std::string to_json_line(const FactArgumentPair& pair);
FactArgumentPair parse_pair_line(std::string_view line, std::size_t line_number = 1);
void write_pairs(std::ostream& out, const std::vector<FactArgumentPair>& pairs);
void write_pairs(const std::filesystem::path& path, const std::vector<FactArgumentPair>& pairs);
std::vector<FactArgumentPair> read_pairs(std::istream& in);
std::vector<FactArgumentPair> read_pairs(const std::filesystem::path& path);

}  // namespace arggen::pairs
