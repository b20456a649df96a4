#pragma once

#include <chrono>
#include <cstddef>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "arggen/pair_builder.hpp"

namespace arggen::rewrite {

inline constexpr std::string_view kInstruction =
    "Rewrite preserving all facts, names, dates, and legal meaning; fix grammar only";

inline constexpr const char* kApiKeyVariable = "ARGGEN_REWRITE_API_KEY";

enum class Field { FactsSummary, ArgumentSummary };
enum class ReviewStatus { Pending, Approved, Rejected };

std::string_view to_string(Field field);
std::string_view to_string(ReviewStatus status);
Field parse_field(std::string_view name);
ReviewStatus parse_review_status(std::string_view name);

struct RewriteRecord {
  std::string doc_id;
  Field field = Field::FactsSummary;
  std::string original_text;
  std::string rewritten_text;
  std::string backend_id;
  std::string instruction{kInstruction};
  ReviewStatus status = ReviewStatus::Pending;
  std::optional<std::string> reviewer_note;
  std::size_t attempts = 0;

  bool operator==(const RewriteRecord&) const = default;
};

struct BackendSettings {
  double timeout_seconds = 60.0;
  std::size_t max_retries = 3;  // additional attempts after the first
  std::chrono::milliseconds initial_backoff{250};
  std::chrono::milliseconds max_backoff{8000};
};

class RewriteBackend {
 public:
  virtual ~RewriteBackend() = default;
  virtual std::string id() const = 0;
  // Returns the rewritten text or throws.
  virtual std::string rewrite(std::string_view text, std::string_view instruction) = 0;
  virtual BackendSettings settings() const { return {}; }
};

class IdentityBackend final : public RewriteBackend {
 public:
  explicit IdentityBackend(BackendSettings settings = {}) : settings_(settings) {}
  std::string id() const override { return "identity"; }
  std::string rewrite(std::string_view text, std::string_view) override { return std::string(text); }
  BackendSettings settings() const override { return settings_; }

 private:
  BackendSettings settings_;
};

class UppercaseBackend final : public RewriteBackend {
 public:
  std::string id() const override { return "uppercase"; }
  std::string rewrite(std::string_view text, std::string_view) override;
};

// OpenAI-style chat-completions endpoint. The instruction is sent as the
// system message and the text as the user message.
class HttpChatBackend final : public RewriteBackend {
 public:
  HttpChatBackend(std::string base_url, std::string model, std::string api_key, BackendSettings settings = {});
  // Reads the key from ARGGEN_REWRITE_API_KEY; throws ConfigError when unset.
  static std::unique_ptr<HttpChatBackend> from_environment(std::string base_url, std::string model,
                                                           BackendSettings settings = {});

  std::string id() const override { return "http:" + model_; }
  std::string rewrite(std::string_view text, std::string_view instruction) override;
  BackendSettings settings() const override { return settings_; }

 private:
  std::string base_url_;
  std::string model_;
  std::string api_key_;
  BackendSettings settings_;
};

using Sleeper = std::function<void(std::chrono::milliseconds)>;
void default_sleeper(std::chrono::milliseconds delay);

struct RewriteResult {
  pairs::FactArgumentPair pair;  // source = rewritten, status = pending
  RewriteRecord facts;
  RewriteRecord argument;
};

// Retries with bounded exponential backoff; throws BackendUnavailable once
// the retries are spent and InvalidRewrite on an empty rewrite.
RewriteResult rewrite_pair(const pairs::FactArgumentPair& pair, RewriteBackend& backend,
                           const Sleeper& sleeper = default_sleeper);

// Runs up to `concurrency` backend calls at once; results keep input order.
std::vector<RewriteResult> rewrite_pairs(const std::vector<pairs::FactArgumentPair>& input,
                                         RewriteBackend& backend, std::size_t concurrency,
                                         const Sleeper& sleeper = default_sleeper);

struct DiffOp {
  enum class Kind { Keep, Delete, Insert };
  Kind kind;
  std::string token;

  bool operator==(const DiffOp&) const = default;
};

struct DiffReport {
  std::vector<DiffOp> ops;
  std::size_t insertions = 0;
  std::size_t deletions = 0;
  std::string text;  // wdiff-style rendering plus counts
};

// Whitespace-token LCS diff.
DiffReport token_diff(std::string_view original, std::string_view rewritten);
DiffReport diff_report(const RewriteRecord& record);

// Throws AlreadyReviewed unless the record is pending.
RewriteRecord apply_review(const RewriteRecord& record, ReviewStatus decision,
                           std::optional<std::string> note = std::nullopt);

std::string to_json_line(const RewriteRecord& record);
RewriteRecord parse_record_line(std::string_view line, std::size_t line_number = 1);

// Rewrite records plus an append-only review log; the latest review of a
// (doc_id, field) determines its status.
class RewriteLedger {
 public:
  RewriteLedger() = default;
  RewriteLedger(std::filesystem::path records_path, std::filesystem::path reviews_path);

  static void write_records(const std::filesystem::path& path, const std::vector<RewriteRecord>& records);

  const std::vector<RewriteRecord>& records() const { return records_; }
  void add(RewriteRecord record);
  const RewriteRecord* find(std::string_view doc_id, Field field) const;
  std::vector<RewriteRecord> pending() const;

  // Applies apply_review and appends the decision to the review log if one
  // is attached.
  const RewriteRecord& review(std::string_view doc_id, Field field, ReviewStatus decision,
                              std::optional<std::string> note = std::nullopt);

 private:
  std::vector<RewriteRecord> records_;
  std::map<std::pair<std::string, Field>, std::size_t> index_;
  std::optional<std::filesystem::path> reviews_path_;
};

// Approved rewrites of both fields yield the rewritten pair; anything else
// falls back to the original text.
pairs::FactArgumentPair resolve_pair(const pairs::FactArgumentPair& original, const RewriteLedger& ledger);
std::vector<pairs::FactArgumentPair> resolve_pairs(const std::vector<pairs::FactArgumentPair>& originals,
                                                   const RewriteLedger& ledger);

}  // namespace arggen::rewrite
