#include "arggen/rewriter.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <exception>
#include <fstream>
#include <sstream>
#include <thread>

#include <spdlog/spdlog.h>

#include "arggen/error.hpp"
#include "arggen/text.hpp"
#include "json_util.hpp"

namespace arggen::rewrite {

namespace {

using detail::json;

RewriteRecord rewrite_field(const std::string& doc_id, Field field, const std::string& original,
                            RewriteBackend& backend, const Sleeper& sleeper) {
  const auto settings = backend.settings();
  const std::size_t max_attempts = settings.max_retries + 1;
  auto delay = settings.initial_backoff;
  std::string last_error;

  for (std::size_t attempt = 1; attempt <= max_attempts; ++attempt) {
    std::string rewritten;
    try {
      rewritten = backend.rewrite(original, kInstruction);
    } catch (const std::exception& e) {
      last_error = e.what();
      spdlog::warn("rewrite {} {} attempt {}/{} failed: {}", doc_id, to_string(field), attempt,
                   max_attempts, last_error);
      if (attempt < max_attempts) {
        sleeper(delay);
        delay = std::min(delay * 2, settings.max_backoff);
      }
      continue;
    }
    if (text::trim(rewritten).empty()) {
      throw Error(ErrorCode::InvalidRewrite,
                  "backend " + backend.id() + " returned an empty rewrite for " + doc_id);
    }
    spdlog::debug("rewrite {} {} succeeded after {} attempt(s)", doc_id, to_string(field), attempt);
    RewriteRecord record;
    record.doc_id = doc_id;
    record.field = field;
    record.original_text = original;
    record.rewritten_text = std::move(rewritten);
    record.backend_id = backend.id();
    record.attempts = attempt;
    return record;
  }
  throw Error(ErrorCode::BackendUnavailable, "backend " + backend.id() + " failed " +
                                                 std::to_string(max_attempts) + " times: " + last_error);
}

void append_line(const std::filesystem::path& path, const std::string& line) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::app);
  if (!out) throw Error(ErrorCode::IoError, "cannot append to " + path.string());
  out << line << '\n';
}

}  // namespace

std::string_view to_string(Field field) {
  return field == Field::FactsSummary ? "facts_summary" : "argument_summary";
}

std::string_view to_string(ReviewStatus status) {
  switch (status) {
    case ReviewStatus::Pending: return "pending";
    case ReviewStatus::Approved: return "approved";
    case ReviewStatus::Rejected: return "rejected";
  }
  return "pending";
}

Field parse_field(std::string_view name) {
  if (name == "facts_summary") return Field::FactsSummary;
  if (name == "argument_summary") return Field::ArgumentSummary;
  throw Error(ErrorCode::InvalidRecord, "unknown field '" + std::string(name) + "'");
}

ReviewStatus parse_review_status(std::string_view name) {
  if (name == "pending") return ReviewStatus::Pending;
  if (name == "approved") return ReviewStatus::Approved;
  if (name == "rejected") return ReviewStatus::Rejected;
  throw Error(ErrorCode::InvalidRecord, "unknown review status '" + std::string(name) + "'");
}

std::string UppercaseBackend::rewrite(std::string_view text, std::string_view) {
  std::string out(text);
  for (auto& c : out) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return out;
}

void default_sleeper(std::chrono::milliseconds delay) { std::this_thread::sleep_for(delay); }

RewriteResult rewrite_pair(const pairs::FactArgumentPair& pair, RewriteBackend& backend,
                           const Sleeper& sleeper) {
  if (pair.source != pairs::Source::Original) {
    throw Error(ErrorCode::InvalidRecord, "pair " + pair.doc_id + " has already been rewritten");
  }
  RewriteResult result;
  result.facts = rewrite_field(pair.doc_id, Field::FactsSummary, pair.facts_summary, backend, sleeper);
  result.argument =
      rewrite_field(pair.doc_id, Field::ArgumentSummary, pair.argument_summary, backend, sleeper);
  result.pair = pair;
  result.pair.facts_summary = result.facts.rewritten_text;
  result.pair.argument_summary = result.argument.rewritten_text;
  result.pair.source = pairs::Source::Rewritten;
  result.pair.rewrite_status = pairs::RewriteStatus::Pending;
  return result;
}

std::vector<RewriteResult> rewrite_pairs(const std::vector<pairs::FactArgumentPair>& input,
                                         RewriteBackend& backend, std::size_t concurrency,
                                         const Sleeper& sleeper) {
  std::vector<RewriteResult> results(input.size());
  std::vector<std::exception_ptr> errors(input.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < input.size(); i = next++) {
      try {
        results[i] = rewrite_pair(input[i], backend, sleeper);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const std::size_t threads = std::clamp<std::size_t>(concurrency, 1, std::max<std::size_t>(1, input.size()));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return results;
}

DiffReport token_diff(std::string_view original, std::string_view rewritten) {
  const auto a = text::split_whitespace(original);
  const auto b = text::split_whitespace(rewritten);
  const std::size_t n = a.size();
  const std::size_t m = b.size();
  // lcs[i][j]: LCS length of a[i..] and b[j..]
  std::vector<std::vector<std::size_t>> lcs(n + 1, std::vector<std::size_t>(m + 1, 0));
  for (std::size_t i = n; i-- > 0;) {
    for (std::size_t j = m; j-- > 0;) {
      lcs[i][j] = a[i] == b[j] ? lcs[i + 1][j + 1] + 1 : std::max(lcs[i + 1][j], lcs[i][j + 1]);
    }
  }

  DiffReport report;
  std::size_t i = 0;
  std::size_t j = 0;
  while (i < n || j < m) {
    if (i < n && j < m && a[i] == b[j]) {
      report.ops.push_back({DiffOp::Kind::Keep, a[i]});
      ++i;
      ++j;
    } else if (i < n && (j == m || lcs[i + 1][j] >= lcs[i][j + 1])) {
      report.ops.push_back({DiffOp::Kind::Delete, a[i]});
      ++report.deletions;
      ++i;
    } else {
      report.ops.push_back({DiffOp::Kind::Insert, b[j]});
      ++report.insertions;
      ++j;
    }
  }

  std::ostringstream out;
  for (std::size_t k = 0; k < report.ops.size(); ++k) {
    if (k) out << ' ';
    const auto& op = report.ops[k];
    switch (op.kind) {
      case DiffOp::Kind::Keep: out << op.token; break;
      case DiffOp::Kind::Delete: out << "[-" << op.token << "-]"; break;
      case DiffOp::Kind::Insert: out << "{+" << op.token << "+}"; break;
    }
  }
  out << "\ninsertions: " << report.insertions << ", deletions: " << report.deletions << '\n';
  report.text = out.str();
  return report;
}

DiffReport diff_report(const RewriteRecord& record) {
  auto report = token_diff(record.original_text, record.rewritten_text);
  report.text = "--- " + record.doc_id + " " + std::string(to_string(record.field)) + " (" +
                record.backend_id + ", " + std::string(to_string(record.status)) + ")\n" + report.text;
  return report;
}

RewriteRecord apply_review(const RewriteRecord& record, ReviewStatus decision, std::optional<std::string> note) {
  if (record.status != ReviewStatus::Pending) {
    throw Error(ErrorCode::AlreadyReviewed, record.doc_id + " " + std::string(to_string(record.field)) +
                                                " is already " + std::string(to_string(record.status)));
  }
  if (decision == ReviewStatus::Pending) {
    throw Error(ErrorCode::ConfigError, "a review decision must be approved or rejected");
  }
  RewriteRecord out = record;
  out.status = decision;
  out.reviewer_note = std::move(note);
  return out;
}

std::string to_json_line(const RewriteRecord& record) {
  json j = {
      {"doc_id", record.doc_id},
      {"field", std::string(to_string(record.field))},
      {"original_text", record.original_text},
      {"rewritten_text", record.rewritten_text},
      {"backend_id", record.backend_id},
      {"instruction", record.instruction},
      {"status", std::string(to_string(record.status))},
      {"reviewer_note", record.reviewer_note ? json(*record.reviewer_note) : json(nullptr)},
      {"attempts", record.attempts},
  };
  return j.dump();
}

RewriteRecord parse_record_line(std::string_view line, std::size_t line_number) {
  auto j = detail::parse_json(line, line_number);
  try {
    RewriteRecord r;
    r.doc_id = detail::require<std::string>(j, "doc_id");
    r.field = parse_field(detail::require<std::string>(j, "field"));
    r.original_text = detail::require<std::string>(j, "original_text");
    r.rewritten_text = detail::require<std::string>(j, "rewritten_text");
    r.backend_id = detail::require<std::string>(j, "backend_id");
    r.instruction = j.value("instruction", std::string(kInstruction));
    r.status = parse_review_status(detail::require<std::string>(j, "status"));
    if (auto it = j.find("reviewer_note"); it != j.end() && it->is_string()) r.reviewer_note = it->get<std::string>();
    r.attempts = j.value("attempts", std::size_t{0});
    if (r.status != ReviewStatus::Rejected && text::trim(r.rewritten_text).empty()) {
      throw Error(ErrorCode::InvalidRecord, "rewrite record " + r.doc_id + " has an empty rewrite");
    }
    return r;
  } catch (const ParseError&) {
    throw;
  } catch (const Error& e) {
    throw ParseError(line_number, e.what());
  }
}

RewriteLedger::RewriteLedger(std::filesystem::path records_path, std::filesystem::path reviews_path)
    : reviews_path_(std::move(reviews_path)) {
  {
    std::ifstream in(records_path);
    if (!in) throw Error(ErrorCode::IoError, "cannot open " + records_path.string());
    detail::for_each_line(in, [&](std::string_view line, std::size_t number) {
      add(parse_record_line(line, number));
    });
  }
  std::ifstream reviews(*reviews_path_);
  if (!reviews) return;  // no reviews yet
  detail::for_each_line(reviews, [&](std::string_view line, std::size_t number) {
    auto event = parse_record_line(line, number);
    auto it = index_.find({event.doc_id, event.field});
    if (it == index_.end()) {
      throw ParseError(number, "review for unknown record " + event.doc_id);
    }
    records_[it->second].status = event.status;
    records_[it->second].reviewer_note = event.reviewer_note;
  });
}

void RewriteLedger::write_records(const std::filesystem::path& path, const std::vector<RewriteRecord>& records) {
  std::string contents;
  for (const auto& r : records) contents += to_json_line(r) + "\n";
  detail::write_text_file(path, contents);
}

void RewriteLedger::add(RewriteRecord record) {
  auto key = std::make_pair(record.doc_id, record.field);
  if (index_.count(key)) {
    throw Error(ErrorCode::DuplicateId, "duplicate rewrite record for " + record.doc_id + " " +
                                            std::string(to_string(record.field)));
  }
  index_[key] = records_.size();
  records_.push_back(std::move(record));
}

const RewriteRecord* RewriteLedger::find(std::string_view doc_id, Field field) const {
  auto it = index_.find({std::string(doc_id), field});
  return it == index_.end() ? nullptr : &records_[it->second];
}

std::vector<RewriteRecord> RewriteLedger::pending() const {
  std::vector<RewriteRecord> out;
  for (const auto& r : records_) {
    if (r.status == ReviewStatus::Pending) out.push_back(r);
  }
  return out;
}

const RewriteRecord& RewriteLedger::review(std::string_view doc_id, Field field, ReviewStatus decision,
                                           std::optional<std::string> note) {
  auto it = index_.find({std::string(doc_id), field});
  if (it == index_.end()) {
    throw Error(ErrorCode::InvalidRecord, "no rewrite record for " + std::string(doc_id));
  }
  auto& record = records_[it->second];
  auto updated = apply_review(record, decision, std::move(note));
  if (reviews_path_) append_line(*reviews_path_, to_json_line(updated));
  record = std::move(updated);
  return record;
}

pairs::FactArgumentPair resolve_pair(const pairs::FactArgumentPair& original, const RewriteLedger& ledger) {
  const auto* facts = ledger.find(original.doc_id, Field::FactsSummary);
  const auto* argument = ledger.find(original.doc_id, Field::ArgumentSummary);
  if (!facts || !argument || facts->status != ReviewStatus::Approved ||
      argument->status != ReviewStatus::Approved) {
    auto out = original;
    out.source = pairs::Source::Original;
    out.rewrite_status = pairs::RewriteStatus::NotApplicable;
    return out;
  }
  auto out = original;
  out.facts_summary = facts->rewritten_text;
  out.argument_summary = argument->rewritten_text;
  out.source = pairs::Source::Rewritten;
  out.rewrite_status = pairs::RewriteStatus::Approved;
  return out;
}

std::vector<pairs::FactArgumentPair> resolve_pairs(const std::vector<pairs::FactArgumentPair>& originals,
                                                   const RewriteLedger& ledger) {
  std::vector<pairs::FactArgumentPair> out;
  out.reserve(originals.size());
  for (const auto& p : originals) out.push_back(resolve_pair(p, ledger));
  return out;
}

}  // namespace arggen::rewrite
