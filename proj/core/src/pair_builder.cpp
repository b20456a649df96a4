#include "arggen/pair_builder.hpp"

#include <fstream>
#include <sstream>

#include <spdlog/spdlog.h>

#include "arggen/error.hpp"
#include "arggen/text.hpp"
#include "json_util.hpp"

namespace arggen::pairs {

namespace {

using detail::json;

bool has_reserved_token(std::string_view s) {
  return s.find(kFactsToken) != std::string_view::npos || s.find(kArgumentsToken) != std::string_view::npos;
}

std::string facts_from(const std::vector<std::string>& sentences) { return text::join(sentences, " "); }

}  // namespace

std::string_view to_string(Source source) { return source == Source::Original ? "original" : "rewritten"; }

std::string_view to_string(RewriteStatus status) {
  switch (status) {
    case RewriteStatus::NotApplicable: return "n/a";
    case RewriteStatus::Pending: return "pending";
    case RewriteStatus::Approved: return "approved";
    case RewriteStatus::Rejected: return "rejected";
  }
  return "n/a";
}

std::string_view to_string(Family family) { return family == Family::Causal ? "causal" : "seq2seq"; }

Source parse_source(std::string_view name) {
  if (name == "original") return Source::Original;
  if (name == "rewritten") return Source::Rewritten;
  throw Error(ErrorCode::InvalidRecord, "unknown source '" + std::string(name) + "'");
}

RewriteStatus parse_rewrite_status(std::string_view name) {
  if (name == "n/a") return RewriteStatus::NotApplicable;
  if (name == "pending") return RewriteStatus::Pending;
  if (name == "approved") return RewriteStatus::Approved;
  if (name == "rejected") return RewriteStatus::Rejected;
  throw Error(ErrorCode::InvalidRecord, "unknown rewrite_status '" + std::string(name) + "'");
}

Family parse_family(std::string_view name) {
  if (name == "causal") return Family::Causal;
  if (name == "seq2seq") return Family::Seq2Seq;
  throw Error(ErrorCode::ConfigError, "unknown model family '" + std::string(name) + "'");
}

void validate(const FactArgumentPair& pair) {
  if (text::trim(pair.facts_summary).empty() || text::trim(pair.argument_summary).empty()) {
    throw Error(ErrorCode::InvalidRecord, "pair " + pair.doc_id + " has an empty summary");
  }
  if (pair.source == Source::Rewritten && pair.rewrite_status == RewriteStatus::NotApplicable) {
    throw Error(ErrorCode::InvalidRecord, "rewritten pair " + pair.doc_id + " lacks a rewrite status");
  }
  if (has_reserved_token(pair.facts_summary) || has_reserved_token(pair.argument_summary)) {
    throw Error(ErrorCode::ReservedToken, "pair " + pair.doc_id + " contains a special token");
  }
}

RoleSentences extract_role_sentences(const corpus::CaseDocument& doc) {
  RoleSentences out;
  for (const auto& s : doc.sentences) {
    if (!s.label) {
      throw Error(ErrorCode::UnlabeledSentence,
                  doc.doc_id + " sentence " + std::to_string(s.index) + " is unlabeled");
    }
    if (*s.label == corpus::RhetoricalLabel::Facts) out.facts.push_back(s.text);
    if (*s.label == corpus::RhetoricalLabel::RatioOfDecision) out.ratio.push_back(s.text);
  }
  return out;
}

FactArgumentPair build_pair(const corpus::CaseDocument& doc, const embedding::EmbeddingProvider& provider,
                            const summarizer::SummaryConfig& config) {
  auto roles = extract_role_sentences(doc);
  if (roles.facts.empty()) {
    throw Error(ErrorCode::MissingRole, doc.doc_id + ": no Facts sentences");
  }
  if (roles.ratio.empty()) {
    throw Error(ErrorCode::MissingRole, doc.doc_id + ": no RatioOfDecision sentences");
  }
  FactArgumentPair pair;
  pair.doc_id = doc.doc_id;
  pair.k = config.k;
  pair.facts_summary = text::join(summarizer::summarize(roles.facts, provider, config), " ");
  pair.argument_summary = text::join(summarizer::summarize(roles.ratio, provider, config), " ");
  validate(pair);
  return pair;
}

PairDataset build_pairs(const std::vector<corpus::CaseDocument>& docs,
                        const embedding::EmbeddingProvider& provider,
                        const summarizer::SummaryConfig& config) {
  PairDataset out;
  for (const auto& doc : docs) {
    try {
      out.pairs.push_back(build_pair(doc, provider, config));
    } catch (const Error& e) {
      if (e.code() != ErrorCode::MissingRole) throw;
      spdlog::warn("excluding {}: {}", doc.doc_id, e.what());
      out.excluded.push_back({doc.doc_id, e.what()});
    }
  }
  return out;
}

std::string TrainingExample::source() const {
  std::string out(kFactsToken);
  out += ' ';
  if (!facts.empty()) {
    out += facts;
    out += ' ';
  }
  out += kArgumentsToken;
  return out;
}

std::string TrainingExample::text() const {
  if (argument.empty()) return source();
  return source() + " " + argument;
}

TrainingExample serialize_example(const FactArgumentPair& pair, Family family) {
  validate(pair);
  return {family, pair.facts_summary, pair.argument_summary};
}

TrainingExample inference_example(const FactArgumentPair& pair, Family family) {
  if (has_reserved_token(pair.facts_summary)) {
    throw Error(ErrorCode::ReservedToken, "pair " + pair.doc_id + " contains a special token");
  }
  return {family, pair.facts_summary, std::string()};
}

FactArgumentPair parse_causal_example(std::string_view text) {
  const std::string head = std::string(kFactsToken) + " ";
  if (text.substr(0, head.size()) != head) {
    throw Error(ErrorCode::InvalidRecord, "causal example does not start with '[Facts] '");
  }
  FactArgumentPair pair;
  auto rest = text.substr(head.size());
  const std::string bare = std::string(kArgumentsToken);
  if (rest.substr(0, bare.size()) == bare) {  // empty facts
    rest = rest.substr(bare.size());
  } else {
    const std::string sep = " " + bare;
    auto pos = rest.find(sep);
    if (pos == std::string_view::npos) {
      throw Error(ErrorCode::InvalidRecord, "causal example has no '[Arguments]' marker");
    }
    pair.facts_summary = std::string(rest.substr(0, pos));
    rest = rest.substr(pos + sep.size());
  }
  if (!rest.empty()) {
    if (rest.front() != ' ') throw Error(ErrorCode::InvalidRecord, "malformed argument boundary");
    pair.argument_summary = std::string(rest.substr(1));
  }
  return pair;
}

std::size_t whitespace_token_count(std::string_view text) { return corpus::count_words(text); }

TokenBudget TokenBudget::for_family(Family family, TokenCounter counter) {
  return {family, default_max_tokens(family), std::move(counter)};
}

bool fits(const TrainingExample& example, const TokenBudget& budget) {
  if (example.family == Family::Causal) return budget.counter(example.text()) <= budget.max_tokens;
  return budget.counter(example.source()) <= budget.max_tokens &&
         budget.counter(example.target()) <= budget.max_tokens;
}

TrainingExample enforce_budget(TrainingExample example, const TokenBudget& budget) {
  if (budget.max_tokens < TokenBudget::kMinimum) {
    throw Error(ErrorCode::BudgetTooSmall, "token budget " + std::to_string(budget.max_tokens) +
                                               " is below the minimum of " +
                                               std::to_string(TokenBudget::kMinimum));
  }
  if (!fits(TrainingExample{example.family, "", ""}, budget)) {
    throw Error(ErrorCode::BudgetTooSmall, "token budget cannot hold the special tokens");
  }
  if (fits(example, budget)) return example;

  auto source_over = [&] {
    return example.family == Family::Causal ? !fits(example, budget)
                                            : budget.counter(example.source()) > budget.max_tokens;
  };
  if (source_over() && !example.facts.empty()) {
    auto sentences = corpus::segment_sentences(example.facts);
    while (!sentences.empty() && source_over()) {
      sentences.pop_back();
      example.facts = facts_from(sentences);
    }
  }
  if (fits(example, budget)) return example;

  // Largest argument prefix (in words) that fits.
  auto words = text::split_whitespace(example.argument);
  std::size_t lo = 0;
  std::size_t hi = words.size();
  auto with_prefix = [&](std::size_t m) {
    TrainingExample e = example;
    e.argument = text::join(std::vector<std::string>(words.begin(), words.begin() + static_cast<std::ptrdiff_t>(m)), " ");
    return e;
  };
  while (lo < hi) {
    const std::size_t mid = (lo + hi + 1) / 2;
    if (fits(with_prefix(mid), budget)) {
      lo = mid;
    } else {
      hi = mid - 1;
    }
  }
  example = with_prefix(lo);
  if (!fits(example, budget)) {
    throw Error(ErrorCode::BudgetTooSmall, "example cannot be reduced to fit the token budget");
  }
  return example;
}

std::string to_json_line(const FactArgumentPair& pair) {
  json j = {
      {"doc_id", pair.doc_id},
      {"k", pair.k},
      {"source", std::string(to_string(pair.source))},
      {"rewrite_status", std::string(to_string(pair.rewrite_status))},
      {"facts_summary", pair.facts_summary},
      {"argument_summary", pair.argument_summary},
  };
  return j.dump();
}

FactArgumentPair parse_pair_line(std::string_view line, std::size_t line_number) {
  auto j = detail::parse_json(line, line_number);
  try {
    FactArgumentPair pair;
    pair.doc_id = detail::require<std::string>(j, "doc_id");
    pair.k = detail::require<std::size_t>(j, "k");
    pair.source = parse_source(detail::require<std::string>(j, "source"));
    pair.rewrite_status = parse_rewrite_status(detail::require<std::string>(j, "rewrite_status"));
    pair.facts_summary = detail::require<std::string>(j, "facts_summary");
    pair.argument_summary = detail::require<std::string>(j, "argument_summary");
    validate(pair);
    return pair;
  } catch (const ParseError&) {
    throw;
  } catch (const Error& e) {
    throw ParseError(line_number, e.what());
  }
}

void write_pairs(std::ostream& out, const std::vector<FactArgumentPair>& pairs) {
  for (const auto& p : pairs) out << to_json_line(p) << '\n';
}

void write_pairs(const std::filesystem::path& path, const std::vector<FactArgumentPair>& pairs) {
  std::ostringstream out;
  write_pairs(out, pairs);
  detail::write_text_file(path, out.str());
}

std::vector<FactArgumentPair> read_pairs(std::istream& in) {
  std::vector<FactArgumentPair> pairs;
  detail::for_each_line(in, [&](std::string_view line, std::size_t number) {
    pairs.push_back(parse_pair_line(line, number));
  });
  return pairs;
}

std::vector<FactArgumentPair> read_pairs(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  return read_pairs(in);
}

}  // namespace arggen::pairs
