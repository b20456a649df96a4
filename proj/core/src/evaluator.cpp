#include "arggen/evaluator.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <fmt/format.h>

#include "arggen/error.hpp"
#include "arggen/text.hpp"
#include "json_util.hpp"

namespace arggen::evaluator {

using detail::json;

namespace {

bool is_word_byte(unsigned char c) { return std::isalnum(c) || c >= 0x80; }

std::set<std::string> token_set(std::string_view text) {
  auto tokens = overlap_tokens(text);
  return {tokens.begin(), tokens.end()};
}

std::string format_overlap(double v) { return fmt::format("{:.2f}%", v); }
std::string format_sim(double v) { return fmt::format("{:.3f}", v); }

struct Best {
  double overlap = 0.0;
  double sim = 0.0;
};

// Bolding compares the printed values, so equal-looking cells are treated alike.
Best best_of(const std::vector<MetricRow>& rows) {
  Best best{-1.0, -2.0};
  for (const auto& r : rows) {
    best.overlap = std::max(best.overlap, std::stod(fmt::format("{:.2f}", r.avg_word_overlap)));
    best.sim = std::max(best.sim, std::stod(format_sim(r.avg_semantic_sim)));
  }
  return best;
}

bool is_best_overlap(const MetricRow& r, const Best& b) {
  return std::stod(fmt::format("{:.2f}", r.avg_word_overlap)) == b.overlap;
}
bool is_best_sim(const MetricRow& r, const Best& b) { return std::stod(format_sim(r.avg_semantic_sim)) == b.sim; }

}  // namespace

std::string_view to_string(OverlapMode mode) {
  switch (mode) {
    case OverlapMode::Recall: return "recall";
    case OverlapMode::Precision: return "precision";
    case OverlapMode::F1: return "f1";
  }
  return "recall";
}

OverlapMode parse_overlap_mode(std::string_view name) {
  if (name == "recall") return OverlapMode::Recall;
  if (name == "precision") return OverlapMode::Precision;
  if (name == "f1") return OverlapMode::F1;
  throw Error(ErrorCode::ConfigError, "unknown overlap mode '" + std::string(name) + "'");
}

std::vector<std::string> overlap_tokens(std::string_view input) {
  std::vector<std::string> out;
  for (const auto& raw : text::split_whitespace(input)) {
    std::size_t b = 0;
    std::size_t e = raw.size();
    while (b < e && !is_word_byte(static_cast<unsigned char>(raw[b]))) ++b;
    while (e > b && !is_word_byte(static_cast<unsigned char>(raw[e - 1]))) --e;
    if (b < e) out.push_back(text::to_lower(std::string_view(raw).substr(b, e - b)));
  }
  return out;
}

double word_overlap(std::string_view generated, std::string_view reference, OverlapMode mode) {
  const auto R = token_set(reference);
  if (R.empty()) throw Error(ErrorCode::EmptyReference, "reference has no tokens");
  const auto G = token_set(generated);
  std::size_t common = 0;
  for (const auto& t : G) common += R.count(t);

  const double recall = 100.0 * static_cast<double>(common) / static_cast<double>(R.size());
  const double precision = G.empty() ? 0.0 : 100.0 * static_cast<double>(common) / static_cast<double>(G.size());
  switch (mode) {
    case OverlapMode::Recall: return recall;
    case OverlapMode::Precision: return precision;
    case OverlapMode::F1: return common == 0 ? 0.0 : 2.0 * recall * precision / (recall + precision);
  }
  return recall;
}

double semantic_similarity(std::string_view generated, std::string_view reference,
                           const embedding::EmbeddingProvider& provider) {
  if (text::trim(generated).empty() || text::trim(reference).empty()) {
    throw Error(ErrorCode::EmptyText, "semantic similarity needs two non-empty texts");
  }
  return embedding::cosine_similarity(embedding::embed_document(generated, provider),
                                      embedding::embed_document(reference, provider));
}

std::string default_source_label(pairs::Source source) {
  return source == pairs::Source::Original ? "Original" : "Rewritten";
}

EvaluationReport evaluate_run(const std::vector<generation::GenerationRecord>& records,
                              const embedding::EmbeddingProvider& provider, const generation::RunManifest& run,
                              const EvaluationOptions& options) {
  if (records.empty()) throw Error(ErrorCode::MissingData, "no generation records to evaluate");
  EvaluationReport report;
  double overlap_sum = 0.0;
  double sim_sum = 0.0;
  for (const auto& rec : records) {
    if (rec.run_id != run.run_id) {
      throw Error(ErrorCode::MixedRuns, "record for " + rec.doc_id + " belongs to run '" + rec.run_id +
                                            "', expected '" + run.run_id + "'");
    }
    PairMetrics m;
    m.doc_id = rec.doc_id;
    m.run_id = rec.run_id;
    m.empty_generation = rec.empty_generation || text::trim(rec.generated_argument).empty();
    if (!m.empty_generation) {
      m.word_overlap = word_overlap(rec.generated_argument, rec.reference_argument, options.mode);
      m.semantic_sim = semantic_similarity(rec.generated_argument, rec.reference_argument, provider);
    } else if (token_set(rec.reference_argument).empty()) {
      throw Error(ErrorCode::EmptyReference, "reference for " + rec.doc_id + " has no tokens");
    }
    overlap_sum += m.word_overlap;
    sim_sum += m.semantic_sim;
    report.details.push_back(std::move(m));
  }
  MetricRow row;
  row.model_id = run.model_id;
  row.k = run.k;
  row.data_source = run.data_source;
  row.source_label = options.source_label.empty() ? default_source_label(run.data_source) : options.source_label;
  row.pair_count = report.details.size();
  row.avg_word_overlap = overlap_sum / static_cast<double>(row.pair_count);
  row.avg_semantic_sim = sim_sum / static_cast<double>(row.pair_count);
  report.rows.push_back(std::move(row));
  return report;
}

std::vector<MetricRow> collect_rows(const std::vector<EvaluationReport>& reports) {
  std::vector<MetricRow> rows;
  for (const auto& r : reports) rows.insert(rows.end(), r.rows.begin(), r.rows.end());
  return rows;
}

std::string render_table(const std::vector<MetricRow>& rows) {
  const std::vector<std::string> header = {"LLM", "#Sent", "Source", "Avg Word Overlap", "Avg Semantic Sim"};
  const std::vector<bool> right = {false, true, false, true, true};
  const Best best = best_of(rows);

  std::vector<std::vector<std::string>> cells;
  for (const auto& r : rows) {
    auto overlap = format_overlap(r.avg_word_overlap);
    auto sim = format_sim(r.avg_semantic_sim);
    if (is_best_overlap(r, best)) overlap = "**" + overlap + "**";
    if (is_best_sim(r, best)) sim = "**" + sim + "**";
    cells.push_back({r.model_id, std::to_string(r.k), r.source_label, overlap, sim});
  }
  std::vector<std::size_t> width(header.size());
  for (std::size_t c = 0; c < header.size(); ++c) {
    width[c] = header[c].size();
    for (const auto& row : cells) width[c] = std::max(width[c], row[c].size());
  }

  auto line = [&](const std::vector<std::string>& values) {
    std::string out;
    for (std::size_t c = 0; c < values.size(); ++c) {
      if (c) out += "  ";
      const std::string pad(width[c] - values[c].size(), ' ');
      out += right[c] ? pad + values[c] : values[c] + pad;
    }
    while (!out.empty() && out.back() == ' ') out.pop_back();
    return out + "\n";
  };
  std::string rule;
  for (std::size_t c = 0; c < width.size(); ++c) {
    if (c) rule += "  ";
    rule += std::string(width[c], '-');
  }
  rule += "\n";

  std::string out = line(header) + rule;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    // A rule separates runs on different data sources.
    if (i > 0 && rows[i].source_label != rows[i - 1].source_label) out += rule;
    out += line(cells[i]);
  }
  return out;
}

std::string render_csv(const std::vector<MetricRow>& rows) {
  std::string out = "model_id,k,source,pair_count,avg_word_overlap,avg_semantic_sim\n";
  auto quote = [](const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char c : s) q += c == '"' ? std::string("\"\"") : std::string(1, c);
    return q + "\"";
  };
  for (const auto& r : rows) {
    out += fmt::format("{},{},{},{},{:.6f},{:.6f}\n", quote(r.model_id), r.k, pairs::to_string(r.data_source),
                       r.pair_count, r.avg_word_overlap, r.avg_semantic_sim);
  }
  return out;
}

std::string render_latex(const std::vector<MetricRow>& rows) {
  const Best best = best_of(rows);
  auto escape = [](const std::string& s) {
    std::string out;
    for (char c : s) {
      if (c == '%' || c == '&' || c == '#' || c == '_' || c == '$') out += '\\';
      out += c;
    }
    return out;
  };
  std::string out =
      "\\begin{tabular}{|l|c|c|c|c|c|}\n"
      "\\hline\n"
      "&\\multicolumn{2}{|c|}{\\textbf{Data Format}} & \\multicolumn{2}{|c|}{\\textbf{Evaluation Metric}} \\\\\n"
      "\\hline\n"
      "\\textbf{LLM} &\\textbf{\\#Sent} &\\textbf{Source} & \\textbf{Avg Word Overlap} & "
      "\\textbf{Avg Semantic Sim} \\\\\n"
      "\\hline\n";
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    if (i > 0 && r.source_label != rows[i - 1].source_label) out += "\\hline\n";
    auto overlap = fmt::format("{:.2f}\\%", r.avg_word_overlap);
    auto sim = format_sim(r.avg_semantic_sim);
    if (is_best_overlap(r, best)) overlap = "\\textbf{" + overlap + "}";
    if (is_best_sim(r, best)) sim = "\\textbf{" + sim + "}";
    out += fmt::format("{} &{} &{} & {} & {} \\\\\n", escape(r.model_id), r.k, escape(r.source_label), overlap, sim);
  }
  out += "\\hline\n\\end{tabular}\n";
  return out;
}

std::string to_json(const MetricRow& row) {
  json j = {
      {"model_id", row.model_id},
      {"k", row.k},
      {"data_source", std::string(pairs::to_string(row.data_source))},
      {"source_label", row.source_label},
      {"avg_word_overlap", row.avg_word_overlap},
      {"avg_semantic_sim", row.avg_semantic_sim},
      {"pair_count", row.pair_count},
  };
  return j.dump(2);
}

MetricRow metric_row_from_json(std::string_view json_text) {
  auto j = detail::parse_json(json_text, 1);
  MetricRow row;
  row.model_id = detail::require<std::string>(j, "model_id");
  row.k = detail::require<std::size_t>(j, "k");
  row.data_source = pairs::parse_source(detail::require<std::string>(j, "data_source"));
  row.source_label = detail::require<std::string>(j, "source_label");
  row.avg_word_overlap = detail::require<double>(j, "avg_word_overlap");
  row.avg_semantic_sim = detail::require<double>(j, "avg_semantic_sim");
  row.pair_count = detail::require<std::size_t>(j, "pair_count");
  if (row.pair_count == 0) throw Error(ErrorCode::InvalidRecord, "metric row with zero pairs");
  return row;
}

void write_metric_row(const std::filesystem::path& path, const MetricRow& row) {
  detail::write_text_file(path, to_json(row) + "\n");
}

MetricRow read_metric_row(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return metric_row_from_json(ss.str());
}

std::string to_json_line(const PairMetrics& m) {
  json j = {
      {"doc_id", m.doc_id},
      {"run_id", m.run_id},
      {"word_overlap", m.word_overlap},
      {"semantic_sim", m.semantic_sim},
      {"empty_generation", m.empty_generation},
  };
  return j.dump();
}

PairMetrics parse_pair_metrics_line(std::string_view line, std::size_t line_number) {
  auto j = detail::parse_json(line, line_number);
  PairMetrics m;
  m.doc_id = detail::require<std::string>(j, "doc_id");
  m.run_id = detail::require<std::string>(j, "run_id");
  m.word_overlap = detail::require<double>(j, "word_overlap");
  m.semantic_sim = detail::require<double>(j, "semantic_sim");
  m.empty_generation = detail::require<bool>(j, "empty_generation");
  return m;
}

void write_details(const std::filesystem::path& path, const std::vector<PairMetrics>& details) {
  std::string out;
  for (const auto& m : details) out += to_json_line(m) + "\n";
  detail::write_text_file(path, out);
}

std::vector<PairMetrics> read_details(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  std::vector<PairMetrics> out;
  detail::for_each_line(in, [&](std::string_view line, std::size_t n) { out.push_back(parse_pair_metrics_line(line, n)); });
  return out;
}

}  // namespace arggen::evaluator
