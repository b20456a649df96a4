#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "arggen/embedding.hpp"
#include "arggen/generation.hpp"

namespace arggen::evaluator {

enum class OverlapMode { Recall, Precision, F1 };

std::string_view to_string(OverlapMode mode);
OverlapMode parse_overlap_mode(std::string_view name);

// Whitespace split, non-alphanumeric characters trimmed from both ends of each
// token, lowercased; tokens that end up empty are dropped.
std::vector<std::string> overlap_tokens(std::string_view text);

// Percentage in [0, 100] over unique token sets. Throws EmptyReference when
// the reference has no tokens.
double word_overlap(std::string_view generated, std::string_view reference,
                    OverlapMode mode = OverlapMode::Recall);

// Cosine between document embeddings. Throws EmptyText on blank input.
double semantic_similarity(std::string_view generated, std::string_view reference,
                           const embedding::EmbeddingProvider& provider);

struct PairMetrics {
  std::string doc_id;
  std::string run_id;
  double word_overlap = 0.0;
  double semantic_sim = 0.0;
  bool empty_generation = false;

  bool operator==(const PairMetrics&) const = default;
};

struct MetricRow {
  std::string model_id;
  std::size_t k = 0;
  pairs::Source data_source = pairs::Source::Original;
  std::string source_label;  // shown in the Source column
  double avg_word_overlap = 0.0;
  double avg_semantic_sim = 0.0;
  std::size_t pair_count = 0;

  bool operator==(const MetricRow&) const = default;
};

std::string default_source_label(pairs::Source source);

struct EvaluationReport {
  std::vector<MetricRow> rows;
  std::vector<PairMetrics> details;
};

struct EvaluationOptions {
  OverlapMode mode = OverlapMode::Recall;
  std::string source_label;  // empty: default label for the run's source
};

// Throws MissingData for no records and MixedRuns when the records do not all
// belong to `run`. Empty generations score 0 on both metrics.
EvaluationReport evaluate_run(const std::vector<generation::GenerationRecord>& records,
                              const embedding::EmbeddingProvider& provider, const generation::RunManifest& run,
                              const EvaluationOptions& options = {});

// Fixed-width table; the best value of each metric is wrapped in ** **.
std::string render_table(const std::vector<MetricRow>& rows);
std::string render_csv(const std::vector<MetricRow>& rows);
// The same table as a LaTeX tabular, with \textbf on the best values.
std::string render_latex(const std::vector<MetricRow>& rows);

std::vector<MetricRow> collect_rows(const std::vector<EvaluationReport>& reports);

std::string to_json(const MetricRow& row);
MetricRow metric_row_from_json(std::string_view json_text);
void write_metric_row(const std::filesystem::path& path, const MetricRow& row);
MetricRow read_metric_row(const std::filesystem::path& path);

std::string to_json_line(const PairMetrics& metrics);
PairMetrics parse_pair_metrics_line(std::string_view line, std::size_t line_number = 1);
void write_details(const std::filesystem::path& path, const std::vector<PairMetrics>& details);
std::vector<PairMetrics> read_details(const std::filesystem::path& path);

}  // namespace arggen::evaluator
