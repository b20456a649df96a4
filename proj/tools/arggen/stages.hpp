#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "settings.hpp"

namespace arggen::cli {

struct ReviewOptions {
  enum class Mode { Interactive, ApproveAll, RejectAll } mode = Mode::Interactive;
  std::string note;
};

struct ReportOptions {
  std::vector<std::filesystem::path> runs;
  std::string format = "text";  // text|csv|latex
  std::filesystem::path csv;
  std::filesystem::path latex;
};

void run_synth(const std::filesystem::path& out_dir, std::uint64_t seed, std::ostream& out);
void run_ingest(const PipelineConfig& config, std::ostream& out);
void run_label(const PipelineConfig& config, std::ostream& out);
void run_build_pairs(const PipelineConfig& config, std::ostream& out);
void run_rewrite(const PipelineConfig& config, std::ostream& out);
void run_review(const PipelineConfig& config, const ReviewOptions& options, std::istream& in, std::ostream& out);
void run_train(const PipelineConfig& config, std::ostream& out);
void run_generate(const PipelineConfig& config, std::ostream& out);
void run_evaluate(const PipelineConfig& config, std::ostream& out);
void run_report(const ReportOptions& options, std::ostream& out);

}  // namespace arggen::cli
