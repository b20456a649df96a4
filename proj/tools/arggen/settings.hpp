#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "arggen/corpus.hpp"
#include "arggen/evaluator.hpp"
#include "arggen/generation.hpp"
#include "arggen/pair_builder.hpp"
#include "arggen/rewriter.hpp"
#include "arggen/role_labeler.hpp"
#include "arggen/tiny_lm.hpp"

namespace arggen::cli {

struct SettingSpec {
  std::string key;  // JSON key; the flag is --key with '_' replaced by '-'
  nlohmann::json default_value;
  std::string help;
};

const std::vector<SettingSpec>& setting_specs();

std::string flag_name(const std::string& key);

// Defaults, overlaid with the --config file, overlaid with explicit flags
// (raw strings converted to the default's JSON type).
nlohmann::json merge_settings(const std::optional<std::filesystem::path>& config_file,
                              const std::map<std::string, std::string>& flags);

struct PipelineConfig {
  std::filesystem::path gold;
  std::filesystem::path automatic;
  std::filesystem::path work_dir = ".";
  std::uint64_t seed = 0;
  corpus::SplitCounts split;
  std::size_t k = 5;
  pairs::Family family = pairs::Family::Seq2Seq;
  std::string model = "tiny";
  pairs::Source source = pairs::Source::Original;
  std::string source_label;
  std::string run_id;

  std::string labeler = "keyword";
  labeler::LabelerConfig labeler_config;
  bool relabel_gold = false;

  std::size_t embedding_dim = 256;
  generation::FineTuneConfig fine_tune;
  generation::TinyLmConfig tiny;
  generation::GenerationSettings generation;
  evaluator::OverlapMode overlap = evaluator::OverlapMode::Recall;

  std::string rewrite_backend = "identity";
  std::string rewrite_url;
  std::string rewrite_model;
  std::size_t rewrite_concurrency = 4;
  rewrite::BackendSettings rewrite_settings;

  std::string log_level = "info";

  // runs/<run_id>, with the default id derived from model, family, k, source and seed.
  std::string effective_run_id() const;
  std::filesystem::path run_dir() const { return work_dir / "runs" / effective_run_id(); }
  std::filesystem::path pairs_dir(std::size_t summary_k, pairs::Source data_source) const;
  std::filesystem::path pairs_dir() const { return pairs_dir(k, source); }
};

PipelineConfig pipeline_config(const nlohmann::json& settings);

}  // namespace arggen::cli
