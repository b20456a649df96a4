#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "arggen/pair_builder.hpp"

namespace arggen::generation {

using pairs::Family;

struct FineTuneConfig {
  std::size_t epochs = 10;
  double learning_rate = 0.01;
  std::size_t batch_size = 8;
  std::uint64_t seed = 0;
  std::size_t max_tokens = 0;  // 0: family default (1024 causal, 512 seq2seq)

  std::size_t effective_max_tokens(Family family) const {
    return max_tokens ? max_tokens : pairs::TokenBudget::default_max_tokens(family);
  }
};

struct SourceTarget {
  std::string source;
  std::string target;

  bool operator==(const SourceTarget&) const = default;
};

// Causal adapters receive single strings, seq2seq adapters (source, target).
using TrainingSet = std::variant<std::vector<std::string>, std::vector<SourceTarget>>;

struct GenerateOptions {
  std::size_t max_new_tokens = 256;
  std::size_t beam_width = 1;  // 1 = greedy
  std::uint64_t seed = 0;
};

class ModelAdapter {
 public:
  virtual ~ModelAdapter() = default;

  virtual std::string model_id() const = 0;
  virtual Family family() const = 0;
  virtual std::size_t count_tokens(std::string_view text) const = 0;

  // Trains in place; returns the validation loss after each epoch.
  virtual std::vector<double> fine_tune(const TrainingSet& train, const TrainingSet& validation,
                                        const FineTuneConfig& config) = 0;

  // Deterministic for beam_width >= 1 and a fixed seed.
  virtual std::string generate(std::string_view prompt, const GenerateOptions& options) const = 0;

  // Whether generate() may be called concurrently.
  virtual bool read_only_safe() const { return false; }

  virtual void save(const std::filesystem::path& checkpoint) const = 0;
  virtual void load(const std::filesystem::path& checkpoint) = 0;
};

// Oracle stub: answers every prompt it has seen with the stored target.
// References for test prompts can be registered up front, which gives an
// upper-bound run for pipeline checks.
class EchoAdapter final : public ModelAdapter {
 public:
  explicit EchoAdapter(Family family = Family::Seq2Seq) : family_(family) {}

  std::string model_id() const override { return "echo"; }
  Family family() const override { return family_; }
  std::size_t count_tokens(std::string_view text) const override;
  std::vector<double> fine_tune(const TrainingSet& train, const TrainingSet& validation,
                                const FineTuneConfig& config) override;
  std::string generate(std::string_view prompt, const GenerateOptions& options) const override;
  bool read_only_safe() const override { return true; }
  void save(const std::filesystem::path& checkpoint) const override;
  void load(const std::filesystem::path& checkpoint) override;

  void add_reference(std::string prompt, std::string target);

 private:
  Family family_;
  std::map<std::string, std::string, std::less<>> table_;
};

struct RunManifest {
  std::string run_id;
  std::string model_id;
  Family family = Family::Causal;
  std::size_t k = 0;
  pairs::Source data_source = pairs::Source::Original;
  FineTuneConfig config;
  std::string dataset_fingerprint;
  std::size_t train_count = 0;
  std::size_t validation_count = 0;
  std::vector<double> validation_losses;
  std::string checkpoint;  // relative to the run directory
  std::string created_at;
  std::string finished_at;
};

inline constexpr int kManifestVersion = 1;

std::string to_json(const RunManifest& manifest);
RunManifest manifest_from_json(std::string_view json_text);
void write_manifest(const std::filesystem::path& path, const RunManifest& manifest);
RunManifest read_manifest(const std::filesystem::path& path);

// SHA-256 over the sorted per-record hashes, so it ignores record order.
std::string dataset_fingerprint(const std::vector<pairs::FactArgumentPair>& train,
                                const std::vector<pairs::FactArgumentPair>& validation = {});

std::string utc_timestamp();

struct RunInfo {
  std::string run_id;
  std::size_t k = 0;
  pairs::Source data_source = pairs::Source::Original;
};

pairs::TokenBudget adapter_budget(const ModelAdapter& adapter, const FineTuneConfig& config);

// Serializes pairs for the adapter's family and fine-tunes it. Throws
// MissingData on an empty training set and BudgetViolation if any example
// exceeds the adapter's token budget.
RunManifest fine_tune_run(const std::vector<pairs::FactArgumentPair>& train_pairs,
                          const std::vector<pairs::FactArgumentPair>& validation_pairs, ModelAdapter& adapter,
                          const FineTuneConfig& config, const RunInfo& info);

// Applies enforce_budget under the adapter's counter. Pairs whose facts
// shrink to nothing are dropped with a warning.
std::vector<pairs::FactArgumentPair> fit_to_budget(const std::vector<pairs::FactArgumentPair>& input,
                                                   const ModelAdapter& adapter, const FineTuneConfig& config);

TrainingSet make_training_set(const std::vector<pairs::FactArgumentPair>& pairs, Family family);

struct GenerationRecord {
  std::string doc_id;
  std::string facts_summary;
  std::string generated_argument;
  std::string reference_argument;
  std::string run_id;
  bool empty_generation = false;

  bool operator==(const GenerationRecord&) const = default;
};

// The inference prompt generate_for_test sends for a pair: the source side of
// the inference example, fitted to the run's budget.
std::string test_prompt(const pairs::FactArgumentPair& pair, const ModelAdapter& adapter,
                        const FineTuneConfig& config);

// Removes an echoed prompt and the special tokens from a raw generation.
std::string strip_generation(std::string_view raw, std::string_view prompt);

struct GenerationSettings {
  GenerateOptions options;
  std::size_t threads = 1;
};

std::vector<GenerationRecord> generate_for_test(const std::vector<pairs::FactArgumentPair>& test_pairs,
                                                const ModelAdapter& adapter, const RunManifest& run,
                                                const GenerationSettings& settings = {});

std::string to_json_line(const GenerationRecord& record);
GenerationRecord parse_generation_line(std::string_view line, std::size_t line_number = 1);
void write_generations(const std::filesystem::path& path, const std::vector<GenerationRecord>& records);
std::vector<GenerationRecord> read_generations(const std::filesystem::path& path);

}  // namespace arggen::generation
