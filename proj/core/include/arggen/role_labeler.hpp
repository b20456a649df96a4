#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "arggen/corpus.hpp"
#include "arggen/crf.hpp"

namespace arggen::labeler {

// Produces one row of label scores per sentence. Encoders that are trainable
// receive d(loss)/d(emissions) through accumulate_gradient and update on
// apply_gradient; fixed encoders ignore both.
class SentenceEncoder {
 public:
  virtual ~SentenceEncoder() = default;

  virtual std::string id() const = 0;
  virtual std::size_t num_labels() const = 0;
  virtual crf::EmissionMatrix encode(std::span<const std::string> sentences) const = 0;

  // Encoder-specific settings as a JSON object string; make_encoder(id(), config())
  // rebuilds an equivalent encoder.
  virtual std::string config() const { return "{}"; }

  virtual bool trainable() const { return false; }
  virtual void zero_gradient() {}
  virtual void accumulate_gradient(std::span<const std::string> /*sentences*/,
                                   const Eigen::MatrixXd& /*d_emissions*/) {}
  virtual void apply_gradient(double /*learning_rate*/) {}

  virtual std::vector<double> parameters() const { return {}; }
  virtual void set_parameters(std::span<const double> /*values*/) {}
};

// Sparse features of one sentence: (index, value) pairs.
using FeatureVector = std::vector<std::pair<std::size_t, double>>;

class FeatureExtractor {
 public:
  virtual ~FeatureExtractor() = default;
  virtual std::string id() const = 0;
  virtual std::string config() const = 0;
  virtual std::size_t dimension() const = 0;
  virtual FeatureVector extract(std::string_view sentence) const = 0;
};

// Binary unigram + bigram indicators hashed into a fixed number of buckets.
class HashedNgramFeatures final : public FeatureExtractor {
 public:
  explicit HashedNgramFeatures(std::size_t buckets = 4096);
  std::string id() const override { return "hashed-ngrams"; }
  std::string config() const override;
  std::size_t dimension() const override { return buckets_; }
  FeatureVector extract(std::string_view sentence) const override;

 private:
  std::size_t buckets_;
};

// One indicator per keyword (case-insensitive substring match).
class KeywordFeatures final : public FeatureExtractor {
 public:
  explicit KeywordFeatures(std::vector<std::string> keywords);
  std::string id() const override { return "keywords"; }
  std::string config() const override;
  std::size_t dimension() const override { return keywords_.size(); }
  FeatureVector extract(std::string_view sentence) const override;

 private:
  std::vector<std::string> keywords_;  // lowercased
};

// emissions = W * features + b, zero-initialised.
class LinearEncoder final : public SentenceEncoder {
 public:
  LinearEncoder(std::unique_ptr<FeatureExtractor> features,
                std::size_t num_labels = corpus::kNumLabels);

  std::string id() const override { return "linear+" + features_->id(); }
  std::size_t num_labels() const override { return num_labels_; }
  crf::EmissionMatrix encode(std::span<const std::string> sentences) const override;
  std::string config() const override;

  bool trainable() const override { return true; }
  void zero_gradient() override;
  void accumulate_gradient(std::span<const std::string> sentences,
                           const Eigen::MatrixXd& d_emissions) override;
  void apply_gradient(double learning_rate) override;

  std::vector<double> parameters() const override;
  void set_parameters(std::span<const double> values) override;

 private:
  std::unique_ptr<FeatureExtractor> features_;
  std::size_t num_labels_;
  Eigen::MatrixXd weights_;  // L x D
  Eigen::VectorXd bias_;
  Eigen::MatrixXd grad_weights_;
  Eigen::VectorXd grad_bias_;
};

// Rebuilds an encoder from the id/config pair stored in a model artifact.
std::unique_ptr<SentenceEncoder> make_encoder(std::string_view id, std::string_view config_json,
                                              std::size_t num_labels = corpus::kNumLabels);

struct LabelerConfig {
  std::size_t batch_size = 4;
  double learning_rate = 0.01;
  std::size_t max_epochs = 100;
  std::size_t patience = 10;  // stagnant validation checks before stopping
  std::uint64_t seed = 0;
};

class LabelerModel {
 public:
  LabelerModel(std::unique_ptr<SentenceEncoder> encoder, crf::CrfParameters crf,
               LabelerConfig config = {});

  const SentenceEncoder& encoder() const { return *encoder_; }
  SentenceEncoder& encoder() { return *encoder_; }
  const crf::CrfParameters& crf() const { return crf_; }
  crf::CrfParameters& crf() { return crf_; }
  const LabelerConfig& config() const { return config_; }

  std::vector<int> predict(std::span<const std::string> sentences) const;

  // Artifact: a versioned JSON document with metadata (label set, encoder id
  // and config, training config, seed) and the flat parameter arrays.
  void save(const std::filesystem::path& path) const;
  static LabelerModel load(const std::filesystem::path& path);

 private:
  std::unique_ptr<SentenceEncoder> encoder_;
  crf::CrfParameters crf_;
  LabelerConfig config_;
};

inline constexpr int kLabelerFormatVersion = 1;

struct EpochStats {
  std::size_t epoch = 0;
  double train_loss = 0.0;  // mean per-document NLL
  double validation_accuracy = 0.0;
};

struct TrainedLabeler {
  LabelerModel model;
  std::vector<EpochStats> history;
  std::size_t best_epoch = 0;
  double best_validation_accuracy = 0.0;
};

// Mini-batch gradient descent on mean document NLL. The checkpoint with the
// best validation per-sentence accuracy is returned; when no validation
// documents are given, training accuracy is used instead.
TrainedLabeler train_labeler(const std::vector<corpus::CaseDocument>& train_docs,
                             const std::vector<corpus::CaseDocument>& validation_docs,
                             std::unique_ptr<SentenceEncoder> encoder, const LabelerConfig& config);

// Per-sentence accuracy against gold labels; sentences without gold are skipped.
double sentence_accuracy(const LabelerModel& model, const std::vector<corpus::CaseDocument>& docs);

// Predicted labels replace the active label; gold labels move to gold_label.
corpus::CaseDocument label_document(const corpus::CaseDocument& doc, const LabelerModel& model);

corpus::RhetoricalLabel keyword_rule(std::string_view sentence);
// The needles used by keyword_rule, in rule order.
std::vector<std::string> baseline_keywords();
corpus::CaseDocument keyword_baseline_labeler(const corpus::CaseDocument& doc);

}  // namespace arggen::labeler
