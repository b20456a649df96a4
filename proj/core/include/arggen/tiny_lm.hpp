#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <unordered_map>
#include <vector>

#include <Eigen/Core>

#include "arggen/generation.hpp"

namespace arggen::generation {

struct TinyLmConfig {
  std::size_t hidden = 32;
  std::size_t max_vocab = 8000;
  std::size_t recent_window = 4;
};

// Small word-level next-token model trained from scratch. The hidden state
// mixes embeddings of the two previous tokens with the mean embedding of the
// context (the prefix for causal models, the source for seq2seq); output
// logits add learned bonuses for tokens present in the context and in the
// last few positions, which lets the model copy entities from the facts.
class TinyLm final : public ModelAdapter {
 public:
  explicit TinyLm(Family family, TinyLmConfig config = {});

  std::string model_id() const override;
  Family family() const override { return family_; }
  std::size_t count_tokens(std::string_view text) const override;
  std::vector<double> fine_tune(const TrainingSet& train, const TrainingSet& validation,
                                const FineTuneConfig& config) override;
  std::string generate(std::string_view prompt, const GenerateOptions& options) const override;
  bool read_only_safe() const override { return true; }
  void save(const std::filesystem::path& checkpoint) const override;
  void load(const std::filesystem::path& checkpoint) override;

  // Builds the vocabulary and seeded random weights without training;
  // fine_tune calls this when the model is still empty.
  void prepare(const TrainingSet& train, std::uint64_t seed);
  bool prepared() const { return !vocab_.empty(); }
  std::size_t vocab_size() const { return vocab_.size(); }

  // Mean per-token negative log-likelihood.
  double evaluate_loss(const TrainingSet& data) const;

  struct Parameters;

  // Mean per-token NLL with its gradient w.r.t. every parameter; `grad` is
  // overwritten.
  double loss_and_gradient(const TrainingSet& data, Parameters& grad) const;

  struct Parameters {
    Eigen::MatrixXd prev1;    // V x H
    Eigen::MatrixXd prev2;    // V x H
    Eigen::MatrixXd context;  // V x H
    Eigen::VectorXd hidden_bias;
    Eigen::MatrixXd output;   // V x H
    Eigen::VectorXd output_bias;
    double copy = 0.0;
    double recent = 0.0;
  };

  const Parameters& parameters() const { return params_; }
  Parameters& parameters() { return params_; }

 private:
  struct Sequence {
    std::vector<int> tokens;           // BOS-prefixed decoder sequence incl. EOS
    std::vector<int> context_tokens;   // unique context ids
    std::vector<std::size_t> enters;   // step at which each context id becomes visible
  };

  std::vector<int> encode(std::string_view text) const;
  std::vector<Sequence> sequences(const TrainingSet& data) const;
  double sequence_loss(const Sequence& seq, Parameters* grad) const;

  Family family_;
  TinyLmConfig config_;
  std::vector<std::string> vocab_;
  std::unordered_map<std::string, int> ids_;
  Parameters params_;
};

}  // namespace arggen::generation
