#pragma once

#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

namespace arggen::embedding {

// Maps texts to equal-dimension vectors, one row per input text.
class EmbeddingProvider {
 public:
  virtual ~EmbeddingProvider() = default;
  virtual std::string id() const = 0;
  virtual std::size_t dimension() const = 0;
  virtual Eigen::MatrixXd embed(std::span<const std::string> texts) const = 0;
};

// Signed feature hashing of lowercased word unigrams and bigrams, L2-normalised.
// Texts without word characters map to the zero vector.
class HashingEmbeddingProvider final : public EmbeddingProvider {
 public:
  explicit HashingEmbeddingProvider(std::size_t dimension = 256);
  std::string id() const override;
  std::size_t dimension() const override { return dimension_; }
  Eigen::MatrixXd embed(std::span<const std::string> texts) const override;

 private:
  std::size_t dimension_;
};

// Fixed text -> vector table, typically read from a JSON fixture of the form
// {"dimension": d, "vectors": {"text": [..], ...}}. Unknown texts are an error.
class FixtureEmbeddingProvider final : public EmbeddingProvider {
 public:
  FixtureEmbeddingProvider(std::size_t dimension, std::map<std::string, Eigen::VectorXd> vectors);
  static FixtureEmbeddingProvider from_file(const std::filesystem::path& path);

  std::string id() const override { return "fixture"; }
  std::size_t dimension() const override { return dimension_; }
  Eigen::MatrixXd embed(std::span<const std::string> texts) const override;

 private:
  std::size_t dimension_;
  std::map<std::string, Eigen::VectorXd> vectors_;
};

// Mean of the provider's vectors over the text's sentences.
Eigen::VectorXd embed_document(std::string_view text, const EmbeddingProvider& provider);

// Zero-norm inputs give 0.
double cosine_similarity(const Eigen::VectorXd& a, const Eigen::VectorXd& b);

}  // namespace arggen::embedding
