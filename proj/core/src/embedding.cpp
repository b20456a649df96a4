#include "arggen/embedding.hpp"

#include <algorithm>
#include <cmath>

#include "arggen/corpus.hpp"
#include "arggen/error.hpp"
#include "arggen/text.hpp"
#include "json_util.hpp"

namespace arggen::embedding {

HashingEmbeddingProvider::HashingEmbeddingProvider(std::size_t dimension) : dimension_(dimension) {
  if (dimension_ == 0) throw Error(ErrorCode::ConfigError, "embedding dimension must be positive");
}

std::string HashingEmbeddingProvider::id() const { return "hashing-" + std::to_string(dimension_); }

Eigen::MatrixXd HashingEmbeddingProvider::embed(std::span<const std::string> texts) const {
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(texts.size()),
                                              static_cast<Eigen::Index>(dimension_));
  auto add = [&](Eigen::Index row, std::string_view feature, double weight) {
    const auto h = text::fnv1a64(feature);
    const auto col = static_cast<Eigen::Index>(h % dimension_);
    const double sign = (h >> 63) ? -1.0 : 1.0;
    out(row, col) += sign * weight;
  };
  for (std::size_t i = 0; i < texts.size(); ++i) {
    const auto row = static_cast<Eigen::Index>(i);
    auto tokens = text::word_tokens(texts[i]);
    for (std::size_t t = 0; t < tokens.size(); ++t) {
      add(row, tokens[t], 1.0);
      if (t + 1 < tokens.size()) add(row, tokens[t] + " " + tokens[t + 1], 0.5);
    }
    const double norm = out.row(row).norm();
    if (norm > 0.0) out.row(row) /= norm;
  }
  return out;
}

FixtureEmbeddingProvider::FixtureEmbeddingProvider(std::size_t dimension,
                                                   std::map<std::string, Eigen::VectorXd> vectors)
    : dimension_(dimension), vectors_(std::move(vectors)) {
  for (const auto& [text, v] : vectors_) {
    if (static_cast<std::size_t>(v.size()) != dimension_ || !v.allFinite()) {
      throw Error(ErrorCode::ShapeMismatch, "fixture vector for '" + text + "' is malformed");
    }
  }
}

FixtureEmbeddingProvider FixtureEmbeddingProvider::from_file(const std::filesystem::path& path) {
  auto j = detail::read_json_file(path);
  const auto dim = detail::require<std::size_t>(j, "dimension");
  std::map<std::string, Eigen::VectorXd> vectors;
  for (const auto& [text, value] : j.at("vectors").items()) {
    auto v = value.get<std::vector<double>>();
    vectors[text] = Eigen::Map<Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
  }
  return FixtureEmbeddingProvider(dim, std::move(vectors));
}

Eigen::MatrixXd FixtureEmbeddingProvider::embed(std::span<const std::string> texts) const {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(texts.size()), static_cast<Eigen::Index>(dimension_));
  for (std::size_t i = 0; i < texts.size(); ++i) {
    auto it = vectors_.find(texts[i]);
    if (it == vectors_.end()) {
      throw Error(ErrorCode::InvalidRecord, "no fixture vector for '" + texts[i] + "'");
    }
    out.row(static_cast<Eigen::Index>(i)) = it->second.transpose();
  }
  return out;
}

Eigen::VectorXd embed_document(std::string_view text, const EmbeddingProvider& provider) {
  std::vector<std::string> sentences;
  try {
    sentences = corpus::segment_sentences(text);
  } catch (const Error&) {
    throw Error(ErrorCode::EmptyText, "cannot embed an empty text");
  }
  Eigen::MatrixXd rows = provider.embed(sentences);
  return rows.colwise().mean().transpose();
}

double cosine_similarity(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  if (a.size() != b.size()) throw Error(ErrorCode::ShapeMismatch, "vector dimensions differ");
  const double na = a.norm();
  const double nb = b.norm();
  if (na == 0.0 || nb == 0.0) return 0.0;
  return std::clamp(a.dot(b) / (na * nb), -1.0, 1.0);
}

}  // namespace arggen::embedding
