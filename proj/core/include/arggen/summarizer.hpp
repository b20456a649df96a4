#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "arggen/embedding.hpp"

namespace arggen::summarizer {

struct SummaryConfig {
  std::size_t k = 5;
  std::uint64_t seed = 0;
  std::size_t max_iterations = 100;
};

struct KMeansResult {
  std::vector<std::size_t> assignments;
  Eigen::MatrixXd centroids;  // k x d
  // Within-cluster sum of squared distances after each centroid update.
  std::vector<double> objective_history;
  std::size_t iterations = 0;
  bool converged = false;
};

// k-means++ seeding followed by Lloyd iterations over the rows of `points`.
// Empty clusters take the point farthest from its centroid. Throws
// TooFewItems when there are fewer points than clusters.
KMeansResult kmeans_cluster(const Eigen::MatrixXd& points, std::size_t k, std::uint64_t seed,
                            std::size_t max_iterations = 100);

double kmeans_objective(const Eigen::MatrixXd& points, const std::vector<std::size_t>& assignments,
                        const Eigen::MatrixXd& centroids);

// Indices (ascending) of the selected sentences.
std::vector<std::size_t> summarize_indices(const std::vector<std::string>& sentences,
                                           const embedding::EmbeddingProvider& provider,
                                           const SummaryConfig& config);

// Extractive summary of min(k, n) sentences in original order; for each
// cluster, the member nearest its centroid is kept.
std::vector<std::string> summarize(const std::vector<std::string>& sentences,
                                   const embedding::EmbeddingProvider& provider,
                                   const SummaryConfig& config);

}  // namespace arggen::summarizer
