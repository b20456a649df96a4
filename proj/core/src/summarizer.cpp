#include "arggen/summarizer.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

#include "arggen/error.hpp"
#include "arggen/random.hpp"

namespace arggen::summarizer {

namespace {

using Index = Eigen::Index;

double squared_distance(const Eigen::MatrixXd& points, Index i, const Eigen::MatrixXd& centroids, Index c) {
  return (points.row(i) - centroids.row(c)).squaredNorm();
}

Eigen::MatrixXd seed_centroids(const Eigen::MatrixXd& points, std::size_t k, Rng& rng) {
  const auto n = static_cast<std::size_t>(points.rows());
  Eigen::MatrixXd centroids(static_cast<Index>(k), points.cols());
  std::vector<bool> chosen(n, false);
  std::vector<double> d2(n, std::numeric_limits<double>::infinity());

  std::size_t pick = rng.uniform_index(n);
  for (std::size_t c = 0; c < k; ++c) {
    if (c > 0) {
      double total = 0.0;
      for (std::size_t i = 0; i < n; ++i) total += d2[i];
      if (total > 0.0) {
        const double r = rng.uniform() * total;
        double acc = 0.0;
        pick = n;
        for (std::size_t i = 0; i < n; ++i) {
          acc += d2[i];
          if (d2[i] > 0.0 && acc > r) {
            pick = i;
            break;
          }
        }
        if (pick == n) {  // rounding at the tail
          for (std::size_t i = n; i-- > 0;) {
            if (d2[i] > 0.0) {
              pick = i;
              break;
            }
          }
        }
      } else {
        // All remaining points coincide with a centroid.
        std::vector<std::size_t> free;
        for (std::size_t i = 0; i < n; ++i) {
          if (!chosen[i]) free.push_back(i);
        }
        pick = free[rng.uniform_index(free.size())];
      }
    }
    chosen[pick] = true;
    centroids.row(static_cast<Index>(c)) = points.row(static_cast<Index>(pick));
    for (std::size_t i = 0; i < n; ++i) {
      d2[i] = std::min(d2[i], squared_distance(points, static_cast<Index>(i), centroids, static_cast<Index>(c)));
    }
  }
  return centroids;
}

std::vector<std::size_t> assign(const Eigen::MatrixXd& points, const Eigen::MatrixXd& centroids) {
  std::vector<std::size_t> out(static_cast<std::size_t>(points.rows()));
  for (Index i = 0; i < points.rows(); ++i) {
    double best = std::numeric_limits<double>::infinity();
    std::size_t best_c = 0;
    for (Index c = 0; c < centroids.rows(); ++c) {
      const double d = squared_distance(points, i, centroids, c);
      if (d < best) {
        best = d;
        best_c = static_cast<std::size_t>(c);
      }
    }
    out[static_cast<std::size_t>(i)] = best_c;
  }
  return out;
}

void repair_empty(const Eigen::MatrixXd& points, std::vector<std::size_t>& assignments,
                  const Eigen::MatrixXd& centroids, std::size_t k) {
  std::vector<std::size_t> sizes(k, 0);
  for (auto a : assignments) ++sizes[a];
  for (std::size_t c = 0; c < k; ++c) {
    if (sizes[c] != 0) continue;
    double worst = -1.0;
    std::size_t victim = assignments.size();
    for (std::size_t i = 0; i < assignments.size(); ++i) {
      if (sizes[assignments[i]] < 2) continue;
      const double d = squared_distance(points, static_cast<Index>(i), centroids,
                                        static_cast<Index>(assignments[i]));
      if (d > worst) {
        worst = d;
        victim = i;
      }
    }
    --sizes[assignments[victim]];
    assignments[victim] = c;
    sizes[c] = 1;
  }
}

Eigen::MatrixXd update(const Eigen::MatrixXd& points, const std::vector<std::size_t>& assignments,
                       std::size_t k) {
  Eigen::MatrixXd centroids = Eigen::MatrixXd::Zero(static_cast<Index>(k), points.cols());
  std::vector<double> counts(k, 0.0);
  for (std::size_t i = 0; i < assignments.size(); ++i) {
    centroids.row(static_cast<Index>(assignments[i])) += points.row(static_cast<Index>(i));
    counts[assignments[i]] += 1.0;
  }
  for (std::size_t c = 0; c < k; ++c) centroids.row(static_cast<Index>(c)) /= counts[c];
  return centroids;
}

}  // namespace

double kmeans_objective(const Eigen::MatrixXd& points, const std::vector<std::size_t>& assignments,
                        const Eigen::MatrixXd& centroids) {
  double total = 0.0;
  for (std::size_t i = 0; i < assignments.size(); ++i) {
    total += squared_distance(points, static_cast<Index>(i), centroids, static_cast<Index>(assignments[i]));
  }
  return total;
}

KMeansResult kmeans_cluster(const Eigen::MatrixXd& points, std::size_t k, std::uint64_t seed,
                            std::size_t max_iterations) {
  const auto n = static_cast<std::size_t>(points.rows());
  if (k == 0) throw Error(ErrorCode::ConfigError, "k must be at least 1");
  if (n < k) {
    throw Error(ErrorCode::TooFewItems,
                "cannot form " + std::to_string(k) + " clusters from " + std::to_string(n) + " points");
  }
  if (max_iterations == 0) throw Error(ErrorCode::ConfigError, "max_iterations must be positive");
  if (!points.allFinite()) throw Error(ErrorCode::ShapeMismatch, "non-finite embedding");

  Rng rng(seed);
  KMeansResult result;
  result.centroids = seed_centroids(points, k, rng);
  result.assignments = assign(points, result.centroids);

  for (std::size_t it = 1; it <= max_iterations; ++it) {
    repair_empty(points, result.assignments, result.centroids, k);
    result.centroids = update(points, result.assignments, k);
    result.objective_history.push_back(kmeans_objective(points, result.assignments, result.centroids));
    result.iterations = it;
    auto next = assign(points, result.centroids);
    if (next == result.assignments) {
      result.converged = true;
      break;
    }
    if (it == max_iterations) break;  // keep assignments consistent with centroids
    result.assignments = std::move(next);
  }
  return result;
}

std::vector<std::size_t> summarize_indices(const std::vector<std::string>& sentences,
                                           const embedding::EmbeddingProvider& provider,
                                           const SummaryConfig& config) {
  if (sentences.empty()) throw Error(ErrorCode::EmptyInput, "nothing to summarize");
  if (config.k == 0) throw Error(ErrorCode::ConfigError, "summary length k must be at least 1");
  std::vector<std::size_t> picked(sentences.size());
  std::iota(picked.begin(), picked.end(), 0);
  if (sentences.size() <= config.k) return picked;

  Eigen::MatrixXd points = provider.embed(sentences);
  if (static_cast<std::size_t>(points.rows()) != sentences.size()) {
    throw Error(ErrorCode::ShapeMismatch, "embedding provider returned the wrong number of rows");
  }
  auto clusters = kmeans_cluster(points, config.k, config.seed, config.max_iterations);

  picked.assign(config.k, sentences.size());
  std::vector<double> best(config.k, std::numeric_limits<double>::infinity());
  for (std::size_t i = 0; i < sentences.size(); ++i) {
    const auto c = clusters.assignments[i];
    const double d = squared_distance(points, static_cast<Index>(i), clusters.centroids, static_cast<Index>(c));
    if (d < best[c]) {
      best[c] = d;
      picked[c] = i;
    }
  }
  std::sort(picked.begin(), picked.end());
  return picked;
}

std::vector<std::string> summarize(const std::vector<std::string>& sentences,
                                   const embedding::EmbeddingProvider& provider,
                                   const SummaryConfig& config) {
  std::vector<std::string> out;
  for (auto i : summarize_indices(sentences, provider, config)) out.push_back(sentences[i]);
  return out;
}

}  // namespace arggen::summarizer
