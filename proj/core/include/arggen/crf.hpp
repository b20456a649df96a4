#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Core>

namespace arggen::crf {

// n x L unnormalised log-scores, one row per sentence.
using EmissionMatrix = Eigen::MatrixXd;

struct CrfParameters {
  // transitions(i, j): score of label j following label i.
  Eigen::MatrixXd transitions;
  Eigen::VectorXd start;
  Eigen::VectorXd stop;

  static CrfParameters zeros(std::size_t num_labels);

  std::size_t num_labels() const { return static_cast<std::size_t>(start.size()); }
};

// Throws ShapeMismatch on inconsistent shapes or non-finite entries,
// InvalidLabel when a label is outside 0..L-1.
void check_shapes(const EmissionMatrix& emissions, const CrfParameters& crf);
void check_labels(std::span<const int> labels, std::size_t n, std::size_t num_labels);

double score_sequence(const EmissionMatrix& emissions, const CrfParameters& crf,
                      std::span<const int> labels);

// Forward algorithm in log space.
double log_partition(const EmissionMatrix& emissions, const CrfParameters& crf);

struct ViterbiResult {
  std::vector<int> labels;
  double score = 0.0;
};

// Ties resolve toward the lowest label code at every backtracking step.
ViterbiResult viterbi_decode(const EmissionMatrix& emissions, const CrfParameters& crf);

struct Gradient {
  Eigen::MatrixXd emissions;
  Eigen::MatrixXd transitions;
  Eigen::VectorXd start;
  Eigen::VectorXd stop;
};

struct NllResult {
  double loss = 0.0;
  Gradient gradient;
};

// loss = log Z - score(gold); gradients from forward-backward marginals.
NllResult nll_and_gradient(const EmissionMatrix& emissions, const CrfParameters& crf,
                           std::span<const int> gold);

// Per-position label marginals p(y_t = j), n x L.
Eigen::MatrixXd marginals(const EmissionMatrix& emissions, const CrfParameters& crf);

}  // namespace arggen::crf
