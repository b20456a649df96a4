#include "arggen/crf.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "arggen/error.hpp"

namespace arggen::crf {

namespace {

template <typename Vec>
double log_sum_exp(const Vec& v) {
  const double m = v.maxCoeff();
  if (!std::isfinite(m)) return m;
  return m + std::log((v.array() - m).exp().sum());
}

struct ForwardBackward {
  Eigen::MatrixXd alpha;  // alpha(t, j): log-score of prefixes ending in j at t
  Eigen::MatrixXd beta;   // beta(t, j): log-score of suffixes after j at t, incl. stop
  double log_z = 0.0;
};

Eigen::MatrixXd forward(const EmissionMatrix& em, const CrfParameters& crf) {
  const auto n = em.rows();
  const auto L = em.cols();
  Eigen::MatrixXd alpha(n, L);
  alpha.row(0) = crf.start.transpose() + em.row(0);
  Eigen::VectorXd scratch(L);
  for (Eigen::Index t = 1; t < n; ++t) {
    for (Eigen::Index j = 0; j < L; ++j) {
      scratch = alpha.row(t - 1).transpose() + crf.transitions.col(j);
      alpha(t, j) = log_sum_exp(scratch) + em(t, j);
    }
  }
  return alpha;
}

ForwardBackward forward_backward(const EmissionMatrix& em, const CrfParameters& crf) {
  const auto n = em.rows();
  const auto L = em.cols();
  ForwardBackward fb;
  fb.alpha = forward(em, crf);
  fb.beta.resize(n, L);
  fb.beta.row(n - 1) = crf.stop.transpose();
  Eigen::VectorXd scratch(L);
  for (Eigen::Index t = n - 2; t >= 0; --t) {
    for (Eigen::Index i = 0; i < L; ++i) {
      scratch = crf.transitions.row(i).transpose() + em.row(t + 1).transpose() +
                fb.beta.row(t + 1).transpose();
      fb.beta(t, i) = log_sum_exp(scratch);
    }
  }
  Eigen::VectorXd last = fb.alpha.row(n - 1).transpose() + crf.stop;
  fb.log_z = log_sum_exp(last);
  return fb;
}

}  // namespace

CrfParameters CrfParameters::zeros(std::size_t num_labels) {
  const auto L = static_cast<Eigen::Index>(num_labels);
  return {Eigen::MatrixXd::Zero(L, L), Eigen::VectorXd::Zero(L), Eigen::VectorXd::Zero(L)};
}

void check_shapes(const EmissionMatrix& emissions, const CrfParameters& crf) {
  const auto L = crf.start.size();
  if (L < 1 || crf.stop.size() != L || crf.transitions.rows() != L || crf.transitions.cols() != L) {
    throw Error(ErrorCode::ShapeMismatch, "CRF parameter shapes disagree");
  }
  if (emissions.rows() < 1) throw Error(ErrorCode::ShapeMismatch, "emission matrix has no rows");
  if (emissions.cols() != L) {
    throw Error(ErrorCode::ShapeMismatch, "emission matrix has " + std::to_string(emissions.cols()) +
                                              " columns, CRF has " + std::to_string(L) + " labels");
  }
  if (!emissions.allFinite() || !crf.transitions.allFinite() || !crf.start.allFinite() ||
      !crf.stop.allFinite()) {
    throw Error(ErrorCode::ShapeMismatch, "non-finite score");
  }
}

void check_labels(std::span<const int> labels, std::size_t n, std::size_t num_labels) {
  if (labels.size() != n) {
    throw Error(ErrorCode::ShapeMismatch, "label sequence length " + std::to_string(labels.size()) +
                                              " != " + std::to_string(n));
  }
  for (int y : labels) {
    if (y < 0 || static_cast<std::size_t>(y) >= num_labels) {
      throw Error(ErrorCode::InvalidLabel, "label " + std::to_string(y) + " out of range");
    }
  }
}

double score_sequence(const EmissionMatrix& emissions, const CrfParameters& crf,
                      std::span<const int> labels) {
  check_shapes(emissions, crf);
  check_labels(labels, static_cast<std::size_t>(emissions.rows()), crf.num_labels());
  const auto n = labels.size();
  double score = crf.start(labels[0]) + crf.stop(labels[n - 1]);
  for (std::size_t t = 0; t < n; ++t) {
    score += emissions(static_cast<Eigen::Index>(t), labels[t]);
    if (t + 1 < n) score += crf.transitions(labels[t], labels[t + 1]);
  }
  return score;
}

double log_partition(const EmissionMatrix& emissions, const CrfParameters& crf) {
  check_shapes(emissions, crf);
  Eigen::MatrixXd alpha = forward(emissions, crf);
  Eigen::VectorXd last = alpha.row(alpha.rows() - 1).transpose() + crf.stop;
  return log_sum_exp(last);
}

ViterbiResult viterbi_decode(const EmissionMatrix& emissions, const CrfParameters& crf) {
  check_shapes(emissions, crf);
  const auto n = emissions.rows();
  const auto L = emissions.cols();

  Eigen::VectorXd score = crf.start + emissions.row(0).transpose();
  Eigen::VectorXd next(L);
  std::vector<int> backpointer(static_cast<std::size_t>((n - 1) * L));

  for (Eigen::Index t = 1; t < n; ++t) {
    for (Eigen::Index j = 0; j < L; ++j) {
      double best = -std::numeric_limits<double>::infinity();
      int best_i = 0;
      for (Eigen::Index i = 0; i < L; ++i) {
        const double s = score(i) + crf.transitions(i, j);
        if (s > best) {
          best = s;
          best_i = static_cast<int>(i);
        }
      }
      next(j) = best + emissions(t, j);
      backpointer[static_cast<std::size_t>((t - 1) * L + j)] = best_i;
    }
    score.swap(next);
  }
  score += crf.stop;

  ViterbiResult result;
  result.labels.resize(static_cast<std::size_t>(n));
  Eigen::Index last = 0;
  result.score = score.maxCoeff(&last);  // first maximum, i.e. lowest code
  result.labels[static_cast<std::size_t>(n - 1)] = static_cast<int>(last);
  for (Eigen::Index t = n - 2; t >= 0; --t) {
    const auto following = result.labels[static_cast<std::size_t>(t + 1)];
    result.labels[static_cast<std::size_t>(t)] =
        backpointer[static_cast<std::size_t>(t * L + following)];
  }
  return result;
}

Eigen::MatrixXd marginals(const EmissionMatrix& emissions, const CrfParameters& crf) {
  check_shapes(emissions, crf);
  auto fb = forward_backward(emissions, crf);
  return ((fb.alpha + fb.beta).array() - fb.log_z).exp().matrix();
}

NllResult nll_and_gradient(const EmissionMatrix& emissions, const CrfParameters& crf,
                           std::span<const int> gold) {
  check_shapes(emissions, crf);
  const auto n = emissions.rows();
  const auto L = emissions.cols();
  check_labels(gold, static_cast<std::size_t>(n), static_cast<std::size_t>(L));

  auto fb = forward_backward(emissions, crf);
  NllResult result;
  result.loss = fb.log_z - score_sequence(emissions, crf, gold);

  auto& g = result.gradient;
  g.emissions = ((fb.alpha + fb.beta).array() - fb.log_z).exp().matrix();
  g.start = g.emissions.row(0).transpose();
  g.stop = g.emissions.row(n - 1).transpose();
  g.transitions = Eigen::MatrixXd::Zero(L, L);
  for (Eigen::Index t = 0; t + 1 < n; ++t) {
    for (Eigen::Index i = 0; i < L; ++i) {
      for (Eigen::Index j = 0; j < L; ++j) {
        const double log_pair = fb.alpha(t, i) + crf.transitions(i, j) + emissions(t + 1, j) +
                                fb.beta(t + 1, j) - fb.log_z;
        g.transitions(i, j) += std::exp(log_pair);
      }
    }
  }

  // Subtract the empirical counts of the gold path.
  for (Eigen::Index t = 0; t < n; ++t) {
    g.emissions(t, gold[static_cast<std::size_t>(t)]) -= 1.0;
    if (t + 1 < n) {
      g.transitions(gold[static_cast<std::size_t>(t)], gold[static_cast<std::size_t>(t + 1)]) -= 1.0;
    }
  }
  g.start(gold.front()) -= 1.0;
  g.stop(gold.back()) -= 1.0;
  return result;
}

}  // namespace arggen::crf
