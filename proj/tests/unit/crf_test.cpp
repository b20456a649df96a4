#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "arggen/crf.hpp"
#include "test_support.hpp"

namespace {

using namespace arggen;
using namespace arggen::crf;
using arggen::testing::brute_force;
using arggen::testing::random_crf;
using arggen::testing::random_emissions;
using arggen::testing::relative_error;

TEST(Score, AllZeroIsZero) {
  auto p = CrfParameters::zeros(7);
  Eigen::MatrixXd em = Eigen::MatrixXd::Zero(1, 7);
  std::vector<int> y{0};
  EXPECT_DOUBLE_EQ(score_sequence(em, p, y), 0.0);
  Eigen::MatrixXd em3 = Eigen::MatrixXd::Zero(3, 7);
  std::vector<int> y3{4, 1, 6};
  EXPECT_DOUBLE_EQ(score_sequence(em3, p, y3), 0.0);
}

TEST(Score, HandSumOfFourTerms) {
  auto p = CrfParameters::zeros(7);
  p.transitions(2, 5) = 3.0;
  p.start(2) = 1.0;
  p.stop(5) = 2.0;
  Eigen::MatrixXd em = Eigen::MatrixXd::Zero(2, 7);
  std::vector<int> y{2, 5};
  EXPECT_DOUBLE_EQ(score_sequence(em, p, y), 6.0);
}

TEST(Score, LabelOutOfRange) {
  auto p = CrfParameters::zeros(3);
  Eigen::MatrixXd em = Eigen::MatrixXd::Zero(2, 3);
  std::vector<int> bad{0, 3};
  EXPECT_ARGGEN_ERROR(score_sequence(em, p, bad), InvalidLabel);
  std::vector<int> short_seq{0};
  EXPECT_ARGGEN_ERROR(score_sequence(em, p, short_seq), ShapeMismatch);
}

TEST(Shapes, Rejected) {
  auto p = CrfParameters::zeros(3);
  Eigen::MatrixXd em = Eigen::MatrixXd::Zero(2, 4);
  EXPECT_ARGGEN_ERROR(log_partition(em, p), ShapeMismatch);
  Eigen::MatrixXd nan = Eigen::MatrixXd::Zero(2, 3);
  nan(1, 1) = std::nan("");
  EXPECT_ARGGEN_ERROR(viterbi_decode(nan, p), ShapeMismatch);
}

TEST(Partition, ZeroParameters) {
  auto p = CrfParameters::zeros(7);
  EXPECT_NEAR(log_partition(Eigen::MatrixXd::Zero(1, 7), p), std::log(7.0), 1e-12);
  EXPECT_NEAR(log_partition(Eigen::MatrixXd::Zero(2, 7), p), std::log(49.0), 1e-12);
}

TEST(Partition, MatchesEnumerationOn27Sequences) {
  std::mt19937_64 rng(5);
  auto p = random_crf(3, rng);
  auto em = random_emissions(3, 3, rng);
  EXPECT_NEAR(log_partition(em, p), brute_force(em, p).log_z, 1e-6);
}

TEST(Partition, StableForLargeScores) {
  auto p = CrfParameters::zeros(2);
  Eigen::MatrixXd em = Eigen::MatrixXd::Constant(3, 2, 800.0);
  EXPECT_NEAR(log_partition(em, p), 2400.0 + std::log(8.0), 1e-9);
}

TEST(Viterbi, SingleRowArgmax) {
  auto p = CrfParameters::zeros(7);
  Eigen::MatrixXd em = Eigen::MatrixXd::Zero(1, 7);
  em(0, 2) = 5.0;
  auto r = viterbi_decode(em, p);
  EXPECT_EQ(r.labels, std::vector<int>{2});
  EXPECT_DOUBLE_EQ(r.score, 5.0);
}

TEST(Viterbi, TiesGoToLowestCode) {
  auto p = CrfParameters::zeros(7);
  auto r = viterbi_decode(Eigen::MatrixXd::Zero(4, 7), p);
  EXPECT_EQ(r.labels, (std::vector<int>{0, 0, 0, 0}));
  EXPECT_DOUBLE_EQ(r.score, 0.0);
}

TEST(Viterbi, MatchesExhaustiveSearch) {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 5; ++trial) {
    auto p = random_crf(7, rng);
    auto em = random_emissions(4, 7, rng);
    auto oracle = brute_force(em, p);
    auto r = viterbi_decode(em, p);
    EXPECT_NEAR(r.score, oracle.best_score, 1e-6);
    EXPECT_EQ(r.labels, oracle.best);
  }
}

TEST(Viterbi, TieBreakOnQuantisedScores) {
  // Integer-valued parameters make exact ties common.
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<int> u(0, 1);
  for (int trial = 0; trial < 20; ++trial) {
    auto p = CrfParameters::zeros(3);
    Eigen::MatrixXd em(3, 3);
    for (Eigen::Index i = 0; i < em.size(); ++i) em.data()[i] = u(rng);
    for (Eigen::Index i = 0; i < p.transitions.size(); ++i) p.transitions.data()[i] = u(rng);
    auto oracle = brute_force(em, p);
    auto r = viterbi_decode(em, p);
    EXPECT_DOUBLE_EQ(r.score, oracle.best_score);
    EXPECT_EQ(r.labels, oracle.best);
  }
}

TEST(Marginals, RowsSumToOne) {
  std::mt19937_64 rng(9);
  auto p = random_crf(4, rng);
  auto em = random_emissions(5, 4, rng);
  auto m = marginals(em, p);
  for (Eigen::Index t = 0; t < m.rows(); ++t) EXPECT_NEAR(m.row(t).sum(), 1.0, 1e-12);
}

TEST(Nll, UniformSingleStep) {
  auto p = CrfParameters::zeros(7);
  std::vector<int> y{3};
  EXPECT_NEAR(nll_and_gradient(Eigen::MatrixXd::Zero(1, 7), p, y).loss, std::log(7.0), 1e-12);
}

TEST(Nll, PeakedParametersNearZeroLoss) {
  auto p = CrfParameters::zeros(3);
  Eigen::MatrixXd em = Eigen::MatrixXd::Zero(3, 3);
  em(0, 1) = 30.0;
  em(1, 2) = 30.0;
  em(2, 0) = 30.0;
  auto path = viterbi_decode(em, p).labels;
  auto loss = nll_and_gradient(em, p, path).loss;
  EXPECT_GE(loss, 0.0);
  EXPECT_LT(loss, 1e-9);
}

TEST(Nll, GradientMatchesCentralDifferences) {
  std::mt19937_64 rng(21);
  auto p = random_crf(3, rng);
  auto em = random_emissions(3, 3, rng);
  std::vector<int> gold{2, 0, 1};
  auto g = nll_and_gradient(em, p, gold).gradient;
  const double h = 1e-5;
  auto loss = [&](const Eigen::MatrixXd& e, const CrfParameters& q) { return nll_and_gradient(e, q, gold).loss; };

  for (Eigen::Index i = 0; i < em.size(); ++i) {
    auto plus = em, minus = em;
    plus.data()[i] += h;
    minus.data()[i] -= h;
    EXPECT_LT(relative_error(g.emissions.data()[i], (loss(plus, p) - loss(minus, p)) / (2 * h)), 1e-4);
  }
  auto check = [&](auto member, const auto& analytic) {
    for (Eigen::Index i = 0; i < analytic.size(); ++i) {
      auto plus = p, minus = p;
      (plus.*member).data()[i] += h;
      (minus.*member).data()[i] -= h;
      EXPECT_LT(relative_error(analytic.data()[i], (loss(em, plus) - loss(em, minus)) / (2 * h)), 1e-4);
    }
  };
  check(&CrfParameters::transitions, g.transitions);
  check(&CrfParameters::start, g.start);
  check(&CrfParameters::stop, g.stop);
}

}  // namespace
