//
// Project MolJAE - Copyright 2026 The MolJAE Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include <cmath>

#include <gtest/gtest.h>

#include "moljae/loss.h"

using namespace moljae;

TEST(Loss, WeightAndTemperature) {
  const AlphaBeta ab { 0.8, 0.6 };
  EXPECT_DOUBLE_EQ(loss_weight(Weighting::kBeta2, ab), 0.36);
  EXPECT_DOUBLE_EQ(loss_weight(Weighting::kUniform, ab), 1.0);
  EXPECT_DOUBLE_EQ(temperature(0.5, ab), 0.5 * 1.1);
}

TEST(Loss, ScoreMatchingIsWeightedMse) {
  Eigen::MatrixXd pred(1, 2), target(1, 2);
  pred << 1, 2;
  target << 0, 0;
  const ad::Tensor l = score_matching_loss(ad::Tensor::from_matrix(pred), target, 2.0);
  EXPECT_DOUBLE_EQ(l.item(), 2.0 * 2.5);
}

TEST(Loss, ContrastiveMatchesHandComputation) {
  Eigen::MatrixXd a(2, 2), p(2, 2);
  a << 1, 0, 0, 1;
  p << 1, 0, 0, 1;
  const double tau = 0.5;
  const double l =
      contrastive_loss(ad::Tensor::from_matrix(a), ad::Tensor::from_matrix(p), tau).item();
  // Diagonal distance 0, off-diagonal squared distance 2.
  const double logit = -2.0 / (tau * tau);
  EXPECT_NEAR(l, std::log(1.0 + std::exp(logit)), 1e-14);
}

TEST(Loss, ContrastiveNeedsTwoSamples) {
  const ad::Tensor one = ad::Tensor::from_matrix(Eigen::MatrixXd::Ones(1, 3));
  EXPECT_THROW(contrastive_loss(one, one, 0.5), std::invalid_argument);
}

TEST(Loss, ContrastiveIsLowerForAlignedPairs) {
  Eigen::MatrixXd a(3, 2), p(3, 2);
  a << 1, 0, 0, 1, -1, 0;
  p = a;
  const double aligned =
      contrastive_loss(ad::Tensor::from_matrix(a), ad::Tensor::from_matrix(p), 0.5).item();
  Eigen::MatrixXd shuffled(3, 2);
  shuffled << p.row(1), p.row(2), p.row(0);
  const double mixed = contrastive_loss(ad::Tensor::from_matrix(a),
                                        ad::Tensor::from_matrix(shuffled), 0.5)
                           .item();
  EXPECT_LT(aligned, mixed);
}

TEST(Loss, TotalCombinesTerms) {
  const LossReport r = total_loss(2.0, 3.0, 1.0, 0.01);
  EXPECT_DOUBLE_EQ(r.total, 2.03);
  EXPECT_THROW(total_loss(1.0, 1.0, -1.0, 0.0), std::invalid_argument);
  EXPECT_THROW(total_loss(NAN, 1.0), std::invalid_argument);
}

TEST(Loss, RestorationIsMeanAbsoluteError) {
  DenseTensors a, b;
  a.H = Eigen::MatrixXd::Zero(1, 2);
  a.E = Eigen::MatrixXd::Zero(1, 1);
  a.P = Eigen::MatrixX3d::Zero(1, 3);
  b = a;
  b.P(0, 0) = 6.0;
  EXPECT_DOUBLE_EQ(restoration_loss(a, b), 1.0);
}

TEST(Loss, SoftScoreMatchingRejectsCold) {
  const Eigen::MatrixXd m = Eigen::MatrixXd::Ones(2, 2);
  EXPECT_DOUBLE_EQ(soft_score_matching_loss(m, m * 0, 0.5), 0.25);
  EXPECT_THROW(soft_score_matching_loss(m, m, 0.5, TrajectoryMode::kCold3d),
               std::invalid_argument);
}

TEST(Loss, JointGradientDecomposes) {
  Eigen::MatrixXd logits = Eigen::MatrixXd::Random(5, 5);
  const DecompositionCheck c = verify_decomposition(logits);
  EXPECT_LT(c.max_residual, 1e-10);
  EXPECT_LT(c.max_fd_error, 1e-6);
}

TEST(Loss, WeightingNamesRoundTrip) {
  for (auto w: { Weighting::kBeta2, Weighting::kUniform })
    EXPECT_EQ(weighting_from_string(to_string(w)), w);
}
