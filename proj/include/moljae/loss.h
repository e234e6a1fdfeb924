//
// Project MolJAE - Copyright 2026 The MolJAE Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef MOLJAE_LOSS_H_
#define MOLJAE_LOSS_H_

#include <array>
#include <span>
#include <string>

#include <Eigen/Dense>

#include "moljae/autodiff.h"
#include "moljae/network.h"
#include "moljae/trajectory.h"

namespace moljae {

enum class Weighting { kBeta2, kUniform };

std::string to_string(Weighting w);
Weighting weighting_from_string(const std::string &name);

struct LossConfig {
  double lambda1 = 1.0;
  double lambda2 = 0.01;
  double tau0 = 0.5;
  Weighting weighting = Weighting::kBeta2;
};

//! Throws std::invalid_argument on negative or non-finite weights.
void validate(const LossConfig &config);

//! w(t): beta(t)^2 or 1.
double loss_weight(Weighting weighting, AlphaBeta coeffs);

//! tau(t) = tau0 (0.5 + beta(t)).
double temperature(double tau0, AlphaBeta coeffs);

struct LossReport {
  double l_sc = 0.0;
  double l_co = 0.0;
  double total = 0.0;
  std::array<double, 3> sc_components {};  // P, H, E
};

//! weight * mean((pred - target)^2).
ad::Tensor score_matching_loss(const ad::Tensor &pred,
                               const Eigen::MatrixXd &target, double weight);

struct ScoreTerms {
  ad::Tensor P, H, E;
  ad::Tensor total;  // P + H + E
};

//! Weighted denoising score matching summed over the three components.
ScoreTerms score_matching_loss(const ModelOutput &out,
                               const TrajectorySample &sample,
                               Weighting weighting);

//! mean_i -log softmax_j(-|a_i - p_j|^2 / tau_i^2)[i]. Rows of anchors and
//! positives are unit embeddings; taus holds one temperature per anchor.
ad::Tensor contrastive_loss(const ad::Tensor &anchors,
                            const ad::Tensor &positives,
                            const Eigen::VectorXd &taus);
ad::Tensor contrastive_loss(const ad::Tensor &anchors,
                            const ad::Tensor &positives, double tau);

LossReport total_loss(double l_sc, double l_co, double lambda1 = 1.0,
                      double lambda2 = 0.01);
//! lambda1 l_sc + lambda2 l_co on the tape.
ad::Tensor total_loss(const ad::Tensor &l_sc, const ad::Tensor &l_co,
                      double lambda1, double lambda2);

//! Mean absolute error over every entry of P, H and E.
double restoration_loss(const DenseTensors &restored, const DenseTensors &x0);
double restoration_loss(std::span<const DenseTensors> restored,
                        std::span<const DenseTensors> x0);

//! alpha^2 mean((pred - residual)^2). Rejects the cold trajectory, whose
//! degradation has no closed-form residual.
double soft_score_matching_loss(const Eigen::MatrixXd &pred,
                                const Eigen::MatrixXd &residual, double alpha,
                                TrajectoryMode mode = TrajectoryMode::kContinuous);

struct DecompositionCheck {
  double max_residual = 0.0;  // |grad log p - (grad log q + grad log f)|
  double max_fd_error = 0.0;  // autodiff vs central differences, joint term
};

//! Joint table p(a, b) = softmax(logits) over all cells. For every cell,
//! compares the gradient of log p(a, b) with the sum of the gradients of
//! log q(a) = log sum_b p(a, b) and log f(b | a) = log p(a, b) - log q(a).
DecompositionCheck verify_decomposition(const Eigen::MatrixXd &logits,
                                        double fd_step = 1e-5);

}  // namespace moljae

#endif  // MOLJAE_LOSS_H_
