//
// Project MolJAE - Copyright 2026 The MolJAE Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "moljae/loss.h"

#include <cmath>
#include <stdexcept>

namespace moljae {
namespace {

using ad::Tensor;

void check_same(const Eigen::MatrixXd &a, const Eigen::MatrixXd &b,
                const char *op) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw ad::ShapeError(std::string(op) + ": shape mismatch "
                         + std::to_string(a.rows()) + "x"
                         + std::to_string(a.cols()) + " vs "
                         + std::to_string(b.rows()) + "x"
                         + std::to_string(b.cols()));
}

void check_lambda(double v, const char *name) {
  if (!std::isfinite(v) || v < 0.0)
    throw std::invalid_argument(std::string(name)
                                + " must be finite and non-negative");
}

// Cell (a, b) of softmax(theta) as a rank-0 tensor, plus row sum q(a).
struct TableTerms {
  Tensor p_ab, q_a;
};

TableTerms table_terms(const Tensor &theta, ad::Index a, ad::Index b) {
  const ad::Index rows = theta.dim(0), cols = theta.dim(1);
  Tensor p = ad::reshape(ad::softmax(ad::reshape(theta, { 1, rows * cols })),
                         { rows, cols });
  Tensor row = ad::slice(p, 0, a, 1);
  return { ad::sum(ad::slice(row, 1, b, 1)), ad::sum(row) };
}

double log_joint(const Eigen::MatrixXd &logits, Eigen::Index a, Eigen::Index b) {
  const double m = logits.maxCoeff();
  const double z = (logits.array() - m).exp().sum();
  return logits(a, b) - m - std::log(z);
}

}  // namespace

std::string to_string(Weighting w) {
  return w == Weighting::kBeta2 ? "beta2" : "uniform";
}

Weighting weighting_from_string(const std::string &name) {
  if (name == "beta2")
    return Weighting::kBeta2;
  if (name == "uniform")
    return Weighting::kUniform;
  throw std::invalid_argument("unknown loss weighting \"" + name + "\"");
}

void validate(const LossConfig &c) {
  check_lambda(c.lambda1, "loss.lambda1");
  check_lambda(c.lambda2, "loss.lambda2");
  if (!(c.tau0 > 0.0) || !std::isfinite(c.tau0))
    throw std::invalid_argument("loss.tau0 must be positive");
}

double loss_weight(Weighting weighting, AlphaBeta coeffs) {
  return weighting == Weighting::kBeta2 ? coeffs.beta * coeffs.beta : 1.0;
}

double temperature(double tau0, AlphaBeta coeffs) {
  return tau0 * (0.5 + coeffs.beta);
}

Tensor score_matching_loss(const Tensor &pred, const Eigen::MatrixXd &target,
                           double weight) {
  if (pred.rank() != 2 || pred.dim(0) != target.rows()
      || pred.dim(1) != target.cols())
    throw ad::ShapeError("score_matching_loss: prediction "
                         + ad::shape_string(pred.shape())
                         + " does not match target "
                         + std::to_string(target.rows()) + "x"
                         + std::to_string(target.cols()));
  Tensor diff = ad::sub(pred, Tensor::from_matrix(target));
  return ad::scale(ad::mean(ad::square(diff)), weight);
}

ScoreTerms score_matching_loss(const ModelOutput &out,
                               const TrajectorySample &s, Weighting weighting) {
  ScoreTerms terms;
  terms.P = score_matching_loss(out.score_p.field, s.score_target.P,
                                loss_weight(weighting, s.coeffs[0]));
  terms.H = score_matching_loss(out.score_h, s.score_target.H,
                                loss_weight(weighting, s.coeffs[1]));
  terms.E = score_matching_loss(out.score_e, s.score_target.E,
                                loss_weight(weighting, s.coeffs[2]));
  terms.total = ad::add(ad::add(terms.P, terms.H), terms.E);
  return terms;
}

Tensor contrastive_loss(const Tensor &anchors, const Tensor &positives,
                        const Eigen::VectorXd &taus) {
  if (anchors.rank() != 2 || anchors.shape() != positives.shape())
    throw ad::ShapeError("contrastive_loss: anchors "
                         + ad::shape_string(anchors.shape())
                         + " and positives "
                         + ad::shape_string(positives.shape())
                         + " must be matching matrices");
  const ad::Index b = anchors.dim(0);
  if (b < 2)
    throw std::invalid_argument(
        "contrastive_loss: batch size must be at least 2 for negatives");
  if (taus.size() != b || !(taus.array() > 0.0).all())
    throw std::invalid_argument(
        "contrastive_loss: one positive temperature per anchor required");

  const Tensor aa = ad::broadcast(ad::sum(ad::square(anchors), 1), { b, b });
  const Tensor pp = ad::broadcast(
      ad::transpose(ad::sum(ad::square(positives), 1)), { b, b });
  const Tensor cross = ad::matmul(anchors, ad::transpose(positives));
  const Tensor dist = ad::sub(ad::add(aa, pp), ad::scale(cross, 2.0));

  const Eigen::VectorXd inv = taus.array().square().inverse();
  const Tensor inv_tau2 = ad::broadcast(Tensor::column(inv), { b, b });
  const Tensor logits = ad::neg(ad::mul(dist, inv_tau2));
  const Tensor log_prob = ad::log(ad::softmax(logits));
  const Tensor diag = ad::sum(
      ad::mul(log_prob, Tensor::from_matrix(Eigen::MatrixXd::Identity(b, b))));
  return ad::scale(diag, -1.0 / static_cast<double>(b));
}

Tensor contrastive_loss(const Tensor &anchors, const Tensor &positives,
                        double tau) {
  const ad::Index b = anchors.rank() == 2 ? anchors.dim(0) : 0;
  return contrastive_loss(anchors, positives, Eigen::VectorXd::Constant(b, tau));
}

LossReport total_loss(double l_sc, double l_co, double lambda1,
                      double lambda2) {
  check_lambda(lambda1, "lambda1");
  check_lambda(lambda2, "lambda2");
  if (!std::isfinite(l_sc) || !std::isfinite(l_co))
    throw std::invalid_argument("total_loss: non-finite loss term");
  LossReport r;
  r.l_sc = l_sc;
  r.l_co = l_co;
  r.total = lambda1 * l_sc + lambda2 * l_co;
  return r;
}

Tensor total_loss(const Tensor &l_sc, const Tensor &l_co, double lambda1,
                  double lambda2) {
  check_lambda(lambda1, "lambda1");
  check_lambda(lambda2, "lambda2");
  return ad::add(ad::scale(l_sc, lambda1), ad::scale(l_co, lambda2));
}

double restoration_loss(const DenseTensors &restored, const DenseTensors &x0) {
  check_same(restored.P, x0.P, "restoration_loss");
  check_same(restored.H, x0.H, "restoration_loss");
  check_same(restored.E, x0.E, "restoration_loss");
  const double total = (restored.P - x0.P).cwiseAbs().sum()
                       + (restored.H - x0.H).cwiseAbs().sum()
                       + (restored.E - x0.E).cwiseAbs().sum();
  const double count =
      static_cast<double>(x0.P.size() + x0.H.size() + x0.E.size());
  return count > 0 ? total / count : 0.0;
}

double restoration_loss(std::span<const DenseTensors> restored,
                        std::span<const DenseTensors> x0) {
  if (restored.size() != x0.size() || x0.empty())
    throw std::invalid_argument(
        "restoration_loss: batches must be non-empty and of equal size");
  double acc = 0.0;
  for (std::size_t i = 0; i < x0.size(); ++i)
    acc += restoration_loss(restored[i], x0[i]);
  return acc / static_cast<double>(x0.size());
}

double soft_score_matching_loss(const Eigen::MatrixXd &pred,
                                const Eigen::MatrixXd &residual, double alpha,
                                TrajectoryMode mode) {
  if (mode == TrajectoryMode::kCold3d)
    throw std::invalid_argument(
        "soft_score_matching_loss: requires a closed-form gaussian trajectory");
  check_same(pred, residual, "soft_score_matching_loss");
  if (pred.size() == 0)
    return 0.0;
  return alpha * alpha * (pred - residual).array().square().mean();
}

DecompositionCheck verify_decomposition(const Eigen::MatrixXd &logits,
                                        double fd_step) {
  if (logits.size() == 0 || !logits.allFinite())
    throw std::invalid_argument(
        "verify_decomposition: table logits must be finite and non-empty");
  const Eigen::Index rows = logits.rows(), cols = logits.cols();
  const Eigen::VectorXd flat = [&] {
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> r =
        logits;
    return Eigen::VectorXd(Eigen::Map<const Eigen::VectorXd>(r.data(), r.size()));
  }();

  DecompositionCheck out;
  for (Eigen::Index a = 0; a < rows; ++a)
    for (Eigen::Index b = 0; b < cols; ++b) {
      Eigen::VectorXd joint, marginal, conditional;
      {
        ad::Tape tape;
        Tensor theta = tape.leaf({ rows, cols }, flat);
        auto t = table_terms(theta, a, b);
        joint = tape.backward(ad::log(t.p_ab))[theta];
      }
      {
        ad::Tape tape;
        Tensor theta = tape.leaf({ rows, cols }, flat);
        auto t = table_terms(theta, a, b);
        marginal = tape.backward(ad::log(t.q_a))[theta];
      }
      {
        ad::Tape tape;
        Tensor theta = tape.leaf({ rows, cols }, flat);
        auto t = table_terms(theta, a, b);
        conditional = tape.backward(ad::log(ad::div(t.p_ab, t.q_a)))[theta];
      }
      out.max_residual = std::max(
          out.max_residual,
          (joint - marginal - conditional).cwiseAbs().maxCoeff());

      for (Eigen::Index k = 0; k < flat.size(); ++k) {
        Eigen::MatrixXd plus = logits, minus = logits;
        plus(k / cols, k % cols) += fd_step;
        minus(k / cols, k % cols) -= fd_step;
        const double fd =
            (log_joint(plus, a, b) - log_joint(minus, a, b)) / (2 * fd_step);
        out.max_fd_error = std::max(out.max_fd_error, std::abs(fd - joint[k]));
      }
    }
  return out;
}

}  // namespace moljae
