//
// Project MolJAE - Copyright 2026 The MolJAE Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef MOLJAE_NETWORK_H_
#define MOLJAE_NETWORK_H_

#include <algorithm>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "moljae/autodiff.h"
#include "moljae/frames.h"
#include "moljae/molgraph.h"
#include "moljae/trajectory.h"

namespace moljae {

enum class Activation { kSilu, kIdentity };

struct ModelConfig {
  int hidden = 128;           // L, width of node features
  int message_rounds = 3;     // K
  int gcn_layers = 3;
  int attention_heads = 4;
  int time_dim = 64;          // d_t, even
  int projection_dim = 64;    // d_c
  int num_rbf = 16;
  double encoder_cutoff = 5.0;
  double fourier_min_freq = 0.25;
  double fourier_max_freq = 32.0;
  bool share_encoders = false;
  Activation gcn_activation = Activation::kSilu;
  FrameOptions frames;
  //! Forward process the scores refer to.
  ComponentSchedules schedules;
  //! Heads predict beta(t) * score; outputs are divided by beta(t).
  bool beta_scaled_output = true;

  int head_dim() const { return std::max(1, hidden / attention_heads); }
  int edge_hidden() const { return std::max(8, hidden / 4); }
};

//! Throws std::invalid_argument on non-positive widths, an odd time_dim or
//! an invalid schedule.
void validate(const ModelConfig &config);

struct ParamTensor {
  ad::Shape shape;
  Eigen::VectorXd values;
};

//! Named parameter set. Names are unique; iteration order is sorted by name
//! so every traversal (init, optimizer, checkpoint) is deterministic.
class ModelParams {
public:
  void add(const std::string &name, ad::Shape shape, Eigen::VectorXd values);
  bool contains(const std::string &name) const { return tensors_.count(name) > 0; }
  const ParamTensor &at(const std::string &name) const;
  ParamTensor &at(const std::string &name);

  const std::map<std::string, ParamTensor> &tensors() const { return tensors_; }
  std::map<std::string, ParamTensor> &tensors() { return tensors_; }

  std::size_t scalar_count() const;
  bool all_finite() const;
  void set_zero();
  //! Zeroes every tensor whose name starts with prefix.
  void zero_prefix(const std::string &prefix);

private:
  std::map<std::string, ParamTensor> tensors_;
};

ModelParams init_params(const ModelConfig &config, std::uint64_t seed);

//! Parameters materialized as tensors: leaves on a tape for training, or
//! plain constants for inference when tape is null.
class BoundParams {
public:
  BoundParams(const ModelParams &params, ad::Tape *tape);
  const ad::Tensor &operator[](const std::string &name) const;
  const std::map<std::string, ad::Tensor> &tensors() const { return tensors_; }

private:
  std::map<std::string, ad::Tensor> tensors_;
};

// ---- building blocks ----------------------------------------------------

//! [sin(2 pi f_k t), cos(2 pi f_k t)] with geometric f_k.
Eigen::RowVectorXd fourier_embed(double t, int dim, double min_freq = 0.25,
                                 double max_freq = 32.0);

//! x W + b with parameters "<prefix>.w" and "<prefix>.b".
ad::Tensor linear(const ad::Tensor &x, const BoundParams &p,
                  const std::string &prefix);
//! Two linear layers with SiLU between: "<prefix>.0", "<prefix>.1".
ad::Tensor mlp2(const ad::Tensor &x, const BoundParams &p,
                const std::string &prefix);

struct LatentRepresentation {
  ad::Tensor node_h;  // n x L
  ad::Tensor pooled;  // 1 x L, row mean
};

//! Distance-RBF message passing over H and pairwise distances of P.
//! `branch` is "encoder_clean" or "encoder_noisy".
ad::Tensor encode(const DenseTensors &x, const BoundParams &p,
                  const ModelConfig &config, const std::string &branch);

//! Node3D = MLP[Emd(t) || f0 || ft], row-wise.
ad::Tensor fuse(const ad::Tensor &f0, const ad::Tensor &ft,
                const Eigen::RowVectorXd &emb, const BoundParams &p);

//! W = MLP[Emd(t) || E0 || Et] per edge, squared to stay non-negative,
//! symmetrized by averaging with its transpose, zero diagonal.
ad::Tensor edge_condition(const Eigen::MatrixXd &e0, const Eigen::MatrixXd &et,
                          const Eigen::RowVectorXd &emb, const BoundParams &p);

//! Layers of h <- act(A h theta_l + h) with A = D^-1/2 (W + I) D^-1/2 and
//! D = diag(rowsum(W + I)); pooled is the row mean.
LatentRepresentation fuse_gcn(const ad::Tensor &node, const ad::Tensor &w,
                              const BoundParams &p, const ModelConfig &config);

struct Score3d {
  ad::Tensor field;   // n x 3, zero column mean
  ad::Tensor coeffs;  // n x 3 invariant (h1, h2, h3)
};

Score3d score_3d(const LatentRepresentation &h,
                 const std::vector<Frame<double>> &frames,
                 const BoundParams &p);
//! n*n x num_rbf Gaussian expansion of |p_i - p_j|, zero on the diagonal.
Eigen::MatrixXd pair_distance_features(const Eigen::MatrixX3d &pos,
                                       const ModelConfig &config);
//! Per-edge MLP of [A_t heads || E_t row || rbf(d_ij) || Emd(t)];
//! n*n x kNumBondTypes, symmetric in (i, j), zero on the diagonal.
ad::Tensor score_2d(const LatentRepresentation &h, const Eigen::MatrixXd &et,
                    const Eigen::MatrixX3d &pos, const Eigen::RowVectorXd &emb,
                    const BoundParams &p, const ModelConfig &config);
ad::Tensor score_h(const LatentRepresentation &h, const BoundParams &p);
//! L2-normalized 1 x d_c embedding of the pooled representation.
ad::Tensor project(const LatentRepresentation &h, const BoundParams &p);

// ---- full model ---------------------------------------------------------

struct ForwardOptions {
  //! Replace the node frames by the canonical axes (negative control).
  bool identity_frames = false;
};

struct ModelOutput {
  LatentRepresentation latent;
  Score3d score_p;
  ad::Tensor score_h;
  ad::Tensor score_e;
  std::vector<Frame<double>> frames;
};

//! Latent h(clean, noisy, t) without the heads.
LatentRepresentation represent(const DenseTensors &clean,
                               const DenseTensors &noisy, double t,
                               const BoundParams &p, const ModelConfig &config);

//! Scores for the noisy input conditioned on the clean one. Frames are
//! built from the noisy positions. With beta_scaled_output, t must give
//! beta(t) > 0 for every component.
ModelOutput forward(const DenseTensors &clean, const DenseTensors &noisy,
                    double t, const BoundParams &p, const ModelConfig &config,
                    const ForwardOptions &options = {});

//! Pooled latent of a single molecule fed to both encoders at time t.
Eigen::RowVectorXd pooled_embedding(const DenseTensors &x,
                                    const ModelParams &params,
                                    const ModelConfig &config,
                                    double t = 1e-3);

}  // namespace moljae

#endif  // MOLJAE_NETWORK_H_
