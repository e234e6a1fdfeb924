//
// Project MolJAE - Copyright 2026 The MolJAE Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef MOLJAE_TRAINING_H_
#define MOLJAE_TRAINING_H_

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "moljae/loss.h"
#include "moljae/molgraph.h"
#include "moljae/network.h"
#include "moljae/trajectory.h"

namespace moljae {

struct TrainConfig {
  int epochs = 50;
  int batch_size = 8;
  double learning_rate = 1e-4;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  std::uint64_t seed = 0;
  LossConfig loss;
  double t_min = kDefaultTMin;
  double grad_clip = 10.0;
  //! Probability that a sample conditions on x_t instead of x0; 1 trains a
  //! purely generative model usable without a clean conditioner.
  double condition_dropout = 0.0;
  double divergence_threshold = 1e6;
  int checkpoint_interval = 0;  // epochs; 0 disables
  std::filesystem::path checkpoint_path;
};

//! Throws std::invalid_argument on lr <= 0, batch_size < 2 and similar.
void validate(const TrainConfig &config);

using Gradients = std::map<std::string, Eigen::VectorXd>;

struct AdamState {
  std::map<std::string, Eigen::VectorXd> m;
  std::map<std::string, Eigen::VectorXd> v;
  std::int64_t step = 0;
};

struct AdamOptions {
  double lr = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

class OptimizerError: public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

//! Bias-corrected Adam. A non-finite gradient rejects the whole step and
//! leaves params and state untouched.
void adam_step(ModelParams &params, const Gradients &grads, AdamState &state,
               const AdamOptions &options);

double global_norm(const Gradients &grads);
//! Rescales grads in place when their global norm exceeds max_norm.
//! Returns the norm before clipping.
double clip_global_norm(Gradients &grads, double max_norm);

struct EpochStats {
  int epoch = 0;
  double total = 0.0;
  double l_sc = 0.0;
  double l_co = 0.0;
  std::array<double, 3> sc_components {};
};

class DivergenceError: public std::runtime_error {
public:
  DivergenceError(int epoch, int step, double loss);
  int epoch() const { return epoch_; }
  int step() const { return step_; }
  double loss() const { return loss_; }

private:
  int epoch_, step_;
  double loss_;
};

struct BatchResult {
  LossReport report;
  Gradients grads;
};

//! Loss and parameter gradients of one batch. rng drives t, noise and
//! condition dropout.
BatchResult batch_gradients(const ModelParams &params,
                            const ModelConfig &model,
                            const std::vector<const DenseTensors *> &batch,
                            const TrainConfig &config, Rng &rng);

struct TrainResult {
  ModelParams params;
  AdamState optimizer;
  std::vector<EpochStats> history;
};

using EpochCallback = std::function<void(const EpochStats &)>;

TrainResult train(const std::vector<MoleculeGraph> &dataset,
                  const ModelConfig &model, const TrainConfig &config,
                  const EpochCallback &on_epoch = {});
//! Continues from given parameters and optimizer state.
TrainResult train(const std::vector<MoleculeGraph> &dataset,
                  const ModelConfig &model, const TrainConfig &config,
                  ModelParams params, AdamState optimizer,
                  const EpochCallback &on_epoch = {});

// ---- checkpoints --------------------------------------------------------

inline constexpr std::uint32_t kCheckpointVersion = 1;

class CheckpointError: public std::runtime_error {
public:
  enum class Kind { kIo, kVersion, kTruncated, kFormat, kShapeMismatch };
  CheckpointError(Kind kind, const std::string &what)
    : std::runtime_error(what), kind_(kind) {}
  Kind kind() const { return kind_; }

private:
  Kind kind_;
};

struct Checkpoint {
  ModelParams params;
  AdamState optimizer;
  std::map<std::string, std::string> metadata;
};

//! Writes via a temporary file renamed into place.
void save_checkpoint(const std::filesystem::path &path, const Checkpoint &ckpt);
Checkpoint load_checkpoint(const std::filesystem::path &path);
//! Loads and checks every tensor against `expected` (names and shapes).
Checkpoint load_checkpoint(const std::filesystem::path &path,
                           const ModelParams &expected);

}  // namespace moljae

#endif  // MOLJAE_TRAINING_H_
