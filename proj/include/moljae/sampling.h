//
// Project MolJAE - Copyright 2026 The MolJAE Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef MOLJAE_SAMPLING_H_
#define MOLJAE_SAMPLING_H_

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "moljae/molgraph.h"
#include "moljae/network.h"
#include "moljae/schedule.h"
#include "moljae/trajectory.h"

namespace moljae {

struct SamplerConfig {
  int steps = 1000;
  double lambda = 1.0;  // 1: reverse SDE, 0: probability-flow ODE
  int n_atoms = 0;
  std::uint64_t seed = 0;
  double t_end = kDefaultTMin;
  int threads = 1;
};

//! Throws std::invalid_argument on steps < 1, lambda < 0 or a bad t_end.
void validate(const SamplerConfig &config);

class SamplingError: public std::runtime_error {
public:
  SamplingError(int step, const std::string &what)
    : std::runtime_error(what), step_(step) {}
  int step() const { return step_; }

private:
  int step_;
};

//! Scores (P, H, E) of a state at time t.
using ScoreFunction =
    std::function<DenseTensors(const DenseTensors &state, double t)>;

//! The trained network. Without a clean conditioner the state itself is
//! fed to both encoders.
ScoreFunction model_score(const ModelParams &params, const ModelConfig &model,
                          const DenseTensors *clean = nullptr);

//! y - (f y - (1 + lambda^2) / 2 g^2 s) dt + lambda g sqrt(dt) noise.
Eigen::MatrixXd reverse_update(const Eigen::MatrixXd &y,
                               const Eigen::MatrixXd &score,
                               DriftDiffusion fg, double dt, double lambda,
                               const Eigen::MatrixXd &noise);

//! One Euler-Maruyama step from t to t - dt. The noise draw is projected to
//! zero-CoM for P and mirrored for E. Throws SamplingError on a non-finite
//! result, tagged with `step`.
DenseTensors reverse_step(const DenseTensors &state, double t, double dt,
                          const ScoreFunction &score,
                          const ComponentSchedules &schedules, double lambda,
                          Rng &rng, int step = -1);

//! Standard-normal prior with zero-CoM P and symmetric, zero-diagonal E.
DenseTensors sample_prior(int n_atoms, Rng &rng);

//! Integrates from t = 1 down to t_end on a uniform grid.
DenseTensors integrate(DenseTensors state, const ScoreFunction &score,
                       const ComponentSchedules &schedules,
                       const SamplerConfig &config, Rng &rng);

//! Runs `count` independent trajectories, sample k on stream (seed, k).
//! The result does not depend on config.threads.
std::vector<DenseTensors> generate_tensors(const ModelParams &params,
                                           const ModelConfig &model,
                                           const SamplerConfig &config,
                                           int count);
std::vector<MoleculeGraph> generate(const ModelParams &params,
                                    const ModelConfig &model,
                                    const SamplerConfig &config, int count);

//! Row argmax for atom type and charge; E averaged with its transpose
//! before the per-edge argmax; ties go to the lower index.
MoleculeGraph quantize(const DenseTensors &tensors);

}  // namespace moljae

#endif  // MOLJAE_SAMPLING_H_
