//
// Project MolJAE - Copyright 2026 The MolJAE Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef MOLJAE_TRAJECTORY_H_
#define MOLJAE_TRAJECTORY_H_

#include <array>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "moljae/frames.h"
#include "moljae/molgraph.h"
#include "moljae/schedule.h"

namespace moljae {

using Rng = std::mt19937_64;

//! Independent stream for (root seed, index, salt); reproducible regardless
//! of the order in which streams are consumed.
Rng stream_rng(std::uint64_t root, std::uint64_t index, std::uint64_t salt = 0);

enum class TrajectoryMode { kContinuous, kAbsorbing, kUniform, kCold3d };

std::string to_string(TrajectoryMode mode);
TrajectoryMode trajectory_mode_from_string(const std::string &name);

inline constexpr double kDefaultTMin = 1e-3;

struct ComponentSchedules {
  NoiseSchedule P = NoiseSchedule::vp();
  NoiseSchedule H = NoiseSchedule::vp();
  NoiseSchedule E = NoiseSchedule::vp();

  static ComponentSchedules uniform(const NoiseSchedule &s) { return { s, s, s }; }
};

struct TrajectorySample {
  DenseTensors x0;
  DenseTensors xt;
  double t = 0.0;
  DenseTensors z;             // injected noise; z.P zero-CoM, z.E symmetric
  DenseTensors score_target;  // -z / beta per component
  std::array<AlphaBeta, 3> coeffs {};  // P, H, E
};

//! Standard normal noise shaped like `like`, with P rows projected to zero
//! mean and E mirrored from its upper triangle with a zero diagonal.
DenseTensors sample_noise(const DenseTensors &like, Rng &rng);

//! x_t = alpha x0 + beta z per component with a caller-provided noise draw.
TrajectorySample perturb_with_noise(const DenseTensors &x0, double t,
                                    const DenseTensors &z,
                                    const ComponentSchedules &schedules);

TrajectorySample perturb_continuous(const DenseTensors &x0, double t, Rng &rng,
                                    const ComponentSchedules &schedules);

//! t ~ Uniform(t_min, 1].
double sample_time(Rng &rng, double t_min = kDefaultTMin);

// ---- discrete chains ----------------------------------------------------

//! Absorbing chain: at step k every unmasked token becomes the mask state
//! (index num_classes) with probability betas[k]. Runs steps 1..t_step.
std::vector<int> perturb_absorbing(std::span<const int> tokens, int num_classes,
                                   int t_step, std::span<const double> betas,
                                   Rng &rng);

//! 1 - prod_{k <= t_step} (1 - beta_k).
double absorbing_mask_probability(std::span<const double> betas, int t_step);

//! Uniform chain with Q_k = alpha_k I + (1 - alpha_k) 11^T / d.
std::vector<int> perturb_uniform(std::span<const int> tokens, int num_classes,
                                 int t_step, std::span<const double> alphas,
                                 Rng &rng);

Eigen::MatrixXd uniform_transition_matrix(double alpha, int num_classes);

// ---- cold 3D diffusion --------------------------------------------------

//! Rough conformers of one molecule, each zero-centered and expressed in
//! the coordinates of its own global frame.
struct ConformerBank {
  std::vector<Eigen::MatrixX3d> conformers;
  std::vector<double> energies;

  bool empty() const { return conformers.empty(); }
  std::size_t size() const { return conformers.size(); }
};

Eigen::MatrixX3d frame_projected(const Eigen::MatrixX3d &positions,
                                 const FrameOptions &opt = {});

void add_conformer(ConformerBank &bank, const Eigen::MatrixX3d &positions,
                   double energy, const FrameOptions &opt = {});

//! Desk-scale stand-in for force-field conformers: ground truth perturbed
//! by fixed-seed gaussian noise at each level. Energy is the mean squared
//! pairwise-distance deviation from the ground truth.
ConformerBank build_conformer_bank(const Eigen::MatrixX3d &positions,
                                   std::span<const double> levels,
                                   std::uint64_t seed,
                                   const FrameOptions &opt = {});

//! alpha F0^-1 P0 + beta Uniform({F_i^-1 P_i}).
Eigen::MatrixX3d perturb_cold_3d(const Eigen::MatrixX3d &p0,
                                 const ConformerBank &bank, AlphaBeta coeffs,
                                 Rng &rng, const FrameOptions &opt = {});
Eigen::MatrixX3d perturb_cold_3d(const Eigen::MatrixX3d &p0,
                                 const ConformerBank &bank, double t,
                                 const NoiseSchedule &schedule, Rng &rng,
                                 const FrameOptions &opt = {});

}  // namespace moljae

#endif  // MOLJAE_TRAJECTORY_H_
