//
// Project MolJAE - Copyright 2026 The MolJAE Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef MOLJAE_EVALSUITE_H_
#define MOLJAE_EVALSUITE_H_

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "moljae/molgraph.h"
#include "moljae/network.h"
#include "moljae/schedule.h"
#include "moljae/trajectory.h"

namespace moljae {

// ---- symmetry -----------------------------------------------------------

struct SymmetryOptions {
  int rotations = 20;
  int permutations = 20;
  int reflections = 5;
  double t = 0.3;  // noise level of the probe inputs
  std::uint64_t seed = 0;
  ForwardOptions forward;
};

struct MoleculeSymmetry {
  double rotation = 0.0;     // 3D head equivariance
  double invariance = 0.0;   // 2D / H heads, pooled latent, projection
  double permutation = 0.0;  // all heads
  double reflection = 0.0;   // e1, e3 equivariant and e2 anti-equivariant
  double reflection_naive = 0.0;  // plain equivariance under reflection
};

struct SymmetryReport {
  double max_rotation = 0.0;
  double max_invariance = 0.0;
  double max_permutation = 0.0;
  double max_reflection = 0.0;
  //! Smallest plain-equivariance residual under reflection; positive when
  //! the e2 sign flip is visible on every molecule.
  double min_reflection_naive = 0.0;
  std::vector<MoleculeSymmetry> molecules;
};

Eigen::Matrix3d random_rotation(Rng &rng);

SymmetryReport symmetry_report(const ModelParams &params,
                               const ModelConfig &model,
                               std::span<const MoleculeGraph> probes,
                               const SymmetryOptions &options = {});

// ---- gaussian toy -------------------------------------------------------

struct GaussianToyConfig {
  NoiseSchedule schedule = NoiseSchedule::vp();
  double mu = 1.0;
  double sigma = 0.5;
  int steps = 3000;
  int batch = 256;
  int hidden = 64;
  double learning_rate = 3e-3;
  double t_min = 0.02;
  double max_seconds = 120.0;  // training stops early past this budget
  std::uint64_t seed = 0;
};

//! -(x - alpha mu) / (alpha^2 sigma^2 + beta^2).
double gaussian_marginal_score(double x, double t, double mu, double sigma,
                               const NoiseSchedule &schedule);

struct GaussianToyResult {
  //! Per probe time: max_x |s_theta - s| / max_x |s| over the grid.
  std::vector<double> times;
  std::vector<double> relative_errors;
  double max_relative_error = 0.0;
  int steps_run = 0;
  double seconds = 0.0;
  std::function<double(double, double)> score;  // trained s_theta(x, t)
};

//! Trains a small MLP by weighted denoising score matching on
//! x0 ~ N(mu, sigma^2) and compares it on x in alpha mu +- 2 std,
//! t in {0.1, 0.5, 0.9}.
GaussianToyResult gaussian_score_toy(const GaussianToyConfig &config);

// ---- generation metrics -------------------------------------------------

//! Weisfeiler-Lehman style hash of (element, charge, bond) structure.
//! Invariant to atom order; distinct graphs may collide.
std::uint64_t canonical_hash(const MoleculeGraph &graph);

//! 0.5 * sum |p - q| of two normalized frequency vectors.
double total_variation(const Eigen::VectorXd &p, const Eigen::VectorXd &q);

Eigen::VectorXd atom_type_frequencies(std::span<const MoleculeGraph> graphs);
//! Over present bonds (orders 1..4) of the upper triangle.
Eigen::VectorXd bond_type_frequencies(std::span<const MoleculeGraph> graphs);

struct GenerationMetrics {
  int samples = 0;
  double validity = 0.0;     // fraction with every valence satisfied
  double atom_stable = 0.0;  // fraction of atoms with a satisfied valence
  double unique = 0.0;       // distinct hashes / samples
  double atom_tv = 0.0;
  double bond_tv = 0.0;
};

GenerationMetrics generation_metrics(std::span<const MoleculeGraph> samples,
                                     std::span<const MoleculeGraph> reference);

// ---- linear probe -------------------------------------------------------

double radius_of_gyration(const MoleculeGraph &graph);

//! Ridge regression with an unpenalized intercept, fitted on a seeded
//! random train_fraction split; returns the held-out MSE.
double ridge_probe_mse(const Eigen::MatrixXd &features,
                       const Eigen::VectorXd &labels, std::uint64_t seed,
                       double ridge = 1e-3, double train_fraction = 0.8);

struct ProbeResult {
  double pretrained_mse = 0.0;
  double random_mse = 0.0;
  double label_variance = 0.0;
  std::vector<double> pretrained_per_seed;
  std::vector<double> random_per_seed;
};

//! Frozen pooled embeddings of every molecule, one row each.
Eigen::MatrixXd embed_all(const ModelParams &params, const ModelConfig &model,
                          std::span<const MoleculeGraph> graphs);

//! Radius-of-gyration probe on frozen embeddings of both parameter sets.
//! Throws std::invalid_argument on constant labels.
ProbeResult linear_probe(const ModelParams &pretrained,
                         const ModelParams &random, const ModelConfig &model,
                         std::span<const MoleculeGraph> graphs,
                         std::span<const std::uint64_t> seeds,
                         double ridge = 1e-3);

// ---- reports ------------------------------------------------------------

std::string to_json(const SymmetryReport &report);
std::string to_json(const GenerationMetrics &metrics);
std::string to_json(const ProbeResult &result);
std::string to_text(const SymmetryReport &report);
std::string to_text(const GenerationMetrics &metrics);
std::string to_text(const ProbeResult &result);

}  // namespace moljae

#endif  // MOLJAE_EVALSUITE_H_
