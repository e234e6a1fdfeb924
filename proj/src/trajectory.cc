//
// Project MolJAE - Copyright 2026 The MolJAE Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "moljae/trajectory.h"

#include <cmath>
#include <stdexcept>

namespace moljae {
namespace {

Eigen::MatrixXd gaussian(Eigen::Index rows, Eigen::Index cols, Rng &rng) {
  std::normal_distribution<double> normal;
  Eigen::MatrixXd m(rows, cols);
  // Row-major fill so the draw order does not depend on storage order.
  for (Eigen::Index r = 0; r < rows; ++r)
    for (Eigen::Index c = 0; c < cols; ++c)
      m(r, c) = normal(rng);
  return m;
}

void check_steps(int t_step, std::size_t schedule_len, const char *op) {
  if (t_step < 0 || static_cast<std::size_t>(t_step) > schedule_len)
    throw std::out_of_range(std::string(op) + ": step "
                            + std::to_string(t_step)
                            + " exceeds schedule length "
                            + std::to_string(schedule_len));
}

void check_tokens(std::span<const int> tokens, int max_token, const char *op) {
  for (int tok: tokens)
    if (tok < 0 || tok > max_token)
      throw std::invalid_argument(std::string(op) + ": token "
                                  + std::to_string(tok) + " out of range");
}

}  // namespace

Rng stream_rng(std::uint64_t root, std::uint64_t index, std::uint64_t salt) {
  std::seed_seq seq { static_cast<std::uint32_t>(root),
                      static_cast<std::uint32_t>(root >> 32),
                      static_cast<std::uint32_t>(index),
                      static_cast<std::uint32_t>(index >> 32),
                      static_cast<std::uint32_t>(salt),
                      static_cast<std::uint32_t>(salt >> 32) };
  return Rng(seq);
}

std::string to_string(TrajectoryMode mode) {
  switch (mode) {
  case TrajectoryMode::kContinuous:
    return "continuous";
  case TrajectoryMode::kAbsorbing:
    return "absorbing";
  case TrajectoryMode::kUniform:
    return "uniform";
  case TrajectoryMode::kCold3d:
    return "cold3d";
  }
  return "continuous";
}

TrajectoryMode trajectory_mode_from_string(const std::string &name) {
  for (auto m: { TrajectoryMode::kContinuous, TrajectoryMode::kAbsorbing,
                 TrajectoryMode::kUniform, TrajectoryMode::kCold3d })
    if (to_string(m) == name)
      return m;
  throw std::invalid_argument("unknown trajectory mode \"" + name + "\"");
}

DenseTensors sample_noise(const DenseTensors &like, Rng &rng) {
  const int n = like.size();
  DenseTensors z;
  z.P = gaussian(n, 3, rng);
  z.P = centered(z.P);
  z.H = gaussian(n, like.H.cols(), rng);
  z.E = Eigen::MatrixXd::Zero(like.E.rows(), like.E.cols());
  std::normal_distribution<double> normal;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      for (Eigen::Index c = 0; c < like.E.cols(); ++c) {
        const double v = normal(rng);
        z.edge(i, j)(c) = v;
        z.edge(j, i)(c) = v;
      }
  return z;
}

TrajectorySample perturb_with_noise(const DenseTensors &x0, double t,
                                    const DenseTensors &z,
                                    const ComponentSchedules &schedules) {
  const AlphaBeta ap = alpha_beta(schedules.P, t);
  const AlphaBeta ah = alpha_beta(schedules.H, t);
  const AlphaBeta ae = alpha_beta(schedules.E, t);
  if (ap.beta <= 0.0 || ah.beta <= 0.0 || ae.beta <= 0.0)
    throw std::invalid_argument(
        "perturb: beta(t) = 0 leaves the score target undefined");
  if (z.P.rows() != x0.P.rows() || z.H.rows() != x0.H.rows()
      || z.H.cols() != x0.H.cols() || z.E.rows() != x0.E.rows()
      || z.E.cols() != x0.E.cols())
    throw std::invalid_argument("perturb: noise shape does not match x0");

  TrajectorySample s;
  s.x0 = x0;
  s.t = t;
  s.z = z;
  s.coeffs = { ap, ah, ae };
  s.xt.P = ap.alpha * x0.P + ap.beta * z.P;
  s.xt.H = ah.alpha * x0.H + ah.beta * z.H;
  s.xt.E = ae.alpha * x0.E + ae.beta * z.E;
  s.score_target.P = -z.P / ap.beta;
  s.score_target.H = -z.H / ah.beta;
  s.score_target.E = -z.E / ae.beta;
  return s;
}

TrajectorySample perturb_continuous(const DenseTensors &x0, double t, Rng &rng,
                                    const ComponentSchedules &schedules) {
  if (!(t > 0.0 && t <= kHorizon)) {
    // t = 0 is admissible when every schedule is VE.
    const bool all_ve = schedules.P.kind == NoiseSchedule::Kind::kVE
                        && schedules.H.kind == NoiseSchedule::Kind::kVE
                        && schedules.E.kind == NoiseSchedule::Kind::kVE;
    if (!(t == 0.0 && all_ve))
      throw std::invalid_argument("perturb_continuous: t must lie in (0, 1]");
  }
  return perturb_with_noise(x0, t, sample_noise(x0, rng), schedules);
}

double sample_time(Rng &rng, double t_min) {
  // Maps onto (t_min, 1].
  std::uniform_real_distribution<double> u(t_min, kHorizon);
  return kHorizon + t_min - u(rng);
}

// ---- discrete chains ----------------------------------------------------

std::vector<int> perturb_absorbing(std::span<const int> tokens, int num_classes,
                                   int t_step, std::span<const double> betas,
                                   Rng &rng) {
  check_steps(t_step, betas.size(), "perturb_absorbing");
  check_tokens(tokens, num_classes, "perturb_absorbing");
  const int mask = num_classes;
  std::vector<int> out(tokens.begin(), tokens.end());
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int k = 0; k < t_step; ++k)
    for (int &tok: out)
      if (tok != mask && u(rng) < betas[k])
        tok = mask;
  return out;
}

double absorbing_mask_probability(std::span<const double> betas, int t_step) {
  check_steps(t_step, betas.size(), "absorbing_mask_probability");
  double keep = 1.0;
  for (int k = 0; k < t_step; ++k)
    keep *= 1.0 - betas[k];
  return 1.0 - keep;
}

std::vector<int> perturb_uniform(std::span<const int> tokens, int num_classes,
                                 int t_step, std::span<const double> alphas,
                                 Rng &rng) {
  check_steps(t_step, alphas.size(), "perturb_uniform");
  check_tokens(tokens, num_classes - 1, "perturb_uniform");
  std::vector<int> out(tokens.begin(), tokens.end());
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::uniform_int_distribution<int> pick(0, num_classes - 1);
  for (int k = 0; k < t_step; ++k)
    for (int &tok: out)
      if (u(rng) >= alphas[k])
        tok = pick(rng);
  return out;
}

Eigen::MatrixXd uniform_transition_matrix(double alpha, int num_classes) {
  const double d = num_classes;
  return alpha * Eigen::MatrixXd::Identity(num_classes, num_classes)
         + Eigen::MatrixXd::Constant(num_classes, num_classes,
                                     (1.0 - alpha) / d);
}

// ---- cold 3D diffusion --------------------------------------------------

Eigen::MatrixX3d frame_projected(const Eigen::MatrixX3d &positions,
                                 const FrameOptions &opt) {
  Eigen::MatrixX3d p = centered(positions);
  auto frames = node_frames<double>(p, opt);
  auto g = global_frame<double>(frames, opt.degeneracy_tol);
  return project_to_frame<double>(p, g);
}

void add_conformer(ConformerBank &bank, const Eigen::MatrixX3d &positions,
                   double energy, const FrameOptions &opt) {
  if (!bank.empty() && positions.rows() != bank.conformers.front().rows())
    throw std::invalid_argument("conformer bank: atom count mismatch");
  bank.conformers.push_back(frame_projected(positions, opt));
  bank.energies.push_back(energy);
}

ConformerBank build_conformer_bank(const Eigen::MatrixX3d &positions,
                                   std::span<const double> levels,
                                   std::uint64_t seed,
                                   const FrameOptions &opt) {
  ConformerBank bank;
  const Eigen::Index n = positions.rows();
  for (std::size_t k = 0; k < levels.size(); ++k) {
    Rng rng = stream_rng(seed, k, 0xc01d);
    Eigen::MatrixX3d p = positions + levels[k] * gaussian(n, 3, rng);
    double dev = 0.0;
    int pairs = 0;
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = i + 1; j < n; ++j, ++pairs) {
        double d = (p.row(i) - p.row(j)).norm()
                   - (positions.row(i) - positions.row(j)).norm();
        dev += d * d;
      }
    add_conformer(bank, p, pairs ? dev / pairs : 0.0, opt);
  }
  return bank;
}

Eigen::MatrixX3d perturb_cold_3d(const Eigen::MatrixX3d &p0,
                                 const ConformerBank &bank, AlphaBeta coeffs,
                                 Rng &rng, const FrameOptions &opt) {
  if (bank.empty())
    throw std::invalid_argument("perturb_cold_3d: empty conformer bank");
  if (bank.conformers.front().rows() != p0.rows())
    throw std::invalid_argument("perturb_cold_3d: atom count mismatch");
  std::uniform_int_distribution<std::size_t> pick(0, bank.size() - 1);
  const Eigen::MatrixX3d &rough = bank.conformers[pick(rng)];
  return coeffs.alpha * frame_projected(p0, opt) + coeffs.beta * rough;
}

Eigen::MatrixX3d perturb_cold_3d(const Eigen::MatrixX3d &p0,
                                 const ConformerBank &bank, double t,
                                 const NoiseSchedule &schedule, Rng &rng,
                                 const FrameOptions &opt) {
  return perturb_cold_3d(p0, bank, alpha_beta(schedule, t), rng, opt);
}

}  // namespace moljae
