//
// Project MolJAE - Copyright 2026 The MolJAE Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "moljae/selftest.h"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "moljae/evalsuite.h"
#include "moljae/gradcheck.h"
#include "moljae/loss.h"
#include "moljae/network.h"
#include "moljae/trajectory.h"

namespace moljae {

std::vector<MoleculeGraph> random_probe_molecules(int count, std::uint64_t seed) {
  std::vector<MoleculeGraph> out;
  for (int m = 0; m < count; ++m) {
    Rng rng = stream_rng(seed, static_cast<std::uint64_t>(m), 0x9b0e);
    const int n = std::uniform_int_distribution<int>(3, 9)(rng);
    std::uniform_int_distribution<int> element(0, kNumElements - 1);
    std::uniform_real_distribution<double> coord(-1.5, 1.5);
    MoleculeGraph g;
    g.atom_types.resize(n);
    g.charges.assign(n, 0);
    g.bonds = Eigen::MatrixXi::Zero(n, n);
    g.positions.resize(n, 3);
    for (int i = 0; i < n; ++i) {
      g.atom_types[i] = element(rng);
      for (int k = 0; k < 3; ++k)
        g.positions(i, k) = coord(rng);
      if (i > 0) {
        const int j = std::uniform_int_distribution<int>(0, i - 1)(rng);
        g.bonds(i, j) = g.bonds(j, i) = 1;
      }
    }
    g.positions = centered(g.positions);
    out.push_back(std::move(g));
  }
  return out;
}

double vp_identity_residual(int points) {
  const NoiseSchedule s = NoiseSchedule::vp();
  double worst = 0.0;
  for (int k = 0; k < points; ++k) {
    const double t = points > 1 ? static_cast<double>(k) / (points - 1) : 0.0;
    const AlphaBeta ab = alpha_beta(s, t);
    worst = std::max(worst, std::abs(ab.alpha * ab.alpha + ab.beta * ab.beta - 1.0));
  }
  return worst;
}

double drift_diffusion_residual(int points) {
  constexpr double h = 1e-6;
  double worst = 0.0;
  for (const NoiseSchedule &s: { NoiseSchedule::vp(), NoiseSchedule::ve() }) {
    for (int k = 0; k < points; ++k) {
      const double t = 0.01 + 0.98 * k / std::max(1, points - 1);
      const AlphaBeta lo = alpha_beta(s, t - h), hi = alpha_beta(s, t + h);
      const AlphaBeta mid = alpha_beta(s, t);
      const double f = (std::log(hi.alpha) - std::log(lo.alpha)) / (2 * h);
      const double dvar = (hi.beta * hi.beta - lo.beta * lo.beta) / (2 * h);
      const double g2 = dvar - 2.0 * f * mid.beta * mid.beta;
      const DriftDiffusion fg = drift_diffusion(s, t);
      worst = std::max(worst, ad::relative_error(fg.f, f, 1.0));
      worst = std::max(worst, ad::relative_error(fg.g * fg.g, g2, 1.0));
    }
  }
  return worst;
}

std::vector<CheckResult> decomposition_checks(const SelfTestOptions &o) {
  Rng rng = stream_rng(o.seed, 0, 0xdec0);
  std::normal_distribution<double> normal;
  double residual = 0.0, fd = 0.0;
  for (int k = 0; k < o.decomposition_tables; ++k) {
    Eigen::MatrixXd logits(5, 5);
    for (Eigen::Index i = 0; i < logits.size(); ++i)
      logits.data()[i] = normal(rng);
    const DecompositionCheck c = verify_decomposition(logits);
    residual = std::max(residual, c.max_residual);
    fd = std::max(fd, c.max_fd_error);
  }
  return { { "decomposition.residual", residual, 1e-10 },
           { "decomposition.finite_difference", fd, 1e-6 } };
}

std::vector<CheckResult> gradient_checks(const SelfTestOptions &o) {
  std::vector<CheckResult> out;
  for (const auto &r: ad::check_primitives(o.gradient_probes, o.seed))
    out.push_back({ "gradient." + r.name, r.max_rel_error, 1e-6 });
  const auto c = ad::check_composite(o.gradient_probes, o.seed);
  out.push_back({ "gradient.composite", c.max_rel_error, 1e-6 });
  return out;
}

std::vector<CheckResult> symmetry_checks(const SelfTestOptions &o) {
  ModelConfig model;
  model.hidden = 32;
  model.time_dim = 16;
  model.projection_dim = 16;
  const ModelParams params = init_params(model, o.seed);
  const auto probes = random_probe_molecules(o.symmetry_molecules, o.seed);
  SymmetryOptions opt;
  opt.rotations = o.rotations;
  opt.permutations = o.permutations;
  opt.reflections = o.reflections;
  opt.seed = o.seed;
  const SymmetryReport r = symmetry_report(params, model, probes, opt);
  SymmetryOptions broken = opt;
  broken.forward.identity_frames = true;
  const SymmetryReport s = symmetry_report(params, model, probes, broken);
  return { { "symmetry.rotation", r.max_rotation, 1e-4 },
           { "symmetry.invariance", r.max_invariance, 1e-5 },
           { "symmetry.permutation", r.max_permutation, 1e-6 },
           { "symmetry.reflection", r.max_reflection, 1e-4 },
           { "symmetry.reflection_sign_flip", r.min_reflection_naive, 1e-3, false },
           { "symmetry.fixed_frames_detected", s.max_rotation, 1e-3, false } };
}

std::vector<CheckResult> schedule_checks() {
  return { { "schedule.vp_identity", vp_identity_residual(), 1e-12 },
           { "schedule.drift_diffusion", drift_diffusion_residual(), 1e-5 } };
}

std::vector<CheckResult> run_selftest(const SelfTestOptions &o) {
  std::vector<CheckResult> out;
  for (auto part: { decomposition_checks(o), gradient_checks(o), symmetry_checks(o),
                    schedule_checks() })
    out.insert(out.end(), part.begin(), part.end());
  return out;
}

std::string format_check(const CheckResult &r) {
  char buf[256];
  std::snprintf(buf, sizeof buf, "%s %-36s %.3e %s %.1e", r.passed() ? "PASS" : "FAIL",
                r.name.c_str(), r.value, r.below ? "<" : ">", r.tolerance);
  return buf;
}

}  // namespace moljae
