//
// Project MolJAE - Copyright 2026 The MolJAE Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include <cmath>

#include <gtest/gtest.h>

#include "moljae/evalsuite.h"
#include "moljae/selftest.h"
#include "moljae/trajectory.h"

using namespace moljae;

namespace {

DenseTensors probe() { return to_dense(random_probe_molecules(1, 4).front()); }

}  // namespace

TEST(Trajectory, StreamsAreReproducibleAndDistinct) {
  Rng a = stream_rng(7, 3, 1), b = stream_rng(7, 3, 1), c = stream_rng(7, 4, 1);
  const auto x = a();
  EXPECT_EQ(x, b());
  EXPECT_NE(x, c());
}

TEST(Trajectory, NoiseIsCenteredAndSymmetric) {
  Rng rng = stream_rng(0, 0);
  const DenseTensors x = probe();
  const DenseTensors z = sample_noise(x, rng);
  EXPECT_LT(z.P.colwise().sum().norm(), 1e-12);
  const int n = x.size();
  for (int i = 0; i < n; ++i) {
    EXPECT_DOUBLE_EQ(z.edge(i, i).norm(), 0.0);
    for (int j = 0; j < n; ++j)
      EXPECT_EQ(z.edge(i, j), z.edge(j, i));
  }
}

TEST(Trajectory, ScoreTargetMatchesLogDensityGradient) {
  const DenseTensors x0 = probe();
  Rng rng = stream_rng(0, 1);
  const auto sched = ComponentSchedules::uniform(NoiseSchedule::vp());
  const TrajectorySample s = perturb_continuous(x0, 0.4, rng, sched);
  const AlphaBeta ab = s.coeffs[1];
  // log N(x; alpha x0, beta^2) along one H entry, central difference.
  auto logp = [&](double v) {
    const double d = v - ab.alpha * x0.H(0, 0);
    return -0.5 * d * d / (ab.beta * ab.beta);
  };
  const double h = 1e-5, v = s.xt.H(0, 0);
  const double fd = (logp(v + h) - logp(v - h)) / (2 * h);
  EXPECT_NEAR(s.score_target.H(0, 0), fd, 1e-6);
}

TEST(Trajectory, RejectsZeroTimeForVp) {
  Rng rng = stream_rng(0, 2);
  EXPECT_THROW(perturb_continuous(probe(), 0.0, rng, {}), std::invalid_argument);
}

TEST(Trajectory, SampleTimeInHalfOpenRange) {
  Rng rng = stream_rng(0, 3);
  for (int k = 0; k < 10000; ++k) {
    const double t = sample_time(rng, 0.1);
    EXPECT_GT(t, 0.1);
    EXPECT_LE(t, 1.0);
  }
}

TEST(Trajectory, AbsorbingMaskFraction) {
  const std::vector<double> betas(10, 0.05);
  const std::vector<int> tokens(20000, 1);
  Rng rng = stream_rng(0, 4);
  const auto out = perturb_absorbing(tokens, 3, 10, betas, rng);
  const double p = absorbing_mask_probability(betas, 10);
  const double frac =
      std::count(out.begin(), out.end(), 3) / static_cast<double>(out.size());
  EXPECT_NEAR(frac, p, 4.0 * std::sqrt(p * (1 - p) / out.size()));
}

TEST(Trajectory, UniformTransitionRowsAreStochastic) {
  const Eigen::MatrixXd q = uniform_transition_matrix(0.3, 4);
  EXPECT_TRUE(q.rowwise().sum().isApproxToConstant(1.0));
  EXPECT_NEAR(q(0, 0), 0.3 + 0.7 / 4, 1e-15);
}

TEST(Trajectory, ColdPerturbationIsRotationInvariant) {
  const Eigen::MatrixX3d p = probe().P;
  const std::vector<double> levels { 0.1, 0.2 };
  const ConformerBank bank = build_conformer_bank(p, levels, 0);
  ASSERT_EQ(bank.size(), 2u);
  Rng g = stream_rng(3, 0);
  const Eigen::Matrix3d r = random_rotation(g);
  Rng a = stream_rng(5, 0), b = stream_rng(5, 0);
  const AlphaBeta ab { 0.8, 0.6 };
  EXPECT_TRUE(perturb_cold_3d(p, bank, ab, a)
                  .isApprox(perturb_cold_3d(p * r.transpose(), bank, ab, b), 1e-9));
}

TEST(Trajectory, ModeNamesRoundTrip) {
  for (auto m: { TrajectoryMode::kContinuous, TrajectoryMode::kAbsorbing,
                 TrajectoryMode::kUniform, TrajectoryMode::kCold3d })
    EXPECT_EQ(trajectory_mode_from_string(to_string(m)), m);
}
