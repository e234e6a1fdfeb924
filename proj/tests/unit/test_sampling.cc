//
// Project MolJAE - Copyright 2026 The MolJAE Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include <cmath>

#include <gtest/gtest.h>

#include "moljae/sampling.h"
#include "moljae/selftest.h"

using namespace moljae;

namespace {

ModelConfig small() {
  ModelConfig c;
  c.hidden = 16;
  c.time_dim = 8;
  c.projection_dim = 8;
  return c;
}

}  // namespace

TEST(Sampling, ReverseUpdateFormula) {
  const Eigen::MatrixXd y = Eigen::MatrixXd::Constant(1, 1, 2.0);
  const Eigen::MatrixXd s = Eigen::MatrixXd::Constant(1, 1, -1.0);
  const Eigen::MatrixXd z = Eigen::MatrixXd::Constant(1, 1, 0.5);
  const DriftDiffusion fg { -0.5, 2.0 };
  const double dt = 0.01, lambda = 0.5;
  const double expect = 2.0 - (-0.5 * 2.0 - 0.5 * 1.25 * 4.0 * -1.0) * dt
                        + lambda * 2.0 * std::sqrt(dt) * 0.5;
  EXPECT_NEAR(reverse_update(y, s, fg, dt, lambda, z)(0, 0), expect, 1e-15);
}

TEST(Sampling, PriorIsCenteredAndSymmetric) {
  Rng rng = stream_rng(0, 0);
  const DenseTensors x = sample_prior(5, rng);
  EXPECT_LT(x.P.colwise().sum().norm(), 1e-12);
  EXPECT_EQ(x.edge(1, 3), x.edge(3, 1));
  EXPECT_THROW(sample_prior(0, rng), std::invalid_argument);
}

TEST(Sampling, QuantizeTakesArgmax) {
  DenseTensors x;
  x.H = Eigen::MatrixXd::Zero(2, kAtomFeatureDim);
  x.H(0, 1) = 1.0;
  x.H(0, kNumElements + 2) = 1.0;
  x.H(1, 3) = 1.0;
  x.H(1, kNumElements + 1) = 1.0;
  x.E = Eigen::MatrixXd::Zero(4, kNumBondTypes);
  x.E(1, 2) = 0.9;
  x.E(2, 2) = 0.1;
  x.P = Eigen::MatrixX3d::Random(2, 3);
  const MoleculeGraph g = quantize(x);
  EXPECT_EQ(g.atom_types, (std::vector<int> { 1, 3 }));
  EXPECT_EQ(g.charges, (std::vector<int> { 1, 0 }));
  EXPECT_EQ(g.bonds(0, 1), 2);
  EXPECT_EQ(g.bonds(1, 0), 2);
}

TEST(Sampling, QuantizeTiesGoToLowerIndex) {
  DenseTensors x;
  x.H = Eigen::MatrixXd::Zero(1, kAtomFeatureDim);
  x.E = Eigen::MatrixXd::Zero(1, kNumBondTypes);
  x.P = Eigen::MatrixX3d::Zero(1, 3);
  const MoleculeGraph g = quantize(x);
  EXPECT_EQ(g.atom_types[0], 0);
  EXPECT_EQ(g.charges[0], -1);
}

TEST(Sampling, ResultIndependentOfThreadCount) {
  const ModelConfig m = small();
  const ModelParams p = init_params(m, 0);
  SamplerConfig c;
  c.steps = 10;
  c.n_atoms = 4;
  c.seed = 3;
  const auto one = generate_tensors(p, m, c, 3);
  c.threads = 3;
  const auto three = generate_tensors(p, m, c, 3);
  for (int k = 0; k < 3; ++k)
    EXPECT_EQ(one[k].P, three[k].P);
}

TEST(Sampling, OdeSamplingIsDeterministic) {
  const ModelConfig m = small();
  const ModelParams p = init_params(m, 0);
  SamplerConfig c;
  c.steps = 10;
  c.n_atoms = 3;
  c.lambda = 0.0;
  const auto a = generate(p, m, c, 2), b = generate(p, m, c, 2);
  EXPECT_EQ(a[0].positions, b[0].positions);
}

TEST(Sampling, ValidateRejectsBadConfigs) {
  SamplerConfig c;
  c.n_atoms = 0;
  EXPECT_THROW(validate(c), std::invalid_argument);
  c.n_atoms = 3;
  c.lambda = -1;
  EXPECT_THROW(validate(c), std::invalid_argument);
}

TEST(Sampling, NonFiniteScoreRaisesWithStep) {
  const ScoreFunction bad = [](const DenseTensors &s, double) {
    DenseTensors out = s;
    out.P.setConstant(NAN);
    return out;
  };
  Rng rng = stream_rng(0, 1);
  try {
    reverse_step(sample_prior(3, rng), 0.5, 0.01, bad, {}, 1.0, rng, 7);
    FAIL();
  } catch (const SamplingError &e) {
    EXPECT_EQ(e.step(), 7);
  }
}
