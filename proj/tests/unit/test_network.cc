//
// Project MolJAE - Copyright 2026 The MolJAE Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include <gtest/gtest.h>

#include "moljae/evalsuite.h"
#include "moljae/network.h"
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

TEST(Network, InitIsDeterministicAndSeeded) {
  const ModelConfig c = small();
  const ModelParams a = init_params(c, 1), b = init_params(c, 1), d = init_params(c, 2);
  EXPECT_EQ(a.scalar_count(), b.scalar_count());
  EXPECT_EQ(a.at("fuse.0.w").values, b.at("fuse.0.w").values);
  EXPECT_NE(a.at("fuse.0.w").values, d.at("fuse.0.w").values);
  EXPECT_TRUE(a.at("fuse.0.b").values.isZero());
}

TEST(Network, SharedEncodersOmitNoisyBranch) {
  ModelConfig c = small();
  EXPECT_TRUE(init_params(c, 0).contains("encoder_noisy.embed.w"));
  c.share_encoders = true;
  EXPECT_FALSE(init_params(c, 0).contains("encoder_noisy.embed.w"));
}

TEST(Network, ValidateRejectsBadConfigs) {
  ModelConfig c = small();
  c.time_dim = 7;
  EXPECT_THROW(validate(c), std::invalid_argument);
  c = small();
  c.hidden = 0;
  EXPECT_THROW(validate(c), std::invalid_argument);
}

TEST(Network, FourierEmbeddingShape) {
  const Eigen::RowVectorXd e = fourier_embed(0.3, 8);
  ASSERT_EQ(e.size(), 8);
  for (int k = 0; k < 4; ++k)
    EXPECT_NEAR(e(k) * e(k) + e(k + 4) * e(k + 4), 1.0, 1e-12);
}

TEST(Network, OutputShapesAndStructure) {
  const ModelConfig c = small();
  const ModelParams params = init_params(c, 0);
  const DenseTensors x = to_dense(random_probe_molecules(1, 0).front());
  const BoundParams p(params, nullptr);
  const ModelOutput out = forward(x, x, 0.5, p, c);
  const int n = x.size();
  EXPECT_EQ(out.score_p.field.shape(), (ad::Shape { n, 3 }));
  EXPECT_EQ(out.score_h.shape(), (ad::Shape { n, kAtomFeatureDim }));
  EXPECT_EQ(out.score_e.shape(), (ad::Shape { n * n, kNumBondTypes }));
  EXPECT_LT(out.score_p.field.matrix().colwise().sum().norm(), 1e-12);
  const Eigen::MatrixXd e = out.score_e.matrix();
  for (int i = 0; i < n; ++i) {
    EXPECT_DOUBLE_EQ(e.row(i * n + i).norm(), 0.0);
    for (int j = 0; j < n; ++j)
      EXPECT_NEAR((e.row(i * n + j) - e.row(j * n + i)).norm(), 0.0, 1e-12);
  }
  const Eigen::MatrixXd z = project(out.latent, p).matrix();
  EXPECT_NEAR(z.norm(), 1.0, 1e-12);
}

TEST(Network, PairDistanceFeaturesAreSymmetric) {
  const ModelConfig c = small();
  const Eigen::MatrixX3d pos = random_probe_molecules(1, 3).front().positions;
  const Eigen::MatrixXd f = pair_distance_features(pos, c);
  const int n = pos.rows();
  ASSERT_EQ(f.rows(), n * n);
  ASSERT_EQ(f.cols(), c.num_rbf);
  EXPECT_DOUBLE_EQ(f.row(0).norm(), 0.0);
  EXPECT_EQ(f.row(1), f.row(n));
}

TEST(Network, SymmetryContracts) {
  const ModelConfig c = small();
  SymmetryOptions opt;
  opt.rotations = 3;
  opt.permutations = 3;
  opt.reflections = 2;
  const auto probes = random_probe_molecules(3, 9);
  const SymmetryReport r = symmetry_report(init_params(c, 0), c, probes, opt);
  EXPECT_LT(r.max_rotation, 1e-8);
  EXPECT_LT(r.max_invariance, 1e-8);
  EXPECT_LT(r.max_permutation, 1e-8);
  EXPECT_LT(r.max_reflection, 1e-8);
  EXPECT_GT(r.min_reflection_naive, 1e-3);
}

TEST(Network, PooledEmbeddingIsFinite) {
  const ModelConfig c = small();
  const auto g = random_probe_molecules(1, 5).front();
  const Eigen::RowVectorXd e = pooled_embedding(to_dense(g), init_params(c, 0), c);
  EXPECT_EQ(e.size(), c.hidden);
  EXPECT_TRUE(e.allFinite());
}

TEST(Network, BetaScaledOutputRequiresPositiveBeta) {
  const ModelConfig c = small();
  const ModelParams params = init_params(c, 0);
  const DenseTensors x = to_dense(random_probe_molecules(1, 0).front());
  EXPECT_THROW(forward(x, x, 0.0, BoundParams(params, nullptr), c),
               std::invalid_argument);
}
