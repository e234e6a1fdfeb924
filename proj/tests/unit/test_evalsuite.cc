//
// Project MolJAE - Copyright 2026 The MolJAE Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include <cmath>
#include <set>

#include <gtest/gtest.h>

#include "moljae/evalsuite.h"
#include "moljae/selftest.h"

using namespace moljae;

namespace {

std::vector<MoleculeGraph> toy() { return load_dataset(MOLJAE_DATA_DIR "/toy20.jsonl"); }

}  // namespace

TEST(Evalsuite, RandomRotationIsProper) {
  Rng rng = stream_rng(0, 0);
  for (int k = 0; k < 10; ++k) {
    const Eigen::Matrix3d r = random_rotation(rng);
    EXPECT_TRUE((r.transpose() * r).isIdentity(1e-12));
    EXPECT_NEAR(r.determinant(), 1.0, 1e-12);
  }
}

TEST(Evalsuite, CanonicalHashIgnoresAtomOrder) {
  const auto g = toy()[4];
  std::vector<int> perm(g.size());
  for (int i = 0; i < g.size(); ++i)
    perm[i] = g.size() - 1 - i;
  EXPECT_EQ(canonical_hash(g), canonical_hash(permute(g, perm)));
  MoleculeGraph h = g;
  h.bonds(0, 1) = h.bonds(1, 0) = 2;
  EXPECT_NE(canonical_hash(g), canonical_hash(h));
}

TEST(Evalsuite, ToyCorpusHashesAreDistinct) {
  std::set<std::uint64_t> hashes;
  for (const auto &g: toy())
    hashes.insert(canonical_hash(g));
  EXPECT_EQ(hashes.size(), 20u);
}

TEST(Evalsuite, TotalVariation) {
  EXPECT_DOUBLE_EQ(total_variation(Eigen::Vector2d(1, 0), Eigen::Vector2d(0, 1)), 1.0);
  EXPECT_DOUBLE_EQ(total_variation(Eigen::Vector2d(0.5, 0.5), Eigen::Vector2d(0.5, 0.5)), 0.0);
  EXPECT_DOUBLE_EQ(total_variation(Eigen::Vector2d(0, 0), Eigen::Vector2d(0, 0)), 0.0);
  EXPECT_DOUBLE_EQ(total_variation(Eigen::Vector2d(0, 0), Eigen::Vector2d(1, 0)), 1.0);
}

TEST(Evalsuite, MetricsOfReferenceAgainstItself) {
  const auto ref = toy();
  const GenerationMetrics m = generation_metrics(ref, ref);
  EXPECT_EQ(m.samples, 20);
  EXPECT_DOUBLE_EQ(m.atom_tv, 0.0);
  EXPECT_DOUBLE_EQ(m.bond_tv, 0.0);
  EXPECT_DOUBLE_EQ(m.validity, 1.0);
  EXPECT_DOUBLE_EQ(m.unique, 1.0);
  EXPECT_THROW(generation_metrics({}, ref), std::invalid_argument);
}

TEST(Evalsuite, GaussianMarginalScore) {
  const auto s = NoiseSchedule::vp();
  const AlphaBeta ab = alpha_beta(s, 0.5);
  const double var = ab.alpha * ab.alpha * 0.25 + ab.beta * ab.beta;
  EXPECT_NEAR(gaussian_marginal_score(2.0, 0.5, 1.0, 0.5, s),
              -(2.0 - ab.alpha) / var, 1e-14);
}

TEST(Evalsuite, RadiusOfGyration) {
  MoleculeGraph g = toy()[0];
  g.positions.setZero();
  g.positions(0, 0) = 1.0;
  g.positions(1, 0) = -1.0;
  EXPECT_NEAR(radius_of_gyration(g), std::sqrt(2.0 / 3.0), 1e-12);
}

TEST(Evalsuite, RidgeProbeRecoversLinearTarget) {
  Rng rng = stream_rng(0, 1);
  std::normal_distribution<double> n;
  Eigen::MatrixXd x(200, 3);
  for (Eigen::Index i = 0; i < x.size(); ++i)
    x.data()[i] = n(rng);
  const Eigen::VectorXd y = (x * Eigen::Vector3d(1, -2, 0.5)).array() + 3.0;
  EXPECT_LT(ridge_probe_mse(x, y, 0, 1e-8), 1e-10);
}

TEST(Evalsuite, ReportsSerialize) {
  const auto ref = toy();
  const std::string js = to_json(generation_metrics(ref, ref));
  EXPECT_NE(js.find("\"atom_tv\""), std::string::npos);
  EXPECT_FALSE(to_text(generation_metrics(ref, ref)).empty());
}
