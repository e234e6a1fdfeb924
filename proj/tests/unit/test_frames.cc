//
// Project MolJAE - Copyright 2026 The MolJAE Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include <cmath>

#include <gtest/gtest.h>

#include "moljae/evalsuite.h"
#include "moljae/frames.h"
#include "moljae/selftest.h"

using namespace moljae;

namespace {

Positions<double> probe_positions() {
  return random_probe_molecules(1, 11).front().positions;
}

}  // namespace

TEST(Frames, OrthonormalAndRightHanded) {
  for (const auto &f: node_frames<double>(probe_positions())) {
    const Eigen::Matrix3d m = f.matrix();
    EXPECT_TRUE((m.transpose() * m).isIdentity(1e-12));
    EXPECT_NEAR(m.determinant(), 1.0, 1e-12);
  }
}

TEST(Frames, RotateWithTheMolecule) {
  Rng rng = stream_rng(1, 0);
  const Eigen::Matrix3d r = random_rotation(rng);
  const Positions<double> p = probe_positions();
  const auto f0 = node_frames<double>(p);
  const auto f1 = node_frames<double>(p * r.transpose());
  for (std::size_t i = 0; i < f0.size(); ++i)
    EXPECT_TRUE((r * f0[i].matrix()).isApprox(f1[i].matrix(), 1e-10));
}

TEST(Frames, ReflectionFlipsOnlyE2) {
  const Eigen::Matrix3d q = Eigen::Vector3d(1, 1, -1).asDiagonal();
  const Positions<double> p = probe_positions();
  const auto f0 = node_frames<double>(p);
  const auto f1 = node_frames<double>(p * q);
  for (std::size_t i = 0; i < f0.size(); ++i) {
    EXPECT_TRUE((q * f0[i].e1).isApprox(f1[i].e1, 1e-10));
    EXPECT_TRUE((-q * f0[i].e2).isApprox(f1[i].e2, 1e-10));
    EXPECT_TRUE((q * f0[i].e3).isApprox(f1[i].e3, 1e-10));
  }
}

TEST(Frames, DegenerateInputFallsBackToCanonical) {
  const Vec3<double> x(1, 0, 0);
  const Frame<double> f = frame_from_center<double>(x, 2.0 * x);
  EXPECT_TRUE(f.degenerate);
  EXPECT_TRUE(f.matrix().isIdentity());
  EXPECT_TRUE(node_frames<double>(Positions<double>::Zero(1, 3))[0].degenerate);
}

TEST(Frames, TemplatedOnScalar) {
  Positions<float> p = probe_positions().cast<float>();
  for (const auto &f: node_frames<float>(p))
    EXPECT_NEAR(f.matrix().determinant(), 1.0f, 1e-5f);
}

TEST(Frames, ProjectionIsRotationInvariant) {
  Rng rng = stream_rng(2, 0);
  const Eigen::Matrix3d r = random_rotation(rng);
  const Positions<double> p = probe_positions();
  auto project = [](const Positions<double> &x) {
    const auto f = node_frames<double>(x);
    return project_to_frame<double>(x, global_frame<double>(f));
  };
  EXPECT_TRUE(project(p).isApprox(project(p * r.transpose()), 1e-10));
}

TEST(Frames, TensorizeCombinesAxes) {
  Frame<double> f;
  EXPECT_TRUE(tensorize<double>(Vec3<double>(1, 2, 3), f).isApprox(Vec3<double>(1, 2, 3)));
}

TEST(Frames, HandComputedExample) {
  const Frame<double> f =
      frame_from_center<double>(Vec3<double>(1, 0, 0), Vec3<double>(0, 1, 0));
  const double r = 1.0 / std::sqrt(2.0);
  EXPECT_TRUE(f.e1.isApprox(Vec3<double>(r, -r, 0)));
  EXPECT_TRUE(f.e2.isApprox(Vec3<double>(0, 0, -1)));
  EXPECT_TRUE(f.e3.isApprox(Vec3<double>(r, r, 0)));
}

TEST(Frames, PointInversionKeepsE2) {
  const Positions<double> p = probe_positions();
  const auto f0 = node_frames<double>(p);
  const auto f1 = node_frames<double>(-p);
  for (std::size_t i = 0; i < f0.size(); ++i) {
    EXPECT_TRUE((-f0[i].e1).isApprox(f1[i].e1, 1e-10));
    EXPECT_TRUE(f0[i].e2.isApprox(f1[i].e2, 1e-10));
    EXPECT_TRUE((-f0[i].e3).isApprox(f1[i].e3, 1e-10));
  }
}

TEST(Frames, GlobalFrameOfOpposedFramesIsOrthonormal) {
  Frame<double> a, b;
  b.e1 = -a.e1;
  b.e3 = -a.e3;
  const std::vector<Frame<double>> frames { a, b };
  const Frame<double> g = global_frame<double>(frames);
  EXPECT_TRUE(g.degenerate);
  EXPECT_TRUE((g.matrix().transpose() * g.matrix()).isIdentity(1e-12));
}
