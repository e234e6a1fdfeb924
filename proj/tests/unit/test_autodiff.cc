//
// Project MolJAE - Copyright 2026 The MolJAE Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include <gtest/gtest.h>

#include "moljae/autodiff.h"
#include "moljae/gradcheck.h"

namespace ad = moljae::ad;

TEST(Autodiff, MatmulValueAndGradient) {
  ad::Tape tape;
  Eigen::MatrixXd a(2, 3), b(3, 2);
  a << 1, 2, 3, 4, 5, 6;
  b << 1, 0, 0, 1, 1, 1;
  ad::Tensor ta = tape.leaf(a), tb = tape.leaf(b);
  ad::Tensor c = ad::matmul(ta, tb);
  EXPECT_TRUE(c.matrix().isApprox(a * b));
  auto g = tape.backward(ad::sum(c));
  const Eigen::MatrixXd ones = Eigen::MatrixXd::Ones(2, 2);
  Eigen::MatrixXd ga = ones * b.transpose();
  for (int i = 0; i < 6; ++i)
    EXPECT_DOUBLE_EQ(g[ta](i), ga(i / 3, i % 3));
}

TEST(Autodiff, SumAlongAxisKeepsRank) {
  ad::Tensor x = ad::Tensor::from_matrix(Eigen::MatrixXd::Ones(3, 4));
  EXPECT_EQ(ad::sum(x, 0).shape(), (ad::Shape { 1, 4 }));
  EXPECT_EQ(ad::sum(x, 1).shape(), (ad::Shape { 3, 1 }));
  EXPECT_DOUBLE_EQ(ad::sum(x, 1).values()(2), 4.0);
}

TEST(Autodiff, SoftmaxRowsSumToOne) {
  Eigen::MatrixXd m(2, 3);
  m << 1000, 1001, 1002, -3, 0, 3;
  auto s = ad::softmax(ad::Tensor::from_matrix(m)).to_matrix();
  EXPECT_TRUE(s.allFinite());
  EXPECT_NEAR(s.row(0).sum(), 1.0, 1e-15);
  EXPECT_NEAR(s.row(1).sum(), 1.0, 1e-15);
}

TEST(Autodiff, GatherRowsAccumulatesRepeatedIndices) {
  ad::Tape tape;
  ad::Tensor x = tape.leaf(Eigen::MatrixXd::Ones(2, 2));
  const std::vector<ad::Index> idx { 0, 0, 1 };
  auto g = tape.backward(ad::sum(ad::gather_rows(x, idx)));
  EXPECT_DOUBLE_EQ(g[x](0), 2.0);
  EXPECT_DOUBLE_EQ(g[x](2), 1.0);
}

TEST(Autodiff, ShapeMismatchThrows) {
  auto a = ad::Tensor::zeros({ 2, 3 });
  auto b = ad::Tensor::zeros({ 2, 2 });
  EXPECT_THROW(ad::add(a, b), ad::ShapeError);
  EXPECT_THROW(ad::matmul(a, a), ad::ShapeError);
  EXPECT_THROW(ad::reshape(a, { 5 }), ad::ShapeError);
}

TEST(Autodiff, TapeIsSingleUse) {
  ad::Tape tape;
  auto x = tape.leaf(Eigen::MatrixXd::Ones(1, 1));
  auto y = ad::square(x);
  tape.backward(ad::sum(y));
  EXPECT_TRUE(tape.consumed());
  EXPECT_THROW(tape.backward(ad::sum(y)), ad::TapeError);
}

TEST(Autodiff, ConstantsCarryNoGradient) {
  auto x = ad::Tensor::from_matrix(Eigen::MatrixXd::Ones(2, 2));
  EXPECT_FALSE(ad::exp(x).requires_grad());
}

TEST(Autodiff, EveryPrimitiveMatchesFiniteDifferences) {
  for (const auto &r: ad::check_primitives(10, 3)) {
    SCOPED_TRACE(r.name);
    EXPECT_LT(r.max_rel_error, 1e-6);
  }
}

TEST(Autodiff, CompositeNetworkMatchesFiniteDifferences) {
  EXPECT_LT(ad::check_composite(10, 5).max_rel_error, 1e-6);
}

TEST(Autodiff, RelativeErrorUsesFloor) {
  EXPECT_DOUBLE_EQ(ad::relative_error(1e-12, 0.0), 1e-4);
  EXPECT_DOUBLE_EQ(ad::relative_error(2.0, 1.0), 0.5);
}
