//
// Project MolJAE - Copyright 2026 The MolJAE Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include <cmath>

#include <gtest/gtest.h>

#include "moljae/schedule.h"
#include "moljae/selftest.h"

using namespace moljae;

TEST(Schedule, VpEndpoints) {
  const auto s = NoiseSchedule::vp();
  EXPECT_DOUBLE_EQ(alpha_beta(s, 0.0).alpha, 1.0);
  EXPECT_DOUBLE_EQ(alpha_beta(s, 0.0).beta, 0.0);
  const double a1 = std::exp(-0.5 * (0.1 + 0.5 * (10.0 - 0.1)));
  EXPECT_NEAR(alpha_beta(s, 1.0).alpha, a1, 1e-15);
}

TEST(Schedule, VpIdentityOnGrid) {
  EXPECT_LT(vp_identity_residual(1000), 1e-12);
}

TEST(Schedule, VeIsGeometric) {
  const auto s = NoiseSchedule::ve(0.01, 1.0);
  EXPECT_DOUBLE_EQ(alpha_beta(s, 0.5).alpha, 1.0);
  EXPECT_NEAR(alpha_beta(s, 0.5).beta, 0.1, 1e-15);
  EXPECT_NEAR(alpha_beta(s, 1.0).beta, 1.0, 1e-15);
}

TEST(Schedule, DriftAndDiffusionMatchMarginals) {
  EXPECT_LT(drift_diffusion_residual(100), 1e-5);
}

TEST(Schedule, OutOfHorizonThrows) {
  EXPECT_THROW(alpha_beta(NoiseSchedule::vp(), -0.1), ScheduleError);
  EXPECT_THROW(alpha_beta(NoiseSchedule::vp(), 1.5), ScheduleError);
}

TEST(Schedule, ValidateRejectsInvertedRanges) {
  EXPECT_THROW(validate(NoiseSchedule::vp(5.0, 1.0)), std::invalid_argument);
  EXPECT_THROW(validate(NoiseSchedule::ve(0.0, 1.0)), std::invalid_argument);
  EXPECT_NO_THROW(validate(NoiseSchedule::vp()));
}

TEST(Schedule, KindNamesRoundTrip) {
  for (auto k: { NoiseSchedule::Kind::kVP, NoiseSchedule::Kind::kVE })
    EXPECT_EQ(schedule_kind_from_string(to_string(k)), k);
  EXPECT_THROW(schedule_kind_from_string("cosine"), std::invalid_argument);
}
