//
// Project MolJAE - Copyright 2026 The MolJAE Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include <sstream>

#include <gtest/gtest.h>

#include "moljae/config.h"

using namespace moljae;

TEST(Config, ParsesKeyValueWithComments) {
  std::istringstream in("# header\n train.lr = 5e-4  # inline\n\nmodel.hidden=32\n");
  const ConfigMap m = parse_config(in);
  EXPECT_EQ(m.at("train.lr"), "5e-4");
  EXPECT_EQ(m.at("model.hidden"), "32");
}

TEST(Config, MalformedLineNamesLine) {
  std::istringstream in("a = 1\nnot a pair\n");
  try {
    parse_config(in);
    FAIL();
  } catch (const ConfigError &e) {
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos);
  }
}

TEST(Config, AppliesAndSnapshots) {
  RunConfig rc;
  apply_config({ { "train.lr", "0.0005" }, { "loss.lambda2", "0" },
                 { "schedule.kind", "ve" }, { "model.share_encoders", "true" } },
               rc);
  EXPECT_DOUBLE_EQ(rc.train.learning_rate, 5e-4);
  EXPECT_DOUBLE_EQ(rc.train.loss.lambda2, 0.0);
  EXPECT_EQ(rc.model.schedules.E.kind, NoiseSchedule::Kind::kVE);
  EXPECT_TRUE(rc.model.share_encoders);
  RunConfig copy;
  apply_config(snapshot(rc), copy);
  EXPECT_EQ(snapshot(copy), snapshot(rc));
}

TEST(Config, RejectsUnknownKeysAndBadValues) {
  RunConfig rc;
  EXPECT_THROW(apply_config({ { "train.nope", "1" } }, rc), ConfigError);
  EXPECT_THROW(apply_config({ { "train.epochs", "ten" } }, rc), ConfigError);
  EXPECT_THROW(apply_config({ { "model.share_encoders", "maybe" } }, rc), ConfigError);
}

TEST(Config, ModelOnlyApplyIgnoresOtherSections) {
  ModelConfig m;
  apply_model_config({ { "model.hidden", "24" }, { "train.lr", "1" } }, m);
  EXPECT_EQ(m.hidden, 24);
  EXPECT_EQ(snapshot(m).count("train.lr"), 0u);
}
