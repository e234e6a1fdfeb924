//
// Project MolJAE - Copyright 2026 The MolJAE Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include <cmath>
#include <filesystem>
#include <fstream>

#include <gtest/gtest.h>

#include "moljae/selftest.h"
#include "moljae/training.h"

using namespace moljae;
namespace fs = std::filesystem;

namespace {

ModelConfig small() {
  ModelConfig c;
  c.hidden = 16;
  c.time_dim = 8;
  c.projection_dim = 8;
  return c;
}

TrainConfig quick() {
  TrainConfig t;
  t.epochs = 2;
  t.batch_size = 3;
  t.learning_rate = 1e-3;
  return t;
}

fs::path temp(const std::string &name) { return fs::temp_directory_path() / name; }

}  // namespace

TEST(Training, AdamFirstStepMovesByLearningRate) {
  ModelParams p;
  p.add("w", { 2 }, Eigen::VectorXd::Zero(2));
  Gradients g { { "w", Eigen::Vector2d(3.0, -0.5) } };
  AdamState s;
  adam_step(p, g, s, { 0.1, 0.9, 0.999, 1e-12 });
  EXPECT_NEAR(p.at("w").values(0), -0.1, 1e-9);
  EXPECT_NEAR(p.at("w").values(1), 0.1, 1e-9);
  EXPECT_EQ(s.step, 1);
}

TEST(Training, AdamRejectsNonFiniteWithoutMutation) {
  ModelParams p;
  p.add("w", { 1 }, Eigen::VectorXd::Ones(1));
  AdamState s;
  Gradients g { { "w", Eigen::VectorXd::Constant(1, NAN) } };
  EXPECT_THROW(adam_step(p, g, s, {}), OptimizerError);
  EXPECT_EQ(p.at("w").values(0), 1.0);
  EXPECT_EQ(s.step, 0);
}

TEST(Training, ClipScalesToMaxNorm) {
  Gradients g { { "a", Eigen::Vector2d(3, 4) } };
  EXPECT_DOUBLE_EQ(clip_global_norm(g, 1.0), 5.0);
  EXPECT_NEAR(global_norm(g), 1.0, 1e-15);
}

TEST(Training, BatchGradientsCoverEveryParameter) {
  const ModelConfig m = small();
  const ModelParams params = init_params(m, 0);
  const auto graphs = random_probe_molecules(2, 1);
  std::vector<DenseTensors> dense;
  for (const auto &g: graphs)
    dense.push_back(to_dense(g));
  const std::vector<const DenseTensors *> batch { &dense[0], &dense[1] };
  Rng rng = stream_rng(0, 0);
  const BatchResult r = batch_gradients(params, m, batch, quick(), rng);
  EXPECT_TRUE(std::isfinite(r.report.total));
  EXPECT_GT(r.report.l_co, 0.0);
  for (const auto &[name, t]: params.tensors()) {
    ASSERT_TRUE(r.grads.count(name)) << name;
    EXPECT_EQ(r.grads.at(name).size(), t.values.size());
  }
}

TEST(Training, SameSeedGivesBitwiseIdenticalHistory) {
  const auto data = random_probe_molecules(6, 2);
  const auto a = train(data, small(), quick());
  const auto b = train(data, small(), quick());
  ASSERT_EQ(a.history.size(), 2u);
  for (std::size_t k = 0; k < a.history.size(); ++k)
    EXPECT_EQ(a.history[k].total, b.history[k].total);
}

TEST(Training, ValidateRejectsBadConfigs) {
  TrainConfig t = quick();
  t.batch_size = 1;
  EXPECT_THROW(validate(t), std::invalid_argument);
  t = quick();
  t.learning_rate = 0;
  EXPECT_THROW(validate(t), std::invalid_argument);
}

TEST(Training, CheckpointRoundTrip) {
  const ModelConfig m = small();
  Checkpoint c { init_params(m, 3), {}, { { "model.hidden", "16" } } };
  c.optimizer.step = 5;
  for (const auto &[name, t]: c.params.tensors()) {
    c.optimizer.m[name] = Eigen::VectorXd::Constant(t.values.size(), 0.5);
    c.optimizer.v[name] = Eigen::VectorXd::Constant(t.values.size(), 0.25);
  }
  const fs::path path = temp("moljae_test.ckpt");
  save_checkpoint(path, c);
  const Checkpoint r = load_checkpoint(path, c.params);
  EXPECT_EQ(r.optimizer.step, 5);
  EXPECT_EQ(r.metadata.at("model.hidden"), "16");
  for (const auto &[name, t]: c.params.tensors())
    EXPECT_EQ(r.params.at(name).values, t.values);
}

TEST(Training, CheckpointErrorsAreTyped) {
  const ModelConfig m = small();
  const fs::path path = temp("moljae_test2.ckpt");
  save_checkpoint(path, { init_params(m, 0), {}, {} });
  ModelConfig wider = m;
  wider.hidden = 32;
  try {
    load_checkpoint(path, init_params(wider, 0));
    FAIL();
  } catch (const CheckpointError &e) {
    EXPECT_EQ(e.kind(), CheckpointError::Kind::kShapeMismatch);
  }
  fs::resize_file(path, fs::file_size(path) / 2);
  try {
    load_checkpoint(path);
    FAIL();
  } catch (const CheckpointError &e) {
    EXPECT_EQ(e.kind(), CheckpointError::Kind::kTruncated);
  }
  std::ofstream(path, std::ios::trunc) << "NOTACKPT0000000000000";
  try {
    load_checkpoint(path);
    FAIL();
  } catch (const CheckpointError &e) {
    EXPECT_EQ(e.kind(), CheckpointError::Kind::kVersion);
  }
  try {
    load_checkpoint(temp("moljae_missing.ckpt"));
    FAIL();
  } catch (const CheckpointError &e) {
    EXPECT_EQ(e.kind(), CheckpointError::Kind::kIo);
  }
}
