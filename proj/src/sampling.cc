//
// Project MolJAE - Copyright 2026 The MolJAE Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "moljae/sampling.h"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>

namespace moljae {
namespace {

template <class Row>
int argmax(const Row &row, int begin, int end) {
  int best = begin;
  for (int k = begin + 1; k < end; ++k)
    if (row(k) > row(best))
      best = k;
  return best;
}

}  // namespace

void validate(const SamplerConfig &c) {
  if (c.steps < 1)
    throw std::invalid_argument("sample.steps must be at least 1");
  if (!(c.lambda >= 0.0) || !std::isfinite(c.lambda))
    throw std::invalid_argument("sample.lambda must be non-negative");
  if (!(c.t_end > 0.0 && c.t_end < kHorizon))
    throw std::invalid_argument("sample.t_end must lie in (0, 1)");
  if (c.n_atoms < 1 || c.n_atoms > kMaxAtoms)
    throw std::invalid_argument("sample.n_atoms must lie in [1, "
                                + std::to_string(kMaxAtoms) + "]");
  if (c.threads < 1)
    throw std::invalid_argument("threads must be at least 1");
}

ScoreFunction model_score(const ModelParams &params, const ModelConfig &model,
                          const DenseTensors *clean) {
  auto bound = std::make_shared<BoundParams>(params, nullptr);
  return [bound, model, clean](const DenseTensors &state, double t) {
    ModelOutput out =
        forward(clean ? *clean : state, state, t, *bound, model);
    DenseTensors s;
    s.P = out.score_p.field.matrix();
    s.H = out.score_h.matrix();
    s.E = out.score_e.matrix();
    return s;
  };
}

Eigen::MatrixXd reverse_update(const Eigen::MatrixXd &y,
                               const Eigen::MatrixXd &score, DriftDiffusion fg,
                               double dt, double lambda,
                               const Eigen::MatrixXd &noise) {
  const double g2 = fg.g * fg.g;
  Eigen::MatrixXd out =
      y - (fg.f * y - 0.5 * (1.0 + lambda * lambda) * g2 * score) * dt;
  if (lambda != 0.0)
    out += (lambda * fg.g * std::sqrt(dt)) * noise;
  return out;
}

DenseTensors reverse_step(const DenseTensors &state, double t, double dt,
                          const ScoreFunction &score,
                          const ComponentSchedules &schedules, double lambda,
                          Rng &rng, int step) {
  if (!(t > 0.0 && t <= kHorizon) || !(dt > 0.0))
    throw std::invalid_argument("reverse_step: need t in (0, 1] and dt > 0");
  const DenseTensors s = score(state, t);
  DenseTensors z;
  if (lambda != 0.0)
    z = sample_noise(state, rng);
  else
    z = { Eigen::MatrixXd::Zero(state.H.rows(), state.H.cols()),
          Eigen::MatrixXd::Zero(state.E.rows(), state.E.cols()),
          Eigen::MatrixX3d::Zero(state.P.rows(), 3) };

  DenseTensors next;
  next.P = reverse_update(state.P, s.P, drift_diffusion(schedules.P, t), dt,
                          lambda, z.P);
  next.H = reverse_update(state.H, s.H, drift_diffusion(schedules.H, t), dt,
                          lambda, z.H);
  next.E = reverse_update(state.E, s.E, drift_diffusion(schedules.E, t), dt,
                          lambda, z.E);
  if (!next.P.allFinite() || !next.H.allFinite() || !next.E.allFinite())
    throw SamplingError(step, "reverse_step: non-finite state at step "
                                  + std::to_string(step) + " (t = "
                                  + std::to_string(t) + ")");
  return next;
}

DenseTensors sample_prior(int n_atoms, Rng &rng) {
  if (n_atoms < 1)
    throw std::invalid_argument("sample_prior: need at least one atom");
  DenseTensors like;
  like.H = Eigen::MatrixXd::Zero(n_atoms, kAtomFeatureDim);
  like.E = Eigen::MatrixXd::Zero(n_atoms * n_atoms, kNumBondTypes);
  like.P = Eigen::MatrixX3d::Zero(n_atoms, 3);
  return sample_noise(like, rng);
}

DenseTensors integrate(DenseTensors state, const ScoreFunction &score,
                       const ComponentSchedules &schedules,
                       const SamplerConfig &c, Rng &rng) {
  const double dt = (kHorizon - c.t_end) / c.steps;
  for (int k = 0; k < c.steps; ++k) {
    const double t = kHorizon - k * dt;
    state = reverse_step(state, t, dt, score, schedules, c.lambda, rng, k);
  }
  state.P = centered(state.P);
  return state;
}

std::vector<DenseTensors> generate_tensors(const ModelParams &params,
                                           const ModelConfig &model,
                                           const SamplerConfig &c, int count) {
  validate(c);
  validate(model);
  if (count < 0)
    throw std::invalid_argument("generate: negative sample count");
  std::vector<DenseTensors> out(count);
  std::atomic<int> next { 0 };
  std::exception_ptr error;
  std::mutex error_mu;
  auto worker = [&] {
    ScoreFunction score = model_score(params, model);
    for (int k = next++; k < count; k = next++) {
      try {
        Rng rng = stream_rng(c.seed, static_cast<std::uint64_t>(k), 0x5a3b);
        out[k] = integrate(sample_prior(c.n_atoms, rng), score, model.schedules,
                           c, rng);
      } catch (...) {
        std::lock_guard lock(error_mu);
        if (!error)
          error = std::current_exception();
      }
    }
  };
  const int width = std::max(1, std::min(c.threads, count));
  if (width == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int i = 0; i < width; ++i)
      pool.emplace_back(worker);
  }
  if (error)
    std::rethrow_exception(error);
  return out;
}

std::vector<MoleculeGraph> generate(const ModelParams &params,
                                    const ModelConfig &model,
                                    const SamplerConfig &config, int count) {
  std::vector<MoleculeGraph> out;
  for (const auto &t: generate_tensors(params, model, config, count))
    out.push_back(quantize(t));
  return out;
}

MoleculeGraph quantize(const DenseTensors &x) {
  const int n = x.size();
  MoleculeGraph g;
  g.atom_types.resize(n);
  g.charges.resize(n);
  for (int i = 0; i < n; ++i) {
    const auto row = x.H.row(i);
    g.atom_types[i] = argmax(row, 0, kNumElements);
    g.charges[i] = argmax(row, kNumElements, kAtomFeatureDim) - kNumElements - 1;
  }
  g.bonds = Eigen::MatrixXi::Zero(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      const Eigen::RowVectorXd avg = 0.5 * (x.edge(i, j) + x.edge(j, i));
      const int b = argmax(avg, 0, static_cast<int>(avg.size()));
      g.bonds(i, j) = b;
      g.bonds(j, i) = b;
    }
  g.positions = centered(x.P);
  return g;
}

}  // namespace moljae
