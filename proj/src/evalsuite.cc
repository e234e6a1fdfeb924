//
// Project MolJAE - Copyright 2026 The MolJAE Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "moljae/evalsuite.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <numeric>
#include <set>
#include <sstream>

#include <json.hpp>

#include "moljae/training.h"

namespace moljae {
namespace {

using nlohmann::json;

// ---- symmetry helpers ----

struct Snapshot {
  Eigen::MatrixXd P, H, E;
  Eigen::MatrixXd e2_part;  // centered h2 e2 contribution to P
  Eigen::RowVectorXd pooled, proj;
};

Snapshot run(const DenseTensors &clean, const DenseTensors &noisy, double t,
             const BoundParams &p, const ModelConfig &model,
             const ForwardOptions &opt) {
  ModelOutput out = forward(clean, noisy, t, p, model, opt);
  Snapshot s;
  s.P = out.score_p.field.matrix();
  s.H = out.score_h.matrix();
  s.E = out.score_e.matrix();
  s.pooled = out.latent.pooled.matrix();
  s.proj = project(out.latent, p).matrix();
  const Eigen::Index n = s.P.rows();
  const Eigen::MatrixXd coeffs = out.score_p.coeffs.matrix();
  Eigen::MatrixXd part(n, 3);
  for (Eigen::Index i = 0; i < n; ++i)
    part.row(i) = coeffs(i, 1) * out.frames[i].e2.transpose();
  s.e2_part = part.rowwise() - part.colwise().mean();
  return s;
}

double max_abs(const Eigen::MatrixXd &m) {
  return m.size() ? m.cwiseAbs().maxCoeff() : 0.0;
}

double invariance_gap(const Snapshot &a, const Snapshot &b) {
  return std::max({ max_abs(a.H - b.H), max_abs(a.E - b.E),
                    max_abs(a.pooled - b.pooled), max_abs(a.proj - b.proj) });
}

DenseTensors moved(const DenseTensors &x, const Eigen::Matrix3d &q) {
  DenseTensors y = x;
  y.P = x.P * q.transpose();
  return y;
}

// ---- hashing ----

struct Fnv {
  std::uint64_t h = 1469598103934665603ull;
  void add(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) {
      h ^= (v >> (8 * i)) & 0xff;
      h *= 1099511628211ull;
    }
  }
};

Eigen::VectorXd normalized(Eigen::VectorXd v) {
  const double s = v.sum();
  if (s > 0)
    v /= s;
  return v;
}

// ---- gaussian toy MLP ----

constexpr int kToyFeatures = 10;

Eigen::RowVectorXd toy_features(double x, double t) {
  Eigen::RowVectorXd f(kToyFeatures);
  f(0) = x;
  f(1) = t;
  for (int k = 0; k < 4; ++k) {
    const double w = std::numbers::pi * (k + 1) * 0.5;
    f(2 + 2 * k) = std::sin(w * t);
    f(3 + 2 * k) = std::cos(w * t);
  }
  return f;
}

ad::Tensor toy_mlp(const ad::Tensor &in, const BoundParams &p) {
  ad::Tensor h = ad::silu(linear(in, p, "l0"));
  h = ad::silu(linear(h, p, "l1"));
  return linear(h, p, "l2");
}

ModelParams toy_params(int hidden, Rng &rng) {
  ModelParams p;
  const int dims[4] = { kToyFeatures, hidden, hidden, 1 };
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int l = 0; l < 3; ++l) {
    const double a = std::sqrt(6.0 / (dims[l] + dims[l + 1]));
    Eigen::VectorXd w(dims[l] * dims[l + 1]);
    for (auto &v: w)
      v = a * u(rng);
    p.add("l" + std::to_string(l) + ".w", { dims[l], dims[l + 1] }, w);
    p.add("l" + std::to_string(l) + ".b", { 1, dims[l + 1] },
          Eigen::VectorXd::Zero(dims[l + 1]));
  }
  return p;
}

}  // namespace

// ---- symmetry -----------------------------------------------------------

Eigen::Matrix3d random_rotation(Rng &rng) {
  std::normal_distribution<double> normal;
  Eigen::Quaterniond q(normal(rng), normal(rng), normal(rng), normal(rng));
  q.normalize();
  return q.toRotationMatrix();
}

SymmetryReport symmetry_report(const ModelParams &params,
                               const ModelConfig &model,
                               std::span<const MoleculeGraph> probes,
                               const SymmetryOptions &opt) {
  const BoundParams bound(params, nullptr);
  SymmetryReport report;
  report.min_reflection_naive = probes.empty() ? 0.0 : 1e300;
  for (std::size_t m = 0; m < probes.size(); ++m) {
    Rng rng = stream_rng(opt.seed, m, 0x5e3);
    const DenseTensors clean = to_dense(probes[m]);
    const DenseTensors noisy =
        perturb_continuous(clean, opt.t, rng, ComponentSchedules {}).xt;
    const Snapshot base = run(clean, noisy, opt.t, bound, model, opt.forward);
    MoleculeSymmetry ms;
    ms.reflection_naive = 1e300;

    for (int r = 0; r < opt.rotations; ++r) {
      const Eigen::Matrix3d q = random_rotation(rng);
      const Snapshot s =
          run(moved(clean, q), moved(noisy, q), opt.t, bound, model, opt.forward);
      ms.rotation = std::max(ms.rotation, max_abs(s.P - base.P * q.transpose()));
      ms.invariance = std::max(ms.invariance, invariance_gap(s, base));
    }
    for (int r = 0; r < opt.reflections; ++r) {
      const Eigen::Matrix3d q =
          random_rotation(rng) * Eigen::Vector3d(1, 1, -1).asDiagonal();
      const Snapshot s =
          run(moved(clean, q), moved(noisy, q), opt.t, bound, model, opt.forward);
      const Eigen::MatrixXd expected =
          (base.P - 2.0 * base.e2_part) * q.transpose();
      ms.reflection = std::max(ms.reflection, max_abs(s.P - expected));
      ms.reflection_naive = std::min(ms.reflection_naive,
                                     max_abs(s.P - base.P * q.transpose()));
      ms.invariance = std::max(ms.invariance, invariance_gap(s, base));
    }
    if (opt.reflections == 0)
      ms.reflection_naive = 0.0;
    std::vector<int> perm(clean.size());
    for (int r = 0; r < opt.permutations; ++r) {
      std::iota(perm.begin(), perm.end(), 0);
      std::shuffle(perm.begin(), perm.end(), rng);
      const Snapshot s = run(permute(clean, perm), permute(noisy, perm), opt.t, bound,
                             model, opt.forward);
      DenseTensors ref;
      ref.P = base.P;
      ref.H = base.H;
      ref.E = base.E;
      const DenseTensors want = permute(ref, perm);
      ms.permutation = std::max(
          { ms.permutation, max_abs(s.P - want.P), max_abs(s.H - want.H),
            max_abs(s.E - want.E), max_abs(s.pooled - base.pooled),
            max_abs(s.proj - base.proj) });
    }

    report.max_rotation = std::max(report.max_rotation, ms.rotation);
    report.max_invariance = std::max(report.max_invariance, ms.invariance);
    report.max_permutation = std::max(report.max_permutation, ms.permutation);
    report.max_reflection = std::max(report.max_reflection, ms.reflection);
    report.min_reflection_naive =
        std::min(report.min_reflection_naive, ms.reflection_naive);
    report.molecules.push_back(ms);
  }
  return report;
}

// ---- gaussian toy -------------------------------------------------------

double gaussian_marginal_score(double x, double t, double mu, double sigma,
                               const NoiseSchedule &schedule) {
  const AlphaBeta ab = alpha_beta(schedule, t);
  return -(x - ab.alpha * mu)
         / (ab.alpha * ab.alpha * sigma * sigma + ab.beta * ab.beta);
}

GaussianToyResult gaussian_score_toy(const GaussianToyConfig &c) {
  validate(c.schedule);
  if (c.steps < 1 || c.batch < 1 || c.hidden < 1 || !(c.sigma > 0.0)
      || !(c.t_min > 0.0 && c.t_min < kHorizon))
    throw std::invalid_argument("gaussian_score_toy: bad configuration");
  Rng rng = stream_rng(c.seed, 0, 0x6a55);
  ModelParams params = toy_params(c.hidden, rng);
  AdamState state;
  const auto start = std::chrono::steady_clock::now();
  std::normal_distribution<double> normal;
  GaussianToyResult result;

  for (int step = 0; step < c.steps; ++step) {
    // The network predicts beta * s; the beta^2-weighted loss is then
    // mean (beta s + z)^2.
    Eigen::MatrixXd in(c.batch, kToyFeatures);
    Eigen::VectorXd z(c.batch);
    for (int b = 0; b < c.batch; ++b) {
      const double t = sample_time(rng, c.t_min);
      const double x0 = c.mu + c.sigma * normal(rng);
      z[b] = normal(rng);
      const AlphaBeta ab = alpha_beta(c.schedule, t);
      in.row(b) = toy_features(ab.alpha * x0 + ab.beta * z[b], t);
    }
    ad::Tape tape;
    BoundParams bound(params, &tape);
    ad::Tensor u = toy_mlp(ad::Tensor::from_matrix(in), bound);
    ad::Tensor loss =
        ad::mean(ad::square(ad::add(u, ad::Tensor::column(z))));
    ad::GradientMap g = tape.backward(loss);
    Gradients grads;
    for (const auto &[name, leaf]: bound.tensors())
      grads.emplace(name, g[leaf]);
    const double lr =
        c.learning_rate * (0.05 + 0.95 * 0.5
                                      * (1.0 + std::cos(std::numbers::pi * step
                                                        / c.steps)));
    adam_step(params, grads, state, { lr, 0.9, 0.999, 1e-8 });
    result.steps_run = step + 1;
    const double elapsed = std::chrono::duration<double>(
                               std::chrono::steady_clock::now() - start)
                               .count();
    if (elapsed > c.max_seconds)
      break;
  }
  result.seconds = std::chrono::duration<double>(
                       std::chrono::steady_clock::now() - start)
                       .count();

  const NoiseSchedule schedule = c.schedule;
  result.score = [params, schedule](double x, double t) {
    const BoundParams bound(params, nullptr);
    const double u = toy_mlp(ad::Tensor::from_matrix(toy_features(x, t)), bound)
                         .item();
    return u / alpha_beta(schedule, t).beta;
  };

  for (double t: { 0.1, 0.5, 0.9 }) {
    const AlphaBeta ab = alpha_beta(c.schedule, t);
    const double sd =
        std::sqrt(ab.alpha * ab.alpha * c.sigma * c.sigma + ab.beta * ab.beta);
    double err = 0.0, scale = 0.0;
    for (int k = 0; k <= 40; ++k) {
      const double x = ab.alpha * c.mu + sd * (-2.0 + 4.0 * k / 40.0);
      const double truth = gaussian_marginal_score(x, t, c.mu, c.sigma, c.schedule);
      err = std::max(err, std::abs(result.score(x, t) - truth));
      scale = std::max(scale, std::abs(truth));
    }
    result.times.push_back(t);
    result.relative_errors.push_back(err / scale);
    result.max_relative_error = std::max(result.max_relative_error, err / scale);
  }
  return result;
}

// ---- generation metrics -------------------------------------------------

std::uint64_t canonical_hash(const MoleculeGraph &g) {
  const int n = g.size();
  std::vector<std::uint64_t> label(n), next(n);
  for (int i = 0; i < n; ++i) {
    Fnv f;
    f.add(static_cast<std::uint64_t>(g.atom_types[i]));
    f.add(static_cast<std::uint64_t>(g.charges[i] + 1));
    label[i] = f.h;
  }
  std::vector<std::pair<int, std::uint64_t>> nb;
  for (int round = 0; round < 3; ++round) {
    for (int i = 0; i < n; ++i) {
      nb.clear();
      for (int j = 0; j < n; ++j)
        if (j != i && g.bonds(i, j) > 0)
          nb.emplace_back(g.bonds(i, j), label[j]);
      std::sort(nb.begin(), nb.end());
      Fnv f;
      f.add(label[i]);
      f.add(nb.size());
      for (const auto &[b, l]: nb) {
        f.add(static_cast<std::uint64_t>(b));
        f.add(l);
      }
      next[i] = f.h;
    }
    label.swap(next);
  }
  std::sort(label.begin(), label.end());
  Fnv f;
  f.add(static_cast<std::uint64_t>(n));
  for (auto l: label)
    f.add(l);
  return f.h;
}

double total_variation(const Eigen::VectorXd &p, const Eigen::VectorXd &q) {
  if (p.size() != q.size())
    throw std::invalid_argument("total_variation: size mismatch");
  const double sp = p.sum(), sq = q.sum();
  if (sp <= 0.0 && sq <= 0.0)
    return 0.0;
  if (sp <= 0.0 || sq <= 0.0)
    return 1.0;
  return 0.5 * (p / sp - q / sq).cwiseAbs().sum();
}

Eigen::VectorXd atom_type_frequencies(std::span<const MoleculeGraph> graphs) {
  Eigen::VectorXd f = Eigen::VectorXd::Zero(kNumElements);
  for (const auto &g: graphs)
    for (int a: g.atom_types)
      f[a] += 1.0;
  return normalized(f);
}

Eigen::VectorXd bond_type_frequencies(std::span<const MoleculeGraph> graphs) {
  Eigen::VectorXd f = Eigen::VectorXd::Zero(kNumBondTypes - 1);
  for (const auto &g: graphs)
    for (int i = 0; i < g.size(); ++i)
      for (int j = i + 1; j < g.size(); ++j)
        if (g.bonds(i, j) > 0)
          f[g.bonds(i, j) - 1] += 1.0;
  return normalized(f);
}

GenerationMetrics generation_metrics(std::span<const MoleculeGraph> samples,
                                     std::span<const MoleculeGraph> reference) {
  if (samples.empty() || reference.empty())
    throw std::invalid_argument("generation_metrics: empty sample or reference set");
  GenerationMetrics m;
  m.samples = static_cast<int>(samples.size());
  std::set<std::uint64_t> hashes;
  int valid = 0, stable_atoms = 0, atoms = 0;
  for (const auto &g: samples) {
    const ValenceReport v = validate_valence(g);
    valid += v.stable ? 1 : 0;
    stable_atoms += v.stable_atoms;
    atoms += g.size();
    hashes.insert(canonical_hash(g));
  }
  m.validity = static_cast<double>(valid) / m.samples;
  m.atom_stable = atoms ? static_cast<double>(stable_atoms) / atoms : 0.0;
  m.unique = static_cast<double>(hashes.size()) / m.samples;
  m.atom_tv = total_variation(atom_type_frequencies(samples),
                              atom_type_frequencies(reference));
  m.bond_tv = total_variation(bond_type_frequencies(samples),
                              bond_type_frequencies(reference));
  return m;
}

// ---- linear probe -------------------------------------------------------

double radius_of_gyration(const MoleculeGraph &g) {
  if (g.size() == 0)
    return 0.0;
  const Eigen::MatrixX3d c = g.positions.rowwise() - g.positions.colwise().mean();
  return std::sqrt(c.rowwise().squaredNorm().mean());
}

double ridge_probe_mse(const Eigen::MatrixXd &x, const Eigen::VectorXd &y,
                       std::uint64_t seed, double ridge, double train_fraction) {
  const Eigen::Index n = x.rows();
  if (n != y.size() || n < 2)
    throw std::invalid_argument("ridge_probe_mse: need >= 2 labeled rows");
  if (!(train_fraction > 0.0 && train_fraction < 1.0) || ridge < 0.0)
    throw std::invalid_argument("ridge_probe_mse: bad split or regularizer");
  std::vector<Eigen::Index> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  Rng rng = stream_rng(seed, 0, 0x9b0e);
  std::shuffle(idx.begin(), idx.end(), rng);
  const Eigen::Index n_train = std::clamp<Eigen::Index>(
      static_cast<Eigen::Index>(std::llround(train_fraction * n)), 1, n - 1);

  Eigen::MatrixXd xt(n_train, x.cols());
  Eigen::VectorXd yt(n_train);
  for (Eigen::Index k = 0; k < n_train; ++k) {
    xt.row(k) = x.row(idx[k]);
    yt[k] = y[idx[k]];
  }
  const Eigen::RowVectorXd xm = xt.colwise().mean();
  const double ym = yt.mean();
  const Eigen::MatrixXd xc = xt.rowwise() - xm;
  Eigen::MatrixXd gram = xc.transpose() * xc;
  gram.diagonal().array() += ridge;
  const Eigen::VectorXd w = gram.ldlt().solve(xc.transpose() * (yt.array() - ym).matrix());

  double sse = 0.0;
  for (Eigen::Index k = n_train; k < n; ++k) {
    const double pred = ym + (x.row(idx[k]) - xm).dot(w);
    sse += (pred - y[idx[k]]) * (pred - y[idx[k]]);
  }
  return sse / static_cast<double>(n - n_train);
}

Eigen::MatrixXd embed_all(const ModelParams &params, const ModelConfig &model,
                          std::span<const MoleculeGraph> graphs) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(graphs.size()), model.hidden);
  for (std::size_t i = 0; i < graphs.size(); ++i)
    out.row(static_cast<Eigen::Index>(i)) =
        pooled_embedding(to_dense(graphs[i]), params, model);
  return out;
}

ProbeResult linear_probe(const ModelParams &pretrained,
                         const ModelParams &random, const ModelConfig &model,
                         std::span<const MoleculeGraph> graphs,
                         std::span<const std::uint64_t> seeds, double ridge) {
  if (seeds.empty())
    throw std::invalid_argument("linear_probe: no seeds");
  Eigen::VectorXd labels(static_cast<Eigen::Index>(graphs.size()));
  for (std::size_t i = 0; i < graphs.size(); ++i)
    labels[static_cast<Eigen::Index>(i)] = radius_of_gyration(graphs[i]);
  if (labels.size() < 2 || labels.maxCoeff() - labels.minCoeff() < 1e-12)
    throw std::invalid_argument("linear_probe: degenerate (constant) labels");

  const Eigen::MatrixXd fp = embed_all(pretrained, model, graphs);
  const Eigen::MatrixXd fr = embed_all(random, model, graphs);
  ProbeResult r;
  r.label_variance = (labels.array() - labels.mean()).square().mean();
  for (auto seed: seeds) {
    r.pretrained_per_seed.push_back(ridge_probe_mse(fp, labels, seed, ridge));
    r.random_per_seed.push_back(ridge_probe_mse(fr, labels, seed, ridge));
  }
  const double inv = 1.0 / static_cast<double>(seeds.size());
  r.pretrained_mse = std::accumulate(r.pretrained_per_seed.begin(),
                                     r.pretrained_per_seed.end(), 0.0) * inv;
  r.random_mse = std::accumulate(r.random_per_seed.begin(),
                                 r.random_per_seed.end(), 0.0) * inv;
  return r;
}

// ---- reports ------------------------------------------------------------

std::string to_json(const SymmetryReport &r) {
  json j;
  j["max_rotation"] = r.max_rotation;
  j["max_invariance"] = r.max_invariance;
  j["max_permutation"] = r.max_permutation;
  j["max_reflection"] = r.max_reflection;
  j["min_reflection_naive"] = r.min_reflection_naive;
  json mols = json::array();
  for (const auto &m: r.molecules)
    mols.push_back({ { "rotation", m.rotation },
                     { "invariance", m.invariance },
                     { "permutation", m.permutation },
                     { "reflection", m.reflection },
                     { "reflection_naive", m.reflection_naive } });
  j["molecules"] = std::move(mols);
  return j.dump(2);
}

std::string to_json(const GenerationMetrics &m) {
  json j = { { "samples", m.samples },   { "validity", m.validity },
             { "atom_stable", m.atom_stable }, { "unique", m.unique },
             { "atom_tv", m.atom_tv },   { "bond_tv", m.bond_tv } };
  return j.dump(2);
}

std::string to_json(const ProbeResult &r) {
  json j = { { "pretrained_mse", r.pretrained_mse },
             { "random_mse", r.random_mse },
             { "label_variance", r.label_variance },
             { "pretrained_per_seed", r.pretrained_per_seed },
             { "random_per_seed", r.random_per_seed } };
  return j.dump(2);
}

std::string to_text(const SymmetryReport &r) {
  std::ostringstream os;
  os << std::scientific << std::setprecision(3);
  os << "symmetry            residual\n"
     << "rotation (3D)       " << r.max_rotation << "\n"
     << "invariance (2D/H)   " << r.max_invariance << "\n"
     << "permutation         " << r.max_permutation << "\n"
     << "reflection (e2)     " << r.max_reflection << "\n"
     << "reflection naive    " << r.min_reflection_naive << "\n";
  return os.str();
}

std::string to_text(const GenerationMetrics &m) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(4);
  os << "samples      " << m.samples << "\n"
     << "validity     " << m.validity << "\n"
     << "atom_stable  " << m.atom_stable << "\n"
     << "unique       " << m.unique << "\n"
     << "atom_tv      " << m.atom_tv << "\n"
     << "bond_tv      " << m.bond_tv << "\n";
  return os.str();
}

std::string to_text(const ProbeResult &r) {
  std::ostringstream os;
  os << std::scientific << std::setprecision(4);
  os << "encoder      probe_mse\n"
     << "pretrained   " << r.pretrained_mse << "\n"
     << "random-init  " << r.random_mse << "\n"
     << "label var    " << r.label_variance << "\n";
  return os.str();
}

}  // namespace moljae
