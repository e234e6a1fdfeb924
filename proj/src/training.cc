//
// Project MolJAE - Copyright 2026 The MolJAE Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "moljae/training.h"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>
#include <random>

#include <json.hpp>

namespace moljae {
namespace {

using nlohmann::json;

constexpr char kMagic[8] = { 'M', 'J', 'A', 'E', 'C', 'K', 'P', 'T' };

std::vector<DenseTensors> densify(const std::vector<MoleculeGraph> &dataset) {
  std::vector<DenseTensors> out;
  out.reserve(dataset.size());
  for (const auto &g: dataset)
    out.push_back(to_dense(g));
  return out;
}

template <class T>
void put_le(std::string &buf, T v) {
  static_assert(std::is_integral_v<T>);
  for (std::size_t i = 0; i < sizeof(T); ++i)
    buf.push_back(static_cast<char>((static_cast<std::uint64_t>(v) >> (8 * i)) & 0xff));
}

template <class T>
T get_le(const char *p) {
  std::uint64_t v = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i)
    v |= static_cast<std::uint64_t>(static_cast<unsigned char>(p[i])) << (8 * i);
  return static_cast<T>(v);
}

void put_doubles(std::string &buf, const Eigen::VectorXd &v) {
  for (double d: v)
    put_le(buf, std::bit_cast<std::uint64_t>(d));
}

void collect(std::vector<std::pair<std::string, const Eigen::VectorXd *>> &out,
             const Checkpoint &c) {
  for (const auto &[name, t]: c.params.tensors())
    out.emplace_back("param/" + name, &t.values);
  for (const auto &[name, v]: c.optimizer.m)
    out.emplace_back("adam.m/" + name, &v);
  for (const auto &[name, v]: c.optimizer.v)
    out.emplace_back("adam.v/" + name, &v);
}

}  // namespace

void validate(const TrainConfig &c) {
  if (c.epochs < 0)
    throw std::invalid_argument("train.epochs must be non-negative");
  if (c.batch_size < 2)
    throw std::invalid_argument(
        "train.batch_size must be at least 2 (contrastive negatives)");
  if (!(c.learning_rate > 0.0) || !std::isfinite(c.learning_rate))
    throw std::invalid_argument("train.lr must be positive");
  if (!(c.adam_beta1 >= 0.0 && c.adam_beta1 < 1.0 && c.adam_beta2 >= 0.0
        && c.adam_beta2 < 1.0 && c.adam_eps > 0.0))
    throw std::invalid_argument("train: invalid Adam hyperparameters");
  if (!(c.t_min > 0.0 && c.t_min < kHorizon))
    throw std::invalid_argument("train.t_min must lie in (0, 1)");
  if (!(c.grad_clip > 0.0))
    throw std::invalid_argument("train.grad_clip must be positive");
  if (!(c.condition_dropout >= 0.0 && c.condition_dropout <= 1.0))
    throw std::invalid_argument("train.condition_dropout must lie in [0, 1]");
  if (c.checkpoint_interval < 0)
    throw std::invalid_argument("train.checkpoint_interval must be >= 0");
  validate(c.loss);
}

// ---- optimizer ----------------------------------------------------------

void adam_step(ModelParams &params, const Gradients &grads, AdamState &state,
               const AdamOptions &o) {
  for (const auto &[name, g]: grads) {
    const ParamTensor &p = params.at(name);
    if (g.size() != p.values.size())
      throw OptimizerError("adam_step: gradient for " + name
                           + " has the wrong size");
    if (!g.allFinite())
      throw OptimizerError("adam_step: non-finite gradient for " + name
                           + "; step rejected");
  }
  state.step += 1;
  const double c1 = 1.0 - std::pow(o.beta1, static_cast<double>(state.step));
  const double c2 = 1.0 - std::pow(o.beta2, static_cast<double>(state.step));
  for (auto &[name, p]: params.tensors()) {
    auto it = grads.find(name);
    Eigen::VectorXd &m = state.m[name];
    Eigen::VectorXd &v = state.v[name];
    if (m.size() != p.values.size()) {
      m = Eigen::VectorXd::Zero(p.values.size());
      v = Eigen::VectorXd::Zero(p.values.size());
    }
    if (it == grads.end()) {
      m *= o.beta1;
      v *= o.beta2;
      continue;
    }
    const Eigen::VectorXd &g = it->second;
    m = o.beta1 * m + (1.0 - o.beta1) * g;
    v = o.beta2 * v + (1.0 - o.beta2) * g.cwiseProduct(g);
    p.values.array() -=
        o.lr * (m.array() / c1) / ((v.array() / c2).sqrt() + o.eps);
  }
}

double global_norm(const Gradients &grads) {
  double sq = 0.0;
  for (const auto &[_, g]: grads)
    sq += g.squaredNorm();
  return std::sqrt(sq);
}

double clip_global_norm(Gradients &grads, double max_norm) {
  const double norm = global_norm(grads);
  if (norm > max_norm && std::isfinite(norm)) {
    const double s = max_norm / norm;
    for (auto &[_, g]: grads)
      g *= s;
  }
  return norm;
}

// ---- training -----------------------------------------------------------

DivergenceError::DivergenceError(int epoch, int step, double loss)
  : std::runtime_error("training diverged at epoch " + std::to_string(epoch)
                       + " step " + std::to_string(step) + ": loss "
                       + std::to_string(loss)),
    epoch_(epoch), step_(step), loss_(loss) {}

BatchResult batch_gradients(const ModelParams &params, const ModelConfig &model,
                            const std::vector<const DenseTensors *> &batch,
                            const TrainConfig &config, Rng &rng) {
  if (batch.empty())
    throw std::invalid_argument("batch_gradients: empty batch");
  const bool contrastive = config.loss.lambda2 > 0.0;
  if (contrastive && batch.size() < 2)
    throw std::invalid_argument(
        "batch_gradients: contrastive term needs at least 2 samples");

  ad::Tape tape;
  BoundParams bound(params, &tape);
  const double inv_b = 1.0 / static_cast<double>(batch.size());
  std::uniform_real_distribution<double> coin(0.0, 1.0);

  ad::Tensor l_sc;
  std::array<ad::Tensor, 3> parts;
  std::vector<ad::Tensor> anchors, positives;
  Eigen::VectorXd taus(static_cast<Eigen::Index>(batch.size()));
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const DenseTensors &x0 = *batch[i];
    const double t = sample_time(rng, config.t_min);
    TrajectorySample s = perturb_continuous(x0, t, rng, model.schedules);
    const bool drop = coin(rng) < config.condition_dropout;
    const DenseTensors &clean = drop ? s.xt : x0;
    ModelOutput out = forward(clean, s.xt, t, bound, model);
    ScoreTerms terms = score_matching_loss(out, s, config.loss.weighting);
    l_sc = l_sc.defined() ? ad::add(l_sc, terms.total) : terms.total;
    const ad::Tensor pieces[3] = { terms.P, terms.H, terms.E };
    for (int c = 0; c < 3; ++c)
      parts[c] = parts[c].defined() ? ad::add(parts[c], pieces[c]) : pieces[c];
    if (contrastive) {
      anchors.push_back(project(represent(x0, x0, t, bound, model), bound));
      positives.push_back(project(out.latent, bound));
      taus[static_cast<Eigen::Index>(i)] =
          temperature(config.loss.tau0, s.coeffs[0]);
    }
  }
  l_sc = ad::scale(l_sc, inv_b);
  ad::Tensor l_co = contrastive
                        ? contrastive_loss(ad::concat(anchors, 0),
                                           ad::concat(positives, 0), taus)
                        : ad::Tensor::scalar(0.0);
  ad::Tensor total =
      total_loss(l_sc, l_co, config.loss.lambda1, config.loss.lambda2);

  BatchResult r;
  r.report.l_sc = l_sc.item();
  r.report.l_co = l_co.item();
  r.report.total = total.item();
  for (int c = 0; c < 3; ++c)
    r.report.sc_components[c] = parts[c].item() * inv_b;
  if (!total.requires_grad())
    return r;
  ad::GradientMap grads = tape.backward(total);
  for (const auto &[name, leaf]: bound.tensors())
    r.grads.emplace(name, grads[leaf]);
  return r;
}

TrainResult train(const std::vector<MoleculeGraph> &dataset,
                  const ModelConfig &model, const TrainConfig &config,
                  const EpochCallback &on_epoch) {
  validate(model);
  return train(dataset, model, config, init_params(model, config.seed),
               AdamState {}, on_epoch);
}

TrainResult train(const std::vector<MoleculeGraph> &dataset,
                  const ModelConfig &model, const TrainConfig &config,
                  ModelParams params, AdamState optimizer,
                  const EpochCallback &on_epoch) {
  validate(config);
  validate(model);
  if (dataset.empty())
    throw std::invalid_argument("train: empty dataset");
  if (config.loss.lambda2 > 0.0 && dataset.size() < 2)
    throw std::invalid_argument(
        "train: contrastive term needs at least 2 molecules");

  const std::vector<DenseTensors> dense = densify(dataset);
  const AdamOptions adam { config.learning_rate, config.adam_beta1,
                           config.adam_beta2, config.adam_eps };
  TrainResult result { std::move(params), std::move(optimizer), {} };

  std::vector<std::size_t> order(dense.size());
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    Rng shuffle_rng = stream_rng(config.seed, epoch, 0x5ff1e);
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), shuffle_rng);

    // Contiguous batches; a trailing singleton joins the previous batch.
    std::vector<std::vector<const DenseTensors *>> batches;
    for (std::size_t k = 0; k < order.size(); ++k) {
      if (k % config.batch_size == 0
          && !(k + 1 == order.size() && !batches.empty()))
        batches.emplace_back();
      batches.back().push_back(&dense[order[k]]);
    }

    EpochStats stats;
    stats.epoch = epoch;
    for (std::size_t b = 0; b < batches.size(); ++b) {
      Rng rng = stream_rng(config.seed,
                           static_cast<std::uint64_t>(epoch) << 32 | b,
                           0x57e9);
      BatchResult r =
          batch_gradients(result.params, model, batches[b], config, rng);
      if (!std::isfinite(r.report.total)
          || r.report.total > config.divergence_threshold)
        throw DivergenceError(epoch, static_cast<int>(b), r.report.total);
      clip_global_norm(r.grads, config.grad_clip);
      adam_step(result.params, r.grads, result.optimizer, adam);
      stats.total += r.report.total;
      stats.l_sc += r.report.l_sc;
      stats.l_co += r.report.l_co;
      for (int c = 0; c < 3; ++c)
        stats.sc_components[c] += r.report.sc_components[c];
    }
    const double inv = 1.0 / static_cast<double>(batches.size());
    stats.total *= inv;
    stats.l_sc *= inv;
    stats.l_co *= inv;
    for (double &c: stats.sc_components)
      c *= inv;
    result.history.push_back(stats);
    if (on_epoch)
      on_epoch(stats);
    if (config.checkpoint_interval > 0 && !config.checkpoint_path.empty()
        && (epoch + 1) % config.checkpoint_interval == 0)
      save_checkpoint(config.checkpoint_path,
                      { result.params, result.optimizer, {} });
  }
  return result;
}

// ---- checkpoints --------------------------------------------------------

void save_checkpoint(const std::filesystem::path &path, const Checkpoint &ckpt) {
  std::vector<std::pair<std::string, const Eigen::VectorXd *>> buffers;
  collect(buffers, ckpt);

  json header;
  header["adam_step"] = ckpt.optimizer.step;
  header["metadata"] = ckpt.metadata;
  json tensors = json::array();
  std::uint64_t offset = 0;
  for (const auto &[name, v]: buffers) {
    json shape;
    if (name.starts_with("param/"))
      shape = ckpt.params.at(name.substr(6)).shape;
    else
      shape = json::array({ v->size() });
    const std::uint64_t bytes = static_cast<std::uint64_t>(v->size()) * 8;
    tensors.push_back({ { "name", name },
                        { "shape", shape },
                        { "dtype", "float64" },
                        { "offset", offset },
                        { "bytes", bytes } });
    offset += bytes;
  }
  header["tensors"] = std::move(tensors);
  const std::string text = header.dump();

  std::string buf(kMagic, kMagic + 8);
  put_le<std::uint32_t>(buf, kCheckpointVersion);
  put_le<std::uint64_t>(buf, text.size());
  buf += text;
  for (const auto &[_, v]: buffers)
    put_doubles(buf, *v);

  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out)
      throw CheckpointError(CheckpointError::Kind::kIo,
                            "cannot write checkpoint " + tmp.string());
    out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
    if (!out)
      throw CheckpointError(CheckpointError::Kind::kIo,
                            "short write to " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec)
    throw CheckpointError(CheckpointError::Kind::kIo,
                          "cannot move checkpoint into " + path.string() + ": "
                              + ec.message());
}

Checkpoint load_checkpoint(const std::filesystem::path &path) {
  using Kind = CheckpointError::Kind;
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw CheckpointError(Kind::kIo, "cannot open checkpoint " + path.string());
  const std::string buf((std::istreambuf_iterator<char>(in)),
                        std::istreambuf_iterator<char>());
  if (buf.size() < 8 || std::memcmp(buf.data(), kMagic, 8) != 0)
    throw CheckpointError(Kind::kVersion,
                          path.string() + ": not a checkpoint (bad magic)");
  if (buf.size() < 20)
    throw CheckpointError(Kind::kTruncated, path.string() + ": truncated header");
  const auto version = get_le<std::uint32_t>(buf.data() + 8);
  if (version != kCheckpointVersion)
    throw CheckpointError(Kind::kVersion,
                          path.string() + ": unsupported checkpoint version "
                              + std::to_string(version));
  const auto header_len = get_le<std::uint64_t>(buf.data() + 12);
  if (header_len > buf.size() - 20)
    throw CheckpointError(Kind::kTruncated, path.string() + ": truncated header");
  json header;
  try {
    header = json::parse(buf.substr(20, header_len));
  } catch (const json::exception &e) {
    throw CheckpointError(Kind::kFormat,
                          path.string() + ": bad header: " + e.what());
  }
  const std::size_t data_start = 20 + header_len;

  Checkpoint ckpt;
  try {
    ckpt.optimizer.step = header.at("adam_step").get<std::int64_t>();
    ckpt.metadata = header.value("metadata", std::map<std::string, std::string> {});
    for (const auto &t: header.at("tensors")) {
      const std::string name = t.at("name").get<std::string>();
      const auto shape = t.at("shape").get<ad::Shape>();
      const auto offset = t.at("offset").get<std::uint64_t>();
      const auto bytes = t.at("bytes").get<std::uint64_t>();
      if (t.at("dtype").get<std::string>() != "float64")
        throw CheckpointError(Kind::kFormat, name + ": unsupported dtype");
      if (bytes != static_cast<std::uint64_t>(ad::numel(shape)) * 8)
        throw CheckpointError(Kind::kFormat, name + ": size does not match shape");
      if (data_start + offset + bytes > buf.size())
        throw CheckpointError(Kind::kTruncated,
                              path.string() + ": truncated data for " + name);
      Eigen::VectorXd v(static_cast<Eigen::Index>(bytes / 8));
      for (Eigen::Index k = 0; k < v.size(); ++k)
        v[k] = std::bit_cast<double>(
            get_le<std::uint64_t>(buf.data() + data_start + offset + 8 * k));
      if (name.starts_with("param/"))
        ckpt.params.add(name.substr(6), shape, std::move(v));
      else if (name.starts_with("adam.m/"))
        ckpt.optimizer.m[name.substr(7)] = std::move(v);
      else if (name.starts_with("adam.v/"))
        ckpt.optimizer.v[name.substr(7)] = std::move(v);
      else
        throw CheckpointError(Kind::kFormat, "unknown tensor " + name);
    }
  } catch (const json::exception &e) {
    throw CheckpointError(Kind::kFormat,
                          path.string() + ": bad header: " + e.what());
  } catch (const std::invalid_argument &e) {
    throw CheckpointError(Kind::kFormat, path.string() + ": " + e.what());
  }
  return ckpt;
}

Checkpoint load_checkpoint(const std::filesystem::path &path,
                           const ModelParams &expected) {
  using Kind = CheckpointError::Kind;
  Checkpoint ckpt = load_checkpoint(path);
  for (const auto &[name, t]: expected.tensors()) {
    if (!ckpt.params.contains(name))
      throw CheckpointError(Kind::kShapeMismatch,
                            "checkpoint is missing tensor " + name);
    const auto &got = ckpt.params.at(name).shape;
    if (got != t.shape)
      throw CheckpointError(Kind::kShapeMismatch,
                            "shape mismatch for tensor " + name + ": checkpoint "
                                + ad::shape_string(got) + ", model "
                                + ad::shape_string(t.shape));
  }
  for (const auto &[name, _]: ckpt.params.tensors())
    if (!expected.contains(name))
      throw CheckpointError(Kind::kShapeMismatch,
                            "unexpected tensor " + name + " in checkpoint");
  return ckpt;
}

}  // namespace moljae
