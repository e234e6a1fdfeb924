//
// Project MolJAE - Copyright 2026 The MolJAE Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "moljae/network.h"

#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

#include "moljae/trajectory.h"

namespace moljae {
namespace {

using ad::Tensor;

std::string layer(const std::string &prefix, int k) {
  return prefix + "." + std::to_string(k);
}

void add_dense(ModelParams &p, const std::string &prefix, ad::Index in,
               ad::Index out, bool bias = true) {
  p.add(prefix + ".w", { in, out }, Eigen::VectorXd::Zero(in * out));
  if (bias)
    p.add(prefix + ".b", { 1, out }, Eigen::VectorXd::Zero(out));
}

void add_mlp2(ModelParams &p, const std::string &prefix, ad::Index in,
              ad::Index hidden, ad::Index out) {
  add_dense(p, layer(prefix, 0), in, hidden);
  add_dense(p, layer(prefix, 1), hidden, out);
}

void add_encoder(ModelParams &p, const ModelConfig &c,
                 const std::string &branch) {
  add_dense(p, branch + ".embed", kAtomFeatureDim, c.hidden);
  for (int r = 0; r < c.message_rounds; ++r) {
    const std::string round = branch + ".round" + std::to_string(r);
    add_dense(p, round + ".filter", c.num_rbf, c.hidden, false);
    add_dense(p, round + ".value", c.hidden, c.hidden, false);
    add_dense(p, round + ".update", 2 * c.hidden + kAtomFeatureDim, c.hidden);
  }
}

Tensor broadcast_rows(const Eigen::RowVectorXd &row, ad::Index rows) {
  Eigen::MatrixXd m = row.replicate(rows, 1);
  return Tensor::from_matrix(m);
}

// Stacked radial basis matrices: block k (rows k*n .. k*n+n-1) holds
// rbf_k(d_ij) * envelope(d_ij) with a zero diagonal.
Tensor radial_stack(const Eigen::MatrixX3d &pos, const ModelConfig &c) {
  const ad::Index n = pos.rows();
  const int k_count = c.num_rbf;
  const double rc = c.encoder_cutoff;
  const double width = rc / k_count;
  Eigen::VectorXd values = Eigen::VectorXd::Zero(k_count * n * n);
  for (ad::Index i = 0; i < n; ++i)
    for (ad::Index j = 0; j < n; ++j) {
      if (i == j)
        continue;
      const double d = (pos.row(i) - pos.row(j)).norm();
      if (d >= rc)
        continue;
      const double env = 0.5 * (std::cos(std::numbers::pi * d / rc) + 1.0);
      for (int k = 0; k < k_count; ++k) {
        const double mu = k_count > 1 ? rc * k / (k_count - 1) : 0.0;
        const double z = (d - mu) / width;
        values[(k * n + i) * n + j] = env * std::exp(-0.5 * z * z);
      }
    }
  return Tensor::constant({ k_count * n, n }, std::move(values));
}

Tensor activate(const Tensor &x, Activation act) {
  return act == Activation::kSilu ? ad::silu(x) : x;
}

}  // namespace

void validate(const ModelConfig &c) {
  if (c.hidden <= 0 || c.message_rounds < 0 || c.gcn_layers < 0
      || c.attention_heads <= 0 || c.time_dim <= 0 || c.projection_dim <= 0
      || c.num_rbf <= 0 || c.encoder_cutoff <= 0.0)
    throw std::invalid_argument("model config: widths must be positive");
  if (c.time_dim % 2 != 0)
    throw std::invalid_argument("model config: time_dim must be even");
  if (!(c.fourier_min_freq > 0.0 && c.fourier_max_freq >= c.fourier_min_freq))
    throw std::invalid_argument("model config: bad fourier frequency range");
  validate(c.schedules.P);
  validate(c.schedules.H);
  validate(c.schedules.E);
}

// ---- parameters ---------------------------------------------------------

void ModelParams::add(const std::string &name, ad::Shape shape,
                      Eigen::VectorXd values) {
  if (tensors_.count(name))
    throw std::invalid_argument("duplicate parameter " + name);
  if (values.size() != ad::numel(shape))
    throw std::invalid_argument("parameter " + name + ": size mismatch");
  tensors_.emplace(name, ParamTensor { std::move(shape), std::move(values) });
}

const ParamTensor &ModelParams::at(const std::string &name) const {
  auto it = tensors_.find(name);
  if (it == tensors_.end())
    throw std::out_of_range("no parameter named " + name);
  return it->second;
}

ParamTensor &ModelParams::at(const std::string &name) {
  auto it = tensors_.find(name);
  if (it == tensors_.end())
    throw std::out_of_range("no parameter named " + name);
  return it->second;
}

std::size_t ModelParams::scalar_count() const {
  std::size_t n = 0;
  for (const auto &[_, t]: tensors_)
    n += static_cast<std::size_t>(t.values.size());
  return n;
}

bool ModelParams::all_finite() const {
  for (const auto &[_, t]: tensors_)
    if (!t.values.allFinite())
      return false;
  return true;
}

void ModelParams::set_zero() {
  for (auto &[_, t]: tensors_)
    t.values.setZero();
}

void ModelParams::zero_prefix(const std::string &prefix) {
  for (auto &[name, t]: tensors_)
    if (name.compare(0, prefix.size(), prefix) == 0)
      t.values.setZero();
}

ModelParams init_params(const ModelConfig &c, std::uint64_t seed) {
  validate(c);
  ModelParams p;
  add_encoder(p, c, "encoder_clean");
  if (!c.share_encoders)
    add_encoder(p, c, "encoder_noisy");
  add_mlp2(p, "fuse", c.time_dim + 2 * c.hidden, c.hidden, c.hidden);
  add_mlp2(p, "edge", c.time_dim + 2 * kNumBondTypes, c.edge_hidden(), 1);
  for (int l = 0; l < c.gcn_layers; ++l)
    add_dense(p, "gcn." + std::to_string(l), c.hidden, c.hidden, false);
  add_mlp2(p, "head3d", c.hidden, c.hidden, 3);
  for (int m = 0; m < c.attention_heads; ++m) {
    const std::string head = "att." + std::to_string(m);
    add_dense(p, head + ".q", c.hidden, c.head_dim(), false);
    add_dense(p, head + ".k", c.hidden, c.head_dim(), false);
  }
  add_mlp2(p, "head2d",
           c.attention_heads + kNumBondTypes + c.num_rbf + c.time_dim,
           c.edge_hidden(), kNumBondTypes);
  add_mlp2(p, "headh", c.hidden, c.hidden, kAtomFeatureDim);
  add_mlp2(p, "proj", c.hidden, c.hidden, c.projection_dim);

  // Xavier-uniform weights in sorted-name order; biases start at zero.
  Rng rng = stream_rng(seed, 0, 0x1417);
  for (auto &[name, t]: p.tensors()) {
    if (name.ends_with(".b"))
      continue;
    const double fan_in = static_cast<double>(t.shape[0]);
    const double fan_out = static_cast<double>(t.shape[1]);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    const double a = std::sqrt(6.0 / (fan_in + fan_out));
    for (auto &v: t.values)
      v = a * u(rng);
  }
  return p;
}

BoundParams::BoundParams(const ModelParams &params, ad::Tape *tape) {
  for (const auto &[name, t]: params.tensors())
    tensors_.emplace(name, tape ? tape->leaf(t.shape, t.values)
                                : Tensor::constant(t.shape, t.values));
}

const Tensor &BoundParams::operator[](const std::string &name) const {
  auto it = tensors_.find(name);
  if (it == tensors_.end())
    throw std::out_of_range("no bound parameter named " + name);
  return it->second;
}

// ---- building blocks ----------------------------------------------------

Eigen::RowVectorXd fourier_embed(double t, int dim, double min_freq,
                                 double max_freq) {
  const int half = dim / 2;
  Eigen::RowVectorXd out(2 * half);
  for (int k = 0; k < half; ++k) {
    const double f =
        half > 1 ? min_freq * std::pow(max_freq / min_freq,
                                       static_cast<double>(k) / (half - 1))
                 : min_freq;
    const double arg = 2.0 * std::numbers::pi * f * t;
    out(k) = std::sin(arg);
    out(half + k) = std::cos(arg);
  }
  return out;
}

Tensor linear(const Tensor &x, const BoundParams &p, const std::string &prefix) {
  const Tensor &w = p[prefix + ".w"];
  const Tensor &b = p[prefix + ".b"];
  Tensor y = ad::matmul(x, w);
  return ad::add(y, ad::broadcast(b, y.shape()));
}

Tensor mlp2(const Tensor &x, const BoundParams &p, const std::string &prefix) {
  return linear(ad::silu(linear(x, p, layer(prefix, 0))), p, layer(prefix, 1));
}

Tensor encode(const DenseTensors &x, const BoundParams &p,
              const ModelConfig &c, const std::string &branch) {
  const ad::Index n = x.size();
  const ad::Index width = c.hidden;
  const Tensor h_in = Tensor::from_matrix(x.H);
  const Tensor radial = radial_stack(x.P, c);
  Tensor feat = linear(h_in, p, branch + ".embed");
  for (int r = 0; r < c.message_rounds; ++r) {
    const std::string round = branch + ".round" + std::to_string(r);
    // m_i = sum_k sum_j R_k[i, j] (x_j V) * filter[k]
    Tensor value = ad::matmul(feat, p[round + ".value.w"]);
    Tensor gathered = ad::reshape(ad::matmul(radial, value),
                                  { c.num_rbf, n, width });
    Tensor filter = ad::broadcast(
        ad::reshape(p[round + ".filter.w"], { c.num_rbf, 1, width }),
        { c.num_rbf, n, width });
    Tensor message =
        ad::reshape(ad::sum(ad::mul(gathered, filter), 0), { n, width });
    Tensor update = linear(ad::concat({ feat, message, h_in }, 1), p,
                           round + ".update");
    feat = ad::add(feat, ad::silu(update));
  }
  return feat;
}

Tensor fuse(const Tensor &f0, const Tensor &ft, const Eigen::RowVectorXd &emb,
            const BoundParams &p) {
  if (f0.shape() != ft.shape())
    throw ad::ShapeError("fuse: f0 " + ad::shape_string(f0.shape())
                         + " does not match ft "
                         + ad::shape_string(ft.shape()));
  const Tensor time = broadcast_rows(emb, f0.dim(0));
  return mlp2(ad::concat({ time, f0, ft }, 1), p, "fuse");
}

Tensor edge_condition(const Eigen::MatrixXd &e0, const Eigen::MatrixXd &et,
                      const Eigen::RowVectorXd &emb, const BoundParams &p) {
  if (e0.rows() != et.rows() || e0.cols() != et.cols())
    throw ad::ShapeError("edge_condition: E0 and Et shapes differ");
  const ad::Index n = static_cast<ad::Index>(
      std::llround(std::sqrt(static_cast<double>(e0.rows()))));
  if (n * n != e0.rows())
    throw ad::ShapeError("edge_condition: edge rows are not n * n");
  const Tensor input =
      ad::concat({ broadcast_rows(emb, n * n), Tensor::from_matrix(e0),
                   Tensor::from_matrix(et) },
                 1);
  Tensor w = ad::reshape(ad::square(mlp2(input, p, "edge")), { n, n });
  w = ad::scale(ad::add(w, ad::transpose(w)), 0.5);
  Eigen::MatrixXd off = Eigen::MatrixXd::Ones(n, n);
  off.diagonal().setZero();
  return ad::mul(w, Tensor::from_matrix(off));
}

LatentRepresentation fuse_gcn(const Tensor &node, const Tensor &w,
                              const BoundParams &p, const ModelConfig &c) {
  const ad::Index n = node.dim(0);
  if (w.rank() != 2 || w.dim(0) != n || w.dim(1) != n)
    throw ad::ShapeError("fuse_gcn: adjacency " + ad::shape_string(w.shape())
                         + " does not match " + std::to_string(n) + " nodes");
  const Tensor loops = ad::add(
      w, Tensor::from_matrix(Eigen::MatrixXd::Identity(n, n)));
  const Tensor deg = ad::matmul(loops, Tensor::full({ n, 1 }, 1.0));
  const Tensor inv_sqrt = ad::div(Tensor::full({ n, 1 }, 1.0), ad::sqrt(deg));
  const Tensor norm =
      ad::mul(loops, ad::matmul(inv_sqrt, ad::transpose(inv_sqrt)));
  Tensor h = node;
  for (int l = 0; l < c.gcn_layers; ++l) {
    const Tensor &theta = p["gcn." + std::to_string(l) + ".w"];
    h = activate(ad::add(ad::matmul(ad::matmul(norm, h), theta), h),
                 c.gcn_activation);
  }
  return { h, ad::mean(h, 0) };
}

Score3d score_3d(const LatentRepresentation &h,
                 const std::vector<Frame<double>> &frames,
                 const BoundParams &p) {
  const ad::Index n = h.node_h.dim(0);
  if (static_cast<ad::Index>(frames.size()) != n)
    throw ad::ShapeError("score_3d: one frame per node required");
  const Tensor coeffs = mlp2(h.node_h, p, "head3d");
  const Tensor spread = Tensor::full({ 1, 3 }, 1.0);
  Tensor field;
  for (int k = 0; k < 3; ++k) {
    Eigen::MatrixXd axis(n, 3);
    for (ad::Index i = 0; i < n; ++i) {
      const auto &f = frames[i];
      axis.row(i) = (k == 0 ? f.e1 : k == 1 ? f.e2 : f.e3).transpose();
    }
    Tensor term = ad::mul(ad::matmul(ad::slice(coeffs, 1, k, 1), spread),
                          Tensor::from_matrix(axis));
    field = field.defined() ? ad::add(field, term) : term;
  }
  const Eigen::MatrixXd center =
      Eigen::MatrixXd::Identity(n, n)
      - Eigen::MatrixXd::Constant(n, n, 1.0 / static_cast<double>(n));
  return { ad::matmul(Tensor::from_matrix(center), field), coeffs };
}

Eigen::MatrixXd pair_distance_features(const Eigen::MatrixX3d &pos,
                                       const ModelConfig &c) {
  const ad::Index n = pos.rows();
  const int k_count = c.num_rbf;
  const double rc = c.encoder_cutoff;
  const double width = rc / k_count;
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(n * n, k_count);
  for (ad::Index i = 0; i < n; ++i)
    for (ad::Index j = 0; j < n; ++j) {
      if (i == j)
        continue;
      const double d = (pos.row(i) - pos.row(j)).norm();
      for (int k = 0; k < k_count; ++k) {
        const double mu = k_count > 1 ? rc * k / (k_count - 1) : 0.0;
        const double z = (d - mu) / width;
        out(i * n + j, k) = std::exp(-0.5 * z * z);
      }
    }
  return out;
}

Tensor score_2d(const LatentRepresentation &h, const Eigen::MatrixXd &et,
                const Eigen::MatrixX3d &pos, const Eigen::RowVectorXd &emb,
                const BoundParams &p, const ModelConfig &c) {
  const ad::Index n = h.node_h.dim(0);
  if (et.rows() != n * n || et.cols() != kNumBondTypes || pos.rows() != n)
    throw ad::ShapeError("score_2d: edge tensor does not match node count");
  const double inv_sqrt_dim = 1.0 / std::sqrt(static_cast<double>(c.head_dim()));
  std::vector<Tensor> heads;
  for (int m = 0; m < c.attention_heads; ++m) {
    const std::string head = "att." + std::to_string(m);
    Tensor q = ad::matmul(h.node_h, p[head + ".q.w"]);
    Tensor k = ad::matmul(h.node_h, p[head + ".k.w"]);
    Tensor att =
        ad::softmax(ad::scale(ad::matmul(q, ad::transpose(k)), inv_sqrt_dim));
    heads.push_back(ad::reshape(att, { n * n, 1 }));
  }
  heads.push_back(Tensor::from_matrix(et));
  heads.push_back(Tensor::from_matrix(pair_distance_features(pos, c)));
  heads.push_back(broadcast_rows(emb, n * n));
  Tensor edges = mlp2(ad::concat(heads, 1), p, "head2d");
  std::vector<ad::Index> swap(n * n);
  for (ad::Index i = 0; i < n; ++i)
    for (ad::Index j = 0; j < n; ++j)
      swap[i * n + j] = j * n + i;
  Tensor sym = ad::scale(ad::add(edges, ad::gather_rows(edges, swap)), 0.5);
  Eigen::MatrixXd mask = Eigen::MatrixXd::Ones(n * n, kNumBondTypes);
  for (ad::Index i = 0; i < n; ++i)
    mask.row(i * n + i).setZero();
  return ad::mul(sym, Tensor::from_matrix(mask));
}

Tensor score_h(const LatentRepresentation &h, const BoundParams &p) {
  return mlp2(h.node_h, p, "headh");
}

Tensor project(const LatentRepresentation &h, const BoundParams &p) {
  Tensor v = mlp2(h.pooled, p, "proj");
  Tensor norm = ad::sqrt(ad::add_scalar(ad::sum(ad::square(v)), 1e-300));
  return ad::div(v, ad::broadcast(ad::reshape(norm, { 1, 1 }), v.shape()));
}

// ---- full model ---------------------------------------------------------

LatentRepresentation represent(const DenseTensors &clean,
                               const DenseTensors &noisy, double t,
                               const BoundParams &p, const ModelConfig &c) {
  if (clean.size() != noisy.size())
    throw ad::ShapeError("represent: clean and noisy atom counts differ");
  const Tensor f0 = encode(clean, p, c, "encoder_clean");
  const Tensor ft =
      encode(noisy, p, c, c.share_encoders ? "encoder_clean" : "encoder_noisy");
  const Eigen::RowVectorXd emb =
      fourier_embed(t, c.time_dim, c.fourier_min_freq, c.fourier_max_freq);
  const Tensor node = fuse(f0, ft, emb, p);
  const Tensor w = edge_condition(clean.E, noisy.E, emb, p);
  return fuse_gcn(node, w, p, c);
}

ModelOutput forward(const DenseTensors &clean, const DenseTensors &noisy,
                    double t, const BoundParams &p, const ModelConfig &c,
                    const ForwardOptions &options) {
  ModelOutput out;
  out.latent = represent(clean, noisy, t, p, c);
  out.frames = options.identity_frames
                   ? std::vector<Frame<double>>(noisy.size(),
                                                Frame<double>::canonical())
                   : node_frames<double>(noisy.P, c.frames);
  out.score_p = score_3d(out.latent, out.frames, p);
  out.score_h = score_h(out.latent, p);
  out.score_e = score_2d(
      out.latent, noisy.E, noisy.P,
      fourier_embed(t, c.time_dim, c.fourier_min_freq, c.fourier_max_freq), p,
      c);
  if (c.beta_scaled_output) {
    const double bp = alpha_beta(c.schedules.P, t).beta;
    const double bh = alpha_beta(c.schedules.H, t).beta;
    const double be = alpha_beta(c.schedules.E, t).beta;
    if (!(bp > 0.0 && bh > 0.0 && be > 0.0))
      throw std::invalid_argument("forward: beta(t) = 0 at t = "
                                  + std::to_string(t));
    out.score_p.field = ad::scale(out.score_p.field, 1.0 / bp);
    out.score_p.coeffs = ad::scale(out.score_p.coeffs, 1.0 / bp);
    out.score_h = ad::scale(out.score_h, 1.0 / bh);
    out.score_e = ad::scale(out.score_e, 1.0 / be);
  }
  return out;
}

Eigen::RowVectorXd pooled_embedding(const DenseTensors &x,
                                    const ModelParams &params,
                                    const ModelConfig &config, double t) {
  BoundParams bound(params, nullptr);
  return represent(x, x, t, bound, config).pooled.matrix();
}

}  // namespace moljae
