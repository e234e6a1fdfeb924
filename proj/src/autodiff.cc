//
// Project MolJAE - Copyright 2026 The MolJAE Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "moljae/autodiff.h"

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <numeric>
#include <sstream>
#include <utility>

namespace moljae::ad {
namespace detail {

struct TapeState {
  std::vector<std::shared_ptr<Node>> nodes;
  bool consumed = false;
};

struct Node {
  Shape shape;
  Vector value;
  Vector grad;
  bool requires_grad = false;
  bool is_leaf = true;
  std::vector<std::shared_ptr<Node>> parents;
  std::function<void(Node &)> backward;
  std::weak_ptr<TapeState> tape;
};

}  // namespace detail

using detail::Node;
using detail::TapeState;

Index numel(const Shape &shape) {
  return std::accumulate(shape.begin(), shape.end(), Index { 1 },
                         std::multiplies<>());
}

std::string shape_string(const Shape &shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i)
    os << (i ? "," : "") << shape[i];
  os << ']';
  return os.str();
}

namespace {

[[noreturn]] void shape_fail(const char *op, const std::string &what) {
  throw ShapeError(std::string(op) + ": " + what);
}

void check_shape(const char *op, const Shape &shape) {
  if (shape.size() > kMaxRank)
    shape_fail(op, "rank " + std::to_string(shape.size()) + " exceeds 4");
  for (Index d: shape)
    if (d < 0)
      shape_fail(op, "negative dimension in " + shape_string(shape));
}

std::shared_ptr<Node> make_value(Shape shape, Vector value) {
  check_shape("tensor", shape);
  if (value.size() != numel(shape))
    shape_fail("tensor", "value count " + std::to_string(value.size())
                             + " does not match shape " + shape_string(shape));
  auto node = std::make_shared<Node>();
  node->shape = std::move(shape);
  node->value = std::move(value);
  return node;
}

void accumulate(Node &node, const Vector &g) {
  if (!node.requires_grad)
    return;
  if (node.grad.size() == 0)
    node.grad = g;
  else
    node.grad += g;
}

// Creates the result node; if any parent requires gradients, the node is
// recorded on the parents' tape together with its backward rule.
Tensor record(const char *op, Shape shape, Vector value,
              std::vector<std::shared_ptr<Node>> parents,
              std::function<void(Node &)> backward) {
  auto node = make_value(std::move(shape), std::move(value));
  std::shared_ptr<TapeState> tape;
  for (const auto &p: parents) {
    if (!p->requires_grad)
      continue;
    auto t = p->tape.lock();
    if (!t || t->consumed)
      throw TapeError(std::string(op) + ": input belongs to a consumed tape");
    if (tape && tape != t)
      throw TapeError(std::string(op) + ": inputs recorded on different tapes");
    tape = std::move(t);
  }
  if (tape) {
    node->requires_grad = true;
    node->is_leaf = false;
    node->parents = std::move(parents);
    node->backward = std::move(backward);
    node->tape = tape;
    tape->nodes.push_back(node);
  }
  return Tensor(std::move(node));
}

const std::shared_ptr<Node> &checked(const Tensor &t, const char *op) {
  if (!t.defined())
    shape_fail(op, "undefined tensor");
  return t.node();
}

void same_shape(const char *op, const Tensor &a, const Tensor &b) {
  if (a.shape() != b.shape())
    shape_fail(op, "shape mismatch " + shape_string(a.shape()) + " vs "
                       + shape_string(b.shape()));
}

Index normalize_axis(const char *op, Index axis, Index rank) {
  if (axis < 0)
    axis += rank;
  if (axis < 0 || axis >= rank)
    shape_fail(op, "axis " + std::to_string(axis) + " out of range for rank "
                       + std::to_string(rank));
  return axis;
}

// Splits a shape around `axis` into (outer, axis extent, inner).
std::array<Index, 3> split_at(const Shape &shape, Index axis) {
  Index outer = 1, inner = 1;
  for (Index i = 0; i < axis; ++i)
    outer *= shape[i];
  for (Index i = axis + 1; i < static_cast<Index>(shape.size()); ++i)
    inner *= shape[i];
  return { outer, shape[axis], inner };
}

template <class Forward, class Derivative>
Tensor unary(const char *op, const Tensor &a, Forward f, Derivative df) {
  const auto &na = checked(a, op);
  Vector out = na->value.unaryExpr(f);
  return record(op, na->shape, std::move(out), { na },
                [df](Node &self) {
                  Node &p = *self.parents[0];
                  if (!p.requires_grad)
                    return;
                  Vector g(self.value.size());
                  for (Index i = 0; i < g.size(); ++i)
                    g[i] = self.grad[i] * df(p.value[i], self.value[i]);
                  accumulate(p, g);
                });
}

}  // namespace

// ---------------------------------------------------------------- Tensor --

Tensor Tensor::constant(Shape shape, Vector values) {
  return Tensor(make_value(std::move(shape), std::move(values)));
}

Tensor Tensor::scalar(double value) {
  return constant({}, Vector::Constant(1, value));
}

Tensor Tensor::zeros(Shape shape) { return full(std::move(shape), 0.0); }

Tensor Tensor::full(Shape shape, double value) {
  Index n = ad::numel(shape);
  return constant(std::move(shape), Vector::Constant(n, value));
}

Tensor Tensor::from_matrix(const Eigen::Ref<const Eigen::MatrixXd> &m) {
  RowMatrix rm = m;
  return constant({ m.rows(), m.cols() },
                  Eigen::Map<const Vector>(rm.data(), rm.size()));
}

Tensor Tensor::row(const Eigen::Ref<const Eigen::VectorXd> &v) {
  return constant({ 1, v.size() }, v);
}

Tensor Tensor::column(const Eigen::Ref<const Eigen::VectorXd> &v) {
  return constant({ v.size(), 1 }, v);
}

const Shape &Tensor::shape() const { return checked(*this, "shape")->shape; }

Index Tensor::dim(Index axis) const {
  return shape()[normalize_axis("dim", axis, rank())];
}

Index Tensor::numel() const { return ad::numel(shape()); }

const Vector &Tensor::values() const { return checked(*this, "values")->value; }

double Tensor::item() const {
  if (numel() != 1)
    shape_fail("item", "tensor of shape " + shape_string(shape())
                           + " is not a scalar");
  return values()[0];
}

Eigen::Map<const RowMatrix> Tensor::matrix() const {
  const auto &n = checked(*this, "matrix");
  Index rows = 1, cols = 1;
  if (n->shape.size() == 1) {
    cols = n->shape[0];
  } else if (n->shape.size() == 2) {
    rows = n->shape[0];
    cols = n->shape[1];
  } else if (!n->shape.empty()) {
    shape_fail("matrix", "rank-2 view of shape " + shape_string(n->shape));
  }
  return { n->value.data(), rows, cols };
}

bool Tensor::requires_grad() const { return node_ && node_->requires_grad; }

const Vector &Tensor::grad() const { return checked(*this, "grad")->grad; }

// ------------------------------------------------------------------ Tape --

const Vector &GradientMap::operator[](const Tensor &leaf) const {
  auto it = grads_.find(leaf.id());
  if (it == grads_.end())
    throw TapeError("gradient requested for a leaf not reached by backward");
  return it->second;
}

bool GradientMap::contains(const Tensor &leaf) const {
  return grads_.count(leaf.id()) > 0;
}

Tape::Tape(): state_(std::make_shared<TapeState>()) { }

Tensor Tape::leaf(Shape shape, Vector values, bool requires_grad) {
  if (state_->consumed)
    throw TapeError("leaf: tape already consumed by backward");
  auto node = make_value(std::move(shape), std::move(values));
  node->requires_grad = requires_grad;
  if (requires_grad) {
    node->tape = state_;
    state_->nodes.push_back(node);
  }
  return Tensor(std::move(node));
}

Tensor Tape::leaf(const Eigen::Ref<const Eigen::MatrixXd> &m,
                  bool requires_grad) {
  RowMatrix rm = m;
  return leaf({ m.rows(), m.cols() },
              Eigen::Map<const Vector>(rm.data(), rm.size()), requires_grad);
}

bool Tape::consumed() const { return state_->consumed; }

std::size_t Tape::size() const { return state_->nodes.size(); }

GradientMap Tape::backward(const Tensor &loss) {
  if (state_->consumed)
    throw TapeError("backward: tape already consumed");
  const auto &root = checked(loss, "backward");
  if (root->value.size() != 1)
    throw ShapeError("backward: loss must be scalar, got shape "
                     + shape_string(root->shape));
  if (!root->requires_grad || root->tape.lock() != state_)
    throw TapeError("backward: loss is not recorded on this tape");

  auto &nodes = state_->nodes;
  for (auto &n: nodes)
    n->grad.resize(0);
  root->grad = Vector::Ones(1);

  // Creation order is a topological order; each node is visited once.
  for (auto it = nodes.rbegin(); it != nodes.rend(); ++it) {
    Node &n = **it;
    if (n.is_leaf || n.grad.size() == 0)
      continue;
    n.backward(n);
  }

  GradientMap out;
  for (auto &n: nodes) {
    if (!n->is_leaf)
      continue;
    if (n->grad.size() == 0)
      n->grad = Vector::Zero(n->value.size());
    out.grads_.emplace(n.get(), n->grad);
  }
  for (auto &n: nodes) {
    if (n->is_leaf)
      continue;
    n->parents.clear();
    n->backward = nullptr;
    n->grad.resize(0);
  }
  nodes.clear();
  state_->consumed = true;
  return out;
}

// ------------------------------------------------------------ primitives --

Tensor add(const Tensor &a, const Tensor &b) {
  const auto &na = checked(a, "add");
  const auto &nb = checked(b, "add");
  same_shape("add", a, b);
  return record("add", na->shape, na->value + nb->value, { na, nb },
                [](Node &self) {
                  accumulate(*self.parents[0], self.grad);
                  accumulate(*self.parents[1], self.grad);
                });
}

Tensor sub(const Tensor &a, const Tensor &b) {
  const auto &na = checked(a, "sub");
  const auto &nb = checked(b, "sub");
  same_shape("sub", a, b);
  return record("sub", na->shape, na->value - nb->value, { na, nb },
                [](Node &self) {
                  accumulate(*self.parents[0], self.grad);
                  accumulate(*self.parents[1], -self.grad);
                });
}

Tensor mul(const Tensor &a, const Tensor &b) {
  const auto &na = checked(a, "mul");
  const auto &nb = checked(b, "mul");
  same_shape("mul", a, b);
  return record("mul", na->shape, na->value.cwiseProduct(nb->value),
                { na, nb }, [](Node &self) {
                  Node &x = *self.parents[0], &y = *self.parents[1];
                  if (x.requires_grad)
                    accumulate(x, self.grad.cwiseProduct(y.value));
                  if (y.requires_grad)
                    accumulate(y, self.grad.cwiseProduct(x.value));
                });
}

Tensor div(const Tensor &a, const Tensor &b) {
  const auto &na = checked(a, "div");
  const auto &nb = checked(b, "div");
  same_shape("div", a, b);
  return record("div", na->shape, na->value.cwiseQuotient(nb->value),
                { na, nb }, [](Node &self) {
                  Node &x = *self.parents[0], &y = *self.parents[1];
                  if (x.requires_grad)
                    accumulate(x, self.grad.cwiseQuotient(y.value));
                  if (y.requires_grad)
                    accumulate(y, -self.grad.cwiseProduct(self.value)
                                       .cwiseQuotient(y.value));
                });
}

Tensor neg(const Tensor &a) { return scale(a, -1.0); }

Tensor scale(const Tensor &a, double factor) {
  const auto &na = checked(a, "scale");
  return record("scale", na->shape, na->value * factor, { na },
                [factor](Node &self) {
                  accumulate(*self.parents[0], self.grad * factor);
                });
}

Tensor add_scalar(const Tensor &a, double offset) {
  const auto &na = checked(a, "add_scalar");
  return record("add_scalar", na->shape,
                (na->value.array() + offset).matrix(), { na },
                [](Node &self) { accumulate(*self.parents[0], self.grad); });
}

Tensor exp(const Tensor &a) {
  return unary(
      "exp", a, [](double x) { return std::exp(x); },
      [](double, double y) { return y; });
}

Tensor log(const Tensor &a) {
  return unary(
      "log", a, [](double x) { return std::log(x); },
      [](double x, double) { return 1.0 / x; });
}

Tensor square(const Tensor &a) {
  return unary(
      "square", a, [](double x) { return x * x; },
      [](double x, double) { return 2.0 * x; });
}

Tensor sqrt(const Tensor &a) {
  return unary(
      "sqrt", a, [](double x) { return std::sqrt(x); },
      [](double, double y) { return 0.5 / y; });
}

Tensor abs(const Tensor &a) {
  return unary(
      "abs", a, [](double x) { return std::abs(x); },
      [](double x, double) { return x > 0 ? 1.0 : (x < 0 ? -1.0 : 0.0); });
}

Tensor relu(const Tensor &a) {
  return unary(
      "relu", a, [](double x) { return x > 0 ? x : 0.0; },
      [](double x, double) { return x > 0 ? 1.0 : 0.0; });
}

Tensor silu(const Tensor &a) {
  return unary(
      "silu", a, [](double x) { return x / (1.0 + std::exp(-x)); },
      [](double x, double) {
        double s = 1.0 / (1.0 + std::exp(-x));
        return s * (1.0 + x * (1.0 - s));
      });
}

Tensor tanh(const Tensor &a) {
  return unary(
      "tanh", a, [](double x) { return std::tanh(x); },
      [](double, double y) { return 1.0 - y * y; });
}

Tensor matmul(const Tensor &a, const Tensor &b) {
  const auto &na = checked(a, "matmul");
  const auto &nb = checked(b, "matmul");
  if (na->shape.size() != 2 || nb->shape.size() != 2)
    shape_fail("matmul", "operands must be rank 2, got "
                             + shape_string(na->shape) + " and "
                             + shape_string(nb->shape));
  const Index m = na->shape[0], k = na->shape[1], n = nb->shape[1];
  if (nb->shape[0] != k)
    shape_fail("matmul", "inner dimensions differ: " + shape_string(na->shape)
                             + " x " + shape_string(nb->shape));
  Vector out(m * n);
  Eigen::Map<RowMatrix>(out.data(), m, n).noalias() =
      Eigen::Map<const RowMatrix>(na->value.data(), m, k)
      * Eigen::Map<const RowMatrix>(nb->value.data(), k, n);
  return record("matmul", { m, n }, std::move(out), { na, nb },
                [m, k, n](Node &self) {
                  Node &x = *self.parents[0], &y = *self.parents[1];
                  Eigen::Map<const RowMatrix> g(self.grad.data(), m, n);
                  if (x.requires_grad) {
                    Vector gx(m * k);
                    Eigen::Map<RowMatrix>(gx.data(), m, k).noalias() =
                        g
                        * Eigen::Map<const RowMatrix>(y.value.data(), k, n)
                              .transpose();
                    accumulate(x, gx);
                  }
                  if (y.requires_grad) {
                    Vector gy(k * n);
                    Eigen::Map<RowMatrix>(gy.data(), k, n).noalias() =
                        Eigen::Map<const RowMatrix>(x.value.data(), m, k)
                            .transpose()
                        * g;
                    accumulate(y, gy);
                  }
                });
}

Tensor transpose(const Tensor &a) {
  const auto &na = checked(a, "transpose");
  if (na->shape.size() != 2)
    shape_fail("transpose", "operand must be rank 2, got "
                                + shape_string(na->shape));
  const Index r = na->shape[0], c = na->shape[1];
  Vector out(r * c);
  Eigen::Map<RowMatrix>(out.data(), c, r) =
      Eigen::Map<const RowMatrix>(na->value.data(), r, c).transpose();
  return record("transpose", { c, r }, std::move(out), { na },
                [r, c](Node &self) {
                  Vector g(r * c);
                  Eigen::Map<RowMatrix>(g.data(), r, c) =
                      Eigen::Map<const RowMatrix>(self.grad.data(), c, r)
                          .transpose();
                  accumulate(*self.parents[0], g);
                });
}

Tensor reshape(const Tensor &a, Shape shape) {
  const auto &na = checked(a, "reshape");
  check_shape("reshape", shape);
  if (numel(shape) != na->value.size())
    shape_fail("reshape", "cannot reshape " + shape_string(na->shape) + " to "
                              + shape_string(shape));
  return record("reshape", std::move(shape), na->value, { na },
                [](Node &self) { accumulate(*self.parents[0], self.grad); });
}

Tensor broadcast(const Tensor &a, Shape shape) {
  const auto &na = checked(a, "broadcast");
  check_shape("broadcast", shape);
  const Shape &in = na->shape;
  if (in.size() != shape.size())
    shape_fail("broadcast", "rank mismatch " + shape_string(in) + " -> "
                                + shape_string(shape));
  // Pad to rank 4 and compute input strides (0 on expanded axes).
  std::array<Index, 4> dims { 1, 1, 1, 1 }, strides { 0, 0, 0, 0 };
  const std::size_t off = 4 - shape.size();
  Index stride = 1;
  for (std::size_t i = shape.size(); i-- > 0;) {
    if (in[i] != shape[i] && in[i] != 1)
      shape_fail("broadcast", "cannot expand " + shape_string(in) + " to "
                                  + shape_string(shape));
    dims[off + i] = shape[i];
    strides[off + i] = in[i] == 1 ? 0 : stride;
    stride *= in[i];
  }
  auto for_each = [dims, strides](auto &&fn) {
    Index o = 0;
    for (Index i0 = 0; i0 < dims[0]; ++i0)
      for (Index i1 = 0; i1 < dims[1]; ++i1)
        for (Index i2 = 0; i2 < dims[2]; ++i2)
          for (Index i3 = 0; i3 < dims[3]; ++i3)
            fn(o++, i0 * strides[0] + i1 * strides[1] + i2 * strides[2]
                        + i3 * strides[3]);
  };
  Vector out(numel(shape));
  for_each([&](Index o, Index i) { out[o] = na->value[i]; });
  const Index in_size = na->value.size();
  return record("broadcast", std::move(shape), std::move(out), { na },
                [for_each, in_size](Node &self) {
                  Vector g = Vector::Zero(in_size);
                  for_each([&](Index o, Index i) { g[i] += self.grad[o]; });
                  accumulate(*self.parents[0], g);
                });
}

Tensor concat(std::span<const Tensor> parts, Index axis) {
  if (parts.empty())
    shape_fail("concat", "no inputs");
  const Shape &first = checked(parts[0], "concat")->shape;
  axis = normalize_axis("concat", axis, static_cast<Index>(first.size()));
  Shape out_shape = first;
  out_shape[axis] = 0;
  std::vector<std::shared_ptr<Node>> nodes;
  for (const auto &p: parts) {
    const auto &n = checked(p, "concat");
    Shape probe = n->shape;
    if (probe.size() != first.size())
      shape_fail("concat", "rank mismatch " + shape_string(first) + " vs "
                               + shape_string(probe));
    probe[axis] = first[axis];
    if (probe != first)
      shape_fail("concat", "incompatible shapes " + shape_string(first)
                               + " and " + shape_string(n->shape));
    out_shape[axis] += n->shape[axis];
    nodes.push_back(n);
  }
  const auto [outer, total, inner] = split_at(out_shape, axis);
  std::vector<Index> widths;
  for (const auto &n: nodes)
    widths.push_back(n->shape[axis] * inner);
  Vector out(numel(out_shape));
  Index offset = 0;
  for (std::size_t k = 0; k < nodes.size(); ++k) {
    for (Index o = 0; o < outer; ++o)
      out.segment(o * total * inner + offset, widths[k]) =
          nodes[k]->value.segment(o * widths[k], widths[k]);
    offset += widths[k];
  }
  return record("concat", std::move(out_shape), std::move(out),
                std::move(nodes),
                [outer = outer, total = total, inner = inner,
                 widths](Node &self) {
                  Index offset = 0;
                  for (std::size_t k = 0; k < self.parents.size(); ++k) {
                    Node &p = *self.parents[k];
                    if (p.requires_grad) {
                      Vector g(outer * widths[k]);
                      for (Index o = 0; o < outer; ++o)
                        g.segment(o * widths[k], widths[k]) =
                            self.grad.segment(o * total * inner + offset,
                                              widths[k]);
                      accumulate(p, g);
                    }
                    offset += widths[k];
                  }
                });
}

Tensor concat(std::initializer_list<Tensor> parts, Index axis) {
  return concat(std::span<const Tensor>(parts.begin(), parts.size()), axis);
}

Tensor slice(const Tensor &a, Index axis, Index start, Index length) {
  const auto &na = checked(a, "slice");
  axis = normalize_axis("slice", axis, static_cast<Index>(na->shape.size()));
  if (start < 0 || length < 0 || start + length > na->shape[axis])
    shape_fail("slice", "range [" + std::to_string(start) + ", "
                            + std::to_string(start + length)
                            + ") out of bounds for " + shape_string(na->shape));
  const auto [outer, extent, inner] = split_at(na->shape, axis);
  Shape out_shape = na->shape;
  out_shape[axis] = length;
  const Index w = length * inner;
  Vector out(outer * w);
  for (Index o = 0; o < outer; ++o)
    out.segment(o * w, w) =
        na->value.segment(o * extent * inner + start * inner, w);
  const Index in_size = na->value.size();
  return record("slice", std::move(out_shape), std::move(out), { na },
                [outer = outer, extent = extent, inner = inner, start, w,
                 in_size](Node &self) {
                  Vector g = Vector::Zero(in_size);
                  for (Index o = 0; o < outer; ++o)
                    g.segment(o * extent * inner + start * inner, w) =
                        self.grad.segment(o * w, w);
                  accumulate(*self.parents[0], g);
                });
}

Tensor gather_rows(const Tensor &a, std::span<const Index> indices) {
  const auto &na = checked(a, "gather_rows");
  if (na->shape.empty())
    shape_fail("gather_rows", "operand must have rank >= 1");
  const Index rows = na->shape[0];
  const Index width = rows == 0 ? 0 : na->value.size() / rows;
  std::vector<Index> idx(indices.begin(), indices.end());
  for (Index i: idx)
    if (i < 0 || i >= rows)
      shape_fail("gather_rows", "index " + std::to_string(i)
                                    + " out of range for "
                                    + shape_string(na->shape));
  Shape out_shape = na->shape;
  out_shape[0] = static_cast<Index>(idx.size());
  Vector out(numel(out_shape));
  for (std::size_t r = 0; r < idx.size(); ++r)
    out.segment(r * width, width) = na->value.segment(idx[r] * width, width);
  const Index in_size = na->value.size();
  return record("gather_rows", std::move(out_shape), std::move(out), { na },
                [idx = std::move(idx), width, in_size](Node &self) {
                  Vector g = Vector::Zero(in_size);
                  for (std::size_t r = 0; r < idx.size(); ++r)
                    g.segment(idx[r] * width, width) +=
                        self.grad.segment(r * width, width);
                  accumulate(*self.parents[0], g);
                });
}

Tensor sum(const Tensor &a) {
  const auto &na = checked(a, "sum");
  const Index n = na->value.size();
  return record("sum", {}, Vector::Constant(1, na->value.sum()), { na },
                [n](Node &self) {
                  accumulate(*self.parents[0], Vector::Constant(n, self.grad[0]));
                });
}

Tensor mean(const Tensor &a) {
  const Index n = checked(a, "mean")->value.size();
  if (n == 0)
    shape_fail("mean", "empty tensor");
  return scale(sum(a), 1.0 / static_cast<double>(n));
}

Tensor sum(const Tensor &a, Index axis) {
  const auto &na = checked(a, "sum");
  axis = normalize_axis("sum", axis, static_cast<Index>(na->shape.size()));
  const auto [outer, extent, inner] = split_at(na->shape, axis);
  Shape out_shape = na->shape;
  out_shape[axis] = 1;
  Vector out = Vector::Zero(outer * inner);
  for (Index o = 0; o < outer; ++o)
    for (Index e = 0; e < extent; ++e)
      out.segment(o * inner, inner) +=
          na->value.segment((o * extent + e) * inner, inner);
  return record("sum", std::move(out_shape), std::move(out), { na },
                [outer = outer, extent = extent, inner = inner](Node &self) {
                  Vector g(outer * extent * inner);
                  for (Index o = 0; o < outer; ++o)
                    for (Index e = 0; e < extent; ++e)
                      g.segment((o * extent + e) * inner, inner) =
                          self.grad.segment(o * inner, inner);
                  accumulate(*self.parents[0], g);
                });
}

Tensor mean(const Tensor &a, Index axis) {
  const auto &na = checked(a, "mean");
  axis = normalize_axis("mean", axis, static_cast<Index>(na->shape.size()));
  if (na->shape[axis] == 0)
    shape_fail("mean", "empty axis");
  return scale(sum(a, axis), 1.0 / static_cast<double>(na->shape[axis]));
}

Tensor softmax(const Tensor &a) {
  const auto &na = checked(a, "softmax");
  if (na->shape.empty())
    shape_fail("softmax", "operand must have rank >= 1");
  const Index cols = na->shape.back();
  const Index rows = cols == 0 ? 0 : na->value.size() / cols;
  Vector out(na->value.size());
  Eigen::Map<const RowMatrix> x(na->value.data(), rows, cols);
  Eigen::Map<RowMatrix> y(out.data(), rows, cols);
  for (Index r = 0; r < rows; ++r) {
    auto e = (x.row(r).array() - x.row(r).maxCoeff()).exp();
    y.row(r) = e / e.sum();
  }
  return record("softmax", na->shape, std::move(out), { na },
                [rows, cols](Node &self) {
                  Eigen::Map<const RowMatrix> s(self.value.data(), rows, cols);
                  Eigen::Map<const RowMatrix> g(self.grad.data(), rows, cols);
                  Vector gx(rows * cols);
                  Eigen::Map<RowMatrix> dx(gx.data(), rows, cols);
                  for (Index r = 0; r < rows; ++r) {
                    double dot = s.row(r).dot(g.row(r));
                    dx.row(r) =
                        s.row(r).array() * (g.row(r).array() - dot);
                  }
                  accumulate(*self.parents[0], gx);
                });
}

}  // namespace moljae::ad
