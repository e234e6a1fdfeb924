//
// Project MolJAE - Copyright 2026 The MolJAE Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef MOLJAE_AUTODIFF_H_
#define MOLJAE_AUTODIFF_H_

//! \file
//! Minimal reverse-mode automatic differentiation over dense, row-major
//! tensors of rank <= 4. A Tape records primitives applied to tensors that
//! require gradients; tensors that are not attached to a tape behave as
//! plain values, so the same forward code serves training and inference.

#include <cstddef>
#include <initializer_list>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>

namespace moljae::ad {

using Index = Eigen::Index;
using Shape = std::vector<Index>;
using Vector = Eigen::VectorXd;
using RowMatrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

inline constexpr std::size_t kMaxRank = 4;

class ShapeError: public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

class TapeError: public std::logic_error {
public:
  using std::logic_error::logic_error;
};

Index numel(const Shape &shape);
std::string shape_string(const Shape &shape);

namespace detail {
struct Node;
struct TapeState;
}  // namespace detail

class Tape;

class Tensor {
public:
  Tensor() = default;

  // Values are row-major; values.size() must equal numel(shape).
  static Tensor constant(Shape shape, Vector values);
  static Tensor scalar(double value);
  static Tensor zeros(Shape shape);
  static Tensor full(Shape shape, double value);
  static Tensor from_matrix(const Eigen::Ref<const Eigen::MatrixXd> &m);
  static Tensor row(const Eigen::Ref<const Eigen::VectorXd> &v);
  static Tensor column(const Eigen::Ref<const Eigen::VectorXd> &v);

  bool defined() const { return node_ != nullptr; }
  const Shape &shape() const;
  Index rank() const { return static_cast<Index>(shape().size()); }
  Index dim(Index axis) const;
  Index numel() const;

  const Vector &values() const;
  double item() const;
  //! Rank-2 view (rank-1 tensors are viewed as a single row).
  Eigen::Map<const RowMatrix> matrix() const;
  Eigen::MatrixXd to_matrix() const { return matrix(); }

  bool requires_grad() const;
  //! Gradient accumulated into a leaf by Tape::backward(); empty before.
  const Vector &grad() const;

  const detail::Node *id() const { return node_.get(); }

  // Internal; primitives construct results through this.
  explicit Tensor(std::shared_ptr<detail::Node> node): node_(std::move(node)) {}
  const std::shared_ptr<detail::Node> &node() const { return node_; }

private:
  std::shared_ptr<detail::Node> node_;
};

class GradientMap {
public:
  //! Gradient of the loss with respect to a leaf; throws if the leaf was not
  //! reached.
  const Vector &operator[](const Tensor &leaf) const;
  bool contains(const Tensor &leaf) const;
  std::size_t size() const { return grads_.size(); }

private:
  friend class Tape;
  std::unordered_map<const detail::Node *, Vector> grads_;
};

//! Single-use record of primitive operations. Confined to one thread.
class Tape {
public:
  Tape();

  Tensor leaf(Shape shape, Vector values, bool requires_grad = true);
  Tensor leaf(const Eigen::Ref<const Eigen::MatrixXd> &m,
              bool requires_grad = true);

  //! Propagates d(loss)/d(node) to every recorded node, fills leaf gradients
  //! and releases the recording. A tape can be consumed only once.
  GradientMap backward(const Tensor &loss);

  bool consumed() const;
  std::size_t size() const;

private:
  std::shared_ptr<detail::TapeState> state_;
};

// Elementwise binary ops require identical shapes; use broadcast() first.
Tensor add(const Tensor &a, const Tensor &b);
Tensor sub(const Tensor &a, const Tensor &b);
Tensor mul(const Tensor &a, const Tensor &b);
Tensor div(const Tensor &a, const Tensor &b);

Tensor neg(const Tensor &a);
Tensor scale(const Tensor &a, double factor);
Tensor add_scalar(const Tensor &a, double offset);

Tensor exp(const Tensor &a);
Tensor log(const Tensor &a);
Tensor square(const Tensor &a);
Tensor sqrt(const Tensor &a);
Tensor abs(const Tensor &a);
Tensor relu(const Tensor &a);
Tensor silu(const Tensor &a);
Tensor tanh(const Tensor &a);

//! (m x k) * (k x n), both rank 2.
Tensor matmul(const Tensor &a, const Tensor &b);
Tensor transpose(const Tensor &a);
Tensor reshape(const Tensor &a, Shape shape);
//! Expands size-1 dimensions to `shape`; ranks must match.
Tensor broadcast(const Tensor &a, Shape shape);

Tensor concat(std::span<const Tensor> parts, Index axis);
Tensor concat(std::initializer_list<Tensor> parts, Index axis);
Tensor slice(const Tensor &a, Index axis, Index start, Index length);
//! Selects entries along axis 0; repeated indices accumulate gradients.
Tensor gather_rows(const Tensor &a, std::span<const Index> indices);

//! Full reduction to a rank-0 tensor.
Tensor sum(const Tensor &a);
Tensor mean(const Tensor &a);
//! Reduction along one axis; the axis is kept with size 1.
Tensor sum(const Tensor &a, Index axis);
Tensor mean(const Tensor &a, Index axis);

//! Softmax along the last axis.
Tensor softmax(const Tensor &a);

inline Tensor operator+(const Tensor &a, const Tensor &b) { return add(a, b); }
inline Tensor operator-(const Tensor &a, const Tensor &b) { return sub(a, b); }
inline Tensor operator*(const Tensor &a, const Tensor &b) { return mul(a, b); }
inline Tensor operator-(const Tensor &a) { return neg(a); }

}  // namespace moljae::ad

#endif  // MOLJAE_AUTODIFF_H_
