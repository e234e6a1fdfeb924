//
// Project MolJAE - Copyright 2026 The MolJAE Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "moljae/gradcheck.h"

#include <algorithm>
#include <cmath>
#include <random>

namespace moljae::ad {
namespace {

using Rng = std::mt19937_64;

Vector draw(const InputSpec &spec, Rng &rng) {
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> mag(0.5, 2.0);
  std::bernoulli_distribution sign;
  Vector v(numel(spec.shape));
  for (auto &x: v) {
    switch (spec.domain) {
    case Domain::kReal:
      x = normal(rng);
      break;
    case Domain::kPositive:
      x = mag(rng);
      break;
    case Domain::kAwayFromZero:
      x = sign(rng) ? mag(rng) : -mag(rng);
      break;
    }
  }
  return v;
}

std::vector<Tensor> constants(const std::vector<InputSpec> &specs,
                              const std::vector<Vector> &values) {
  std::vector<Tensor> out;
  for (std::size_t i = 0; i < specs.size(); ++i)
    out.push_back(Tensor::constant(specs[i].shape, values[i]));
  return out;
}

double weighted(const TensorFunction &f, const std::vector<InputSpec> &specs,
                const std::vector<Vector> &values, const Vector &w) {
  auto in = constants(specs, values);
  return f(in).values().dot(w);
}

}  // namespace

double relative_error(double a, double b, double floor) {
  return std::abs(a - b) / std::max({ std::abs(a), std::abs(b), floor });
}

GradCheckResult check_gradient(const std::string &name, const TensorFunction &f,
                               const std::vector<InputSpec> &specs, int probes,
                               std::uint64_t seed, double h) {
  GradCheckResult result { name, 0.0, 0 };
  Rng rng(seed);
  std::normal_distribution<double> normal;
  for (int p = 0; p < probes; ++p) {
    std::vector<Vector> x, v;
    for (const auto &s: specs) {
      x.push_back(draw(s, rng));
      Vector dir(x.back().size());
      for (auto &d: dir)
        d = normal(rng);
      v.push_back(dir);
    }

    Tape tape;
    std::vector<Tensor> leaves;
    for (std::size_t i = 0; i < specs.size(); ++i)
      leaves.push_back(tape.leaf(specs[i].shape, x[i]));
    Tensor out = f(leaves);
    Vector w(out.numel());
    for (auto &d: w)
      d = normal(rng);
    Tensor loss = sum(mul(out, Tensor::constant(out.shape(), w)));
    GradientMap g = tape.backward(loss);
    double analytic = 0.0;
    for (std::size_t i = 0; i < specs.size(); ++i)
      analytic += g[leaves[i]].dot(v[i]);

    std::vector<Vector> plus = x, minus = x;
    for (std::size_t i = 0; i < specs.size(); ++i) {
      plus[i] += h * v[i];
      minus[i] -= h * v[i];
    }
    const double numeric =
        (weighted(f, specs, plus, w) - weighted(f, specs, minus, w)) / (2 * h);
    result.max_rel_error =
        std::max(result.max_rel_error, relative_error(analytic, numeric));
    ++result.probes;
  }
  return result;
}

std::vector<GradCheckResult> check_primitives(int probes, std::uint64_t seed) {
  using D = Domain;
  struct Case {
    std::string name;
    std::vector<InputSpec> inputs;
    TensorFunction f;
  };
  const Shape m34 { 3, 4 };
  const std::vector<Case> cases = {
    { "add", { { m34 }, { m34 } }, [](auto in) { return add(in[0], in[1]); } },
    { "sub", { { m34 }, { m34 } }, [](auto in) { return sub(in[0], in[1]); } },
    { "mul", { { m34 }, { m34 } }, [](auto in) { return mul(in[0], in[1]); } },
    { "div", { { m34 }, { m34, D::kAwayFromZero } },
      [](auto in) { return div(in[0], in[1]); } },
    { "neg", { { m34 } }, [](auto in) { return neg(in[0]); } },
    { "scale", { { m34 } }, [](auto in) { return scale(in[0], -1.7); } },
    { "add_scalar", { { m34 } }, [](auto in) { return add_scalar(in[0], 0.3); } },
    { "exp", { { m34 } }, [](auto in) { return exp(in[0]); } },
    { "log", { { m34, D::kPositive } }, [](auto in) { return log(in[0]); } },
    { "square", { { m34 } }, [](auto in) { return square(in[0]); } },
    { "sqrt", { { m34, D::kPositive } }, [](auto in) { return sqrt(in[0]); } },
    { "abs", { { m34, D::kAwayFromZero } }, [](auto in) { return abs(in[0]); } },
    { "relu", { { m34, D::kAwayFromZero } }, [](auto in) { return relu(in[0]); } },
    { "silu", { { m34 } }, [](auto in) { return silu(in[0]); } },
    { "tanh", { { m34 } }, [](auto in) { return tanh(in[0]); } },
    { "matmul", { { { 3, 4 } }, { { 4, 5 } } },
      [](auto in) { return matmul(in[0], in[1]); } },
    { "transpose", { { m34 } }, [](auto in) { return transpose(in[0]); } },
    { "reshape", { { m34 } }, [](auto in) { return reshape(in[0], { 2, 6 }); } },
    { "broadcast", { { { 3, 1 } } },
      [](auto in) { return broadcast(in[0], { 3, 4 }); } },
    { "broadcast3", { { { 2, 1, 3 } } },
      [](auto in) { return broadcast(in[0], { 2, 4, 3 }); } },
    { "concat0", { { m34 }, { { 2, 4 } } },
      [](auto in) { return concat({ in[0], in[1] }, 0); } },
    { "concat1", { { m34 }, { { 3, 2 } } },
      [](auto in) { return concat({ in[0], in[1] }, 1); } },
    { "slice", { { m34 } }, [](auto in) { return slice(in[0], 1, 1, 2); } },
    { "gather_rows", { { m34 } },
      [](auto in) {
        const std::vector<Index> idx { 2, 0, 2, 1 };
        return gather_rows(in[0], idx);
      } },
    { "sum", { { m34 } }, [](auto in) { return sum(in[0]); } },
    { "mean", { { m34 } }, [](auto in) { return mean(in[0]); } },
    { "sum_axis0", { { m34 } }, [](auto in) { return sum(in[0], 0); } },
    { "sum_axis1", { { { 2, 3, 4 } } }, [](auto in) { return sum(in[0], 1); } },
    { "mean_axis1", { { m34 } }, [](auto in) { return mean(in[0], 1); } },
    { "softmax", { { m34 } }, [](auto in) { return softmax(in[0]); } },
  };
  std::vector<GradCheckResult> out;
  std::uint64_t k = 0;
  for (const auto &c: cases)
    out.push_back(check_gradient(c.name, c.f, c.inputs, probes, seed + 7919 * k++));
  return out;
}

GradCheckResult check_composite(int probes, std::uint64_t seed) {
  const std::vector<InputSpec> inputs = {
    { { 5, 4 } },                          // x
    { { 4, 6 } }, { { 1, 6 } },            // layer 1
    { { 6, 6 } }, { { 1, 6 } },            // layer 2
    { { 6, 2 } }, { { 1, 2 } },            // layer 3
  };
  auto f = [](std::span<const Tensor> in) {
    auto dense = [](const Tensor &x, const Tensor &w, const Tensor &b) {
      Tensor y = matmul(x, w);
      return add(y, broadcast(b, y.shape()));
    };
    Tensor h = tanh(dense(in[0], in[1], in[2]));
    h = silu(dense(h, in[3], in[4]));
    return softmax(dense(h, in[5], in[6]));
  };
  return check_gradient("mlp3", f, inputs, probes, seed);
}

}  // namespace moljae::ad
