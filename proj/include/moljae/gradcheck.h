//
// Project MolJAE - Copyright 2026 The MolJAE Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef MOLJAE_GRADCHECK_H_
#define MOLJAE_GRADCHECK_H_

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "moljae/autodiff.h"

namespace moljae::ad {

//! |a - b| / max(|a|, |b|, floor).
double relative_error(double a, double b, double floor = 1e-8);

enum class Domain { kReal, kPositive, kAwayFromZero };

struct InputSpec {
  Shape shape;
  Domain domain = Domain::kReal;
};

using TensorFunction = std::function<Tensor(std::span<const Tensor>)>;

struct GradCheckResult {
  std::string name;
  double max_rel_error = 0.0;
  int probes = 0;
};

//! Each probe draws fresh inputs, a random output weighting w and a random
//! direction v, then compares the reverse-mode directional derivative of
//! sum(w * f(x)) along v with the central difference of step h.
GradCheckResult check_gradient(const std::string &name, const TensorFunction &f,
                               const std::vector<InputSpec> &inputs, int probes,
                               std::uint64_t seed, double h = 1e-5);

//! One result per differentiable primitive.
std::vector<GradCheckResult> check_primitives(int probes, std::uint64_t seed);

//! Three-layer MLP with tanh and SiLU activations, all weights as inputs.
GradCheckResult check_composite(int probes, std::uint64_t seed);

}  // namespace moljae::ad

#endif  // MOLJAE_GRADCHECK_H_
