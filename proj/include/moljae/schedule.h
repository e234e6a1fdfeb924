//
// Project MolJAE - Copyright 2026 The MolJAE Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef MOLJAE_SCHEDULE_H_
#define MOLJAE_SCHEDULE_H_

#include <stdexcept>
#include <string>

namespace moljae {

//! Closed-form forward perturbation x_t = alpha(t) x_0 + beta(t) z on the
//! horizon t in [0, 1].
//!
//! VP uses a linear rate beta_min + (beta_max - beta_min) t, with
//! alpha(t) = exp(-0.5 * integral of the rate) and beta = sqrt(1 - alpha^2).
//! VE keeps alpha = 1 and grows beta geometrically from sigma_min to
//! sigma_max.
struct NoiseSchedule {
  enum class Kind { kVP, kVE };

  Kind kind = Kind::kVP;
  double beta_min = 0.1;
  double beta_max = 10.0;
  double sigma_min = 0.01;
  double sigma_max = 1.0;

  static NoiseSchedule vp(double beta_min = 0.1, double beta_max = 10.0) {
    return { Kind::kVP, beta_min, beta_max, 0.01, 1.0 };
  }
  static NoiseSchedule ve(double sigma_min = 0.01, double sigma_max = 1.0) {
    return { Kind::kVE, 0.1, 10.0, sigma_min, sigma_max };
  }
};

inline constexpr double kHorizon = 1.0;

struct AlphaBeta {
  double alpha;
  double beta;
};

//! SDE dx = f(t) x dt + g(t) dw reproducing the closed-form marginals.
struct DriftDiffusion {
  double f;
  double g;
};

class ScheduleError: public std::out_of_range {
public:
  using std::out_of_range::out_of_range;
};

AlphaBeta alpha_beta(const NoiseSchedule &schedule, double t);
DriftDiffusion drift_diffusion(const NoiseSchedule &schedule, double t);

//! Throws std::invalid_argument for non-positive or inverted ranges.
void validate(const NoiseSchedule &schedule);

std::string to_string(NoiseSchedule::Kind kind);
NoiseSchedule::Kind schedule_kind_from_string(const std::string &name);

}  // namespace moljae

#endif  // MOLJAE_SCHEDULE_H_
