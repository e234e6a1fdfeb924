//
// Project MolJAE - Copyright 2026 The MolJAE Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "moljae/schedule.h"

#include <cmath>

namespace moljae {
namespace {

void check_time(double t) {
  if (!(t >= 0.0 && t <= kHorizon))
    throw ScheduleError("schedule: time " + std::to_string(t)
                        + " outside [0, 1]");
}

}  // namespace

void validate(const NoiseSchedule &s) {
  if (s.kind == NoiseSchedule::Kind::kVP) {
    if (!(s.beta_min >= 0.0 && s.beta_max >= s.beta_min))
      throw std::invalid_argument("schedule: need 0 <= beta_min <= beta_max");
  } else if (!(s.sigma_min > 0.0 && s.sigma_max >= s.sigma_min)) {
    throw std::invalid_argument("schedule: need 0 < sigma_min <= sigma_max");
  }
}

AlphaBeta alpha_beta(const NoiseSchedule &s, double t) {
  check_time(t);
  if (s.kind == NoiseSchedule::Kind::kVE)
    return { 1.0, s.sigma_min * std::pow(s.sigma_max / s.sigma_min, t) };

  const double integral =
      s.beta_min * t + 0.5 * (s.beta_max - s.beta_min) * t * t;
  const double alpha = std::exp(-0.5 * integral);
  // 1 - alpha^2 = -expm1(-integral) keeps precision near t = 0.
  return { alpha, std::sqrt(-std::expm1(-integral)) };
}

DriftDiffusion drift_diffusion(const NoiseSchedule &s, double t) {
  check_time(t);
  if (s.kind == NoiseSchedule::Kind::kVE) {
    const double ratio = s.sigma_max / s.sigma_min;
    const double sigma = s.sigma_min * std::pow(ratio, t);
    return { 0.0, sigma * std::sqrt(2.0 * std::log(ratio)) };
  }
  const double rate = s.beta_min + (s.beta_max - s.beta_min) * t;
  return { -0.5 * rate, std::sqrt(rate) };
}

std::string to_string(NoiseSchedule::Kind kind) {
  return kind == NoiseSchedule::Kind::kVP ? "vp" : "ve";
}

NoiseSchedule::Kind schedule_kind_from_string(const std::string &name) {
  if (name == "vp" || name == "VP")
    return NoiseSchedule::Kind::kVP;
  if (name == "ve" || name == "VE")
    return NoiseSchedule::Kind::kVE;
  throw std::invalid_argument("unknown schedule kind \"" + name + "\"");
}

}  // namespace moljae
