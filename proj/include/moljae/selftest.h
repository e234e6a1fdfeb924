//
// Project MolJAE - Copyright 2026 The MolJAE Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef MOLJAE_SELFTEST_H_
#define MOLJAE_SELFTEST_H_

#include <cstdint>
#include <string>
#include <vector>

#include "moljae/molgraph.h"

namespace moljae {

struct CheckResult {
  std::string name;
  double value = 0.0;
  double tolerance = 0.0;
  bool below = true;  // pass when value < tolerance, else value > tolerance
  bool passed() const { return below ? value < tolerance : value > tolerance; }
};

struct SelfTestOptions {
  std::uint64_t seed = 0;
  int decomposition_tables = 100;
  int gradient_probes = 50;
  int symmetry_molecules = 10;
  int rotations = 20;
  int permutations = 20;
  int reflections = 5;
};

//! Random valence-agnostic graphs with 3 to 9 atoms, a spanning tree of
//! single bonds and coordinates in a 3 angstrom box.
std::vector<MoleculeGraph> random_probe_molecules(int count, std::uint64_t seed);

//! Largest |alpha^2 + beta^2 - 1| of the default VP schedule on a uniform
//! grid of `points` times in [0, 1].
double vp_identity_residual(int points = 1000);

//! Largest relative mismatch between the closed-form drift and diffusion
//! and central differences of alpha and beta^2, for VP and VE.
double drift_diffusion_residual(int points = 200);

std::vector<CheckResult> decomposition_checks(const SelfTestOptions &options);
std::vector<CheckResult> gradient_checks(const SelfTestOptions &options);
std::vector<CheckResult> symmetry_checks(const SelfTestOptions &options);
std::vector<CheckResult> schedule_checks();

std::vector<CheckResult> run_selftest(const SelfTestOptions &options = {});

std::string format_check(const CheckResult &result);

}  // namespace moljae

#endif  // MOLJAE_SELFTEST_H_
