//
// Project MolJAE - Copyright 2026 The MolJAE Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef MOLJAE_CONFIG_H_
#define MOLJAE_CONFIG_H_

#include <filesystem>
#include <istream>
#include <map>
#include <stdexcept>
#include <string>

#include "moljae/network.h"
#include "moljae/sampling.h"
#include "moljae/training.h"

namespace moljae {

class ConfigError: public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

using ConfigMap = std::map<std::string, std::string>;

//! Flat `key = value` lines; `#` starts a comment. Later keys win.
ConfigMap parse_config(std::istream &in);
ConfigMap load_config(const std::filesystem::path &path);

struct RunConfig {
  ModelConfig model;
  TrainConfig train;
  SamplerConfig sample;
};

//! Applies every key to `config`. Unknown keys and unparsable values throw
//! ConfigError naming the key.
void apply_config(const ConfigMap &values, RunConfig &config);
//! Applies only the `model.*` keys.
void apply_model_config(const ConfigMap &values, ModelConfig &model);

//! Every known key with its current value.
ConfigMap snapshot(const RunConfig &config);
ConfigMap snapshot(const ModelConfig &model);

}  // namespace moljae

#endif  // MOLJAE_CONFIG_H_
