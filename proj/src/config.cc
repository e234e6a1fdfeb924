//
// Project MolJAE - Copyright 2026 The MolJAE Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "moljae/config.h"

#include <charconv>
#include <fstream>
#include <functional>
#include <sstream>
#include <vector>

namespace moljae {
namespace {

std::string trim(const std::string &s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos)
    return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <class T>
T parse_number(const std::string &key, const std::string &v) {
  T out {};
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size())
    throw ConfigError("config: cannot parse " + key + " = \"" + v + "\"");
  return out;
}

bool parse_bool(const std::string &key, const std::string &v) {
  if (v == "true" || v == "1")
    return true;
  if (v == "false" || v == "0")
    return false;
  throw ConfigError("config: " + key + " expects true/false, got \"" + v + "\"");
}

std::string format(double v) {
  char buf[64];
  auto [ptr, _] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

struct Binding {
  std::function<std::string()> get;
  std::function<void(const std::string &)> set;
};

using Bindings = std::map<std::string, Binding>;

template <class T>
Binding number(T &ref, const std::string &key) {
  return { [&ref] {
            if constexpr (std::is_floating_point_v<T>)
              return format(ref);
            else
              return std::to_string(ref);
          },
           [&ref, key](const std::string &v) { ref = parse_number<T>(key, v); } };
}

Binding flag(bool &ref, const std::string &key) {
  return { [&ref] { return std::string(ref ? "true" : "false"); },
           [&ref, key](const std::string &v) { ref = parse_bool(key, v); } };
}

void bind_model(Bindings &b, ModelConfig &m) {
  b["model.hidden"] = number(m.hidden, "model.hidden");
  b["model.rounds"] = number(m.message_rounds, "model.rounds");
  b["model.gcn_layers"] = number(m.gcn_layers, "model.gcn_layers");
  b["model.heads"] = number(m.attention_heads, "model.heads");
  b["model.time_dim"] = number(m.time_dim, "model.time_dim");
  b["model.proj_dim"] = number(m.projection_dim, "model.proj_dim");
  b["model.rbf"] = number(m.num_rbf, "model.rbf");
  b["model.cutoff"] = number(m.encoder_cutoff, "model.cutoff");
  b["model.fourier_min"] = number(m.fourier_min_freq, "model.fourier_min");
  b["model.fourier_max"] = number(m.fourier_max_freq, "model.fourier_max");
  b["model.share_encoders"] = flag(m.share_encoders, "model.share_encoders");
  b["model.gcn_activation"] = {
    [&m] { return std::string(m.gcn_activation == Activation::kSilu ? "silu"
                                                                     : "identity"); },
    [&m](const std::string &v) {
      if (v == "silu")
        m.gcn_activation = Activation::kSilu;
      else if (v == "identity")
        m.gcn_activation = Activation::kIdentity;
      else
        throw ConfigError("config: model.gcn_activation expects silu or identity");
    }
  };
  b["model.frame_cutoff"] = number(m.frames.cutoff, "model.frame_cutoff");
  b["model.frame_width"] = number(m.frames.weight_width, "model.frame_width");
}

void bind_all(Bindings &b, RunConfig &c) {
  bind_model(b, c.model);
  TrainConfig &t = c.train;
  b["train.epochs"] = number(t.epochs, "train.epochs");
  b["train.batch_size"] = number(t.batch_size, "train.batch_size");
  b["train.lr"] = number(t.learning_rate, "train.lr");
  b["train.beta1"] = number(t.adam_beta1, "train.beta1");
  b["train.beta2"] = number(t.adam_beta2, "train.beta2");
  b["train.eps"] = number(t.adam_eps, "train.eps");
  b["train.seed"] = number(t.seed, "train.seed");
  b["train.t_min"] = number(t.t_min, "train.t_min");
  b["train.grad_clip"] = number(t.grad_clip, "train.grad_clip");
  b["train.condition_dropout"] =
      number(t.condition_dropout, "train.condition_dropout");
  b["train.checkpoint_interval"] =
      number(t.checkpoint_interval, "train.checkpoint_interval");
  b["loss.lambda1"] = number(t.loss.lambda1, "loss.lambda1");
  b["loss.lambda2"] = number(t.loss.lambda2, "loss.lambda2");
  b["loss.tau0"] = number(t.loss.tau0, "loss.tau0");
  b["loss.weighting"] = {
    [&t] { return to_string(t.loss.weighting); },
    [&t](const std::string &v) {
      try {
        t.loss.weighting = weighting_from_string(v);
      } catch (const std::invalid_argument &e) {
        throw ConfigError(std::string("config: loss.weighting: ") + e.what());
      }
    }
  };
  NoiseSchedule &s = c.model.schedules.P;
  b["schedule.kind"] = {
    [&s] { return to_string(s.kind); },
    [&s](const std::string &v) {
      try {
        s.kind = schedule_kind_from_string(v);
      } catch (const std::invalid_argument &e) {
        throw ConfigError(std::string("config: schedule.kind: ") + e.what());
      }
    }
  };
  b["schedule.beta_min"] = number(s.beta_min, "schedule.beta_min");
  b["schedule.beta_max"] = number(s.beta_max, "schedule.beta_max");
  b["schedule.sigma_min"] = number(s.sigma_min, "schedule.sigma_min");
  b["schedule.sigma_max"] = number(s.sigma_max, "schedule.sigma_max");
  SamplerConfig &p = c.sample;
  b["sample.steps"] = number(p.steps, "sample.steps");
  b["sample.lambda"] = number(p.lambda, "sample.lambda");
  b["sample.n_atoms"] = number(p.n_atoms, "sample.n_atoms");
  b["sample.t_end"] = number(p.t_end, "sample.t_end");
  b["sample.seed"] = number(p.seed, "sample.seed");
}

}  // namespace

ConfigMap parse_config(std::istream &in) {
  ConfigMap out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos)
      line.erase(hash);
    line = trim(line);
    if (line.empty())
      continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(lineno)
                        + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    if (key.empty())
      throw ConfigError("config line " + std::to_string(lineno) + ": empty key");
    out[key] = trim(line.substr(eq + 1));
  }
  return out;
}

ConfigMap load_config(const std::filesystem::path &path) {
  std::ifstream in(path);
  if (!in)
    throw ConfigError("cannot read config file " + path.string());
  return parse_config(in);
}

void apply_config(const ConfigMap &values, RunConfig &config) {
  Bindings b;
  bind_all(b, config);
  for (const auto &[key, value]: values) {
    auto it = b.find(key);
    if (it == b.end())
      throw ConfigError("config: unknown key " + key);
    it->second.set(value);
  }
  config.model.schedules = ComponentSchedules::uniform(config.model.schedules.P);
}

void apply_model_config(const ConfigMap &values, ModelConfig &model) {
  Bindings b;
  bind_model(b, model);
  for (const auto &[key, value]: values) {
    if (!key.starts_with("model."))
      continue;
    auto it = b.find(key);
    if (it == b.end())
      throw ConfigError("config: unknown key " + key);
    it->second.set(value);
  }
}

ConfigMap snapshot(const RunConfig &config) {
  RunConfig copy = config;
  Bindings b;
  bind_all(b, copy);
  ConfigMap out;
  for (const auto &[key, binding]: b)
    out[key] = binding.get();
  return out;
}

ConfigMap snapshot(const ModelConfig &model) {
  ModelConfig copy = model;
  Bindings b;
  bind_model(b, copy);
  ConfigMap out;
  for (const auto &[key, binding]: b)
    out[key] = binding.get();
  return out;
}

}  // namespace moljae
