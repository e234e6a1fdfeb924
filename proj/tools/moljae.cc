//
// Project MolJAE - Copyright 2026 The MolJAE Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "moljae/config.h"
#include "moljae/evalsuite.h"
#include "moljae/molgraph.h"
#include "moljae/sampling.h"
#include "moljae/selftest.h"
#include "moljae/training.h"

#ifndef MOLJAE_BUILD_ID
#define MOLJAE_BUILD_ID "unknown"
#endif

namespace fs = std::filesystem;
using nlohmann::json;
using namespace moljae;

namespace {

class UsageError: public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

std::string fnv1a_file(const fs::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw std::runtime_error("cannot read " + path.string());
  std::uint64_t h = 0xcbf29ce484222325ULL;
  char buf[1 << 14];
  while (in.read(buf, sizeof buf) || in.gcount() > 0) {
    for (std::streamsize i = 0; i < in.gcount(); ++i) {
      h ^= static_cast<unsigned char>(buf[i]);
      h *= 0x100000001b3ULL;
    }
  }
  char hex[17];
  std::snprintf(hex, sizeof hex, "%016llx", static_cast<unsigned long long>(h));
  return hex;
}

void write_atomic(const fs::path &path, const std::string &text) {
  if (path.has_parent_path())
    fs::create_directories(path.parent_path());
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out)
      throw std::runtime_error("cannot write " + tmp.string());
    out << text;
    if (!out.flush())
      throw std::runtime_error("write failed: " + tmp.string());
  }
  fs::rename(tmp, path);
}

struct Manifest {
  std::string command;
  std::vector<std::string> argv;
  ConfigMap config;
  std::uint64_t seed = 0;
  std::vector<fs::path> inputs;
  std::vector<fs::path> outputs;
  json extra = json::object();
};

void write_manifest(const fs::path &path, const Manifest &m, double seconds) {
  json j;
  j["command"] = m.command;
  j["argv"] = m.argv;
  j["config"] = m.config;
  j["seed"] = m.seed;
  j["build"] = MOLJAE_BUILD_ID;
  json inputs = json::object();
  for (const auto &p: m.inputs)
    inputs[p.string()] = fnv1a_file(p);
  j["inputs"] = inputs;
  json outputs = json::array();
  for (const auto &p: m.outputs)
    outputs.push_back(p.string());
  j["outputs"] = outputs;
  j["wall_seconds"] = seconds;
  if (!m.extra.empty())
    j["results"] = m.extra;
  write_atomic(path, j.dump(2) + "\n");
}

// Options shared by every subcommand that reads a configuration.
struct Common {
  std::string config_path;
  std::vector<std::string> sets;
  std::uint64_t seed = 0;
  bool seed_given = false;
  int threads = 0;
  std::string manifest;
};

void add_common(CLI::App *cmd, Common &c) {
  cmd->add_option("--config", c.config_path,
                  "key=value config file (default: $MJAE_CONFIG)");
  cmd->add_option("--set", c.sets, "override one config key, key=value");
  cmd->add_option_function<std::uint64_t>(
      "--seed", [&c](std::uint64_t s) { c.seed = s; c.seed_given = true; },
      "root seed for all randomness");
  cmd->add_option("--threads", c.threads, "worker threads (default: all cores)")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--manifest", c.manifest, "run manifest path");
}

RunConfig resolve_config(const Common &c) {
  RunConfig rc;
  std::string path = c.config_path;
  if (path.empty())
    if (const char *env = std::getenv("MJAE_CONFIG"))
      path = env;
  try {
    if (!path.empty())
      apply_config(load_config(path), rc);
    ConfigMap overrides;
    for (const auto &kv: c.sets) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos)
        throw ConfigError("--set expects key=value, got " + kv);
      overrides[kv.substr(0, eq)] = kv.substr(eq + 1);
    }
    apply_config(overrides, rc);
  } catch (const ConfigError &e) {
    throw UsageError(e.what());
  }
  if (c.seed_given) {
    rc.train.seed = c.seed;
    rc.sample.seed = c.seed;
  }
  return rc;
}

int thread_count(const Common &c) {
  if (c.threads > 0)
    return c.threads;
  return std::max(1u, std::thread::hardware_concurrency());
}

template <class F>
void check_usage(F &&validate_fn) {
  try {
    validate_fn();
  } catch (const std::invalid_argument &e) {
    throw UsageError(e.what());
  }
}

fs::path manifest_path(const Common &c, const fs::path &primary) {
  return c.manifest.empty() ? fs::path(primary.string() + ".manifest.json")
                            : fs::path(c.manifest);
}

ConfigMap filter_prefix(const ConfigMap &m, std::initializer_list<std::string> prefixes) {
  ConfigMap out;
  for (const auto &[k, v]: m)
    for (const auto &p: prefixes)
      if (k.starts_with(p))
        out[k] = v;
  return out;
}

// Model and schedule configuration are restored from the checkpoint.
Checkpoint load_model(const fs::path &path, RunConfig &rc) {
  Checkpoint ckpt = load_checkpoint(path);
  RunConfig restored = rc;
  apply_config(filter_prefix(ckpt.metadata, { "model.", "schedule." }), restored);
  rc.model = restored.model;
  check_usage([&] { validate(rc.model); });
  load_checkpoint(path, init_params(rc.model, 0));
  return ckpt;
}

std::string loss_log(const std::vector<EpochStats> &history) {
  std::ostringstream out;
  out << "epoch,total,l_sc,l_co,sc_p,sc_h,sc_e\n";
  char line[256];
  for (const auto &s: history) {
    std::snprintf(line, sizeof line, "%d,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n",
                  s.epoch, s.total, s.l_sc, s.l_co, s.sc_components[0],
                  s.sc_components[1], s.sc_components[2]);
    out << line;
  }
  return out.str();
}

// ---- subcommands --------------------------------------------------------

struct IngestArgs {
  Common common;
  std::string input, output;
};

int cmd_ingest(const IngestArgs &a, Manifest &m) {
  std::ifstream in(a.input);
  if (!in)
    throw std::runtime_error("cannot read " + a.input);
  const IngestResult r = ingest_jsonl(in);
  for (const auto &d: r.rejected)
    std::cerr << a.input << ":" << d.line << ": " << d.message << "\n";
  if (r.molecules.empty())
    throw std::runtime_error(r.rejected.empty() ? "no records"
                                                : "all records invalid");
  std::vector<MoleculeGraph> graphs;
  for (const auto &rec: r.molecules)
    graphs.push_back(rec.graph);
  write_dataset(a.output, graphs);
  std::cout << "ingested " << graphs.size() << " molecules, rejected "
            << r.rejected.size() << "\n";
  m.inputs = { a.input };
  m.outputs = { a.output };
  m.extra = { { "ingested", graphs.size() }, { "rejected", r.rejected.size() } };
  return 0;
}

struct PretrainArgs {
  Common common;
  std::string data, out, log;
  std::optional<double> lambda1, lambda2, lr;
  std::optional<int> epochs, batch_size;
};

int cmd_pretrain(const PretrainArgs &a, Manifest &m) {
  RunConfig rc = resolve_config(a.common);
  if (a.lambda1)
    rc.train.loss.lambda1 = *a.lambda1;
  if (a.lambda2)
    rc.train.loss.lambda2 = *a.lambda2;
  if (a.lr)
    rc.train.learning_rate = *a.lr;
  if (a.epochs)
    rc.train.epochs = *a.epochs;
  if (a.batch_size)
    rc.train.batch_size = *a.batch_size;
  rc.train.checkpoint_path = a.out;
  check_usage([&] {
    validate(rc.model);
    validate(rc.train);
  });
  if (!fs::is_regular_file(a.data))
    throw UsageError("dataset not found: " + a.data);
  const auto dataset = load_dataset(a.data);
  const TrainResult r = train(dataset, rc.model, rc.train, [](const EpochStats &s) {
    std::fprintf(stderr, "epoch %d total %.6f sc %.6f co %.6f\n", s.epoch,
                 s.total, s.l_sc, s.l_co);
  });
  Checkpoint ckpt { r.params, r.optimizer, snapshot(rc) };
  ckpt.metadata["build"] = MOLJAE_BUILD_ID;
  save_checkpoint(a.out, ckpt);
  const fs::path log = a.log.empty() ? fs::path(a.out + ".loss.csv") : fs::path(a.log);
  write_atomic(log, loss_log(r.history));
  m.config = snapshot(rc);
  m.seed = rc.train.seed;
  m.inputs = { a.data };
  m.outputs = { a.out, log };
  if (!r.history.empty())
    m.extra = { { "first_total", r.history.front().total },
                { "final_total", r.history.back().total } };
  return 0;
}

struct SampleArgs {
  Common common;
  std::string checkpoint, out;
  int count = 10;
  std::optional<int> n_atoms, steps;
  std::optional<double> lambda;
};

int cmd_sample(const SampleArgs &a, Manifest &m) {
  RunConfig rc = resolve_config(a.common);
  if (a.n_atoms)
    rc.sample.n_atoms = *a.n_atoms;
  if (a.lambda)
    rc.sample.lambda = *a.lambda;
  if (a.steps)
    rc.sample.steps = *a.steps;
  rc.sample.threads = thread_count(a.common);
  check_usage([&] { validate(rc.sample); });
  const Checkpoint ckpt = load_model(a.checkpoint, rc);
  const auto graphs = generate(ckpt.params, rc.model, rc.sample, a.count);
  std::ostringstream out;
  for (const auto &g: graphs)
    out << serialize_molecule(g) << "\n";
  write_atomic(a.out, out.str());
  std::cout << "wrote " << graphs.size() << " samples to " << a.out << "\n";
  m.config = snapshot(rc);
  m.seed = rc.sample.seed;
  m.inputs = { a.checkpoint };
  m.outputs = { a.out };
  return 0;
}

std::vector<MoleculeGraph> read_samples(const fs::path &path) {
  std::ifstream in(path);
  if (!in)
    throw std::runtime_error("cannot read " + path.string());
  std::vector<MoleculeGraph> out;
  std::string line;
  while (std::getline(in, line))
    if (line.find_first_not_of(" \t\r") != std::string::npos)
      out.push_back(parse_molecule(line));
  return out;
}

struct EvalArgs {
  Common common;
  std::string checkpoint, samples, reference, data, report;
  bool probe = false;
  int probe_seeds = 5;
};

int run_probe(const EvalArgs &a, RunConfig &rc, Manifest &m, std::string &text,
              std::string &js) {
  const Checkpoint ckpt = load_model(a.checkpoint, rc);
  const auto graphs = load_dataset(a.data);
  std::vector<std::uint64_t> seeds;
  for (int k = 0; k < a.probe_seeds; ++k)
    seeds.push_back(rc.train.seed + static_cast<std::uint64_t>(k));
  const ModelParams random = init_params(rc.model, rc.train.seed + 0x5eed);
  const ProbeResult r = linear_probe(ckpt.params, random, rc.model, graphs, seeds);
  text = to_text(r);
  js = to_json(r);
  m.inputs = { a.checkpoint, a.data };
  return 0;
}

int cmd_eval(const EvalArgs &a, Manifest &m) {
  RunConfig rc = resolve_config(a.common);
  std::string text, js;
  if (a.probe) {
    if (a.checkpoint.empty() || a.data.empty())
      throw UsageError("probe needs --checkpoint and --data");
    run_probe(a, rc, m, text, js);
  } else if (!a.samples.empty()) {
    if (a.reference.empty())
      throw UsageError("--samples needs --reference");
    const auto samples = read_samples(a.samples);
    const auto reference = load_dataset(a.reference);
    const GenerationMetrics g = generation_metrics(samples, reference);
    text = to_text(g);
    js = to_json(g);
    m.inputs = { a.samples, a.reference };
  } else if (!a.checkpoint.empty()) {
    if (a.data.empty())
      throw UsageError("symmetry evaluation needs --data with probe molecules");
    const Checkpoint ckpt = load_model(a.checkpoint, rc);
    auto probes = load_dataset(a.data);
    if (probes.size() > 10)
      probes.resize(10);
    SymmetryOptions opt;
    opt.seed = rc.train.seed;
    const SymmetryReport r = symmetry_report(ckpt.params, rc.model, probes, opt);
    text = to_text(r);
    js = to_json(r);
    m.inputs = { a.checkpoint, a.data };
  } else {
    throw UsageError("eval needs --checkpoint or --samples");
  }
  std::cout << text;
  if (!text.empty() && text.back() != '\n')
    std::cout << "\n";
  if (!a.report.empty()) {
    write_atomic(a.report, js + "\n");
    m.outputs = { a.report };
  }
  m.config = snapshot(rc);
  m.seed = rc.train.seed;
  m.extra = json::parse(js);
  return 0;
}

int cmd_selftest(const Common &c, Manifest &m) {
  SelfTestOptions opt;
  opt.seed = c.seed;
  bool ok = true;
  json results = json::object();
  for (const auto &r: run_selftest(opt)) {
    std::cout << format_check(r) << "\n";
    ok = ok && r.passed();
    results[r.name] = { { "value", r.value }, { "passed", r.passed() } };
  }
  std::cout << (ok ? "selftest passed" : "selftest FAILED") << "\n";
  m.seed = c.seed;
  m.extra = results;
  return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char **argv) {
  CLI::App app { "MolJAE joint 2D/3D molecular pretraining" };
  app.require_subcommand(1);

  IngestArgs ingest;
  auto *ci = app.add_subcommand("ingest", "validate and center a JSONL dataset");
  ci->add_option("input", ingest.input, "input JSONL")->required();
  ci->add_option("output", ingest.output, "output dataset")->required();
  ci->add_option("--manifest", ingest.common.manifest, "run manifest path");

  PretrainArgs pre;
  auto *cp = app.add_subcommand("pretrain", "train a model and write a checkpoint");
  add_common(cp, pre.common);
  cp->add_option("--data", pre.data, "dataset JSONL")->required();
  cp->add_option("--out", pre.out, "checkpoint path")->required();
  cp->add_option("--log", pre.log, "loss log CSV (default: <out>.loss.csv)");
  cp->add_option("--lambda1", pre.lambda1, "score-matching weight");
  cp->add_option("--lambda2", pre.lambda2, "contrastive weight");
  cp->add_option("--epochs", pre.epochs);
  cp->add_option("--lr", pre.lr);
  cp->add_option("--batch-size", pre.batch_size);

  SampleArgs sam;
  auto *cs = app.add_subcommand("sample", "generate molecules from a checkpoint");
  add_common(cs, sam.common);
  cs->add_option("--checkpoint", sam.checkpoint)->required();
  cs->add_option("--out", sam.out, "output JSONL")->required();
  cs->add_option("-n,--count", sam.count, "number of samples")
      ->check(CLI::NonNegativeNumber);
  cs->add_option("--n-atoms", sam.n_atoms);
  cs->add_option("--lambda", sam.lambda, "0: probability-flow ODE, 1: reverse SDE");
  cs->add_option("--steps", sam.steps);

  EvalArgs ev;
  auto *ce = app.add_subcommand("eval", "symmetry report, generation metrics or probe");
  add_common(ce, ev.common);
  ce->add_option("--checkpoint", ev.checkpoint);
  ce->add_option("--samples", ev.samples, "generated JSONL");
  ce->add_option("--reference", ev.reference, "reference dataset");
  ce->add_option("--data", ev.data, "probe molecules");
  ce->add_flag("--probe", ev.probe, "pretrained vs random-init linear probe");
  ce->add_option("--probe-seeds", ev.probe_seeds)->check(CLI::PositiveNumber);
  ce->add_option("--report", ev.report, "JSON report path");

  EvalArgs pr;
  auto *cr = app.add_subcommand("probe", "pretrained vs random-init linear probe");
  add_common(cr, pr.common);
  cr->add_option("--checkpoint", pr.checkpoint)->required();
  cr->add_option("--data", pr.data)->required();
  cr->add_option("--probe-seeds", pr.probe_seeds)->check(CLI::PositiveNumber);
  cr->add_option("--report", pr.report, "JSON report path");

  Common st;
  auto *ct = app.add_subcommand("selftest", "property-test battery");
  add_common(ct, st);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp &e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp &e) {
    return app.exit(e);
  } catch (const CLI::ParseError &e) {
    app.exit(e);
    return 2;
  }

  const auto start = std::chrono::steady_clock::now();
  Manifest m;
  m.argv.assign(argv, argv + argc);
  fs::path mpath;
  int code = 0;
  try {
    if (ci->parsed()) {
      m.command = "ingest";
      mpath = manifest_path(ingest.common, ingest.output);
      code = cmd_ingest(ingest, m);
    } else if (cp->parsed()) {
      m.command = "pretrain";
      mpath = manifest_path(pre.common, pre.out);
      code = cmd_pretrain(pre, m);
    } else if (cs->parsed()) {
      m.command = "sample";
      mpath = manifest_path(sam.common, sam.out);
      code = cmd_sample(sam, m);
    } else if (ce->parsed() || cr->parsed()) {
      EvalArgs &a = ce->parsed() ? ev : pr;
      if (cr->parsed())
        a.probe = true;
      m.command = ce->parsed() ? "eval" : "probe";
      mpath = a.common.manifest.empty() && !a.report.empty()
                  ? manifest_path(a.common, a.report)
                  : fs::path(a.common.manifest);
      code = cmd_eval(a, m);
    } else if (ct->parsed()) {
      m.command = "selftest";
      mpath = st.manifest;
      code = cmd_selftest(st, m);
    }
  } catch (const UsageError &e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception &e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (!mpath.empty()) {
    try {
      write_manifest(mpath, m, seconds);
    } catch (const std::exception &e) {
      std::cerr << "error: manifest: " << e.what() << "\n";
      return 1;
    }
  }
  return code;
}
