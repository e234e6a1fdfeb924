//
// Project MolJAE - Copyright 2026 The MolJAE Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "moljae/molgraph.h"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <sstream>
#include <utility>

#include <json.hpp>

namespace moljae {
namespace {

using Kind = ParseError::Kind;
using nlohmann::json;

[[noreturn]] void fail(Kind kind, const std::string &msg) {
  throw ParseError(kind, msg);
}

std::string format_double(double v) {
  char buf[32];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, end);
}

// Allowed bond-order sums per (element, charge).
const std::map<std::pair<int, int>, std::vector<double>> &valence_table() {
  static const std::map<std::pair<int, int>, std::vector<double>> table {
    {{ 0, 0 }, { 1 }},
    {{ 0, 1 }, { 0 }},
    {{ 0, -1 }, { 0 }},
    {{ 1, 0 }, { 4 }},
    {{ 1, 1 }, { 3 }},
    {{ 1, -1 }, { 3 }},
    {{ 2, 0 }, { 3 }},
    {{ 2, 1 }, { 4 }},
    {{ 2, -1 }, { 2 }},
    {{ 3, 0 }, { 2 }},
    {{ 3, 1 }, { 3 }},
    {{ 3, -1 }, { 1 }},
    {{ 4, 0 }, { 1 }},
    {{ 4, 1 }, { 2 }},
    {{ 4, -1 }, { 0 }},
  };
  return table;
}

double bond_order(int category) {
  return category == kAromaticBond ? 1.5 : static_cast<double>(category);
}

}  // namespace

int element_index(std::string_view symbol) {
  for (int i = 0; i < kNumElements; ++i)
    if (kElementSymbols[i] == symbol)
      return i;
  return -1;
}

Eigen::MatrixX3d centered(const Eigen::MatrixX3d &positions) {
  if (positions.rows() == 0)
    return positions;
  Eigen::RowVector3d com = positions.colwise().mean();
  return positions.rowwise() - com;
}

MoleculeGraph parse_molecule(std::string_view record) {
  json doc;
  try {
    doc = json::parse(record.begin(), record.end());
  } catch (const json::exception &e) {
    fail(Kind::kMalformedJson, std::string("malformed JSON: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("atoms") || !doc["atoms"].is_array())
    fail(Kind::kMalformedJson, "malformed JSON: missing \"atoms\" array");

  const json &atoms = doc["atoms"];
  const int n = static_cast<int>(atoms.size());
  if (n == 0)
    fail(Kind::kEmptyMolecule, "molecule has no atoms");
  if (n > kMaxAtoms)
    fail(Kind::kTooManyAtoms, "molecule has " + std::to_string(n)
                                  + " atoms; limit is "
                                  + std::to_string(kMaxAtoms));

  MoleculeGraph g;
  g.atom_types.resize(n);
  g.charges.resize(n);
  g.positions.resize(n, 3);
  g.bonds = Eigen::MatrixXi::Zero(n, n);

  for (int i = 0; i < n; ++i) {
    const json &a = atoms[i];
    if (!a.is_object() || !a.contains("el") || !a["el"].is_string())
      fail(Kind::kMalformedJson,
           "malformed JSON: atom " + std::to_string(i) + " lacks \"el\"");
    const auto el = a["el"].get<std::string>();
    const int type = element_index(el);
    if (type < 0)
      fail(Kind::kUnknownElement,
           "unknown element \"" + el + "\" at atom " + std::to_string(i));
    g.atom_types[i] = type;

    int q = 0;
    if (a.contains("q")) {
      if (!a["q"].is_number_integer())
        fail(Kind::kMalformedJson,
             "malformed JSON: charge of atom " + std::to_string(i));
      q = a["q"].get<int>();
    }
    if (q < -1 || q > 1)
      fail(Kind::kInvalidCharge, "charge " + std::to_string(q) + " at atom "
                                     + std::to_string(i)
                                     + " outside {-1, 0, 1}");
    g.charges[i] = q;

    if (!a.contains("xyz") || !a["xyz"].is_array() || a["xyz"].size() != 3)
      fail(Kind::kMalformedJson,
           "malformed JSON: atom " + std::to_string(i) + " needs \"xyz\"[3]");
    for (int k = 0; k < 3; ++k) {
      if (!a["xyz"][k].is_number())
        fail(Kind::kMalformedJson,
             "malformed JSON: coordinate of atom " + std::to_string(i));
      double v = a["xyz"][k].get<double>();
      if (!std::isfinite(v))
        fail(Kind::kInvalidPosition,
             "non-finite coordinate at atom " + std::to_string(i));
      g.positions(i, k) = v;
    }
  }

  if (doc.contains("bonds")) {
    if (!doc["bonds"].is_array())
      fail(Kind::kMalformedJson, "malformed JSON: \"bonds\" is not an array");
    for (const json &b: doc["bonds"]) {
      if (!b.is_array() || b.size() != 3 || !b[0].is_number_integer()
          || !b[1].is_number_integer() || !b[2].is_number_integer())
        fail(Kind::kMalformedJson,
             "malformed JSON: bond entries must be [i, j, order]");
      const long i = b[0].get<long>(), j = b[1].get<long>();
      const long order = b[2].get<long>();
      if (i < 0 || j < 0 || i >= n || j >= n)
        fail(Kind::kBondIndexOutOfRange,
             "bond (" + std::to_string(i) + ", " + std::to_string(j)
                 + ") out of range for " + std::to_string(n) + " atoms");
      if (i == j)
        fail(Kind::kAsymmetricBonds,
             "self bond on atom " + std::to_string(i));
      if (order < 1 || order > 4)
        fail(Kind::kInvalidBondOrder,
             "bond order " + std::to_string(order) + " outside 1..4");
      int &ij = g.bonds(i, j);
      int &ji = g.bonds(j, i);
      if ((ij != 0 && ij != order) || (ji != 0 && ji != order))
        fail(Kind::kAsymmetricBonds,
             "conflicting orders for bond (" + std::to_string(i) + ", "
                 + std::to_string(j) + ")");
      ij = ji = static_cast<int>(order);
    }
  }

  Eigen::RowVector3d com = g.positions.colwise().mean();
  if (com.norm() > 1e-9)
    g.positions.rowwise() -= com;
  return g;
}

std::string serialize_molecule(const MoleculeGraph &g) {
  std::ostringstream os;
  os << "{\"atoms\":[";
  for (int i = 0; i < g.size(); ++i) {
    os << (i ? "," : "") << "{\"el\":\"" << kElementSymbols[g.atom_types[i]]
       << "\",\"q\":" << g.charges[i] << ",\"xyz\":["
       << format_double(g.positions(i, 0)) << ','
       << format_double(g.positions(i, 1)) << ','
       << format_double(g.positions(i, 2)) << "]}";
  }
  os << "],\"bonds\":[";
  bool first = true;
  for (int i = 0; i < g.size(); ++i)
    for (int j = i + 1; j < g.size(); ++j)
      if (g.bonds(i, j) != 0) {
        os << (first ? "" : ",") << '[' << i << ',' << j << ','
           << g.bonds(i, j) << ']';
        first = false;
      }
  os << "]}";
  return os.str();
}

void check_graph(const MoleculeGraph &g) {
  const int n = g.size();
  if (static_cast<int>(g.charges.size()) != n || g.bonds.rows() != n
      || g.bonds.cols() != n || g.positions.rows() != n)
    throw std::invalid_argument("graph: inconsistent atom counts");
  if (n > kMaxAtoms)
    throw std::invalid_argument("graph: more than 64 atoms");
  for (int i = 0; i < n; ++i) {
    if (g.atom_types[i] < 0 || g.atom_types[i] >= kNumElements)
      throw std::invalid_argument("graph: atom type out of vocabulary");
    if (g.charges[i] < -1 || g.charges[i] > 1)
      throw std::invalid_argument("graph: charge out of range");
    if (g.bonds(i, i) != 0)
      throw std::invalid_argument("graph: nonzero bond diagonal");
    for (int j = 0; j < n; ++j) {
      if (g.bonds(i, j) != g.bonds(j, i))
        throw std::invalid_argument("graph: asymmetric bonds");
      if (g.bonds(i, j) < 0 || g.bonds(i, j) >= kNumBondTypes)
        throw std::invalid_argument("graph: bond category out of range");
    }
  }
  if (!g.positions.allFinite())
    throw std::invalid_argument("graph: non-finite positions");
}

DenseTensors to_dense(const MoleculeGraph &g) {
  const int n = g.size();
  DenseTensors t;
  t.H = Eigen::MatrixXd::Zero(n, kAtomFeatureDim);
  t.E = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n) * n, kNumBondTypes);
  t.P = g.positions;
  for (int i = 0; i < n; ++i) {
    t.H(i, g.atom_types[i]) = 1.0;
    t.H(i, kNumElements + g.charges[i] + 1) = 1.0;
    for (int j = 0; j < n; ++j)
      if (i != j)
        t.edge(i, j)(g.bonds(i, j)) = 1.0;
  }
  return t;
}

MoleculeGraph permute(const MoleculeGraph &g, std::span<const int> perm) {
  const int n = g.size();
  if (static_cast<int>(perm.size()) != n)
    throw std::invalid_argument("permute: permutation size mismatch");
  MoleculeGraph out;
  out.atom_types.resize(n);
  out.charges.resize(n);
  out.bonds.resize(n, n);
  out.positions.resize(n, 3);
  for (int i = 0; i < n; ++i) {
    out.atom_types[i] = g.atom_types[perm[i]];
    out.charges[i] = g.charges[perm[i]];
    out.positions.row(i) = g.positions.row(perm[i]);
    for (int j = 0; j < n; ++j)
      out.bonds(i, j) = g.bonds(perm[i], perm[j]);
  }
  return out;
}

DenseTensors permute(const DenseTensors &t, std::span<const int> perm) {
  const int n = t.size();
  if (static_cast<int>(perm.size()) != n)
    throw std::invalid_argument("permute: permutation size mismatch");
  DenseTensors out;
  out.H.resize(n, t.H.cols());
  out.E.resize(t.E.rows(), t.E.cols());
  out.P.resize(n, 3);
  for (int i = 0; i < n; ++i) {
    out.H.row(i) = t.H.row(perm[i]);
    out.P.row(i) = t.P.row(perm[i]);
    for (int j = 0; j < n; ++j)
      out.edge(i, j) = t.edge(perm[i], perm[j]);
  }
  return out;
}

ValenceReport validate_valence(const MoleculeGraph &g) {
  ValenceReport report;
  const auto &table = valence_table();
  for (int i = 0; i < g.size(); ++i) {
    double total = 0.0;
    for (int j = 0; j < g.size(); ++j)
      total += bond_order(g.bonds(i, j));
    auto it = table.find({ g.atom_types[i], g.charges[i] });
    bool ok = false;
    if (it != table.end())
      for (double v: it->second)
        ok = ok || std::abs(v - total) < 1e-9;
    if (ok) {
      ++report.stable_atoms;
      continue;
    }
    report.stable = false;
    std::ostringstream msg;
    msg << kElementSymbols[g.atom_types[i]] << " (charge " << g.charges[i]
        << ") has bond order sum " << total;
    report.diagnostics.push_back({ i, total, msg.str() });
  }
  return report;
}

IngestResult ingest_jsonl(std::istream &in) {
  IngestResult result;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos)
      continue;
    try {
      result.molecules.push_back({ lineno, parse_molecule(line) });
    } catch (const ParseError &e) {
      result.rejected.push_back({ lineno, e.what() });
    }
  }
  return result;
}

std::vector<MoleculeGraph> load_dataset(const std::filesystem::path &path) {
  std::ifstream in(path);
  if (!in)
    throw std::runtime_error("cannot open dataset " + path.string());
  IngestResult r = ingest_jsonl(in);
  if (!r.rejected.empty())
    throw std::runtime_error(path.string() + ":"
                             + std::to_string(r.rejected.front().line) + ": "
                             + r.rejected.front().message);
  std::vector<MoleculeGraph> out;
  out.reserve(r.molecules.size());
  for (auto &m: r.molecules)
    out.push_back(std::move(m.graph));
  return out;
}

void write_dataset(const std::filesystem::path &path,
                   std::span<const MoleculeGraph> graphs) {
  std::ofstream out(path);
  if (!out)
    throw std::runtime_error("cannot write " + path.string());
  for (const auto &g: graphs)
    out << serialize_molecule(g) << '\n';
}

}  // namespace moljae
