//
// Project MolJAE - Copyright 2026 The MolJAE Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef MOLJAE_MOLGRAPH_H_
#define MOLJAE_MOLGRAPH_H_

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace moljae {

inline constexpr int kMaxAtoms = 64;
inline constexpr int kNumElements = 5;  // H, C, N, O, F
inline constexpr int kNumCharges = 3;   // -1, 0, +1
inline constexpr int kNumBondTypes = 5;  // none, single, double, triple, aromatic
inline constexpr int kAtomFeatureDim = kNumElements + kNumCharges;
inline constexpr int kAromaticBond = 4;

inline constexpr std::array<std::string_view, kNumElements> kElementSymbols {
  "H", "C", "N", "O", "F"
};

//! Element index for a symbol, or -1.
int element_index(std::string_view symbol);

struct MoleculeGraph {
  std::vector<int> atom_types;  // indices into kElementSymbols
  std::vector<int> charges;     // formal charge in {-1, 0, 1}
  Eigen::MatrixXi bonds;        // symmetric, zero diagonal, values 0..4
  Eigen::MatrixX3d positions;   // angstrom, zero center of mass

  int size() const { return static_cast<int>(atom_types.size()); }
};

//! Continuous relaxation of a graph. Rows of E are indexed by i * n + j and
//! hold a one-hot bond category for i != j; diagonal rows are zero.
struct DenseTensors {
  Eigen::MatrixXd H;  // n x kAtomFeatureDim: type one-hot | charge one-hot
  Eigen::MatrixXd E;  // (n * n) x kNumBondTypes
  Eigen::MatrixX3d P;

  int size() const { return static_cast<int>(H.rows()); }
  auto edge(int i, int j) { return E.row(static_cast<Eigen::Index>(i) * size() + j); }
  auto edge(int i, int j) const {
    return E.row(static_cast<Eigen::Index>(i) * size() + j);
  }
};

class ParseError: public std::runtime_error {
public:
  enum class Kind {
    kMalformedJson,
    kUnknownElement,
    kAsymmetricBonds,
    kBondIndexOutOfRange,
    kInvalidBondOrder,
    kInvalidCharge,
    kInvalidPosition,
    kTooManyAtoms,
    kEmptyMolecule,
  };

  ParseError(Kind kind, const std::string &what)
      : std::runtime_error(what), kind_(kind) { }

  Kind kind() const { return kind_; }

private:
  Kind kind_;
};

//! Parses one JSONL record:
//! {"atoms":[{"el":"O","q":0,"xyz":[x,y,z]},...],"bonds":[[i,j,order],...]}
//! Positions are shifted to zero center of mass unless already centered
//! within 1e-9, so re-ingesting a written record is bit-exact.
MoleculeGraph parse_molecule(std::string_view record);
//! Single-line JSON; coordinates are written with round-trip precision.
std::string serialize_molecule(const MoleculeGraph &graph);

//! Throws std::invalid_argument naming the violated invariant.
void check_graph(const MoleculeGraph &graph);

DenseTensors to_dense(const MoleculeGraph &graph);

//! new atom i = old atom perm[i].
MoleculeGraph permute(const MoleculeGraph &graph, std::span<const int> perm);
DenseTensors permute(const DenseTensors &tensors, std::span<const int> perm);

Eigen::MatrixX3d centered(const Eigen::MatrixX3d &positions);

struct AtomDiagnostic {
  int atom;
  double bond_order_sum;
  std::string message;
};

struct ValenceReport {
  bool stable = true;
  int stable_atoms = 0;
  std::vector<AtomDiagnostic> diagnostics;
};

//! Aromatic bonds count 1.5. Allowed valences come from a fixed
//! (element, charge) table.
ValenceReport validate_valence(const MoleculeGraph &graph);

struct IngestRecord {
  int line;  // 1-based
  MoleculeGraph graph;
};

struct IngestDiagnostic {
  int line;
  std::string message;
};

struct IngestResult {
  std::vector<IngestRecord> molecules;
  std::vector<IngestDiagnostic> rejected;
};

//! Parses every non-blank line; failures are collected, not thrown.
IngestResult ingest_jsonl(std::istream &in);
//! Loads a JSONL dataset, throwing on the first invalid record.
std::vector<MoleculeGraph> load_dataset(const std::filesystem::path &path);
void write_dataset(const std::filesystem::path &path,
                   std::span<const MoleculeGraph> graphs);

}  // namespace moljae

#endif  // MOLJAE_MOLGRAPH_H_
