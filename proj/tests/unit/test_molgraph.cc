//
// Project MolJAE - Copyright 2026 The MolJAE Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "moljae/molgraph.h"

using namespace moljae;

namespace {

const char *kWater =
    R"({"atoms":[{"el":"O","q":0,"xyz":[0,0,0.1]},{"el":"H","q":0,"xyz":[0.76,0,-0.5]},)"
    R"({"el":"H","q":0,"xyz":[-0.76,0,-0.5]}],"bonds":[[0,1,1],[0,2,1]]})";

ParseError::Kind parse_kind(const std::string &record) {
  try {
    parse_molecule(record);
  } catch (const ParseError &e) {
    return e.kind();
  }
  ADD_FAILURE() << "no error for " << record;
  return ParseError::Kind::kMalformedJson;
}

}  // namespace

TEST(Molgraph, ParsesAndCenters) {
  MoleculeGraph g = parse_molecule(kWater);
  ASSERT_EQ(g.size(), 3);
  EXPECT_EQ(kElementSymbols[g.atom_types[0]], "O");
  EXPECT_EQ(g.bonds(0, 1), 1);
  EXPECT_EQ(g.bonds(1, 0), 1);
  EXPECT_EQ(g.bonds(1, 2), 0);
  EXPECT_LT(g.positions.colwise().mean().norm(), 1e-12);
}

TEST(Molgraph, SerializeRoundTripIsExact) {
  MoleculeGraph g = parse_molecule(kWater);
  const std::string once = serialize_molecule(g);
  EXPECT_EQ(serialize_molecule(parse_molecule(once)), once);
}

TEST(Molgraph, RejectsBadRecords) {
  using K = ParseError::Kind;
  EXPECT_EQ(parse_kind("{not json"), K::kMalformedJson);
  EXPECT_EQ(parse_kind(R"({"atoms":[{"el":"Xe","q":0,"xyz":[0,0,0]}],"bonds":[]})"),
            K::kUnknownElement);
  EXPECT_EQ(parse_kind(R"({"atoms":[],"bonds":[]})"), K::kEmptyMolecule);
  EXPECT_EQ(parse_kind(R"({"atoms":[{"el":"C","q":0,"xyz":[0,0,0]}],"bonds":[[0,3,1]]})"),
            K::kBondIndexOutOfRange);
  EXPECT_EQ(parse_kind(R"({"atoms":[{"el":"C","q":0,"xyz":[0,0,0]},{"el":"C","q":0,"xyz":[1,0,0]}],"bonds":[[0,1,7]]})"),
            K::kInvalidBondOrder);
  EXPECT_EQ(parse_kind(R"({"atoms":[{"el":"C","q":3,"xyz":[0,0,0]}],"bonds":[]})"),
            K::kInvalidCharge);
}

TEST(Molgraph, DenseEncodingIsOneHotAndSymmetric) {
  const DenseTensors x = to_dense(parse_molecule(kWater));
  EXPECT_EQ(x.H.rows(), 3);
  EXPECT_EQ(x.H.cols(), kAtomFeatureDim);
  for (int i = 0; i < 3; ++i)
    EXPECT_DOUBLE_EQ(x.H.row(i).head(kNumElements).sum(), 1.0);
  EXPECT_EQ(x.E.rows(), 9);
  EXPECT_DOUBLE_EQ(x.edge(0, 1)(1), 1.0);
  EXPECT_DOUBLE_EQ(x.edge(1, 0)(1), 1.0);
  EXPECT_DOUBLE_EQ(x.edge(1, 2)(0), 1.0);
  EXPECT_DOUBLE_EQ(x.edge(0, 0).sum(), 0.0);
}

TEST(Molgraph, PermuteRelabelsAtoms) {
  const MoleculeGraph g = parse_molecule(kWater);
  const std::vector<int> perm { 2, 0, 1 };
  const MoleculeGraph p = permute(g, perm);
  EXPECT_EQ(p.atom_types[1], g.atom_types[0]);
  EXPECT_EQ(p.bonds(1, 0), g.bonds(0, 2));
  const DenseTensors dp = permute(to_dense(g), perm);
  EXPECT_TRUE(dp.E.isApprox(to_dense(p).E));
}

TEST(Molgraph, ValenceOfWaterIsSatisfied) {
  MoleculeGraph g = parse_molecule(kWater);
  ValenceReport r = validate_valence(g);
  EXPECT_TRUE(r.stable);
  EXPECT_EQ(r.stable_atoms, 3);
  g.bonds(1, 2) = g.bonds(2, 1) = 1;
  r = validate_valence(g);
  EXPECT_FALSE(r.stable);
  EXPECT_FALSE(r.diagnostics.empty());
}

TEST(Molgraph, IngestCollectsDiagnosticsWithLineNumbers) {
  std::stringstream in;
  in << kWater << "\n" << "garbage\n\n" << kWater << "\n";
  const IngestResult r = ingest_jsonl(in);
  EXPECT_EQ(r.molecules.size(), 2u);
  ASSERT_EQ(r.rejected.size(), 1u);
  EXPECT_EQ(r.rejected[0].line, 2);
}

TEST(Molgraph, DatasetWriteIsIdempotent) {
  const auto dir = std::filesystem::temp_directory_path();
  const auto a = dir / "moljae_ds_a.jsonl", b = dir / "moljae_ds_b.jsonl";
  const auto graphs = load_dataset(MOLJAE_DATA_DIR "/toy20.jsonl");
  ASSERT_EQ(graphs.size(), 20u);
  write_dataset(a, graphs);
  write_dataset(b, load_dataset(a));
  std::ifstream fa(a), fb(b);
  std::stringstream sa, sb;
  sa << fa.rdbuf();
  sb << fb.rdbuf();
  EXPECT_EQ(sa.str(), sb.str());
}

TEST(Molgraph, ToyCorpusIsChemicallyValid) {
  for (const auto &g: load_dataset(MOLJAE_DATA_DIR "/toy20.jsonl"))
    EXPECT_TRUE(validate_valence(g).stable);
}
