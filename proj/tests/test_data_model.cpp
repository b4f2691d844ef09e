#include "stane/io.hpp"
#include "stane/types.hpp"
#include "test_util.hpp"

#include <gtest/gtest.h>

#include <sstream>

using namespace stane;
using stane::testing::TempDir;

namespace {

AdjacencyTensor parse(const std::string& text, std::size_t* dups = nullptr) {
  std::istringstream in(text);
  return read_tensor(in, "<test>", dups);
}

}  // namespace

TEST(LoadTensor, HeaderAndTwoEdges) {
  const AdjacencyTensor a = parse("3 2\n1 1 2\n2 2 3\n");
  ASSERT_EQ(a.n_nodes(), 3u);
  ASSERT_EQ(a.n_times(), 2u);
  Matrix a1 = Matrix::Zero(3, 3), a2 = Matrix::Zero(3, 3);
  a1(0, 1) = a1(1, 0) = 1.0;
  a2(1, 2) = a2(2, 1) = 1.0;
  EXPECT_EQ(a.slice(0), a1);
  EXPECT_EQ(a.slice(1), a2);
}

TEST(LoadTensor, EmptyEdgeListGivesZeroSlice) {
  const AdjacencyTensor a = parse("4 1\n");
  ASSERT_EQ(a.n_nodes(), 4u);
  ASSERT_EQ(a.n_times(), 1u);
  EXPECT_EQ(a.slice(0), Matrix::Zero(4, 4));
}

TEST(LoadTensor, NodeIndexBeyondNIsRejected) {
  try {
    parse("4 1\n1 2 5\n");
    FAIL() << "expected FormatError";
  } catch (const FormatError& e) {
    EXPECT_NE(std::string(e.what()).find("node index exceeds N"), std::string::npos);
  }
}

TEST(LoadTensor, OtherValidationErrors) {
  EXPECT_THROW(parse("4\n"), FormatError);            // malformed header
  EXPECT_THROW(parse("4 1\n2 1 2\n"), FormatError);   // t out of range
  EXPECT_THROW(parse("4 1\n1 2 2\n"), FormatError);   // self-loop
  EXPECT_THROW(parse("4 1\n1 2\n"), FormatError);     // wrong arity
  EXPECT_THROW(parse("4 1\n1 a 2\n"), FormatError);   // non-integer
  EXPECT_THROW(parse(""), FormatError);               // missing header
}

TEST(LoadTensor, DuplicatesAndDirectionAreMerged) {
  std::size_t dups = 0;
  const AdjacencyTensor a = parse("3 1\n1 1 2\n1 2 1\n1 1 2\n1 2 3\n", &dups);
  EXPECT_EQ(dups, 2u);
  EXPECT_EQ(a.edge_count(), 2u);
  EXPECT_EQ(a.slice(0)(0, 1), 1.0);
  EXPECT_EQ(a.slice(0)(1, 0), 1.0);
}

TEST(LoadTensor, AlwaysSymmetricZeroDiagonalBinary) {
  // shuffled, reversed edge orders
  const AdjacencyTensor a = parse("5 2\n2 5 1\n1 3 2\n2 1 5\n1 4 1\n1 2 3 # comment\n\n2 3 4\n");
  for (std::size_t t = 0; t < a.n_times(); ++t) {
    const Matrix& s = a.slice(t);
    EXPECT_EQ(s, s.transpose());
    EXPECT_EQ(s.diagonal(), Vector::Zero(5));
    EXPECT_TRUE((s.array() == 0.0 || s.array() == 1.0).all());
  }
  EXPECT_EQ(a.edge_count(), 4u);
}

TEST(LoadTensor, FileRoundTripIsByteStable) {
  TempDir dir("tensor");
  const AdjacencyTensor a = stane::testing::random_tensor(12, 3, 0.3, 5);
  save_tensor(a, dir.file("a.dnet"));
  const AdjacencyTensor b = load_tensor(dir.file("a.dnet"));
  EXPECT_EQ(a, b);
  save_tensor(b, dir.file("b.dnet"));
  EXPECT_EQ(stane::testing::read_file(dir.file("a.dnet")), stane::testing::read_file(dir.file("b.dnet")));
  EXPECT_THROW(load_tensor(dir.file("missing.dnet")), IoError);
}

TEST(AdjacencyTensorType, ConstructorValidates) {
  Matrix m = Matrix::Zero(3, 3);
  m(0, 1) = 1.0;  // asymmetric
  EXPECT_THROW(AdjacencyTensor(3, {m}), FormatError);
  m(1, 0) = 1.0;
  m(2, 2) = 1.0;  // self-loop
  EXPECT_THROW(AdjacencyTensor(3, {m}), FormatError);
  m(2, 2) = 0.0;
  m(0, 1) = m(1, 0) = 0.5;  // non-binary
  EXPECT_THROW(AdjacencyTensor(3, {m}), FormatError);
  EXPECT_THROW(AdjacencyTensor(3, std::vector<Matrix>{}), FormatError);
}

TEST(AdjacencyTensorType, WeightsExcludeDiagonalAndMaskedPairs) {
  const AdjacencyTensor a = AdjacencyTensor::zeros(3, 1);
  EXPECT_EQ(a.weight(0), Matrix::Ones(3, 3) - Matrix::Identity(3, 3));
  Matrix mask = Matrix::Ones(3, 3);
  mask(0, 2) = mask(2, 0) = 0.0;
  const AdjacencyTensor b = a.with_mask({mask});
  EXPECT_EQ(b.weight(0)(0, 2), 0.0);
  EXPECT_EQ(b.weight(0)(1, 1), 0.0);
  EXPECT_EQ(b.weight(0)(0, 1), 1.0);
  EXPECT_FALSE(b.observed(0, 0, 2));
  EXPECT_TRUE(b.observed(0, 0, 1));
  Matrix asym = Matrix::Ones(3, 3);
  asym(0, 1) = 0.0;
  EXPECT_THROW(a.with_mask({asym}), FormatError);
}

TEST(Params, RoundTripIsBitwiseExact) {
  TempDir dir("params");
  ModelParams p = stane::testing::random_params(7, 4, 2, 3, 2, 11);
  p.z(0, 0) = 0.1 + 0.2;  // not representable in short decimal
  p.v[1](2) = 1e-300;
  p.u[1](3, 1) = -5.0e-324;  // denormal
  save_params(p, dir.file("p.json"));
  const ModelParams q = load_params(dir.file("p.json"));
  EXPECT_TRUE(p == q);
  for (Eigen::Index i = 0; i < p.z.size(); ++i) EXPECT_EQ(p.z.data()[i], q.z.data()[i]);
}

TEST(Params, PerTimeFileOmitsLabels) {
  ModelParams p = stane::testing::random_params(5, 3, 1, 2, 3, 2);
  p.groups = GroupLabels::identity(3);
  const auto j = params_to_json(p, true);
  EXPECT_FALSE(j.contains("labels"));
  const ModelParams q = params_from_json(j);
  EXPECT_EQ(q.groups, GroupLabels::identity(3));
}

TEST(Params, RdMismatchBetweenUAndVIsRejected) {
  ModelParams p = stane::testing::random_params(5, 3, 1, 2, 2, 3);
  auto j = params_to_json(p);
  j["v"][0] = nlohmann::json::array({1.0, 2.0, 3.0});
  EXPECT_THROW(params_from_json(j), FormatError);
}

TEST(Params, ZeroLabelIsRejected) {
  ModelParams p = stane::testing::random_params(5, 3, 1, 2, 2, 4);
  auto j = params_to_json(p);
  j["labels"][1] = 0;
  EXPECT_THROW(params_from_json(j), FormatError);
}

TEST(Params, SchemaVersionMismatchIsRejected) {
  ModelParams p = stane::testing::random_params(5, 3, 1, 2, 2, 5);
  auto j = params_to_json(p);
  j["schema_version"] = kParamsSchemaVersion + 1;
  EXPECT_THROW(params_from_json(j), FormatError);
  j = params_to_json(p);
  j.erase("z");
  EXPECT_THROW(params_from_json(j), FormatError);
}

TEST(Params, ValidateCatchesShapeErrors) {
  ModelParams p = stane::testing::random_params(5, 3, 1, 2, 2, 6);
  EXPECT_NO_THROW(p.validate());
  ModelParams q = p;
  q.u[1] = Matrix::Zero(4, 2);
  EXPECT_THROW(q.validate(), FormatError);
  q = p;
  q.v[0](0) = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(q.validate(), FormatError);
  EXPECT_THROW(GroupLabels({1, 3}, 2), ConfigError);
}

TEST(HoldoutFile, PairsRoundTrip) {
  TempDir dir("mask");
  std::vector<std::vector<std::pair<std::size_t, std::size_t>>> pairs = {{{0, 1}, {2, 3}}, {{1, 4}}};
  save_holdout_pairs(pairs, 5, dir.file("m.dnet"));
  EXPECT_EQ(load_holdout_pairs(dir.file("m.dnet"), 5, 2), pairs);
  EXPECT_THROW(load_holdout_pairs(dir.file("m.dnet"), 6, 2), FormatError);
  const auto mask = mask_from_pairs(5, pairs);
  EXPECT_EQ(mask[0](2, 3), 0.0);
  EXPECT_EQ(mask[0](3, 2), 0.0);
  EXPECT_EQ(mask[1](1, 4), 0.0);
  EXPECT_EQ(mask[1](0, 1), 1.0);
}

TEST(NodeNames, SidecarMap) {
  TempDir dir("names");
  stane::testing::write_file(dir.file("names.txt"), "1 Alpha\n3 Gamma Region\n");
  const auto names = load_node_names(dir.file("names.txt"), 3);
  EXPECT_EQ(names[0], "Alpha");
  EXPECT_EQ(names[1], "");
  EXPECT_EQ(names[2], "Gamma Region");
  stane::testing::write_file(dir.file("bad.txt"), "4 Delta\n");
  EXPECT_THROW(load_node_names(dir.file("bad.txt"), 3), FormatError);
}
