#include <gtest/gtest.h>

#include <cmath>

#include "ibia/ctf.hpp"
#include "ibia/error.hpp"

using namespace ibia;

namespace {

// Chain {0,1} - {1,2} - ... - {n-1,n}, ids 0..n-1.
CliqueTreeForest chain(int n) {
  CliqueTreeForest ctf(std::vector<int>(static_cast<std::size_t>(n + 1), 2));
  for (int i = 0; i < n; ++i) ctf.add_clique({i, i + 1});
  for (int i = 0; i + 1 < n; ++i) ctf.connect(i, i + 1);
  return ctf;
}

}  // namespace

TEST(Ctf, CliqueSizeIsLog2OfStates) {
  const std::vector<int> cards{2, 3, 4};
  EXPECT_DOUBLE_EQ(clique_size({0, 2}, cards), 3.0);
  EXPECT_NEAR(clique_size({0, 1, 2}, cards), std::log2(24.0), 1e-15);
  EXPECT_DOUBLE_EQ(clique_size({}, cards), 0.0);
  EXPECT_THROW(clique_size({5}, cards), InvalidArgument);
}

TEST(Ctf, ConnectSetsSepsetToIntersection) {
  CliqueTreeForest ctf = chain(3);
  EXPECT_EQ(ctf.sepset(1, 0).vars, (VarSet{1}));
  ctf.set_clique_vars(1, {1, 2, 3});
  EXPECT_EQ(ctf.sepset(1, 2).vars, (VarSet{2, 3}));
  EXPECT_EQ(ctf.trees().size(), 1u);
  ctf.disconnect(0, 1);
  EXPECT_EQ(ctf.trees(), (std::vector<std::vector<CliqueId>>{{0}, {1, 2}}));
  EXPECT_EQ(ctf.tree_of(2), (std::vector<CliqueId>{1, 2}));
}

TEST(Ctf, ValidChainPasses) {
  const ValidityReport r = validate_ctf(chain(4));
  EXPECT_TRUE(r.ok());
  EXPECT_TRUE(r.violations.empty());
}

TEST(Ctf, DetectsCycle) {
  CliqueTreeForest ctf(std::vector<int>(3, 2));
  ctf.add_clique({0, 1});
  ctf.add_clique({1, 2});
  ctf.add_clique({0, 2});
  ctf.connect(0, 1);
  ctf.connect(1, 2);
  ctf.connect(0, 2);
  const ValidityReport r = validate_ctf(ctf);
  EXPECT_FALSE(r.forest);
  EXPECT_FALSE(r.ok());
}

TEST(Ctf, DetectsNonMaximalCliqueWithinTree) {
  CliqueTreeForest ctf(std::vector<int>(3, 2));
  ctf.add_clique({0, 1, 2});
  ctf.add_clique({1, 2});
  ctf.connect(0, 1);
  EXPECT_FALSE(validate_ctf(ctf).maximal);

  // The same sets in different trees are fine.
  CliqueTreeForest apart(std::vector<int>(3, 2));
  apart.add_clique({0, 1, 2});
  apart.add_clique({1, 2});
  EXPECT_TRUE(validate_ctf(apart).maximal);
}

TEST(Ctf, DetectsRipViolation) {
  // {0,1} - {1,2} - {2,0}: variable 0 is in both ends but not the middle.
  CliqueTreeForest ctf(std::vector<int>(3, 2));
  ctf.add_clique({0, 1});
  ctf.add_clique({1, 2});
  ctf.add_clique({0, 2});
  ctf.connect(0, 1);
  ctf.connect(1, 2);
  const ValidityReport r = validate_ctf(ctf);
  EXPECT_FALSE(r.rip);
  EXPECT_TRUE(r.forest);
}

TEST(Ctf, DetectsInexactSepset) {
  CliqueTreeForest ctf = chain(2);
  ctf.sepset(0, 1).vars = {};
  EXPECT_FALSE(validate_ctf(ctf).sepsets_exact);
}

TEST(Ctf, DetectsUncoveredFactor) {
  CliqueTreeForest ctf = chain(2);
  const int f = ctf.add_factor(Factor::constant({0, 2}, {2, 2}));
  ctf.assign(f, 0);
  EXPECT_FALSE(validate_ctf(ctf).factor_coverage);
}

TEST(Msg, ChainKeepsOnlyTheConnectingPart) {
  const CliqueTreeForest ctf = chain(5);
  // Steiner tree of the cliques holding 1 and 3 is ids 0..3; the two ends
  // add nothing the inner cliques do not already cover.
  EXPECT_EQ(msg(ctf, {1, 3}), (std::vector<CliqueId>{1, 2}));
  EXPECT_EQ(msg(ctf, {0, 5}), (std::vector<CliqueId>{0, 1, 2, 3, 4}));
  EXPECT_EQ(msg(ctf, {2}).size(), 1u);
  EXPECT_THROW(msg(ctf, {9}), InvalidArgument);
}

TEST(Msg, SpansSeveralTrees) {
  CliqueTreeForest ctf(std::vector<int>(6, 2));
  ctf.add_clique({0, 1});
  ctf.add_clique({1, 2});
  ctf.add_clique({3, 4});
  ctf.add_clique({4, 5});
  ctf.connect(0, 1);
  ctf.connect(2, 3);
  EXPECT_EQ(msg(ctf, {0, 2, 5}), (std::vector<CliqueId>{0, 1, 3}));
}

TEST(Msg, StarPrunesRedundantLeaves) {
  // Centre {0,1,2} with leaves {0,3}, {1,4}, {2,5}.
  CliqueTreeForest ctf(std::vector<int>(6, 2));
  const CliqueId c = ctf.add_clique({0, 1, 2});
  const CliqueId a = ctf.add_clique({0, 3});
  const CliqueId b = ctf.add_clique({1, 4});
  const CliqueId d = ctf.add_clique({2, 5});
  ctf.connect(c, a);
  ctf.connect(c, b);
  ctf.connect(c, d);
  EXPECT_EQ(msg(ctf, {0, 1}), (std::vector<CliqueId>{c}));
  EXPECT_EQ(msg(ctf, {3, 1}), (std::vector<CliqueId>{c, a}));
}

TEST(Ctf, SubforestCopiesEdgesAndFactors) {
  CliqueTreeForest ctf = chain(4);
  const int f = ctf.add_factor(Factor::constant({1, 2}, {2, 2}, 0.5));
  ctf.assign(f, 1);
  const CliqueTreeForest sub = subforest(ctf, {1, 2});
  EXPECT_EQ(sub.num_cliques(), 2u);
  EXPECT_TRUE(sub.has_edge(1, 2));
  ASSERT_EQ(sub.clique(1).factors.size(), 1u);
  EXPECT_EQ(sub.factor(sub.clique(1).factors[0]).scope, (std::vector<VarId>{1, 2}));
  EXPECT_TRUE(validate_ctf(sub).ok());
}

TEST(Ctf, RemoveCliqueDropsEdges) {
  CliqueTreeForest ctf = chain(3);
  ctf.remove_clique(1);
  EXPECT_FALSE(ctf.has_clique(1));
  EXPECT_TRUE(ctf.neighbors(0).empty());
  EXPECT_EQ(ctf.trees().size(), 2u);
}

TEST(Ctf, DotMentionsEveryClique) {
  const std::string dot = to_dot(chain(2), {"a", "b", "c"});
  EXPECT_NE(dot.find("a"), std::string::npos);
  EXPECT_NE(dot.find("--"), std::string::npos);
}

TEST(Ctf, SmallValidityExamples) {
  // a = 0, b = 1, c = 2
  CliqueTreeForest ok(std::vector<int>(3, 2));
  ok.add_clique({0, 1});
  ok.add_clique({1, 2});
  ok.connect(0, 1);
  EXPECT_TRUE(validate_ctf(ok).ok());

  CliqueTreeForest sub(std::vector<int>(3, 2));
  sub.add_clique({0, 1});
  sub.add_clique({0, 1, 2});
  sub.connect(0, 1);
  const ValidityReport r = validate_ctf(sub);
  EXPECT_FALSE(r.maximal);
  EXPECT_TRUE(r.forest && r.rip && r.sepsets_exact);
}

TEST(Ctf, MixedCardinalityCliqueSize) {
  EXPECT_NEAR(clique_size({0, 1}, {2, 3}), 2.584962500721156, 1e-12);
  EXPECT_DOUBLE_EQ(clique_size({0, 1, 2}, {2, 2, 2}), 3.0);
}

TEST(Ctf, JointOfSmallTrees) {
  CliqueTreeForest one(std::vector<int>{2, 3});
  one.add_clique({0, 1});
  Factor b = Factor::constant({0, 1}, {2, 3});
  for (std::size_t i = 0; i < b.size(); ++i) b.log_values[i] = std::log(1.0 + static_cast<double>(i));
  one.clique(0).belief = b;
  const Factor j = joint_distribution(one, {0});
  EXPECT_EQ(j.log_values, b.log_values);

  CliqueTreeForest uni = chain(3);
  for (const auto& [id, c] : std::map<CliqueId, Clique>(uni.cliques()))
    uni.clique(id).belief = Factor::constant(c.vars, {2, 2}, std::log(4.0));
  for (const auto& [k, s] : std::map<EdgeKey, Sepset>(uni.sepsets()))
    uni.sepset(k.first, k.second).belief = Factor::constant(s.vars, {2}, std::log(8.0));
  const Factor u = joint_distribution(uni, {0, 1, 2});
  // Every entry is 4 * 4 * 4 / (8 * 8) = 1 over 2^4 assignments.
  for (double x : u.log_values) EXPECT_NEAR(x, 0.0, 1e-15);
  EXPECT_NEAR(log_norm_constant(u), std::log(16.0), 1e-12);
}
