#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "ibia/calibration.hpp"
#include "ibia/driver.hpp"
#include "ibia/error.hpp"
#include "ibia/random_model.hpp"
#include "oracle.hpp"

using namespace ibia;

namespace {

CliqueTreeForest built_forest(const Model& m) {
  auto [ctf, pending] = initial_forest(m.cards, m.factors);
  BuildOptions opt;
  opt.mcs_p = 64;
  build_ctf(ctf, pending, opt);
  return ctf;
}

std::vector<VarId> all_vars(const Model& m) {
  std::vector<VarId> v;
  for (int i = 0; i < m.num_vars(); ++i) v.push_back(i);
  return v;
}

void expect_marginal(const Factor& belief, const Model& m) {
  const auto want = oracle::marginal(m.factors, all_vars(m), m.cards, belief.scope);
  for (const auto& [key, w] : want) {
    oracle::Assignment a;
    for (std::size_t i = 0; i < key.size(); ++i) a[belief.scope[i]] = key[i];
    EXPECT_TRUE(oracle::rel_close(oracle::at(belief, a), w, 1e-10)) << oracle::at(belief, a) << " " << w;
  }
}

}  // namespace

TEST(Calibration, BeliefsAreBruteForceMarginals) {
  std::mt19937_64 rng(51);
  RandomModelSpec spec;
  spec.max_card = 3;
  spec.min_vars = 5;
  spec.max_vars = 9;
  for (int t = 0; t < 40; ++t) {
    const Model m = random_connected_model(rng, spec);
    CliqueTreeForest ctf = built_forest(m);
    calibrate(ctf);
    EXPECT_TRUE(ctf.calibrated);
    for (const auto& [id, c] : ctf.cliques()) expect_marginal(*c.belief, m);
    for (const auto& [k, s] : ctf.sepsets()) expect_marginal(*s.belief, m);
    const auto ncs = tree_log_ncs(ctf);
    ASSERT_EQ(ncs.size(), 1u);
    EXPECT_TRUE(oracle::rel_close(std::exp(ncs[0]), oracle::partition_function(m), 1e-10));
    EXPECT_TRUE(check_calibration(ctf).ok());
  }
}

TEST(Calibration, JointDistributionIsTheFactorProduct) {
  std::mt19937_64 rng(52);
  RandomModelSpec spec;
  spec.min_vars = 5;
  spec.max_vars = 8;
  spec.zero_fraction = 0.0;
  for (int t = 0; t < 20; ++t) {
    const Model m = random_connected_model(rng, spec);
    CliqueTreeForest ctf = built_forest(m);
    calibrate(ctf);
    const Factor joint = joint_distribution(ctf, ctf.trees()[0]);
    oracle::for_each_assignment(joint.scope, m.cards, [&](const oracle::Assignment& a) {
      double want = 1.0;
      for (const Factor& f : m.factors) want *= oracle::at(f, a);
      EXPECT_TRUE(oracle::rel_close(oracle::at(joint, a), want, 1e-10));
    });
    EXPECT_THROW(joint_distribution(ctf, ctf.trees()[0], 4), CapExceeded);
  }
}

TEST(Calibration, SeparateTreesHaveSeparateConstants) {
  CliqueTreeForest ctf(std::vector<int>{2, 2, 3});
  ctf.add_clique({0, 1});
  ctf.add_clique({2});
  const std::vector<double> a{1, 2, 3, 4}, b{1, 1, 5};
  ctf.assign(ctf.add_factor(Factor::from_linear({0, 1}, {2, 2}, a)), 0);
  ctf.assign(ctf.add_factor(Factor::from_linear({2}, {3}, b)), 1);
  calibrate(ctf);
  const auto ncs = tree_log_ncs(ctf);
  ASSERT_EQ(ncs.size(), 2u);
  EXPECT_NEAR(ncs[0], std::log(10.0), 1e-14);
  EXPECT_NEAR(ncs[1], std::log(7.0), 1e-14);
}

TEST(Calibration, DetectsDisagreement) {
  CliqueTreeForest ctf(std::vector<int>(3, 2));
  ctf.add_clique({0, 1});
  ctf.add_clique({1, 2});
  ctf.connect(0, 1);
  const std::vector<double> a{1, 2, 3, 4};
  ctf.assign(ctf.add_factor(Factor::from_linear({0, 1}, {2, 2}, a)), 0);
  calibrate(ctf);
  EXPECT_TRUE(check_calibration(ctf).ok());
  Factor& b = *ctf.clique(1).belief;
  b.log_values[0] += 0.1;
  const CalibrationReport r = check_calibration(ctf);
  EXPECT_FALSE(r.ok());
  ASSERT_EQ(r.flagged.size(), 1u);
  EXPECT_EQ(r.flagged[0], edge_key(0, 1));
  EXPECT_NEAR(r.max_discrepancy, 1.0 - 4.0 / (2.0 * std::exp(0.1) + 2.0), 1e-12);
  EXPECT_THROW(log_nc(ctf, {0, 1}), CalibrationError);
  ctf.clear_beliefs();
  EXPECT_THROW(check_calibration(ctf), InvalidArgument);
}

TEST(Calibration, ZeroMassTree) {
  CliqueTreeForest ctf(std::vector<int>(2, 2));
  ctf.add_clique({0, 1});
  ctf.assign(ctf.add_factor(Factor::constant({0, 1}, {2, 2}, kLogZero)), 0);
  calibrate(ctf);
  EXPECT_EQ(tree_log_ncs(ctf)[0], kLogZero);
}

TEST(Calibration, LogValuesAgree) {
  EXPECT_TRUE(log_values_agree(kLogZero, kLogZero, 1e-9));
  EXPECT_FALSE(log_values_agree(kLogZero, 0.0, 1e-9));
  EXPECT_TRUE(log_values_agree(1000.0, 1000.0 + 1e-7, 1e-9));
  EXPECT_FALSE(log_values_agree(0.1, 0.1 + 1e-8, 1e-9));
  EXPECT_TRUE(log_values_agree(0.1, 0.1 + 1e-10, 1e-9));
}

TEST(Calibration, SmallExamples) {
  CliqueTreeForest one(std::vector<int>{2});
  one.add_clique({0});
  const std::vector<double> p{0.3, 0.7};
  one.assign(one.add_factor(Factor::from_linear({0}, {2}, p)), 0);
  calibrate(one);
  EXPECT_NEAR(one.clique(0).belief->value(0), 0.3, 1e-15);
  EXPECT_NEAR(log_nc(one, {0}), 0.0, 1e-15);

  // {a,b} - {b,c}, all-ones factors over three binary variables.
  CliqueTreeForest uni(std::vector<int>(3, 2));
  uni.add_clique({0, 1});
  uni.add_clique({1, 2});
  uni.connect(0, 1);
  calibrate(uni);
  EXPECT_NEAR(log_nc(uni, {0, 1}), std::log(8.0), 1e-14);
  const Factor left = marginalize(*uni.clique(0).belief, 0);
  const Factor right = marginalize(*uni.clique(1).belief, 2);
  for (std::size_t i = 0; i < 2; ++i) EXPECT_NEAR(left.value(i), right.value(i), 1e-12);

  CliqueTreeForest single(std::vector<int>{2, 3});
  single.add_clique({0, 1});
  const std::vector<double> t{1, 2, 3, 4, 5, 6};
  single.assign(single.add_factor(Factor::from_linear({0, 1}, {2, 3}, t)), 0);
  calibrate(single);
  EXPECT_NEAR(log_nc(single, {0}), std::log(21.0), 1e-14);
}
