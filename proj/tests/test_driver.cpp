#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "example_network.hpp"
#include "ibia/calibration.hpp"
#include "ibia/driver.hpp"
#include "ibia/error.hpp"
#include "ibia/random_model.hpp"
#include "ibia/report.hpp"
#include "oracle.hpp"

using namespace ibia;

TEST(BruteForce, MatchesNaiveEnumeration) {
  std::mt19937_64 rng(81);
  RandomModelSpec spec;
  spec.max_card = 3;
  spec.min_vars = 4;
  spec.max_vars = 8;
  for (int t = 0; t < 30; ++t) {
    const Model m = random_connected_model(rng, spec);
    EXPECT_TRUE(oracle::rel_close(std::exp(brute_force_log_pr(m)), oracle::partition_function(m),
                                  1e-12));
  }
  Model big;
  big.cards.assign(30, 2);
  big.factors.push_back(Factor::constant({0, 29}, {2, 2}));
  EXPECT_THROW(brute_force_log_pr(big, 1 << 20), CapExceeded);
}

TEST(Estimate, ExactWhenTheBoundIsLoose) {
  std::mt19937_64 rng(82);
  RandomModelSpec spec;
  spec.max_card = 3;
  for (int t = 0; t < 40; ++t) {
    const Model m = random_connected_model(rng, spec);
    EstimateOptions opt;
    opt.mcs_p = 40;
    const PrEstimate est = estimate_log_pr(m, opt);
    EXPECT_FALSE(est.approximated);
    const double ref = brute_force_log_pr(m);
    EXPECT_TRUE(log_values_agree(est.log_pr, ref, 1e-9)) << est.log_pr << " vs " << ref;
    EXPECT_TRUE(log_values_agree(est.log10_pr, est.log_pr / std::log(10.0), 1e-15));
    const FullCompileStats full = full_compile_stats(m);
    ASSERT_TRUE(full.log_pr.has_value());
    EXPECT_TRUE(log_values_agree(*full.log_pr, ref, 1e-9));
  }
}

TEST(Estimate, ComponentsEvidenceAndFreeVariables) {
  Model m;
  m.cards = {2, 3, 2, 2, 4};  // variable 4 occurs in no factor
  const std::vector<double> a{1, 2, 3, 4, 5, 6}, b{0.5, 1.5, 2, 0};
  m.factors.push_back(Factor::from_linear({0, 1}, {2, 3}, a));
  m.factors.push_back(Factor::from_linear({2, 3}, {2, 2}, b));
  m.factors.push_back(Factor::scalar(std::log(0.5)));
  EstimateOptions opt;
  opt.mcs_p = 10;
  const PrEstimate est = estimate_log_pr(m, opt);
  EXPECT_EQ(est.components.size(), 2u);
  // 21 * 4 * 4 * 0.5
  EXPECT_NEAR(std::exp(est.log_pr), 168.0, 1e-9);

  Evidence ev;
  ev.assignments[1] = 2;
  const PrEstimate with = estimate_log_pr(apply_evidence(m, ev), opt);
  // (3 + 6) * 4 * 4 * 0.5
  EXPECT_NEAR(std::exp(with.log_pr), 72.0, 1e-9);
}

TEST(Estimate, ZeroMassModel) {
  Model m;
  m.cards = {2, 2};
  const std::vector<double> z{0, 0, 0, 0};
  m.factors.push_back(Factor::from_linear({0, 1}, {2, 2}, z));
  const PrEstimate est = estimate_log_pr(m, EstimateOptions{});
  EXPECT_EQ(est.log10_pr, kLogZero);
  const auto j = estimate_json(est, EstimateOptions{});
  EXPECT_TRUE(j["log10_pr"].is_null());
  EXPECT_TRUE(j["zero_mass"].get<bool>());
}

TEST(Estimate, RejectsBadBounds) {
  const Model m = example::network();
  EstimateOptions opt;
  opt.mcs_p = 4;
  opt.mcs_im = 4;
  EXPECT_THROW(estimate_log_pr(m, opt), InvalidArgument);
  opt.mcs_p = 2;
  opt.mcs_im = 1;
  EXPECT_THROW(estimate_log_pr(m, opt), InfeasibleError);
}

TEST(Estimate, ApproximationRegimeStaysClose) {
  std::mt19937_64 rng(83);
  RandomModelSpec spec;
  int approximated = 0;
  for (int t = 0; t < 40; ++t) {
    const Model m = random_connected_model(rng, spec);
    EstimateOptions opt;
    opt.mcs_p = 5;
    opt.mcs_im = 3;
    opt.check_invariants = true;
    opt.escalate_mcs = true;
    const PrEstimate est = estimate_log_pr(m, opt);
    approximated += est.approximated ? 1 : 0;
    const ErrorValue err = compare_error(est.log10_pr, brute_force_log_pr(m) / std::log(10.0));
    if (err.comparable) {
      EXPECT_LT(err.error, 0.5);
    }
    for (const auto& c : est.components) EXPECT_EQ(c.steps.back().num_trees, 1);
  }
  EXPECT_GT(approximated, 5);
}

TEST(Estimate, EscalationRecoversFromStalls) {
  std::mt19937_64 rng(84);
  RandomModelSpec spec;
  spec.min_vars = 12;
  spec.max_vars = 16;
  spec.extra_factor_ratio = 1.5;
  for (int t = 0; t < 60; ++t) {
    const Model m = random_connected_model(rng, spec);
    EstimateOptions opt;
    opt.mcs_p = 4;
    opt.mcs_im = 2;
    opt.eviction = EvictionPolicy::WholeGroup;
    try {
      estimate_log_pr(m, opt);
    } catch (const InfeasibleError&) {
      opt.escalate_mcs = true;
      const PrEstimate est = estimate_log_pr(m, opt);
      EXPECT_TRUE(std::isfinite(est.log10_pr) || est.log10_pr == kLogZero);
    }
  }
}

TEST(Estimate, RandomHeuristicIsSeeded) {
  std::mt19937_64 rng(85);
  RandomModelSpec spec;
  spec.min_vars = 12;
  spec.max_vars = 14;
  for (int t = 0; t < 10; ++t) {
    const Model m = random_connected_model(rng, spec);
    EstimateOptions opt;
    opt.mcs_p = 5;
    opt.mcs_im = 3;
    opt.heuristic = Heuristic::Random;
    opt.seed = 1234;
    const auto a = estimate_json(estimate_log_pr(m, opt), opt).dump();
    const auto b = estimate_json(estimate_log_pr(m, opt), opt).dump();
    EXPECT_EQ(a, b);
  }
}

TEST(CompareError, RoundsAndHandlesZeroMass) {
  EXPECT_DOUBLE_EQ(compare_error(-2.0, -2.0004).error, 0.0);
  EXPECT_DOUBLE_EQ(compare_error(-2.0, -2.0006).error, 0.001);
  EXPECT_DOUBLE_EQ(compare_error(1.25, 1.0).error, 0.25);
  EXPECT_TRUE(compare_error(kLogZero, kLogZero).comparable);
  EXPECT_FALSE(compare_error(kLogZero, -3.0).comparable);
  EXPECT_FALSE(compare_error(-3.0, kLogZero).comparable);
}

TEST(CompareFirstBuild, IncrementalMatchesFullCompileOnSmallModels) {
  std::mt19937_64 rng(86);
  RandomModelSpec spec;
  for (int t = 0; t < 20; ++t) {
    const Model m = random_connected_model(rng, spec);
    const BuildComparison c = compare_first_build(m, 30);
    EXPECT_EQ(c.factors_added, static_cast<int>(m.factors.size()));
    EXPECT_GE(c.mcs_incremental, 0.0);
    EXPECT_LE(c.mcs_incremental, 30.0);
    EXPECT_NEAR(c.mcs_full, full_compile_stats(m).max_clique_size, 1e-12);
  }
}

TEST(Estimate, NormalizedUnaryFactorsGiveZero) {
  Model m;
  m.cards = {2, 3, 4};
  const std::vector<double> a{0.4, 0.6}, b{0.2, 0.3, 0.5}, c{0.1, 0.2, 0.3, 0.4};
  m.factors = {Factor::from_linear({0}, {2}, a), Factor::from_linear({1}, {3}, b),
               Factor::from_linear({2}, {4}, c)};
  EXPECT_NEAR(estimate_log_pr(m, EstimateOptions{}).log10_pr, 0.0, 1e-15);
}

TEST(BruteForce, SmallExamples) {
  Model one;
  one.cards = {2, 2};
  const std::vector<double> t{1, 2, 3, 4};
  one.factors = {Factor::from_linear({0, 1}, {2, 2}, t)};
  EXPECT_NEAR(brute_force_log_pr(one), std::log(10.0), 1e-14);
  Model two;
  two.cards = {2, 2, 3};
  const std::vector<double> u{1, 1, 5};
  two.factors = {Factor::from_linear({0, 1}, {2, 2}, t), Factor::from_linear({2}, {3}, u)};
  EXPECT_NEAR(brute_force_log_pr(two), std::log(10.0) + std::log(7.0), 1e-14);
}

TEST(FullCompile, TreeAndCycle) {
  Model tree;
  tree.cards = {2, 3, 2, 2};
  tree.factors = {Factor::constant({0, 1}, {2, 3}), Factor::constant({1, 2}, {3, 2}),
                  Factor::constant({1, 3}, {3, 2})};
  EXPECT_NEAR(full_compile_stats(tree).max_clique_size, std::log2(6.0), 1e-12);
  Model cycle;
  cycle.cards = {2, 2, 2, 2};
  for (int i = 0; i < 4; ++i) cycle.factors.push_back(Factor::constant({i, (i + 1) % 4}, {2, 2}));
  EXPECT_DOUBLE_EQ(full_compile_stats(cycle).max_clique_size, 3.0);
}

TEST(CompareError, SubThresholdIsZero) {
  EXPECT_DOUBLE_EQ(compare_error(-7.5, -7.5).error, 0.0);
  EXPECT_DOUBLE_EQ(compare_error(-7.5, -7.5 + 1e-5).error, 0.0);
}

TEST(Estimate, ExampleNetworkHasTwoForests) {
  const Model m = example::network();
  EstimateOptions opt;
  opt.mcs_p = 4;
  opt.mcs_im = 3;
  opt.grouping = Grouping::ConsecutiveRuns;
  opt.eviction = EvictionPolicy::WholeGroup;
  opt.check_invariants = true;
  const PrEstimate est = estimate_log_pr(m, opt);
  ASSERT_EQ(est.components.size(), 1u);
  const auto& steps = est.components[0].steps;
  ASSERT_EQ(steps.size(), 2u);
  EXPECT_EQ(steps[0].deferred, 2);
  EXPECT_EQ(steps[1].factors_added, 2);
  EXPECT_EQ(steps[1].deferred, 0);
  const double ref = brute_force_log_pr(m) / std::log(10.0);
  EXPECT_LT(std::fabs(est.log10_pr - ref), 0.01);
}
