// Copyright 2026 The riskcmdp Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
#include <cmath>

#include <gtest/gtest.h>

#include "riskcmdp/grc.hpp"
#include "riskcmdp/oracle.hpp"
#include "riskcmdp/verify.hpp"

namespace riskcmdp {
namespace {

RiskCmdpInstance zero_cost() {
  auto config = verify::toy_instance().config();
  for (CostSpec* spec : {&config.reward, &config.constraint}) spec->running = {{{{0.0}, {0.0}}}};
  config.bound = 2.0;
  return build_instance(config);
}

TEST(EnumeratePaths, WeightsSumToOneAndCountMatches) {
  Rng rng(61);
  for (int trial = 0; trial < 20; ++trial) {
    const auto instance = oracle::random_instance(rng);
    const auto policy = random_policy(instance, RestartMode::interior, rng);
    const auto paths = oracle::enumerate_paths(instance, CostKind::reward, policy);
    EXPECT_NEAR(paths.total_probability, 1.0, 1e-10);
    // Dense kernels and interior rules give every trajectory positive weight.
    // Exact count: paths(t, x) = |A_t(x)| * sum_y paths(t+1, y).
    std::vector<double> from(instance.states(instance.horizon() - 1), 1.0);
    for (std::size_t t = instance.horizon() - 1; t-- > 0;) {
      double next = 0.0;
      for (double v : from) next += v;
      from.assign(instance.states(t), 0.0);
      for (std::size_t x = 0; x < from.size(); ++x) from[x] = static_cast<double>(instance.actions(t, x)) * next;
    }
    double exact = 0.0;
    for (double v : from) exact += v;
    EXPECT_EQ(static_cast<double>(paths.paths.size()), exact);
    EXPECT_LE(exact, oracle::path_count(instance, 0, instance.horizon() - 1));
    double j = 0.0;
    for (const auto& p : paths.paths) j += p.probability * p.exp_cost;
    EXPECT_NEAR(j, oracle::enumerate_paths_eval(instance, CostKind::reward, policy), 1e-12 * std::max(1.0, j));
  }
}

TEST(EnumeratePaths, ZeroCostAndToy) {
  const auto z = zero_cost();
  EXPECT_NEAR(oracle::enumerate_paths_eval(z, CostKind::reward, uniform_policy(z)), 1.0, 1e-15);
  const auto toy = verify::toy_instance();
  EXPECT_NEAR(oracle::enumerate_paths_eval(toy, CostKind::reward, Policy{{{{0.5, 0.5}}}}), 1.8591409142295226,
              1e-15);
}

TEST(EnumeratePaths, CapIsEnforced) {
  Rng rng(62);
  const auto instance = oracle::random_instance(rng);
  EXPECT_THROW(oracle::enumerate_paths_eval(instance, CostKind::reward, uniform_policy(instance), 0.5),
               oracle::CapExceeded);
}

TEST(CornerSearch, UnconstrainedToyMatchesDp) {
  const auto toy = with_bound(verify::toy_instance(), kInfiniteBound);
  const auto r = oracle::corner_policy_search(toy);
  ASSERT_TRUE(r.best);
  EXPECT_NEAR(r.value, std::exp(1.0), 1e-15);
  EXPECT_EQ(r.candidates, 2u);
}

TEST(CornerSearch, ConstrainedToyKeepsCheapAction) {
  const auto toy = verify::toy_instance();
  const auto r = oracle::corner_policy_search(toy);
  ASSERT_TRUE(r.best);
  EXPECT_EQ(r.value, 1.0);
  EXPECT_EQ(r.feasible, 1u);
  GrcConfig config;
  config.max_iters = 2000;
  EXPECT_GT(run_grc(toy, config).best_j_r, r.value + 0.5);
}

TEST(CornerSearch, ZeroCostAllFeasible) {
  const auto r = oracle::corner_policy_search(zero_cost());
  EXPECT_EQ(r.value, 1.0);
  EXPECT_EQ(r.feasible, r.candidates);
}

TEST(CornerSearch, SignalsNothingFeasible) {
  const auto r = oracle::corner_policy_search(with_bound(verify::toy_instance(), 0.5));
  EXPECT_FALSE(r.best.has_value());
  EXPECT_EQ(r.feasible, 0u);
}

TEST(SimplexGrid, CountsAndCorners) {
  EXPECT_EQ(oracle::simplex_grid(2, 4).size(), 5u);
  EXPECT_EQ(oracle::simplex_grid(3, 4).size(), 15u);
  const auto grid = oracle::simplex_grid(3, 1);
  EXPECT_EQ(grid.size(), 3u);
  for (const auto& p : grid) EXPECT_DOUBLE_EQ(p[0] + p[1] + p[2], 1.0);
}

TEST(GridSearch, ToyFineResolution) {
  const auto r = oracle::randomized_grid_search(verify::toy_instance(), 1000);
  ASSERT_TRUE(r.best);
  EXPECT_NEAR(r.value, 1.648721, 1e-3);
  EXPECT_NEAR(r.best->rules[0][0][1], 0.3775, 1e-3);
}

TEST(GridSearch, ZeroCostAndInfeasible) {
  EXPECT_EQ(oracle::randomized_grid_search(zero_cost(), 10).value, 1.0);
  EXPECT_FALSE(oracle::randomized_grid_search(with_bound(verify::toy_instance(), 0.5), 10).best.has_value());
}

TEST(GridSearch, CapIsEnforced) {
  EXPECT_THROW(oracle::randomized_grid_search(verify::toy_instance(), 100, 10.0), oracle::CapExceeded);
}

TEST(Sandwich, CornerGridDp) {
  for (const auto& instance : verify::tiny_constrained(6, 63)) {
    const auto corner = oracle::corner_policy_search(instance);
    const auto grid = oracle::randomized_grid_search(instance, 60);
    const double dp = dp_value(instance, CostKind::reward, unconstrained_dp(instance, CostKind::reward));
    ASSERT_TRUE(grid.best);
    if (corner.best) {
      EXPECT_LE(corner.value, grid.value + 1e-12);
    }
    EXPECT_LE(grid.value, dp + 1e-9);
  }
}

TEST(Sandwich, SearchBetweenCornerAndDp) {
  GrcConfig config;
  config.max_iters = 3000;
  const auto check = verify::check_sandwich(verify::tiny_constrained(6, 64), config);
  EXPECT_TRUE(check.passed) << check.detail << " worst violation " << check.deviation;
}

TEST(Witness, GridOptimumNearlyFixed) {
  const auto check = verify::check_grid_witness(verify::tiny_constrained(3, 65), 200, 5e-3);
  EXPECT_TRUE(check.passed) << "worst residual " << check.deviation;
}

TEST(VertexEnumeration, ToyMix) {
  EpochLp lp;
  lp.objective = {{1.0, std::exp(1.0)}};
  lp.constraint = lp.objective;
  lp.bound = std::exp(0.5);
  const auto v = oracle::enumerate_epoch_lp_vertices(lp);
  ASSERT_TRUE(v);
  EXPECT_NEAR(v->objective, std::exp(0.5), 1e-15);
  EXPECT_NEAR(v->rule[0][1], verify::toy_optimal_mix(), 1e-15);
  lp.bound = 0.5;
  EXPECT_FALSE(oracle::enumerate_epoch_lp_vertices(lp).has_value());
}

TEST(RandomInstance, RespectsOptions) {
  Rng rng(66);
  oracle::RandomInstanceOptions options;
  options.min_states = options.max_states = 2;
  options.min_actions = options.max_actions = 3;
  options.min_horizon = options.max_horizon = 4;
  options.sense = Sense::minimize;
  const auto instance = oracle::random_instance(rng, options);
  EXPECT_EQ(instance.horizon(), 4u);
  EXPECT_EQ(instance.sense(), Sense::minimize);
  for (std::size_t t = 0; t < instance.decision_epochs(); ++t)
    for (std::size_t x = 0; x < instance.states(t); ++x) EXPECT_EQ(instance.actions(t, x), 3u);
}

TEST(BindingBound, LiesBetweenCheapestAndGreedy) {
  Rng rng(67);
  for (int trial = 0; trial < 20; ++trial) {
    const auto raw = oracle::random_instance(rng);
    const auto instance = oracle::with_binding_bound(raw, 0.5);
    const double cheapest =
        dp_value(raw, CostKind::constraint, unconstrained_dp(raw, CostKind::constraint, Sense::minimize));
    EXPECT_GE(instance.bound(), cheapest);
    EXPECT_TRUE(oracle::corner_policy_search(instance).best.has_value());
  }
}

TEST(VerifySuite, SmallScalePasses) {
  const auto report = verify::run_suite(verify::Scale::small);
  for (const auto& c : report.checks) EXPECT_TRUE(c.passed) << c.name << ": " << c.deviation << " " << c.detail;
}

TEST(VerifySuite, CorruptedKernelCaught) {
  const auto check = verify::check_corrupted_kernel();
  EXPECT_TRUE(check.passed);
  EXPECT_NE(check.detail.find("sum to 1"), std::string::npos);
}

}  // namespace
}  // namespace riskcmdp
