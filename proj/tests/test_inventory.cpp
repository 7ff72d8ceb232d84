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

#include "riskcmdp/evaluate.hpp"
#include "riskcmdp/inventory.hpp"

namespace riskcmdp::inventory {
namespace {

using Convention = DemandConvention;

// Direct summation over the pmf, truncated at k = 200.
double summed(std::size_t y, const DemandModel& d, bool shortfall) {
  double total = 0.0;
  for (std::size_t k = 0; k <= 200; ++k) {
    const double diff = shortfall ? static_cast<double>(k) - static_cast<double>(y)
                                  : static_cast<double>(y) - static_cast<double>(k);
    if (diff > 0) total += diff * d.pmf(k);
  }
  return total;
}

TEST(DemandModel, ContinuationConventionIsDefault) {
  const DemandModel d(0.7);
  EXPECT_DOUBLE_EQ(d.pmf(0), 1.0 - 0.7);
  EXPECT_NEAR(d.pmf(2), 0.3 * 0.49, 1e-16);
  EXPECT_NEAR(d.tail(3), 0.343, 1e-15);
  EXPECT_NEAR(d.mean(), 0.7 / 0.3, 1e-15);
}

TEST(DemandModel, SuccessAndTrialsConventions) {
  const DemandModel s(0.7, Convention::success);
  EXPECT_DOUBLE_EQ(s.pmf(0), 0.7);
  EXPECT_NEAR(s.mean(), 0.3 / 0.7, 1e-15);
  const DemandModel t(0.7, Convention::trials);
  EXPECT_EQ(t.pmf(0), 0.0);
  EXPECT_DOUBLE_EQ(t.pmf(1), 0.7);
  EXPECT_EQ(t.tail(1), 1.0);
  EXPECT_NEAR(t.mean(), 1.0 / 0.7, 1e-15);
}

TEST(DemandModel, RejectsDegenerateParameter) {
  EXPECT_THROW(DemandModel(0.0), ValidationError);
  EXPECT_THROW(DemandModel(1.0), ValidationError);
}

TEST(ExpectedHoldover, Examples) {
  EXPECT_EQ(expected_holdover(0, DemandModel(0.5)), 0.0);
  EXPECT_NEAR(expected_holdover(2, DemandModel(0.5)), 1.25, 1e-15);
  EXPECT_NEAR(expected_holdover(5, DemandModel(0.7)), 3.0588299999999999, 1e-12);
}

TEST(ExpectedShortfall, Examples) {
  EXPECT_NEAR(expected_shortfall(0, DemandModel(0.5)), 1.0, 1e-15);
  EXPECT_NEAR(expected_shortfall(5, DemandModel(0.7)), 0.39216333333333334, 1e-12);
}

TEST(ClosedForms, MatchTruncatedSummation) {
  for (auto convention : {Convention::continuation, Convention::success, Convention::trials})
    for (double p : {0.5, 0.6, 0.7}) {
      const DemandModel d(p, convention);
      for (std::size_t y = 0; y <= 5; ++y) {
        EXPECT_NEAR(expected_holdover(y, d), summed(y, d, false), 1e-12);
        EXPECT_NEAR(expected_shortfall(y, d), summed(y, d, true), 1e-12);
        EXPECT_NEAR(expected_holdover(y, d) - expected_shortfall(y, d), static_cast<double>(y) - d.mean(), 1e-13);
      }
    }
}

TEST(Transition, Examples) {
  const auto empty = inventory_transition(0, 0, 5, DemandModel(0.5));
  EXPECT_EQ(empty[0], 1.0);
  const auto row = inventory_transition(0, 2, 5, DemandModel(0.5));
  EXPECT_DOUBLE_EQ(row[2], 0.5);
  EXPECT_DOUBLE_EQ(row[1], 0.25);
  EXPECT_DOUBLE_EQ(row[0], 0.25);
  for (std::size_t j = 3; j <= 5; ++j) EXPECT_EQ(row[j], 0.0);
  EXPECT_THROW(inventory_transition(3, 3, 5, DemandModel(0.5)), ValidationError);
}

TEST(Transition, RowsAreDistributions) {
  for (auto convention : {Convention::continuation, Convention::success, Convention::trials}) {
    const DemandModel d(0.6, convention);
    for (std::size_t x = 0; x <= 5; ++x)
      for (std::size_t a = 0; a + x <= 5; ++a) {
        const auto row = inventory_transition(x, a, 5, d);
        double total = 0.0;
        for (double v : row) {
          EXPECT_GE(v, 0.0);
          total += v;
        }
        EXPECT_NEAR(total, 1.0, 1e-15);
      }
  }
}

TEST(ExampleOne, PaperParameters) {
  const InventoryParams params;
  const auto instance = build_inventory_example1(params);
  EXPECT_EQ(instance.sense(), Sense::minimize);
  EXPECT_NEAR(instance.alpha(CostKind::reward)[0], 6.0 / 21.0, 1e-15);
  EXPECT_EQ(instance.alpha(CostKind::reward), instance.alpha(CostKind::constraint));
  for (std::size_t x = 0; x <= 5; ++x) EXPECT_EQ(instance.actions(0, x), 6 - x);
  const auto& r = instance.cost(CostKind::reward).running;
  const auto& c = instance.cost(CostKind::constraint).running;
  EXPECT_EQ(r[0][0][0][0], 0.0);
  EXPECT_NEAR(c[0][5][0][3], std::pow(0.7, 6) / 0.3, 1e-15);
  EXPECT_NEAR(r[0][1][2][0], 0.2 + 2 * 0.4 + 0.1 * expected_holdover(3, DemandModel(0.7)), 1e-15);
  for (double v : instance.cost(CostKind::reward).terminal) EXPECT_EQ(v, 0.0);
}

TEST(ExampleOne, FactoryScalesConstraint) {
  const auto params = example1_params(2.0, 7);
  EXPECT_DOUBLE_EQ(params.gamma_c, 0.2);
  EXPECT_NEAR(params.bound, std::exp(0.12), 1e-15);
  EXPECT_EQ(params.horizon, 7u);
  EXPECT_EQ(params.convention, Convention::success);
}

TEST(ExampleTwo, Costs) {
  const auto params = example2_params(0.05, 4.0, 10);
  const auto instance = build_inventory_example2(params);
  EXPECT_EQ(instance.sense(), Sense::minimize);
  EXPECT_NEAR(instance.bound(), std::exp(0.2), 1e-15);
  const auto& c = instance.cost(CostKind::constraint).running;
  for (std::size_t x = 0; x <= 5; ++x) EXPECT_EQ(c[0][x][0][0], 0.0);
  EXPECT_EQ(c[0][1][3][0], 3.0);
  const DemandModel d(params.p, params.convention);
  const double expected = 0.2 + 5 * 0.2 + 0.1 * expected_holdover(5, d) + 6.0 * expected_shortfall(5, d);
  EXPECT_NEAR(instance.cost(CostKind::reward).running[0][0][5][0], expected, 1e-15);
  EXPECT_NEAR(expected, 1.674976, 1e-12);
}

TEST(ExampleTwo, ContinuationConventionCost) {
  auto params = example2_params(0.05, 4.0, 10);
  params.convention = Convention::continuation;
  const auto instance = build_inventory_example2(params);
  EXPECT_NEAR(instance.cost(CostKind::reward).running[0][0][5][0], 2.261504, 1e-12);
}

TEST(Params, Validation) {
  InventoryParams params;
  params.p = 1.0;
  EXPECT_THROW(build_inventory_instance(params), ValidationError);
  params = InventoryParams{};
  params.holding = -0.1;
  EXPECT_THROW(build_inventory_instance(params), ValidationError);
  params = InventoryParams{};
  params.capacity = 0;
  EXPECT_THROW(build_inventory_instance(params), ValidationError);
}

TEST(Instance, StationaryAcrossEpochs) {
  const auto instance = build_inventory_example2(example2_params(2.0, 6.0, 6));
  for (std::size_t t = 1; t < instance.decision_epochs(); ++t)
    for (std::size_t x = 0; x <= 5; ++x)
      for (std::size_t a = 0; a + x <= 5; ++a) {
        EXPECT_EQ(instance.kernel(t, x, a), instance.kernel(0, x, a));
        EXPECT_EQ(instance.cost(CostKind::reward).running[t][x][a], instance.cost(CostKind::reward).running[0][x][a]);
      }
}

}  // namespace
}  // namespace riskcmdp::inventory
