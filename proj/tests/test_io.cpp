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
#include <sstream>

#include <gtest/gtest.h>

#include "riskcmdp/io.hpp"
#include "riskcmdp/oracle.hpp"
#include "riskcmdp/verify.hpp"

namespace riskcmdp::io {
namespace {

const char* kStationary = R"({
  "horizon": 4,
  "states": 2,
  "stationary": true,
  "actions": [2, 1],
  "kernel": [[[0.5, 0.5], [0.25, 0.75]], [[1.0, 0.0]]],
  "reward": {"running": [[1.0, -1.0], [0.5]], "terminal": [0.0, 1.0], "gamma": 0.5, "beta": 0.9,
             "alpha": [0.25, 0.75]},
  "constraint": {"running": 0.2, "terminal": 0, "gamma": 1.0, "beta": 1.0, "alpha": [1.0, 0.0]},
  "bound": 3.0,
  "sense": "minimize"
})";

TEST(InstanceJson, StationaryShorthand) {
  const auto instance = instance_from_json(parse(kStationary, "test"));
  EXPECT_EQ(instance.horizon(), 4u);
  EXPECT_EQ(instance.sense(), Sense::minimize);
  EXPECT_EQ(instance.actions(2, 0), 2u);
  EXPECT_EQ(instance.actions(2, 1), 1u);
  EXPECT_EQ(instance.kernel(1, 0, 1), (Vector{0.25, 0.75}));
  const auto& r = instance.cost(CostKind::reward).running;
  EXPECT_EQ(r[2][0][1], (Vector{-1.0, -1.0}));
  EXPECT_EQ(instance.cost(CostKind::constraint).running[1][1][0], (Vector{0.2, 0.2}));
  EXPECT_EQ(instance.cost(CostKind::constraint).terminal, (Vector{0.0, 0.0}));
}

TEST(InstanceJson, RoundTripIsExact) {
  Rng rng(71);
  for (int trial = 0; trial < 20; ++trial) {
    auto instance = oracle::random_instance(rng);
    if (trial % 2) instance = oracle::with_binding_bound(instance, 0.4);
    const auto text = to_json(instance.config()).dump();
    const auto back = instance_from_json(parse(text, "round trip"));
    const auto& a = instance.config();
    const auto& b = back.config();
    EXPECT_EQ(a.horizon, b.horizon);
    EXPECT_EQ(a.state_counts, b.state_counts);
    EXPECT_EQ(a.kernel, b.kernel);
    EXPECT_EQ(a.reward.running, b.reward.running);
    EXPECT_EQ(a.constraint.terminal, b.constraint.terminal);
    EXPECT_EQ(a.reward.alpha, b.reward.alpha);
    EXPECT_EQ(a.reward.gamma, b.reward.gamma);
    EXPECT_EQ(a.constraint.beta, b.constraint.beta);
    EXPECT_EQ(a.bound, b.bound);
    EXPECT_EQ(a.sense, b.sense);
  }
}

TEST(InstanceJson, UnboundedSpellings) {
  auto doc = parse(kStationary, "test");
  for (const json& v : {json("inf"), json(nullptr)}) {
    doc["bound"] = v;
    EXPECT_FALSE(instance_from_json(doc).constrained());
  }
  doc.erase("bound");
  EXPECT_FALSE(instance_from_json(doc).constrained());
}

TEST(InstanceJson, ParseErrorHasLocation) {
  try {
    parse("{\n  \"horizon\": 2,\n  oops\n}", "bad.json");
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("bad.json: parse error at line 3"), std::string::npos) << e.what();
  }
}

TEST(InstanceJson, ValidationSurfacesAsConfigError) {
  auto doc = parse(kStationary, "test");
  doc["kernel"][0][0] = {0.5, 0.4};
  EXPECT_THROW(instance_from_json(doc), ConfigError);
  doc = parse(kStationary, "test");
  doc["actions"] = {3, 1};
  EXPECT_THROW(instance_from_json(doc), ConfigError);
  doc = parse(kStationary, "test");
  doc.erase("kernel");
  EXPECT_THROW(instance_from_json(doc), ConfigError);
  doc = parse(kStationary, "test");
  doc["sense"] = "sideways";
  EXPECT_THROW(instance_from_json(doc), ConfigError);
}

TEST(InventoryJson, ExampleDefaults) {
  const auto p = inventory_params_from_json(parse(R"({"example": 1, "gamma": 2.0, "horizon": 12})", "inv"));
  EXPECT_DOUBLE_EQ(p.gamma_c, 0.2);
  EXPECT_NEAR(p.bound, std::exp(0.6 * 0.2), 1e-15);
  EXPECT_EQ(p.horizon, 12u);
  EXPECT_EQ(p.convention, inventory::DemandConvention::success);
  const auto q = inventory_params_from_json(
      parse(R"({"example": 2, "gamma": 0.05, "normalized_bound": 8, "convention": "continuation"})", "inv"));
  EXPECT_NEAR(q.bound, std::exp(0.4), 1e-15);
  EXPECT_EQ(q.convention, inventory::DemandConvention::continuation);
  EXPECT_THROW(inventory_params_from_json(parse(R"({"convention": "weird"})", "inv")), ConfigError);
}

TEST(InventoryJson, BuildsInstance) {
  const auto instance = instance_from_json(parse(R"({"inventory": {"example": 2, "horizon": 5}})", "inv"));
  EXPECT_EQ(instance.horizon(), 5u);
  EXPECT_EQ(instance.states(0), 6u);
  const auto round = inventory_params_from_json(to_json(inventory::example2_params(2.0, 6.0, 30)));
  EXPECT_EQ(round.example, inventory::Example::order_count_constrained);
  EXPECT_DOUBLE_EQ(round.gamma_c, 2.0);
  EXPECT_NEAR(round.bound, std::exp(12.0), 1e-9);
}

TEST(PolicyJson, RoundTrip) {
  Rng rng(72);
  const auto instance = oracle::random_instance(rng);
  const auto policy = random_policy(instance, RestartMode::interior, rng);
  EXPECT_EQ(policy_from_json(parse(to_json(policy).dump(), "p")), policy);
  EXPECT_THROW(policy_from_json(parse(R"({"rule": []})", "p")), ConfigError);
}

TEST(SolverJson, AppliesFields) {
  GrcConfig config;
  apply_solver_json(parse(R"({"max_iters": 10, "restart_mode": "interior", "step_c": 2, "step_k0": 5,
                              "seed": 9, "trace_stride": 3})", "s"), config);
  EXPECT_EQ(config.max_iters, 10u);
  EXPECT_EQ(config.restart_mode, RestartMode::interior);
  EXPECT_EQ(config.seed, 9u);
  EXPECT_EQ(config.trace_stride, 3u);
  EXPECT_THROW(apply_solver_json(parse(R"({"restart_mode": "edge"})", "s"), config), ConfigError);
  EXPECT_THROW(apply_solver_json(parse(R"({"max_iters": "many"})", "s"), config), ConfigError);
}

TEST(Csv, NumbersAndTrace) {
  EXPECT_EQ(csv_number(0.1), "0.10000000000000001");
  EXPECT_EQ(csv_number(NAN), "");
  EXPECT_EQ(csv_number(INFINITY), "inf");
  std::ostringstream os;
  TraceRow row;
  row.k = 1;
  row.j_r = 1.5;
  row.j_c = 2.0;
  row.feasible = true;
  write_trace_csv(os, {row});
  EXPECT_EQ(os.str(), "k,restarted,J_r,J_c,feasible,best_J_r,residual\n1,0,1.5,2,1,,\n");
}

}  // namespace
}  // namespace riskcmdp::io
