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
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <gtest/gtest.h>

#include "riskcmdp/cli.hpp"

namespace riskcmdp::cli {
namespace {

namespace fs = std::filesystem;

const std::string kConfigs = RISKCMDP_CONFIG_DIR;

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("riskcmdp_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string out(const std::string& sub = "") const { return (dir_ / sub).string(); }

  static std::string slurp(const fs::path& path) {
    std::ifstream in(path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
  }

  static json read_json(const fs::path& path) { return json::parse(slurp(path)); }

  std::string write(const std::string& name, const std::string& text) const {
    fs::create_directories(dir_);
    std::ofstream(dir_ / name) << text;
    return (dir_ / name).string();
  }

  void expect_manifest_complete(const fs::path& dir) {
    const auto manifest = read_json(dir / "manifest.json");
    for (const auto& name : manifest["artifacts"]) {
      const auto path = dir / name.get<std::string>();
      ASSERT_TRUE(fs::exists(path)) << path;
      if (path.extension() == ".json") {
        EXPECT_NO_THROW(read_json(path));
      }
    }
  }

  fs::path dir_;
  std::ostringstream log_;
};

TEST_F(CliTest, SolveToy) {
  ASSERT_EQ(cmd_solve(kConfigs + "/toy.json", {}, out("toy"), log_), kOk);
  const auto result = read_json(out("toy") + "/result.json");
  EXPECT_NEAR(result["best"]["J_r"].get<double>(), 1.648721, 1e-4);
  EXPECT_NEAR(result["best"]["v_r"].get<double>(), 0.5, 1e-4);
  const auto policy = io::load_policy(out("toy") + "/policy.json");
  EXPECT_NEAR(policy.rules[0][0][1], 0.377541, 1e-3);
  expect_manifest_complete(out("toy"));
  EXPECT_EQ(read_json(out("toy") + "/manifest.json")["command"], "solve");
}

TEST_F(CliTest, SolveZeroCost) {
  ASSERT_EQ(cmd_solve(kConfigs + "/zero_cost.json", {}, out("z"), log_), kOk);
  const auto result = read_json(out("z") + "/result.json");
  EXPECT_EQ(result["best"]["J_r"].get<double>(), 1.0);
  EXPECT_EQ(result["best"]["v_r"].get<double>(), 0.0);
}

TEST_F(CliTest, SolveIsDeterministic) {
  Overrides o;
  o.iters = 300;
  ASSERT_EQ(cmd_solve(kConfigs + "/toy.json", o, out("a"), log_), kOk);
  ASSERT_EQ(cmd_solve(kConfigs + "/toy.json", o, out("b"), log_), kOk);
  EXPECT_EQ(slurp(out("a") + "/result.json"), slurp(out("b") + "/result.json"));
  EXPECT_EQ(slurp(out("a") + "/trace.csv"), slurp(out("b") + "/trace.csv"));
}

TEST_F(CliTest, SolveMultiSeed) {
  Overrides o;
  o.iters = 200;
  o.seeds = 3;
  ASSERT_EQ(cmd_solve(kConfigs + "/toy.json", o, out("m"), log_), kOk);
  const auto result = read_json(out("m") + "/result.json");
  EXPECT_EQ(result["runs"].size(), 3u);
  for (std::uint64_t s : {1, 2, 3}) EXPECT_TRUE(fs::exists(out("m") + "/trace_seed" + std::to_string(s) + ".csv"));
  expect_manifest_complete(out("m"));
}

TEST_F(CliTest, InfeasibleExitCode) {
  auto doc = json::parse(slurp(kConfigs + "/toy.json"));
  doc["bound"] = 0.5;
  doc["solver"]["max_iters"] = 50;
  EXPECT_EQ(cmd_solve(write("inf.json", doc.dump()), {}, out("inf"), log_), kInfeasible);
  expect_manifest_complete(out("inf"));
  EXPECT_FALSE(fs::exists(out("inf") + "/policy.json"));
}

TEST_F(CliTest, ConfigErrors) {
  EXPECT_THROW(cmd_solve(write("bad.json", "{\"horizon\": 2,"), {}, out("e"), log_), io::ConfigError);
  EXPECT_THROW(cmd_solve(out("missing.json"), {}, out("e"), log_), io::ConfigError);
  Overrides o;
  o.restart_mode = "sideways";
  EXPECT_THROW(cmd_solve(kConfigs + "/toy.json", o, out("e"), log_), io::ConfigError);
}

TEST_F(CliTest, SolveInventoryExampleOne) {
  ASSERT_EQ(cmd_solve(kConfigs + "/inventory_example1.json", {}, out("ex1"), log_), kOk);
  const auto result = read_json(out("ex1") + "/result.json");
  EXPECT_NEAR(result["best"]["v_c"].get<double>(), 0.6, 0.02);
  EXPECT_LE(result["best"]["v_c"].get<double>(), 0.6 + 1e-4);
  EXPECT_EQ(result["inventory"]["horizon"], 30);
}

TEST_F(CliTest, SweepWritesRows) {
  auto doc = json::parse(slurp(kConfigs + "/inventory_example1.json"));
  doc["solver"]["max_iters"] = 500;
  const auto config = write("sweep.json", doc.dump());
  ASSERT_EQ(cmd_sweep(config, "T", "2,5,10", {}, out("s"), log_), kOk);
  std::istringstream csv(slurp(out("s") + "/sweep.csv"));
  std::string line;
  std::getline(csv, line);
  EXPECT_EQ(line, "axis_value,v_r,v_c,feasible,iterations,seconds");
  int rows = 0;
  while (std::getline(csv, line)) ++rows;
  EXPECT_EQ(rows, 3);
  expect_manifest_complete(out("s"));
}

TEST_F(CliTest, SweepValidatesValues) {
  EXPECT_THROW(cmd_sweep(kConfigs + "/toy.json", "T", "5,2", {}, out("s"), log_), io::ConfigError);
  EXPECT_THROW(cmd_sweep(kConfigs + "/toy.json", "T", "2,x", {}, out("s"), log_), io::ConfigError);
  EXPECT_THROW(cmd_sweep(kConfigs + "/toy.json", "beta", "1", {}, out("s"), log_), io::ConfigError);
}

TEST_F(CliTest, SweepMarksFailedPoints) {
  // The toy's tables cover a single epoch, so other horizons fail to build.
  Overrides o;
  o.iters = 100;
  ASSERT_EQ(cmd_sweep(kConfigs + "/toy.json", "T", "2,3", o, out("f"), log_), kOk);
  const auto text = slurp(out("f") + "/sweep.csv");
  EXPECT_NE(text.find("\n3,,,0,0,"), std::string::npos) << text;
}

TEST_F(CliTest, RasterEncoding) {
  const auto policy = write("p.json", R"({"rules": [[[0.4, 0.6], [1.0]], [[0.4, 0.6], [1.0]]]})");
  ASSERT_EQ(cmd_policy_raster(policy, out("r"), log_), kOk);
  std::istringstream csv(slurp(out("r") + "/raster.csv"));
  std::string header, first, second;
  std::getline(csv, header);
  std::getline(csv, first);
  std::getline(csv, second);
  EXPECT_EQ(header, "t,y,action,q");
  EXPECT_EQ(first, "1,3.3999999999999999,0,0.40000000000000002");
  EXPECT_EQ(second, "1,3.6000000000000001,1,0.59999999999999998");
  EXPECT_EQ(read_json(out("r") + "/stationarity.json")["t0"], 1);
}

TEST_F(CliTest, RasterDeterministicStationary) {
  const auto policy = write("p.json", R"({"rules": [[[1, 0], [0, 1]], [[1, 0], [0, 1]], [[1, 0], [0, 1]]]})");
  ASSERT_EQ(cmd_policy_raster(policy, out("r"), log_), kOk);
  std::istringstream csv(slurp(out("r") + "/raster.csv"));
  std::string line;
  int rows = 0;
  std::getline(csv, line);
  while (std::getline(csv, line)) {
    ++rows;
    EXPECT_EQ(line.substr(line.rfind(',') + 1), "1");
  }
  EXPECT_EQ(rows, 6);
  EXPECT_EQ(read_json(out("r") + "/stationarity.json")["t0"], 1);
}

TEST_F(CliTest, RasterRejectsMalformedPolicy) {
  EXPECT_THROW(cmd_policy_raster(write("p.json", R"({"rules": [[[0.5, 0.6]]]})"), out("r"), log_),
               io::ConfigError);
  EXPECT_THROW(cmd_policy_raster(write("q.json", R"({"rules": 3})"), out("r"), log_), io::ConfigError);
}

TEST_F(CliTest, VerifySmall) {
  ASSERT_EQ(cmd_verify("small", 1, out("v"), log_), kOk);
  const auto report = read_json(out("v") + "/verify.json");
  EXPECT_TRUE(report["passed"].get<bool>());
  bool corrupted = false;
  for (const auto& c : report["checks"]) corrupted = corrupted || c["name"] == "corrupted kernel is rejected";
  EXPECT_TRUE(corrupted);
}

TEST_F(CliTest, EvaluateStoredPolicy) {
  const auto policy = write("p.json", R"({"rules": [[[0.5, 0.5]]]})");
  ASSERT_EQ(cmd_evaluate(kConfigs + "/toy.json", policy, out("e"), log_), kOk);
  const auto e = read_json(out("e") + "/evaluation.json");
  EXPECT_NEAR(e["J_r"].get<double>(), 1.859141, 1e-6);
  EXPECT_FALSE(e["feasible"].get<bool>());
  EXPECT_NEAR(e["unconstrained_J_r"].get<double>(), std::exp(1.0), 1e-12);
}

}  // namespace
}  // namespace riskcmdp::cli
