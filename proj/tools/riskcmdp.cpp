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
// riskcmdp: solve, sweep, rasterize, evaluate and verify finite-horizon
// risk-sensitive constrained MDPs.

#include <cstdint>
#include <exception>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "riskcmdp/cli.hpp"

int main(int argc, char** argv) {
  using namespace riskcmdp;
  CLI::App app{"Finite-horizon risk-sensitive constrained MDP solver"};
  app.require_subcommand(1);

  std::string config, out = "out", policy, axis = "T", values, scale = "small", restart_mode;
  std::uint64_t seed = 1;
  std::size_t iters = 0, seeds = 1;

  auto add_solver_flags = [&](CLI::App* cmd) {
    cmd->add_option("--config", config, "Instance and solver JSON")->required()->check(CLI::ExistingFile);
    cmd->add_option("--seed", seed, "Seed of the first run");
    cmd->add_option("--seeds", seeds, "Independent runs executed in parallel; the best is kept");
    cmd->add_option("--iters", iters, "Iterate budget K");
    cmd->add_option("--restart-mode", restart_mode, "corner or interior")
        ->check(CLI::IsMember({"corner", "interior"}));
    cmd->add_option("--out", out, "Output directory");
  };

  auto* solve = app.add_subcommand("solve", "Run the global search on one instance");
  add_solver_flags(solve);
  auto* sweep = app.add_subcommand("sweep", "Solve over a range of horizons or risk factors");
  add_solver_flags(sweep);
  sweep->add_option("--axis", axis, "T or gamma")->check(CLI::IsMember({"T", "gamma"}));
  sweep->add_option("--values", values, "Comma-separated, strictly increasing")->required();
  auto* raster = app.add_subcommand("raster", "Policy raster and stationarity onset");
  raster->add_option("--policy", policy, "Policy JSON")->required()->check(CLI::ExistingFile);
  raster->add_option("--out", out, "Output directory");
  auto* evaluate = app.add_subcommand("evaluate", "Exact values of a stored policy");
  evaluate->add_option("--config", config, "Instance JSON")->required()->check(CLI::ExistingFile);
  evaluate->add_option("--policy", policy, "Policy JSON")->required()->check(CLI::ExistingFile);
  evaluate->add_option("--out", out, "Output directory");
  auto* verify = app.add_subcommand("verify", "Oracle and invariant battery");
  verify->add_option("--scale", scale, "small or full")->check(CLI::IsMember({"small", "full"}));
  verify->add_option("--seed", seed, "Seed of the instance generator");
  verify->add_option("--out", out, "Output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? cli::kOk : cli::kConfigError;
  }

  cli::Overrides overrides;
  if (app.got_subcommand(solve) || app.got_subcommand(sweep)) {
    auto* cmd = app.got_subcommand(solve) ? solve : sweep;
    if (cmd->count("--seed")) overrides.seed = seed;
    if (cmd->count("--iters")) overrides.iters = iters;
    if (!restart_mode.empty()) overrides.restart_mode = restart_mode;
    overrides.seeds = seeds;
  }

  try {
    if (app.got_subcommand(solve)) return cli::cmd_solve(config, overrides, out);
    if (app.got_subcommand(sweep)) return cli::cmd_sweep(config, axis, values, overrides, out);
    if (app.got_subcommand(raster)) return cli::cmd_policy_raster(policy, out);
    if (app.got_subcommand(evaluate)) return cli::cmd_evaluate(config, policy, out);
    return cli::cmd_verify(scale, seed, out);
  } catch (const io::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return cli::kConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return cli::kConfigError;
  }
}
