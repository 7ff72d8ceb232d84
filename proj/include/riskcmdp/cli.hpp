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
#pragma once

// Command implementations behind the riskcmdp executable. Each command writes
// its artifacts into an output directory and finishes with manifest.json.
//
// Exit codes: 0 success, 1 configuration error, 2 no feasible policy found,
// 3 verification failure.

#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "riskcmdp/grc.hpp"
#include "riskcmdp/io.hpp"
#include "riskcmdp/model.hpp"
#include "riskcmdp/verify.hpp"

namespace riskcmdp::cli {

using nlohmann::json;
namespace fs = std::filesystem;

enum ExitCode : int { kOk = 0, kConfigError = 1, kInfeasible = 2, kVerifyFailed = 3 };

struct RunManifest {
  std::string command;
  std::string config_path;
  std::vector<std::uint64_t> seeds;
  std::string out_dir;
  std::vector<std::string> artifacts;  ///< file names relative to out_dir
  double seconds = 0.0;
};

inline json to_json(const RunManifest& m) {
  return json{{"command", m.command}, {"config", m.config_path}, {"seeds", m.seeds},
              {"out_dir", m.out_dir}, {"artifacts", m.artifacts}, {"seconds", m.seconds}};
}

/// Command-line overrides applied on top of the config file's solver block.
struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> iters;
  std::optional<std::string> restart_mode;
  std::size_t seeds = 1;
};

struct LoadedConfig {
  json document;
  RiskCmdpInstance instance;
  GrcConfig solver;
};

namespace detail {

class Session {
 public:
  Session(std::string command, std::string config_path, std::string out_dir) {
    manifest_.command = std::move(command);
    manifest_.config_path = std::move(config_path);
    manifest_.out_dir = std::move(out_dir);
    fs::create_directories(manifest_.out_dir);
  }

  RunManifest& manifest() { return manifest_; }

  /// Opens out_dir/name for writing and records it as an artifact.
  std::ofstream open(const std::string& name) {
    std::ofstream out(fs::path(manifest_.out_dir) / name);
    if (!out) throw std::runtime_error("cannot write " + (fs::path(manifest_.out_dir) / name).string());
    manifest_.artifacts.push_back(name);
    return out;
  }

  void write_json(const std::string& name, const json& value) { open(name) << value.dump(2) << '\n'; }

  RunManifest finish() {
    manifest_.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    std::ofstream out(fs::path(manifest_.out_dir) / "manifest.json");
    out << to_json(manifest_).dump(2) << '\n';
    return manifest_;
  }

 private:
  RunManifest manifest_;
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

inline void apply(const Overrides& o, GrcConfig& config) {
  if (o.seed) config.seed = *o.seed;
  if (o.iters) config.max_iters = *o.iters;
  if (o.restart_mode) {
    if (*o.restart_mode == "corner") config.restart_mode = RestartMode::corner;
    else if (*o.restart_mode == "interior") config.restart_mode = RestartMode::interior;
    else throw io::ConfigError("--restart-mode: expected corner or interior");
  }
  if (o.seeds == 0) throw io::ConfigError("--seeds: must be at least 1");
  try {
    validate_config(config);
  } catch (const ValidationError& e) {
    throw io::ConfigError(std::string("solver: ") + e.what());
  }
}

inline double normalized(double j, double gamma) { return std::log(j) / gamma; }

/// Best result over `seeds` runs started at config.seed.
struct Solved {
  std::vector<GrcResult> runs;
  std::size_t best = 0;
  bool feasible() const { return best < runs.size(); }
  const GrcResult& result() const { return runs[best]; }
};

inline Solved solve(const RiskCmdpInstance& instance, const GrcConfig& config, std::size_t seeds) {
  Solved s;
  s.runs = seeds == 1 ? std::vector<GrcResult>{run_grc(instance, config)} : run_grc_seeds(instance, config, seeds);
  s.best = best_result(instance, s.runs);
  return s;
}

inline json summary(const RiskCmdpInstance& instance, const GrcResult& r) {
  const double gr = instance.cost(CostKind::reward).gamma, gc = instance.cost(CostKind::constraint).gamma;
  return json{{"seed", r.seed},
              {"feasible", r.feasible_ever},
              {"J_r", io::json_number(r.best_j_r)},
              {"J_c", io::json_number(r.best_j_c)},
              {"v_r", io::json_number(r.feasible_ever ? normalized(r.best_j_r, gr) : NAN)},
              {"v_c", io::json_number(r.feasible_ever ? normalized(r.best_j_c, gc) : NAN)},
              {"residual", r.residual ? io::json_number(*r.residual) : json(nullptr)},
              {"iterations", r.iterations},
              {"random_restarts", r.random_restarts},
              {"infeasible_restarts", r.infeasible_restarts},
              {"lp_infeasible_restarts", r.lp_infeasible_restarts}};
}

inline std::vector<double> parse_values(const std::string& text) {
  std::vector<double> values;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      values.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw io::ConfigError("--values: cannot parse \"" + item + "\"");
    }
  }
  if (values.empty()) throw io::ConfigError("--values: expected a comma-separated list");
  for (std::size_t i = 1; i < values.size(); ++i)
    if (!(values[i] > values[i - 1])) throw io::ConfigError("--values: must be strictly increasing");
  return values;
}

/// Copy of the document with the sweep axis set to `value`.
inline json with_axis(json doc, const std::string& axis, double value) {
  json& target = doc.contains("inventory") ? doc["inventory"] : doc;
  if (axis == "T") {
    if (value < 2 || value != std::floor(value)) throw io::ConfigError("T values must be integers >= 2");
    target["horizon"] = static_cast<std::size_t>(value);
  } else if (doc.contains("inventory")) {
    target["gamma"] = value;
  } else {
    doc["reward"]["gamma"] = value;
  }
  return doc;
}

}  // namespace detail

/// Parses a config file: instance fields (or an "inventory" block) plus an
/// optional "solver" block.
inline LoadedConfig load_config(const std::string& path, const Overrides& overrides) {
  json doc = io::parse(io::read_file(path), path);
  GrcConfig solver;
  if (doc.contains("solver")) io::apply_solver_json(doc.at("solver"), solver);
  detail::apply(overrides, solver);
  auto instance = io::instance_from_json(doc);
  return {std::move(doc), std::move(instance), solver};
}

/// Runs the search and writes policy.json, trace CSV(s) and result.json.
inline int cmd_solve(const std::string& config_path, const Overrides& overrides, const std::string& out_dir,
                     std::ostream& log = std::cout) {
  const auto loaded = load_config(config_path, overrides);
  detail::Session session("solve", config_path, out_dir);
  const auto solved = detail::solve(loaded.instance, loaded.solver, overrides.seeds);
  for (const auto& run : solved.runs) session.manifest().seeds.push_back(run.seed);

  if (solved.runs.size() == 1) {
    auto out = session.open("trace.csv");
    io::write_trace_csv(out, solved.runs[0].trace);
  } else {
    for (const auto& run : solved.runs) {
      auto out = session.open("trace_seed" + std::to_string(run.seed) + ".csv");
      io::write_trace_csv(out, run.trace);
    }
  }

  json result{{"solver", io::to_json(loaded.solver)},
              {"sense", to_string(loaded.instance.sense())},
              {"bound", io::json_number(loaded.instance.bound())},
              {"feasible", solved.feasible()}};
  if (loaded.document.contains("inventory"))
    result["inventory"] = io::to_json(io::inventory_params_from_json(loaded.document.at("inventory")));
  json runs = json::array();
  for (const auto& run : solved.runs) runs.push_back(detail::summary(loaded.instance, run));
  result["runs"] = runs;
  if (solved.feasible()) {
    result["best"] = detail::summary(loaded.instance, solved.result());
    session.write_json("policy.json", io::to_json(solved.result().best));
  }
  session.write_json("result.json", result);
  session.finish();

  if (!solved.feasible()) {
    log << "no feasible policy found\n";
    return kInfeasible;
  }
  const auto& best = result["best"];
  log << "J_r* = " << best["J_r"] << "  J_c* = " << best["J_c"] << "  v_r = " << best["v_r"]
      << "  v_c = " << best["v_c"] << "  residual = " << best["residual"] << '\n';
  return kOk;
}

/// One row per axis value with the best result over seeds. Failed points keep
/// their row with empty values and feasible = 0.
inline int cmd_sweep(const std::string& config_path, const std::string& axis, const std::string& values_text,
                     const Overrides& overrides, const std::string& out_dir, std::ostream& log = std::cout) {
  if (axis != "T" && axis != "gamma") throw io::ConfigError("--axis: expected T or gamma");
  const auto values = detail::parse_values(values_text);
  const json doc = io::parse(io::read_file(config_path), config_path);
  GrcConfig solver;
  if (doc.contains("solver")) io::apply_solver_json(doc.at("solver"), solver);
  detail::apply(overrides, solver);

  detail::Session session("sweep", config_path, out_dir);
  for (std::size_t i = 0; i < overrides.seeds; ++i) session.manifest().seeds.push_back(solver.seed + i);
  auto out = session.open("sweep.csv");
  out << "axis_value,v_r,v_c,feasible,iterations,seconds\n";
  bool any_feasible = false;
  for (double value : values) {
    const auto start = std::chrono::steady_clock::now();
    double v_r = NAN, v_c = NAN;
    bool feasible = false;
    std::size_t iterations = 0;
    try {
      const auto instance = io::instance_from_json(detail::with_axis(doc, axis, value));
      const auto solved = detail::solve(instance, solver, overrides.seeds);
      for (const auto& run : solved.runs) iterations += run.iterations;
      if (solved.feasible()) {
        feasible = true;
        v_r = detail::normalized(solved.result().best_j_r, instance.cost(CostKind::reward).gamma);
        v_c = detail::normalized(solved.result().best_j_c, instance.cost(CostKind::constraint).gamma);
      }
    } catch (const std::exception& e) {
      log << axis << " = " << value << ": " << e.what() << '\n';
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    any_feasible = any_feasible || feasible;
    out << io::csv_number(value) << ',' << io::csv_number(v_r) << ',' << io::csv_number(v_c) << ','
        << (feasible ? 1 : 0) << ',' << iterations << ',' << io::csv_number(seconds) << '\n';
    out.flush();
    log << axis << " = " << value << "  v_r = " << v_r << "  v_c = " << v_c << (feasible ? "" : "  (infeasible)")
        << '\n';
  }
  out.close();
  session.finish();
  return any_feasible ? kOk : kInfeasible;
}

/// Raster rows (t, y, action, q) with y = 3(x+1) + q for every q > 1e-6, t
/// 1-based; the onset of the stationary tail goes to stationarity.json.
inline int cmd_policy_raster(const std::string& policy_path, const std::string& out_dir,
                             std::ostream& log = std::cout) {
  const Policy policy = io::load_policy(policy_path);
  for (const auto& epoch : policy.rules)
    for (const auto& rule : epoch) {
      double total = 0.0;
      for (double q : rule) {
        if (!(q >= 0.0)) throw io::ConfigError(policy_path + ": negative or non-numeric probability");
        total += q;
      }
      if (std::abs(total - 1.0) > 1e-8) throw io::ConfigError(policy_path + ": a decision rule does not sum to 1");
    }

  detail::Session session("raster", policy_path, out_dir);
  {
    auto out = session.open("raster.csv");
    out << "t,y,action,q\n";
    for (std::size_t t = 0; t < policy.rules.size(); ++t)
      for (std::size_t x = 0; x < policy.rules[t].size(); ++x)
        for (std::size_t a = 0; a < policy.rules[t][x].size(); ++a) {
          const double q = policy.rules[t][x][a];
          if (q <= 1e-6) continue;
          out << t + 1 << ',' << io::csv_number(3.0 * static_cast<double>(x + 1) + q) << ',' << a << ','
              << io::csv_number(q) << '\n';
        }
  }
  const std::size_t onset = stationarity_onset(policy, 1e-3) + 1;
  session.write_json("stationarity.json",
                     json{{"t0", onset}, {"tolerance", 1e-3}, {"decision_epochs", policy.rules.size()}});
  session.finish();
  log << "stationary from t0 = " << onset << " of " << policy.rules.size() << " decision epochs\n";
  return kOk;
}

inline json to_json(const verify::Report& report) {
  json checks = json::array();
  for (const auto& c : report.checks)
    checks.push_back(json{{"name", c.name},
                          {"passed", c.passed},
                          {"max_deviation", io::json_number(c.deviation)},
                          {"tolerance", c.tolerance},
                          {"cases", c.cases},
                          {"seconds", c.seconds},
                          {"detail", c.detail}});
  return json{{"passed", report.passed()}, {"seconds", report.seconds}, {"checks", checks}};
}

/// Oracle battery; writes verify.json.
inline int cmd_verify(const std::string& scale, std::uint64_t seed, const std::string& out_dir,
                      std::ostream& log = std::cout) {
  if (scale != "small" && scale != "full") throw io::ConfigError("--scale: expected small or full");
  detail::Session session("verify", "", out_dir);
  session.manifest().seeds.push_back(seed);
  const auto report = verify::run_suite(scale == "full" ? verify::Scale::full : verify::Scale::small, seed);
  session.write_json("verify.json", to_json(report));
  session.finish();
  for (const auto& c : report.checks)
    log << (c.passed ? "PASS " : "FAIL ") << c.name << "  max deviation " << c.deviation << " (tol " << c.tolerance
        << ", " << c.cases << " cases)" << (c.detail.empty() ? "" : "  " + c.detail) << '\n';
  return report.passed() ? kOk : kVerifyFailed;
}

/// Exact values of a stored policy under a config; writes evaluation.json.
inline int cmd_evaluate(const std::string& config_path, const std::string& policy_path, const std::string& out_dir,
                        std::ostream& log = std::cout) {
  const auto loaded = load_config(config_path, {});
  const Policy policy = io::load_policy(policy_path);
  try {
    validate_policy(loaded.instance, policy);
  } catch (const ValidationError& e) {
    throw io::ConfigError(policy_path + ": " + e.what());
  }
  const auto& instance = loaded.instance;
  const double j_r = evaluate_risk(instance, CostKind::reward, policy);
  const double j_c = evaluate_risk(instance, CostKind::constraint, policy);
  const auto residual = fixed_point_residual(instance, policy);
  const double dp = dp_value(instance, CostKind::reward, unconstrained_dp(instance, CostKind::reward));
  const json out{{"J_r", io::json_number(j_r)},
                 {"J_c", io::json_number(j_c)},
                 {"v_r", io::json_number(detail::normalized(j_r, instance.cost(CostKind::reward).gamma))},
                 {"v_c", io::json_number(detail::normalized(j_c, instance.cost(CostKind::constraint).gamma))},
                 {"feasible", j_c <= instance.bound()},
                 {"residual", residual ? io::json_number(*residual) : json(nullptr)},
                 {"unconstrained_J_r", io::json_number(dp)}};
  detail::Session session("evaluate", config_path, out_dir);
  session.write_json("evaluation.json", out);
  session.finish();
  log << out.dump(2) << '\n';
  return kOk;
}

}  // namespace riskcmdp::cli
