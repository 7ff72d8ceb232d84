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

// Local improvement Pi_{k+1} = Pi_k + eps_k (Psi(Pi_k) - Pi_k) and the global
// random-restart search over Markovian policies.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <future>
#include <limits>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "riskcmdp/evaluate.hpp"
#include "riskcmdp/lp.hpp"
#include "riskcmdp/model.hpp"

namespace riskcmdp {

struct GrcConfig {
  std::size_t max_iters = 5000;
  double restart_weight = 5.0;  ///< w in p_k = min(1, w/k)
  double step_c = 50.0;         ///< eps_k = c / (k0 + k)
  double step_k0 = 50.0;
  RestartMode restart_mode = RestartMode::corner;
  std::uint64_t seed = 1;
  double feasibility_tol = 1e-6;  ///< relative slack on B
  double residual_tol = 1e-9;
  bool early_stop = false;
  std::size_t early_stop_window = 50;
  std::size_t trace_stride = 1;
  bool randomize_ties = false;
};

inline void validate_config(const GrcConfig& config) {
  using detail::require;
  require(config.max_iters >= 1, "max_iters must be positive");
  require(config.restart_weight > 0.0, "restart weight w must be positive");
  require(config.step_c > 0.0 && config.step_k0 >= 0.0, "step schedule needs c > 0 and k0 >= 0");
  require(config.step_c < config.step_k0 + 1.0, "step schedule must satisfy c < k0 + 1 so that eps_k < 1");
  require(config.feasibility_tol >= 0.0 && config.residual_tol >= 0.0, "tolerances must be nonnegative");
  require(config.trace_stride >= 1, "trace stride must be positive");
}

/// eps_k = c / (k0 + k), k >= 1.
inline double step_size(std::size_t k, const GrcConfig& config) {
  return config.step_c / (config.step_k0 + static_cast<double>(k));
}

/// p_k = min(1, w / k), k >= 1.
inline double restart_probability(std::size_t k, double w) { return std::min(1.0, w / static_cast<double>(k)); }

inline Policy local_improve(const Policy& current, const Policy& target, double eps) {
  if (!same_shape(current, target)) throw ValidationError("local_improve: policies have different shapes");
  Policy next = current;
  for (std::size_t t = 0; t < next.rules.size(); ++t)
    for (std::size_t x = 0; x < next.rules[t].size(); ++x)
      for (std::size_t a = 0; a < next.rules[t][x].size(); ++a) {
        const double d = current.rules[t][x][a];
        next.rules[t][x][a] = d + eps * (target.rules[t][x][a] - d);
      }
  return next;
}

/// Sense-oriented gap sum_t f_t(Psi) - sum_t f_t(policy) of an already solved
/// LP(policy); nonnegative up to rounding and zero at fixed points.
inline double residual_from_lp(const RiskCmdpInstance& instance, const Policy& policy, const FactorSet& reward,
                               const PolicyLp& lp) {
  double gap = 0.0;
  for (std::size_t t = 0; t < lp.epoch_objectives.size(); ++t)
    gap += lp.epoch_objectives[t] - f_linear(t, policy, reward);
  return instance.sense() == Sense::maximize ? gap : -gap;
}

/// Fixed-point residual of `policy`; nullopt when LP(policy) is infeasible.
inline std::optional<double> fixed_point_residual(const RiskCmdpInstance& instance, const Policy& policy,
                                                  const LpOptions& options = {}) {
  const auto reward = compute_factors(instance, CostKind::reward, policy);
  const auto constraint = compute_factors(instance, CostKind::constraint, policy);
  const auto lp = solve_lp_of_policy(instance, reward, constraint, options);
  if (lp.status != LpStatus::optimal) return std::nullopt;
  return residual_from_lp(instance, policy, reward, lp);
}

struct TraceRow {
  std::size_t k = 0;
  bool restarted = false;
  double j_r = 0.0;
  double j_c = 0.0;
  bool feasible = false;
  double best_j_r = std::numeric_limits<double>::quiet_NaN();
  double residual = std::numeric_limits<double>::quiet_NaN();
};

struct GrcResult {
  Policy best;
  double best_j_r = std::numeric_limits<double>::quiet_NaN();
  double best_j_c = std::numeric_limits<double>::quiet_NaN();
  std::optional<double> residual;
  std::vector<TraceRow> trace;
  std::size_t iterations = 0;
  bool feasible_ever = false;
  std::size_t random_restarts = 0;
  std::size_t infeasible_restarts = 0;     ///< J_c > B
  std::size_t lp_infeasible_restarts = 0;  ///< LP(Pi_k) had no solution
  std::uint64_t seed = 0;
};

class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline GrcResult run_grc(const RiskCmdpInstance& instance, const GrcConfig& config, Rng& rng) {
  validate_config(config);
  GrcResult result;
  result.seed = config.seed;
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  LpOptions lp_options;
  lp_options.randomize_ties = config.randomize_ties;
  lp_options.rng = &rng;

  Policy current = random_policy(instance, config.restart_mode, rng);
  result.best = current;
  std::optional<FactorSet> reward, constraint;
  bool have_best = false;
  std::size_t quiet_streak = 0;
  const double limit = instance.bound() * (1.0 + config.feasibility_tol);

  for (std::size_t k = 1; k <= config.max_iters; ++k) {
    bool restarted = false;
    if (coin(rng) < restart_probability(k, config.restart_weight)) {
      current = random_policy(instance, config.restart_mode, rng);
      restarted = true;
      ++result.random_restarts;
    } else {
      if (!reward) {
        reward = compute_factors(instance, CostKind::reward, current);
        constraint = compute_factors(instance, CostKind::constraint, current);
      }
      const auto lp = solve_lp_of_policy(instance, *reward, *constraint, lp_options);
      if (lp.status != LpStatus::optimal) {
        current = random_policy(instance, config.restart_mode, rng);
        restarted = true;
        ++result.lp_infeasible_restarts;
      } else {
        const double residual = residual_from_lp(instance, current, *reward, lp);
        if (!result.trace.empty() && result.trace.back().k == k - 1) result.trace.back().residual = residual;
        quiet_streak = residual < config.residual_tol ? quiet_streak + 1 : 0;
        current = local_improve(current, lp.psi, step_size(k, config));
      }
    }
    if (restarted) quiet_streak = 0;

    reward = compute_factors(instance, CostKind::reward, current);
    constraint = compute_factors(instance, CostKind::constraint, current);
    const double j_c = f_linear(0, current, *constraint);
    const double j_r = f_linear(0, current, *reward);
    if (!std::isfinite(j_c) || !std::isfinite(j_r))
      throw NumericError("non-finite risk value at iterate " + std::to_string(k));

    const bool feasible = j_c <= limit;
    if (feasible) {
      if (!have_best || instance.better(j_r, result.best_j_r)) {
        have_best = true;
        result.best = current;
        result.best_j_r = j_r;
        result.best_j_c = j_c;
      }
    }
    if (k % config.trace_stride == 0 || k == config.max_iters) {
      TraceRow row;
      row.k = k;
      row.restarted = restarted;
      row.j_r = j_r;
      row.j_c = j_c;
      row.feasible = feasible;
      row.best_j_r = have_best ? result.best_j_r : std::numeric_limits<double>::quiet_NaN();
      result.trace.push_back(row);
    }
    result.iterations = k;
    if (!feasible) {
      current = random_policy(instance, config.restart_mode, rng);
      reward.reset();
      constraint.reset();
      ++result.infeasible_restarts;
      quiet_streak = 0;
    }
    if (config.early_stop && quiet_streak >= config.early_stop_window) break;
  }

  result.feasible_ever = have_best;
  if (have_best) result.residual = fixed_point_residual(instance, result.best);
  return result;
}

inline GrcResult run_grc(const RiskCmdpInstance& instance, const GrcConfig& config) {
  Rng rng(config.seed);
  return run_grc(instance, config, rng);
}

/// Index of the best feasible result under the instance sense; ties keep the
/// earliest. Returns results.size() when none is feasible.
inline std::size_t best_result(const RiskCmdpInstance& instance, const std::vector<GrcResult>& results) {
  std::size_t best = results.size();
  for (std::size_t i = 0; i < results.size(); ++i) {
    if (!results[i].feasible_ever) continue;
    if (best == results.size() || instance.better(results[i].best_j_r, results[best].best_j_r)) best = i;
  }
  return best;
}

/// Independent runs seeded seed, seed+1, ..., executed concurrently over the
/// shared instance.
inline std::vector<GrcResult> run_grc_seeds(const RiskCmdpInstance& instance, const GrcConfig& config,
                                            std::size_t n_seeds) {
  std::vector<std::future<GrcResult>> jobs;
  jobs.reserve(n_seeds);
  for (std::size_t i = 0; i < n_seeds; ++i) {
    GrcConfig run = config;
    run.seed = config.seed + i;
    jobs.push_back(std::async(std::launch::async, [&instance, run] { return run_grc(instance, run); }));
  }
  std::vector<GrcResult> results;
  results.reserve(n_seeds);
  for (auto& job : jobs) results.push_back(job.get());
  return results;
}

}  // namespace riskcmdp
