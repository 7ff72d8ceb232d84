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

// Oracle-equivalence and invariant battery. Each check draws its own instances
// from a seeded generator so results are reproducible.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <string>
#include <utility>
#include <vector>

#include "riskcmdp/evaluate.hpp"
#include "riskcmdp/grc.hpp"
#include "riskcmdp/lp.hpp"
#include "riskcmdp/model.hpp"
#include "riskcmdp/oracle.hpp"

namespace riskcmdp::verify {

struct Check {
  std::string name;
  bool passed = true;
  double deviation = 0.0;  ///< worst observed deviation
  double tolerance = 0.0;
  std::size_t cases = 0;
  double seconds = 0.0;
  std::string detail;
};

struct Report {
  std::vector<Check> checks;
  double seconds = 0.0;

  bool passed() const {
    return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.passed; });
  }
};

enum class Scale { small, full };

inline double deviation(double a, double b) { return std::abs(a - b); }

namespace detail {

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

inline Check start(std::string name, double tolerance) {
  Check check;
  check.name = std::move(name);
  check.tolerance = tolerance;
  return check;
}

inline void note(Check& check, double dev) {
  ++check.cases;
  if (!(dev <= check.deviation)) check.deviation = std::isnan(dev) ? INFINITY : dev;
}

inline Check finish(Check check, const Stopwatch& watch) {
  check.passed = check.passed && check.deviation <= check.tolerance;
  check.seconds = watch.seconds();
  return check;
}

}  // namespace detail

/// Single state, actions {0, 1}, T = 2, r = c = a, gamma = beta = 1,
/// B = e^{1/2}, maximize. The optimum mixes d(1) = (e^{1/2} - 1)/(e - 1).
inline RiskCmdpInstance toy_instance() {
  InstanceConfig config;
  config.horizon = 2;
  config.state_counts = {1, 1};
  config.kernel = {{{{1.0}, {1.0}}}};
  for (CostSpec* spec : {&config.reward, &config.constraint}) {
    spec->running = {{{{0.0}, {1.0}}}};
    spec->terminal = {0.0};
    spec->gamma = 1.0;
    spec->beta = 1.0;
    spec->alpha = {1.0};
  }
  config.bound = std::exp(0.5);
  config.sense = Sense::maximize;
  return build_instance(std::move(config));
}

inline double toy_optimal_mix() { return (std::exp(0.5) - 1.0) / (std::exp(1.0) - 1.0); }

/// Random small instances with the default generator options.
inline std::vector<RiskCmdpInstance> battery(std::size_t n, std::uint64_t seed,
                                             const oracle::RandomInstanceOptions& options = {}) {
  Rng rng(seed);
  std::vector<RiskCmdpInstance> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back(oracle::random_instance(rng, options));
  return out;
}

/// evaluate_risk, forward and backward factors against path enumeration.
inline Check check_factor_oracle(std::size_t n, std::uint64_t seed, double tol = 1e-12) {
  detail::Stopwatch watch;
  Check check = detail::start("factors match path enumeration", tol);
  Rng rng(seed ^ 0x9e3779b97f4a7c15ULL);
  for (const auto& instance : battery(n, seed)) {
    const Policy policy = random_policy(instance, RestartMode::interior, rng);
    for (CostKind kind : {CostKind::reward, CostKind::constraint}) {
      detail::note(check, deviation(evaluate_risk(instance, kind, policy),
                                    oracle::enumerate_paths_eval(instance, kind, policy)));
      const auto forward = forward_factors(instance, kind, policy);
      const auto theta = oracle::enumerate_forward_factors(instance, kind, policy);
      for (std::size_t t = 0; t < instance.horizon(); ++t)
        for (std::size_t x = 0; x < instance.states(t); ++x)
          detail::note(check, deviation(forward.theta[t][x], theta[t][x]));
      const auto backward = backward_factors(instance, kind, policy);
      for (std::size_t t = 0; t < instance.decision_epochs(); ++t)
        for (std::size_t x = 0; x < instance.states(t); ++x)
          for (std::size_t a = 0; a < instance.actions(t, x); ++a)
            detail::note(check, deviation(backward.q[t][x][a],
                                          oracle::enumerate_backward_factor(instance, kind, policy, t, x, a)));
    }
  }
  return detail::finish(check, watch);
}

/// f_t(other; factors of base) equals J of base with epoch t taken from other.
inline Check check_splice_identity(std::size_t n, std::uint64_t seed, double tol = 1e-10) {
  detail::Stopwatch watch;
  Check check = detail::start("surrogate equals spliced policy value", tol);
  Rng rng(seed ^ 0x5bd1e995ULL);
  for (const auto& instance : battery(n, seed)) {
    const Policy base = random_policy(instance, RestartMode::interior, rng);
    const Policy other = random_policy(instance, RestartMode::interior, rng);
    const std::size_t t = std::uniform_int_distribution<std::size_t>(0, instance.decision_epochs() - 1)(rng);
    for (CostKind kind : {CostKind::reward, CostKind::constraint}) {
      const auto factors = compute_factors(instance, kind, base);
      detail::note(check, deviation(f_linear(t, other, factors),
                                    oracle::enumerate_paths_eval(instance, kind, splice(base, other, t))));
    }
  }
  return detail::finish(check, watch);
}

/// f_t(policy; own factors) is the same for every t.
inline Check check_surrogate_invariance(std::size_t n, std::uint64_t seed, double tol = 1e-10) {
  detail::Stopwatch watch;
  Check check = detail::start("surrogate is constant over epochs", tol);
  Rng rng(seed ^ 0x2545f4914f6cdd1dULL);
  for (const auto& instance : battery(n, seed)) {
    const Policy policy = random_policy(instance, RestartMode::interior, rng);
    for (CostKind kind : {CostKind::reward, CostKind::constraint}) {
      const auto factors = compute_factors(instance, kind, policy);
      const double j = oracle::enumerate_paths_eval(instance, kind, policy);
      for (std::size_t t = 0; t < instance.decision_epochs(); ++t)
        detail::note(check, deviation(f_linear(t, policy, factors), j));
    }
  }
  return detail::finish(check, watch);
}

/// Simplex optimum of every epoch LP against vertex enumeration.
inline Check check_epoch_lps(std::size_t n, std::uint64_t seed, double tol = 1e-9) {
  detail::Stopwatch watch;
  Check check = detail::start("epoch LP optimum matches vertex enumeration", tol);
  Rng rng(seed ^ 0x94d049bb133111ebULL);
  for (const auto& raw : battery(n, seed)) {
    const auto instance = oracle::with_binding_bound(raw, 0.5);
    const Policy policy = random_policy(instance, RestartMode::interior, rng);
    const auto reward = compute_factors(instance, CostKind::reward, policy);
    const auto constraint = compute_factors(instance, CostKind::constraint, policy);
    for (std::size_t t = 0; t < instance.decision_epochs(); ++t) {
      const auto lp = build_epoch_lp(t, reward, constraint, instance.bound(), instance.sense());
      const auto simplex = solve_epoch_lp(lp);
      const auto vertex = oracle::enumerate_epoch_lp_vertices(lp);
      if (!vertex) {
        if (simplex.status != LpStatus::infeasible) check.passed = false;
        ++check.cases;
        continue;
      }
      if (simplex.status != LpStatus::optimal) {
        check.passed = false;
        check.detail = "simplex reported a feasible epoch LP as " + std::string(to_string(simplex.status));
        ++check.cases;
        continue;
      }
      detail::note(check, deviation(simplex.objective, vertex->objective));
    }
  }
  return detail::finish(check, watch);
}

/// With B = infinity the search reaches the dynamic-programming value.
inline Check check_unconstrained(std::size_t n, std::uint64_t seed, const GrcConfig& config, double tol = 1e-4) {
  detail::Stopwatch watch;
  Check check = detail::start("unconstrained search matches dynamic programming", tol);
  oracle::RandomInstanceOptions options;
  options.max_horizon = 6;
  for (const auto& instance : battery(n, seed, options)) {
    const auto result = run_grc(instance, config);
    const double dp = dp_value(instance, CostKind::reward, unconstrained_dp(instance, CostKind::reward));
    detail::note(check, result.feasible_ever ? deviation(result.best_j_r, dp) : INFINITY);
  }
  return detail::finish(check, watch);
}

/// corner optimum <= search optimum + tol <= unconstrained optimum + 1e-9
/// (maximize; reversed for minimize). The deviation is the worst violation.
inline Check check_sandwich(const std::vector<RiskCmdpInstance>& instances, const GrcConfig& config,
                            double tol = 1e-4) {
  detail::Stopwatch watch;
  Check check = detail::start("corner <= search <= unconstrained", 0.0);
  for (const auto& instance : instances) {
    const auto result = run_grc(instance, config);
    if (!result.feasible_ever) {
      check.passed = false;
      check.detail = "search found no feasible policy";
      ++check.cases;
      continue;
    }
    const double sign = instance.sense() == Sense::maximize ? 1.0 : -1.0;
    const double j = sign * result.best_j_r;
    const double dp = sign * dp_value(instance, CostKind::reward, unconstrained_dp(instance, CostKind::reward));
    double violation = std::max(0.0, j - (dp + 1e-9));
    const auto corner = oracle::corner_policy_search(instance);
    if (corner.best) violation = std::max(violation, sign * corner.value - (j + tol));
    detail::note(check, violation);
  }
  return detail::finish(check, watch);
}

/// Constrained instances with one state, two actions and two decision epochs,
/// with B between the cheapest and the reward-greedy constraint value.
inline std::vector<RiskCmdpInstance> tiny_constrained(std::size_t n, std::uint64_t seed) {
  oracle::RandomInstanceOptions options;
  options.max_states = 1;
  options.min_actions = options.max_actions = 2;
  options.min_horizon = options.max_horizon = 3;
  std::vector<RiskCmdpInstance> out;
  for (const auto& instance : battery(n, seed, options)) out.push_back(oracle::with_binding_bound(instance, 0.5));
  return out;
}

/// The grid-search optimum nearly solves its own LP: residual <= tol.
inline Check check_grid_witness(const std::vector<RiskCmdpInstance>& instances, std::size_t resolution,
                                double tol = 5e-3) {
  detail::Stopwatch watch;
  Check check = detail::start("grid optimum is a near fixed point", tol);
  for (const auto& instance : instances) {
    const auto grid = oracle::randomized_grid_search(instance, resolution);
    const auto residual = grid.best ? fixed_point_residual(instance, *grid.best) : std::nullopt;
    detail::note(check, residual ? std::abs(*residual) : INFINITY);
  }
  return detail::finish(check, watch);
}

/// Closed-form toy: value, mixing weight and residual at the returned policy.
inline Check check_toy(const GrcConfig& config, double tol = 1e-4) {
  detail::Stopwatch watch;
  Check check = detail::start("constrained toy closed form", tol);
  const auto instance = toy_instance();
  const auto result = run_grc(instance, config);
  if (!result.feasible_ever) {
    check.passed = false;
    check.detail = "no feasible policy";
    return detail::finish(check, watch);
  }
  detail::note(check, std::abs(result.best_j_r - std::exp(0.5)));
  const double mix_error = std::abs(result.best.rules[0][0][1] - toy_optimal_mix());
  const double residual = result.residual.value_or(INFINITY);
  check.passed = mix_error <= 1e-3 && residual <= 1e-6;
  char buffer[96];
  std::snprintf(buffer, sizeof buffer, "mix error %.3g, residual %.3g", mix_error, residual);
  check.detail = buffer;
  return detail::finish(check, watch);
}

/// A kernel row summing to 1.1 must be rejected at construction.
inline Check check_corrupted_kernel() {
  detail::Stopwatch watch;
  Check check = detail::start("corrupted kernel is rejected", 0.0);
  auto config = toy_instance().config();
  config.kernel[0][0][1] = {1.1};
  ++check.cases;
  try {
    build_instance(config);
    check.passed = false;
    check.detail = "instance was accepted";
  } catch (const ValidationError& e) {
    check.detail = e.what();
  }
  return detail::finish(check, watch);
}

/// The whole battery; `full` enlarges the instance counts and adds the toy.
inline Report run_suite(Scale scale, std::uint64_t seed = 1, const GrcConfig& config = {}) {
  detail::Stopwatch watch;
  const bool full = scale == Scale::full;
  Report report;
  report.checks.push_back(check_factor_oracle(full ? 100 : 20, seed));
  report.checks.push_back(check_splice_identity(full ? 50 : 20, seed + 1));
  report.checks.push_back(check_surrogate_invariance(full ? 50 : 20, seed + 2));
  report.checks.push_back(check_epoch_lps(full ? 100 : 20, seed + 3));
  GrcConfig grc = config;
  grc.max_iters = 3000;
  report.checks.push_back(check_unconstrained(full ? 20 : 5, seed + 4, grc));
  const auto tiny = tiny_constrained(full ? 5 : 2, seed + 5);
  report.checks.push_back(check_grid_witness(tiny, full ? 200 : 50, full ? 5e-3 : 5e-2));
  report.checks.push_back(check_sandwich(tiny, grc));
  report.checks.push_back(check_corrupted_kernel());
  if (full) report.checks.push_back(check_toy(grc));
  report.seconds = watch.seconds();
  return report;
}

}  // namespace riskcmdp::verify
