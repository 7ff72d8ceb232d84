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

// Desk-scale brute-force references: trajectory enumeration for risk values
// and factors, exhaustive search over deterministic and grid policies, a
// closed-form vertex enumeration for epoch LPs, and a random instance
// generator for self-consistency sweeps.
//
// Nothing here reuses the recursions in evaluate.hpp or the simplex kernel,
// except the policy searches, which score candidates with evaluate_risk.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "riskcmdp/evaluate.hpp"
#include "riskcmdp/lp.hpp"
#include "riskcmdp/model.hpp"

namespace riskcmdp::oracle {

/// The requested enumeration exceeds its hard size cap.
class CapExceeded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr double kPathCap = 1e7;
inline constexpr double kCornerCap = 1e6;
inline constexpr double kGridCap = 1e7;

struct Trajectory {
  std::vector<std::size_t> states;   ///< x_1..x_T
  std::vector<std::size_t> actions;  ///< a_1..a_{T-1}
  double probability = 0.0;
  double exp_cost = 0.0;  ///< exp(sum of scaled costs along the path)
};

struct PathEnumeration {
  std::vector<Trajectory> paths;
  double total_probability = 0.0;
};

/// |S_first| * prod_{t=first}^{last-1} (max_x |A_{t,x}| * |S_{t+1}|).
inline double path_count(const RiskCmdpInstance& instance, std::size_t first, std::size_t last) {
  double count = static_cast<double>(instance.states(first));
  for (std::size_t t = first; t < last; ++t) {
    std::size_t widest = 0;
    for (std::size_t x = 0; x < instance.states(t); ++x) widest = std::max(widest, instance.actions(t, x));
    count *= static_cast<double>(widest) * static_cast<double>(instance.states(t + 1));
  }
  return count;
}

namespace detail {

/// Depth-first walk over (x_t, a_t, x_{t+1}, ...) from epoch `first` until
/// epoch `last`, visiting every full segment with its probability weight and
/// accumulated scaled cost (terminal cost excluded).
class Walker {
 public:
  using Visit = std::function<void(const std::vector<std::size_t>&, const std::vector<std::size_t>&, double, double)>;

  Walker(const RiskCmdpInstance& instance, CostKind kind, const Policy& policy, std::size_t last)
      : instance_(instance), costs_(instance.scaled(kind)), policy_(policy), last_(last) {}

  void run(std::size_t first, std::size_t x, double weight, double cost, const Visit& visit) {
    states_.assign(1, x);
    actions_.clear();
    step(first, weight, cost, visit);
  }

  /// Like run(), but the first action is fixed instead of drawn from the policy.
  void run_from_action(std::size_t first, std::size_t x, std::size_t a, const Visit& visit) {
    states_.assign(1, x);
    actions_.assign(1, a);
    const auto& row = instance_.kernel(first, x, a);
    for (std::size_t y = 0; y < row.size(); ++y) {
      if (row[y] == 0.0) continue;
      states_.push_back(y);
      step(first + 1, row[y], costs_.running[first][x][a][y], visit);
      states_.pop_back();
    }
  }

 private:
  void step(std::size_t t, double weight, double cost, const Visit& visit) {
    if (t == last_) {
      visit(states_, actions_, weight, cost);
      return;
    }
    const std::size_t x = states_.back();
    const auto& rule = policy_.rules[t][x];
    for (std::size_t a = 0; a < rule.size(); ++a) {
      if (rule[a] == 0.0) continue;
      const auto& row = instance_.kernel(t, x, a);
      actions_.push_back(a);
      for (std::size_t y = 0; y < row.size(); ++y) {
        if (row[y] == 0.0) continue;
        states_.push_back(y);
        step(t + 1, weight * rule[a] * row[y], cost + costs_.running[t][x][a][y], visit);
        states_.pop_back();
      }
      actions_.pop_back();
    }
  }

  const RiskCmdpInstance& instance_;
  const ScaledCosts& costs_;
  const Policy& policy_;
  std::size_t last_;
  std::vector<std::size_t> states_;
  std::vector<std::size_t> actions_;
};

inline void check_cap(double count, double cap, const char* what) {
  if (count > cap) throw CapExceeded(std::string(what) + ": enumeration size exceeds the oracle cap");
}

}  // namespace detail

/// Every trajectory with positive probability, with its weight and exp-cost.
inline PathEnumeration enumerate_paths(const RiskCmdpInstance& instance, CostKind kind, const Policy& policy,
                                       double cap = kPathCap) {
  detail::check_cap(path_count(instance, 0, instance.horizon() - 1), cap, "enumerate_paths");
  PathEnumeration out;
  const auto& alpha = instance.alpha(kind);
  const auto& terminal = instance.scaled(kind).terminal;
  detail::Walker walker(instance, kind, policy, instance.horizon() - 1);
  for (std::size_t x = 0; x < alpha.size(); ++x) {
    if (alpha[x] == 0.0) continue;
    walker.run(0, x, alpha[x], 0.0,
               [&](const std::vector<std::size_t>& xs, const std::vector<std::size_t>& as, double w, double c) {
                 out.paths.push_back({xs, as, w, std::exp(c + terminal[xs.back()])});
                 out.total_probability += w;
               });
  }
  return out;
}

/// J_m(policy, alpha_m) as the finite sum over all trajectories.
inline double enumerate_paths_eval(const RiskCmdpInstance& instance, CostKind kind, const Policy& policy,
                                   double cap = kPathCap) {
  detail::check_cap(path_count(instance, 0, instance.horizon() - 1), cap, "enumerate_paths_eval");
  const auto& alpha = instance.alpha(kind);
  const auto& terminal = instance.scaled(kind).terminal;
  detail::Walker walker(instance, kind, policy, instance.horizon() - 1);
  double total = 0.0;
  for (std::size_t x = 0; x < alpha.size(); ++x) {
    if (alpha[x] == 0.0) continue;
    walker.run(0, x, alpha[x], 0.0,
               [&](const std::vector<std::size_t>& xs, const std::vector<std::size_t>&, double w, double c) {
                 total += w * std::exp(c + terminal[xs.back()]);
               });
  }
  return total;
}

/// theta_t(x) = E[exp(sum_{k<t} m_k) 1{X_t = x}] from prefix trajectories.
inline std::vector<Vector> enumerate_forward_factors(const RiskCmdpInstance& instance, CostKind kind,
                                                     const Policy& policy, double cap = kPathCap) {
  detail::check_cap(path_count(instance, 0, instance.horizon() - 1), cap, "enumerate_forward_factors");
  std::vector<Vector> theta(instance.horizon());
  const auto& alpha = instance.alpha(kind);
  for (std::size_t t = 0; t < instance.horizon(); ++t) {
    theta[t].assign(instance.states(t), 0.0);
    detail::Walker walker(instance, kind, policy, t);
    for (std::size_t x = 0; x < alpha.size(); ++x) {
      if (alpha[x] == 0.0) continue;
      walker.run(0, x, alpha[x], 0.0,
                 [&](const std::vector<std::size_t>& xs, const std::vector<std::size_t>&, double w, double c) {
                   theta[t][xs.back()] += w * std::exp(c);
                 });
    }
  }
  return theta;
}

/// Q_t(x,a) = E[exp(sum_{k>=t} m_k + m_T) | X_t = x, A_t = a] from suffix
/// trajectories under the policy's later rules.
inline double enumerate_backward_factor(const RiskCmdpInstance& instance, CostKind kind, const Policy& policy,
                                        std::size_t t, std::size_t x, std::size_t a, double cap = kPathCap) {
  detail::check_cap(path_count(instance, t, instance.horizon() - 1), cap, "enumerate_backward_factor");
  const auto& terminal = instance.scaled(kind).terminal;
  detail::Walker walker(instance, kind, policy, instance.horizon() - 1);
  double total = 0.0;
  walker.run_from_action(t, x, a,
                         [&](const std::vector<std::size_t>& xs, const std::vector<std::size_t>&, double w, double c) {
                           total += w * std::exp(c + terminal[xs.back()]);
                         });
  return total;
}

struct SearchResult {
  std::optional<Policy> best;  ///< empty when nothing feasible was found
  double value = std::numeric_limits<double>::quiet_NaN();
  double constraint_value = std::numeric_limits<double>::quiet_NaN();
  std::size_t candidates = 0;
  std::size_t feasible = 0;
};

namespace detail {

inline bool within_bound(const RiskCmdpInstance& instance, double j_c) {
  return j_c <= instance.bound() * (1.0 + 1e-12);
}

inline void consider(const RiskCmdpInstance& instance, const Policy& policy, SearchResult& result) {
  ++result.candidates;
  const double j_c = evaluate_risk(instance, CostKind::constraint, policy);
  if (!within_bound(instance, j_c)) return;
  ++result.feasible;
  const double j_r = evaluate_risk(instance, CostKind::reward, policy);
  if (!result.best || instance.better(j_r, result.value)) {
    result.best = policy;
    result.value = j_r;
    result.constraint_value = j_c;
  }
}

}  // namespace detail

/// Exhaustive search over deterministic Markovian policies.
inline SearchResult corner_policy_search(const RiskCmdpInstance& instance, double cap = kCornerCap) {
  double count = 1.0;
  for (std::size_t t = 0; t < instance.decision_epochs(); ++t)
    for (std::size_t x = 0; x < instance.states(t); ++x) count *= static_cast<double>(instance.actions(t, x));
  detail::check_cap(count, cap, "corner_policy_search");

  std::vector<std::vector<std::size_t>> choice(instance.decision_epochs());
  for (std::size_t t = 0; t < choice.size(); ++t) choice[t].assign(instance.states(t), 0);
  SearchResult result;
  for (;;) {
    detail::consider(instance, deterministic_policy(instance, choice), result);
    // Mixed-radix increment over (t, x).
    bool carry = true;
    for (std::size_t t = 0; t < choice.size() && carry; ++t)
      for (std::size_t x = 0; x < choice[t].size() && carry; ++x) {
        if (++choice[t][x] < instance.actions(t, x)) carry = false;
        else choice[t][x] = 0;
      }
    if (carry) break;
  }
  return result;
}

/// All points of the simplex over n actions with coordinates in {0, 1/r, ..., 1}.
inline std::vector<Vector> simplex_grid(std::size_t n, std::size_t resolution) {
  std::vector<Vector> points;
  std::vector<std::size_t> parts(n, 0);
  std::function<void(std::size_t, std::size_t)> fill = [&](std::size_t i, std::size_t left) {
    if (i + 1 == n) {
      parts[i] = left;
      Vector p(n);
      for (std::size_t k = 0; k < n; ++k) p[k] = static_cast<double>(parts[k]) / static_cast<double>(resolution);
      points.push_back(std::move(p));
      return;
    }
    for (std::size_t v = 0; v <= left; ++v) {
      parts[i] = v;
      fill(i + 1, left - v);
    }
  };
  fill(0, resolution);
  return points;
}

/// Exhaustive search over policies whose rules lie on the 1/r simplex grid.
inline SearchResult randomized_grid_search(const RiskCmdpInstance& instance, std::size_t resolution,
                                           double cap = kGridCap) {
  if (resolution == 0) throw std::invalid_argument("randomized_grid_search: resolution must be positive");
  // Grid size per rule is C(r + n - 1, n - 1).
  double count = 1.0;
  for (std::size_t t = 0; t < instance.decision_epochs(); ++t)
    for (std::size_t x = 0; x < instance.states(t); ++x) {
      const std::size_t n = instance.actions(t, x);
      double c = 1.0;
      for (std::size_t k = 1; k < n; ++k) c = c * static_cast<double>(resolution + k) / static_cast<double>(k);
      count *= c;
    }
  detail::check_cap(count, cap, "randomized_grid_search");

  struct Slot {
    std::size_t t, x;
    std::vector<Vector> grid;
  };
  std::vector<Slot> slots;
  for (std::size_t t = 0; t < instance.decision_epochs(); ++t)
    for (std::size_t x = 0; x < instance.states(t); ++x)
      slots.push_back({t, x, simplex_grid(instance.actions(t, x), resolution)});

  Policy policy = uniform_policy(instance);
  std::vector<std::size_t> index(slots.size(), 0);
  for (auto& s : slots) policy.rules[s.t][s.x] = s.grid[0];
  SearchResult result;
  for (;;) {
    detail::consider(instance, policy, result);
    bool carry = true;
    for (std::size_t i = 0; i < slots.size() && carry; ++i) {
      auto& s = slots[i];
      if (++index[i] < s.grid.size()) carry = false;
      else index[i] = 0;
      policy.rules[s.t][s.x] = s.grid[index[i]];
    }
    if (carry) break;
  }
  return result;
}

/// Optimum of an epoch LP by enumerating its candidate vertices: every
/// deterministic rule, and every rule mixing two actions in one state with the
/// coupling constraint tight. Returns nullopt when infeasible.
struct VertexOptimum {
  double objective = 0.0;
  std::vector<Vector> rule;
};

inline std::optional<VertexOptimum> enumerate_epoch_lp_vertices(const EpochLp& lp) {
  const std::size_t n_states = lp.objective.size();
  const bool maximize = lp.sense == Sense::maximize;
  std::optional<VertexOptimum> best;
  auto offer = [&](const std::vector<Vector>& rule) {
    double obj = 0.0, con = 0.0;
    for (std::size_t x = 0; x < n_states; ++x)
      for (std::size_t a = 0; a < rule[x].size(); ++a) {
        obj += lp.objective[x][a] * rule[x][a];
        con += lp.constraint[x][a] * rule[x][a];
      }
    if (std::isfinite(lp.bound) && con > lp.bound * (1.0 + 1e-12)) return;
    if (!best || (maximize ? obj > best->objective : obj < best->objective)) best = VertexOptimum{obj, rule};
  };

  std::vector<std::size_t> choice(n_states, 0);
  for (;;) {
    std::vector<Vector> rule(n_states);
    double base = 0.0;
    for (std::size_t x = 0; x < n_states; ++x) {
      rule[x].assign(lp.objective[x].size(), 0.0);
      rule[x][choice[x]] = 1.0;
      base += lp.constraint[x][choice[x]];
    }
    offer(rule);
    if (std::isfinite(lp.bound)) {
      // Mix the chosen action of state s with another action b.
      for (std::size_t s = 0; s < n_states; ++s) {
        const std::size_t a = choice[s];
        for (std::size_t b = 0; b < lp.objective[s].size(); ++b) {
          if (b == a) continue;
          const double ga = lp.constraint[s][a], gb = lp.constraint[s][b];
          if (ga == gb) continue;
          const double q = (lp.bound - base) / (gb - ga);  // weight on b
          if (!(q > 0.0 && q < 1.0)) continue;
          auto mixed = rule;
          mixed[s][a] = 1.0 - q;
          mixed[s][b] = q;
          offer(mixed);
        }
      }
    }
    bool carry = true;
    for (std::size_t x = 0; x < n_states && carry; ++x) {
      if (++choice[x] < lp.objective[x].size()) carry = false;
      else choice[x] = 0;
    }
    if (carry) break;
  }
  return best;
}

struct RandomInstanceOptions {
  std::size_t min_states = 1;
  std::size_t max_states = 4;
  std::size_t min_actions = 1;
  std::size_t max_actions = 3;
  std::size_t min_horizon = 2;
  std::size_t max_horizon = 5;
  double cost_range = 1.0;  ///< raw costs uniform in [-range, range]
  std::vector<double> gammas{-1.0, 1.0};
  std::vector<double> betas{0.5, 1.0};
  Sense sense = Sense::maximize;
  double bound = kInfiniteBound;
};

/// Random instance with per-epoch state counts, ragged action sets, dense
/// random kernels and costs.
inline RiskCmdpInstance random_instance(Rng& rng, const RandomInstanceOptions& options = {}) {
  std::uniform_int_distribution<std::size_t> horizon_dist(options.min_horizon, options.max_horizon);
  std::uniform_int_distribution<std::size_t> state_dist(options.min_states, options.max_states);
  std::uniform_int_distribution<std::size_t> action_dist(options.min_actions, options.max_actions);
  std::uniform_real_distribution<double> cost_dist(-options.cost_range, options.cost_range);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto pick = [&](const std::vector<double>& v) {
    return v[std::uniform_int_distribution<std::size_t>(0, v.size() - 1)(rng)];
  };
  auto distribution = [&](std::size_t n) {
    Vector p(n);
    double total = 0.0;
    for (double& v : p) {
      v = unit(rng) + 1e-3;
      total += v;
    }
    for (double& v : p) v /= total;
    return p;
  };

  InstanceConfig config;
  config.horizon = horizon_dist(rng);
  for (std::size_t t = 0; t < config.horizon; ++t) config.state_counts.push_back(state_dist(rng));
  config.kernel.resize(config.horizon - 1);
  for (CostSpec* spec : {&config.reward, &config.constraint}) spec->running.resize(config.horizon - 1);
  for (std::size_t t = 0; t + 1 < config.horizon; ++t) {
    const std::size_t n = config.state_counts[t], next = config.state_counts[t + 1];
    config.kernel[t].resize(n);
    for (CostSpec* spec : {&config.reward, &config.constraint}) spec->running[t].resize(n);
    for (std::size_t x = 0; x < n; ++x) {
      const std::size_t actions = action_dist(rng);
      for (std::size_t a = 0; a < actions; ++a) {
        config.kernel[t][x].push_back(distribution(next));
        for (CostSpec* spec : {&config.reward, &config.constraint}) {
          Vector row(next);
          for (double& v : row) v = cost_dist(rng);
          spec->running[t][x].push_back(std::move(row));
        }
      }
    }
  }
  for (CostSpec* spec : {&config.reward, &config.constraint}) {
    spec->terminal.resize(config.state_counts.back());
    for (double& v : spec->terminal) v = cost_dist(rng);
    spec->gamma = pick(options.gammas);
    spec->beta = pick(options.betas);
    spec->alpha = distribution(config.state_counts[0]);
  }
  config.bound = options.bound;
  config.sense = options.sense;
  return RiskCmdpInstance(std::move(config));
}

/// Same instance with B placed `fraction` of the way from the least
/// achievable J_c to the J_c of the unconstrained reward optimum, so that the
/// constraint binds whenever those differ.
inline RiskCmdpInstance with_binding_bound(const RiskCmdpInstance& instance, double fraction = 0.5) {
  const auto cheapest = unconstrained_dp(instance, CostKind::constraint, Sense::minimize);
  const double j_min = dp_value(instance, CostKind::constraint, cheapest);
  const auto greedy = unconstrained_dp(instance, CostKind::reward).greedy;
  const double j_greedy = evaluate_risk(instance, CostKind::constraint, greedy);
  return with_bound(instance, j_min + fraction * (j_greedy - j_min));
}

}  // namespace riskcmdp::oracle
