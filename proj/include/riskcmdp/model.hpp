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

// Finite-horizon risk-sensitive constrained MDP instances and Markovian
// randomized policies.
//
// Epochs are 0-based: index t is decision epoch t+1. An instance with
// horizon T has state sets for t = 0..T-1 and decision epochs t = 0..T-2.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace riskcmdp {

/// Raised when an instance, cost specification or policy breaks an invariant.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

enum class Sense { maximize, minimize };
enum class CostKind { reward, constraint };
enum class RestartMode { interior, corner };

using Vector = std::vector<double>;
using Rng = std::mt19937_64;

/// Table indexed [t][x][a].
template <class T>
using EpochTable = std::vector<std::vector<std::vector<T>>>;

/// Table indexed [t][x][a][x'], one row over S_{t+1} per state-action pair.
using TransitionTable = EpochTable<Vector>;

inline constexpr double kInfiniteBound = std::numeric_limits<double>::infinity();

/// Largest admissible bound on |sum of scaled costs| along any path; keeps
/// exp() of the accumulated cost inside double range.
inline constexpr double kMaxExponent = 600.0;

inline const char* to_string(Sense s) { return s == Sense::maximize ? "maximize" : "minimize"; }
inline const char* to_string(CostKind k) { return k == CostKind::reward ? "reward" : "constraint"; }
inline const char* to_string(RestartMode m) { return m == RestartMode::corner ? "corner" : "interior"; }

/// Unscaled running/terminal costs for one of the two cost channels.
struct CostSpec {
  TransitionTable running;  ///< raw m~_t(x,a,x'), t = 0..T-2
  Vector terminal;          ///< raw m~_T(x) over S_T
  double gamma = 1.0;       ///< risk factor, nonzero
  double beta = 1.0;        ///< discount in (0,1]
  Vector alpha;             ///< initial distribution over S_1
};

/// Costs after the gamma * beta^t scaling; epoch index t scales by beta^(t+1).
struct ScaledCosts {
  TransitionTable running;
  Vector terminal;
};

/// Everything needed to build an instance. Action counts are read off the
/// kernel shape.
struct InstanceConfig {
  std::size_t horizon = 0;
  std::vector<std::size_t> state_counts;  ///< |S_t| for t = 0..T-1
  TransitionTable kernel;                 ///< p_t(x'|x,a)
  CostSpec reward;
  CostSpec constraint;
  double bound = kInfiniteBound;
  Sense sense = Sense::maximize;
};

namespace detail {

inline bool all_finite(const Vector& v) {
  for (double d : v)
    if (!std::isfinite(d)) return false;
  return true;
}

inline void require(bool ok, const std::string& what) {
  if (!ok) throw ValidationError(what);
}

inline std::string at(std::size_t t, std::size_t x, std::size_t a) {
  return "(t=" + std::to_string(t + 1) + ", x=" + std::to_string(x) + ", a=" + std::to_string(a) + ")";
}

}  // namespace detail

inline void validate_cost_spec(const CostSpec& spec, const std::string& name) {
  using detail::require;
  require(spec.gamma != 0.0 && std::isfinite(spec.gamma), name + ": gamma must be finite and nonzero");
  require(spec.beta > 0.0 && spec.beta <= 1.0, name + ": beta must lie in (0,1]");
  require(!spec.alpha.empty(), name + ": empty initial distribution");
  double total = 0.0;
  for (double p : spec.alpha) {
    require(std::isfinite(p) && p >= 0.0, name + ": initial distribution has a negative or non-finite entry");
    total += p;
  }
  require(std::abs(total - 1.0) <= 1e-12, name + ": initial distribution does not sum to 1");
  require(detail::all_finite(spec.terminal), name + ": non-finite terminal cost");
  for (const auto& epoch : spec.running)
    for (const auto& state : epoch)
      for (const auto& row : state) require(detail::all_finite(row), name + ": non-finite running cost");
}

inline ScaledCosts scale_costs(const CostSpec& spec, std::size_t horizon) {
  ScaledCosts out;
  out.running = spec.running;
  for (std::size_t t = 0; t < out.running.size(); ++t) {
    const double factor = spec.gamma * std::pow(spec.beta, static_cast<double>(t + 1));
    for (auto& state : out.running[t])
      for (auto& row : state)
        for (double& v : row) v *= factor;
  }
  const double terminal_factor = spec.gamma * std::pow(spec.beta, static_cast<double>(horizon));
  out.terminal = spec.terminal;
  for (double& v : out.terminal) v *= terminal_factor;
  return out;
}

/// Validated, immutable Risk-CMDP instance. Scaled costs and the
/// exponentiated transition weights p_t(x'|x,a) e^{m_t(x,a,x')} are cached
/// for both cost channels.
class RiskCmdpInstance {
 public:
  explicit RiskCmdpInstance(InstanceConfig config) : config_(std::move(config)) {
    validate();
    for (CostKind kind : {CostKind::reward, CostKind::constraint}) {
      const auto k = index(kind);
      scaled_[k] = scale_costs(cost(kind), horizon());
      weighted_[k] = config_.kernel;
      for (std::size_t t = 0; t + 1 < horizon(); ++t)
        for (std::size_t x = 0; x < states(t); ++x)
          for (std::size_t a = 0; a < actions(t, x); ++a) {
            auto& row = weighted_[k][t][x][a];
            const auto& m = scaled_[k].running[t][x][a];
            for (std::size_t y = 0; y < row.size(); ++y) row[y] *= std::exp(m[y]);
          }
      terminal_exp_[k] = scaled_[k].terminal;
      for (double& v : terminal_exp_[k]) v = std::exp(v);
    }
  }

  std::size_t horizon() const { return config_.horizon; }
  std::size_t decision_epochs() const { return config_.horizon - 1; }
  std::size_t states(std::size_t t) const { return config_.state_counts[t]; }
  std::size_t actions(std::size_t t, std::size_t x) const { return config_.kernel[t][x].size(); }
  const Vector& kernel(std::size_t t, std::size_t x, std::size_t a) const { return config_.kernel[t][x][a]; }

  const CostSpec& cost(CostKind kind) const {
    return kind == CostKind::reward ? config_.reward : config_.constraint;
  }
  const ScaledCosts& scaled(CostKind kind) const { return scaled_[index(kind)]; }
  const Vector& alpha(CostKind kind) const { return cost(kind).alpha; }

  /// Row x' -> p_t(x'|x,a) exp(m_t(x,a,x')).
  const Vector& weighted(CostKind kind, std::size_t t, std::size_t x, std::size_t a) const {
    return weighted_[index(kind)][t][x][a];
  }
  /// exp(m_T(x)) over S_T.
  const Vector& terminal_exp(CostKind kind) const { return terminal_exp_[index(kind)]; }

  double bound() const { return config_.bound; }
  bool constrained() const { return std::isfinite(config_.bound); }
  Sense sense() const { return config_.sense; }
  const InstanceConfig& config() const { return config_; }

  /// True when `a` is strictly better than `b` under the instance's sense.
  bool better(double a, double b) const { return config_.sense == Sense::maximize ? a > b : a < b; }

 private:
  static std::size_t index(CostKind kind) { return kind == CostKind::reward ? 0 : 1; }

  void validate() const {
    using detail::require;
    const auto& c = config_;
    require(c.horizon >= 2, "horizon must be at least 2");
    require(c.state_counts.size() == c.horizon, "state_counts must list |S_t| for every epoch 1..T");
    for (std::size_t n : c.state_counts) require(n > 0, "every state space must be nonempty");
    require(c.kernel.size() == c.horizon - 1, "kernel must have one table per decision epoch");
    require(c.bound > 0.0 && !std::isnan(c.bound), "bound B must be positive");
    validate_cost_spec(c.reward, "reward");
    validate_cost_spec(c.constraint, "constraint");

    for (const CostSpec* spec : {&c.reward, &c.constraint}) {
      const std::string name = spec == &c.reward ? "reward" : "constraint";
      require(spec->alpha.size() == c.state_counts[0], name + ": initial distribution size != |S_1|");
      require(spec->terminal.size() == c.state_counts.back(), name + ": terminal cost size != |S_T|");
      require(spec->running.size() == c.horizon - 1, name + ": running cost must cover every decision epoch");
    }

    for (std::size_t t = 0; t + 1 < c.horizon; ++t) {
      require(c.kernel[t].size() == c.state_counts[t], "kernel epoch " + std::to_string(t + 1) + " has wrong state count");
      for (std::size_t x = 0; x < c.state_counts[t]; ++x) {
        const auto& acts = c.kernel[t][x];
        require(!acts.empty(), "empty action set at t=" + std::to_string(t + 1) + ", x=" + std::to_string(x));
        for (std::size_t a = 0; a < acts.size(); ++a) {
          const auto& row = acts[a];
          require(row.size() == c.state_counts[t + 1], "kernel row " + detail::at(t, x, a) + " has wrong length");
          double total = 0.0;
          for (double p : row) {
            require(std::isfinite(p) && p >= 0.0, "kernel row " + detail::at(t, x, a) + " has a negative entry");
            total += p;
          }
          require(std::abs(total - 1.0) <= 1e-12, "kernel row " + detail::at(t, x, a) + " does not sum to 1");
          for (const CostSpec* spec : {&c.reward, &c.constraint}) {
            require(spec->running[t].size() == c.state_counts[t] && spec->running[t][x].size() == acts.size() &&
                        spec->running[t][x][a].size() == row.size(),
                    "running cost shape mismatch at " + detail::at(t, x, a));
          }
        }
      }
    }

    for (const CostSpec* spec : {&c.reward, &c.constraint}) {
      require(exponent_bound(*spec) <= kMaxExponent,
              std::string(spec == &c.reward ? "reward" : "constraint") +
                  ": accumulated scaled cost may exceed the exponent limit of 600");
    }
  }

  double exponent_bound(const CostSpec& spec) const {
    const auto scaled = scale_costs(spec, config_.horizon);
    double total = 0.0;
    for (const auto& epoch : scaled.running) {
      double worst = 0.0;
      for (const auto& state : epoch)
        for (const auto& row : state)
          for (double v : row) worst = std::max(worst, std::abs(v));
      total += worst;
    }
    double terminal = 0.0;
    for (double v : scaled.terminal) terminal = std::max(terminal, std::abs(v));
    return total + terminal;
  }

  InstanceConfig config_;
  ScaledCosts scaled_[2];
  TransitionTable weighted_[2];
  Vector terminal_exp_[2];
};

inline RiskCmdpInstance build_instance(InstanceConfig config) { return RiskCmdpInstance(std::move(config)); }

/// Same instance with a different bound B.
inline RiskCmdpInstance with_bound(const RiskCmdpInstance& instance, double bound) {
  auto config = instance.config();
  config.bound = bound;
  return RiskCmdpInstance(std::move(config));
}

/// Markovian randomized policy: rules[t][x] is a distribution over A_{t,x}.
struct Policy {
  EpochTable<double> rules;

  friend bool operator==(const Policy&, const Policy&) = default;
};

inline bool same_shape(const Policy& a, const Policy& b) {
  if (a.rules.size() != b.rules.size()) return false;
  for (std::size_t t = 0; t < a.rules.size(); ++t) {
    if (a.rules[t].size() != b.rules[t].size()) return false;
    for (std::size_t x = 0; x < a.rules[t].size(); ++x)
      if (a.rules[t][x].size() != b.rules[t][x].size()) return false;
  }
  return true;
}

/// Throws ValidationError unless `policy` matches the instance and every rule
/// is a distribution (within 1e-10).
inline void validate_policy(const RiskCmdpInstance& instance, const Policy& policy) {
  using detail::require;
  require(policy.rules.size() == instance.decision_epochs(), "policy must have one rule per decision epoch");
  for (std::size_t t = 0; t < policy.rules.size(); ++t) {
    require(policy.rules[t].size() == instance.states(t), "policy epoch " + std::to_string(t + 1) + " has wrong state count");
    for (std::size_t x = 0; x < policy.rules[t].size(); ++x) {
      const auto& rule = policy.rules[t][x];
      require(rule.size() == instance.actions(t, x), "policy rule " + detail::at(t, x, 0) + " has wrong action count");
      double total = 0.0;
      for (double q : rule) {
        require(std::isfinite(q) && q >= 0.0, "policy rule has a negative entry at t=" + std::to_string(t + 1));
        total += q;
      }
      require(std::abs(total - 1.0) <= 1e-10, "policy rule does not sum to 1 at t=" + std::to_string(t + 1) +
                                                  ", x=" + std::to_string(x));
    }
  }
}

/// Policy with every rule uniform over its action set.
inline Policy uniform_policy(const RiskCmdpInstance& instance) {
  Policy policy;
  policy.rules.resize(instance.decision_epochs());
  for (std::size_t t = 0; t < policy.rules.size(); ++t) {
    policy.rules[t].resize(instance.states(t));
    for (std::size_t x = 0; x < instance.states(t); ++x) {
      const auto n = instance.actions(t, x);
      policy.rules[t][x].assign(n, 1.0 / static_cast<double>(n));
    }
  }
  return policy;
}

/// Deterministic policy from an action choice per (t, x).
inline Policy deterministic_policy(const RiskCmdpInstance& instance,
                                   const std::vector<std::vector<std::size_t>>& choice) {
  Policy policy;
  policy.rules.resize(instance.decision_epochs());
  for (std::size_t t = 0; t < policy.rules.size(); ++t) {
    policy.rules[t].resize(instance.states(t));
    for (std::size_t x = 0; x < instance.states(t); ++x) {
      policy.rules[t][x].assign(instance.actions(t, x), 0.0);
      policy.rules[t][x].at(choice.at(t).at(x)) = 1.0;
    }
  }
  return policy;
}

/// Interior mode draws each rule from the flat Dirichlet; corner mode draws a
/// uniformly random one-hot rule.
inline Policy random_policy(const RiskCmdpInstance& instance, RestartMode mode, Rng& rng) {
  Policy policy;
  policy.rules.resize(instance.decision_epochs());
  std::exponential_distribution<double> exponential(1.0);
  for (std::size_t t = 0; t < policy.rules.size(); ++t) {
    policy.rules[t].resize(instance.states(t));
    for (std::size_t x = 0; x < instance.states(t); ++x) {
      const auto n = instance.actions(t, x);
      auto& rule = policy.rules[t][x];
      rule.assign(n, 0.0);
      if (n == 1) {
        rule[0] = 1.0;
      } else if (mode == RestartMode::corner) {
        std::uniform_int_distribution<std::size_t> pick(0, n - 1);
        rule[pick(rng)] = 1.0;
      } else {
        double total = 0.0;
        for (double& q : rule) {
          q = exponential(rng);
          total += q;
        }
        for (double& q : rule) q /= total;
      }
    }
  }
  return policy;
}

/// max over (t, x, a) of |d_t(x,a) - d'_t(x,a)|.
inline double policy_distance(const Policy& a, const Policy& b) {
  if (!same_shape(a, b)) throw ValidationError("policy_distance: policies have different shapes");
  double worst = 0.0;
  for (std::size_t t = 0; t < a.rules.size(); ++t)
    for (std::size_t x = 0; x < a.rules[t].size(); ++x)
      for (std::size_t i = 0; i < a.rules[t][x].size(); ++i)
        worst = std::max(worst, std::abs(a.rules[t][x][i] - b.rules[t][x][i]));
  return worst;
}

/// Smallest 0-based epoch t0 such that all rules from t0 on are pairwise within
/// `tol` (max abs entry difference). Epochs whose rule shapes differ from the
/// last epoch's never join the stationary tail.
inline std::size_t stationarity_onset(const Policy& policy, double tol = 1e-3) {
  const std::size_t n = policy.rules.size();
  if (n == 0) return 0;
  auto lo = policy.rules.back();
  auto hi = lo;
  std::size_t onset = n - 1;
  for (std::size_t t = n - 1; t-- > 0;) {
    const auto& rule = policy.rules[t];
    if (rule.size() != lo.size()) break;
    bool shape_ok = true;
    for (std::size_t x = 0; x < rule.size(); ++x) shape_ok = shape_ok && rule[x].size() == lo[x].size();
    if (!shape_ok) break;
    double spread = 0.0;
    for (std::size_t x = 0; x < rule.size(); ++x)
      for (std::size_t a = 0; a < rule[x].size(); ++a) {
        lo[x][a] = std::min(lo[x][a], rule[x][a]);
        hi[x][a] = std::max(hi[x][a], rule[x][a]);
        spread = std::max(spread, hi[x][a] - lo[x][a]);
      }
    if (spread > tol) break;
    onset = t;
  }
  return onset;
}

/// Policy equal to `base` except at decision epoch t, where `other`'s rule is used.
inline Policy splice(const Policy& base, const Policy& other, std::size_t t) {
  Policy out = base;
  out.rules.at(t) = other.rules.at(t);
  return out;
}

}  // namespace riskcmdp
