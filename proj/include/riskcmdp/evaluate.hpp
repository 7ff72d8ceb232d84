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

// Forward and backward factors, the per-epoch linear surrogate and exact
// risk-sensitive values of a policy, plus the unconstrained risk-sensitive DP.

#include <cstddef>
#include <stdexcept>
#include <vector>

#include "riskcmdp/model.hpp"

namespace riskcmdp {

/// theta[t][x] = E[exp(sum_{k<t} m_k) 1{X_t = x}], t = 0..T-1.
struct ForwardFactors {
  CostKind kind = CostKind::reward;
  std::vector<Vector> theta;
};

/// q[t][x][a] = E[exp(sum_{k>=t} m_k + m_T) | X_t = x, A_t = a] for decision
/// epochs t = 0..T-2; terminal[x] = exp(m_T(x)).
struct BackwardFactors {
  CostKind kind = CostKind::reward;
  EpochTable<double> q;
  Vector terminal;
};

/// Both factor sets of one policy for one cost channel.
struct FactorSet {
  ForwardFactors forward;
  BackwardFactors backward;
};

struct DpSolution {
  std::vector<Vector> value;  ///< u_t(x), t = 0..T-1
  Policy greedy;
};

inline ForwardFactors forward_factors(const RiskCmdpInstance& instance, CostKind kind, const Policy& policy) {
  ForwardFactors out;
  out.kind = kind;
  out.theta.resize(instance.horizon());
  out.theta[0] = instance.alpha(kind);
  for (std::size_t t = 0; t + 1 < instance.horizon(); ++t) {
    auto& next = out.theta[t + 1];
    next.assign(instance.states(t + 1), 0.0);
    for (std::size_t x = 0; x < instance.states(t); ++x) {
      const double mass = out.theta[t][x];
      if (mass == 0.0) continue;
      const auto& rule = policy.rules[t][x];
      for (std::size_t a = 0; a < rule.size(); ++a) {
        const double w = mass * rule[a];
        if (w == 0.0) continue;
        const auto& row = instance.weighted(kind, t, x, a);
        for (std::size_t y = 0; y < row.size(); ++y) next[y] += w * row[y];
      }
    }
  }
  return out;
}

inline BackwardFactors backward_factors(const RiskCmdpInstance& instance, CostKind kind, const Policy& policy) {
  BackwardFactors out;
  out.kind = kind;
  out.terminal = instance.terminal_exp(kind);
  const std::size_t epochs = instance.decision_epochs();
  out.q.resize(epochs);
  // Expected continuation exp-cost from each successor state.
  Vector continuation = out.terminal;
  for (std::size_t t = epochs; t-- > 0;) {
    auto& qt = out.q[t];
    qt.resize(instance.states(t));
    for (std::size_t x = 0; x < instance.states(t); ++x) {
      qt[x].resize(instance.actions(t, x));
      for (std::size_t a = 0; a < qt[x].size(); ++a) {
        const auto& row = instance.weighted(kind, t, x, a);
        double sum = 0.0;
        for (std::size_t y = 0; y < row.size(); ++y) sum += row[y] * continuation[y];
        qt[x][a] = sum;
      }
    }
    if (t == 0) break;
    // Successor weights for epoch t-1 use the epoch-t rule.
    Vector next(instance.states(t), 0.0);
    for (std::size_t x = 0; x < instance.states(t); ++x) {
      const auto& rule = policy.rules[t][x];
      for (std::size_t a = 0; a < rule.size(); ++a) next[x] += rule[a] * qt[x][a];
    }
    continuation = std::move(next);
  }
  return out;
}

inline FactorSet compute_factors(const RiskCmdpInstance& instance, CostKind kind, const Policy& policy) {
  return {forward_factors(instance, kind, policy), backward_factors(instance, kind, policy)};
}

/// f_t(candidate) = sum_{x,a} theta_t(x) candidate_t(x,a) Q_t(x,a); linear in the
/// epoch-t rule of `candidate`. `t` is a 0-based decision epoch.
inline double f_linear(std::size_t t, const Policy& candidate, const ForwardFactors& forward,
                       const BackwardFactors& backward) {
  if (t >= backward.q.size()) throw std::out_of_range("f_linear: epoch outside the decision epochs");
  double total = 0.0;
  const auto& rules = candidate.rules.at(t);
  for (std::size_t x = 0; x < rules.size(); ++x) {
    double inner = 0.0;
    for (std::size_t a = 0; a < rules[x].size(); ++a) inner += rules[x][a] * backward.q[t][x][a];
    total += forward.theta[t][x] * inner;
  }
  return total;
}

inline double f_linear(std::size_t t, const Policy& candidate, const FactorSet& factors) {
  return f_linear(t, candidate, factors.forward, factors.backward);
}

/// Sum over all decision epochs of f_t(candidate).
inline double f_linear_sum(const Policy& candidate, const FactorSet& factors) {
  double total = 0.0;
  for (std::size_t t = 0; t < factors.backward.q.size(); ++t) total += f_linear(t, candidate, factors);
  return total;
}

/// J_m(policy, alpha_m), computed from the backward factors at the first epoch.
inline double evaluate_risk(const RiskCmdpInstance& instance, CostKind kind, const Policy& policy) {
  const auto backward = backward_factors(instance, kind, policy);
  const auto& alpha = instance.alpha(kind);
  double total = 0.0;
  for (std::size_t x = 0; x < alpha.size(); ++x) {
    double inner = 0.0;
    for (std::size_t a = 0; a < policy.rules[0][x].size(); ++a) inner += policy.rules[0][x][a] * backward.q[0][x][a];
    total += alpha[x] * inner;
  }
  return total;
}

/// Risk-sensitive DP: u_T = exp(m_T), u_t(x) = opt_a sum_x' p e^{m_t} u_{t+1}.
/// `opt` is max or min per `sense`; ties resolve to the lowest action.
inline DpSolution unconstrained_dp(const RiskCmdpInstance& instance, CostKind kind, Sense sense) {
  DpSolution out;
  const std::size_t horizon = instance.horizon();
  out.value.resize(horizon);
  out.value[horizon - 1] = instance.terminal_exp(kind);
  std::vector<std::vector<std::size_t>> choice(horizon - 1);
  for (std::size_t t = horizon - 1; t-- > 0;) {
    out.value[t].assign(instance.states(t), 0.0);
    choice[t].assign(instance.states(t), 0);
    for (std::size_t x = 0; x < instance.states(t); ++x) {
      for (std::size_t a = 0; a < instance.actions(t, x); ++a) {
        const auto& row = instance.weighted(kind, t, x, a);
        double sum = 0.0;
        for (std::size_t y = 0; y < row.size(); ++y) sum += row[y] * out.value[t + 1][y];
        const bool better = sense == Sense::maximize ? sum > out.value[t][x] : sum < out.value[t][x];
        if (a == 0 || better) {
          out.value[t][x] = sum;
          choice[t][x] = a;
        }
      }
    }
  }
  out.greedy = deterministic_policy(instance, choice);
  return out;
}

inline DpSolution unconstrained_dp(const RiskCmdpInstance& instance, CostKind kind) {
  return unconstrained_dp(instance, kind, instance.sense());
}

/// sum_x alpha_m(x) u_1(x).
inline double dp_value(const RiskCmdpInstance& instance, CostKind kind, const DpSolution& dp) {
  const auto& alpha = instance.alpha(kind);
  double total = 0.0;
  for (std::size_t x = 0; x < alpha.size(); ++x) total += alpha[x] * dp.value[0][x];
  return total;
}

}  // namespace riskcmdp
