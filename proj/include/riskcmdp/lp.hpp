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

// LP(policy): the linear program over candidate policies built from one
// policy's forward/backward factors. The surrogate f_t touches only the
// epoch-t rule, so the joint program separates into one small LP per decision
// epoch:
//
//   opt   sum_{x,a} o(x,a) d(x,a)
//   s.t.  sum_a d(x,a) = 1           for every state x
//         sum_{x,a} g(x,a) d(x,a) <= B
//         d >= 0
//
// with o = theta_r * Q_r and g = theta_c * Q_c.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "riskcmdp/evaluate.hpp"
#include "riskcmdp/model.hpp"
#include "riskcmdp/simplex.hpp"

namespace riskcmdp {

struct EpochLp {
  std::size_t epoch = 0;                   ///< 0-based decision epoch
  std::vector<Vector> objective;           ///< o(x,a)
  std::vector<Vector> constraint;          ///< g(x,a)
  double bound = kInfiniteBound;
  Sense sense = Sense::maximize;
};

struct LpSolution {
  LpStatus status = LpStatus::infeasible;
  std::vector<Vector> rule;  ///< d~_t(x, .)
  double objective = 0.0;    ///< sum o * d~, unscaled
  double constraint_value = 0.0;
  bool constraint_active = false;
};

struct LpOptions {
  double tol = 1e-9;
  /// Shuffle the column order per solve so that ties among optimal vertices
  /// resolve randomly. Requires `rng`.
  bool randomize_ties = false;
  Rng* rng = nullptr;
};

inline EpochLp build_epoch_lp(std::size_t t, const FactorSet& reward, const FactorSet& constraint, double bound,
                              Sense sense) {
  EpochLp lp;
  lp.epoch = t;
  lp.bound = bound;
  lp.sense = sense;
  const auto& q_r = reward.backward.q.at(t);
  const auto& q_c = constraint.backward.q.at(t);
  lp.objective.resize(q_r.size());
  lp.constraint.resize(q_c.size());
  for (std::size_t x = 0; x < q_r.size(); ++x) {
    lp.objective[x].resize(q_r[x].size());
    lp.constraint[x].resize(q_c[x].size());
    for (std::size_t a = 0; a < q_r[x].size(); ++a) {
      lp.objective[x][a] = reward.forward.theta[t][x] * q_r[x][a];
      lp.constraint[x][a] = constraint.forward.theta[t][x] * q_c[x][a];
    }
  }
  return lp;
}

inline LpSolution solve_epoch_lp(const EpochLp& lp, const LpOptions& options = {}) {
  const std::size_t n_states = lp.objective.size();
  std::vector<std::size_t> offset(n_states + 1, 0);
  for (std::size_t x = 0; x < n_states; ++x) offset[x + 1] = offset[x] + lp.objective[x].size();
  const std::size_t n = offset.back();

  // Column order; identity unless ties are randomized.
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  if (options.randomize_ties && options.rng != nullptr) std::shuffle(order.begin(), order.end(), *options.rng);

  double o_scale = 0.0, g_scale = 0.0;
  for (std::size_t x = 0; x < n_states; ++x)
    for (std::size_t a = 0; a < lp.objective[x].size(); ++a) {
      o_scale = std::max(o_scale, std::abs(lp.objective[x][a]));
      g_scale = std::max(g_scale, std::abs(lp.constraint[x][a]));
    }
  if (o_scale == 0.0) o_scale = 1.0;
  const bool constrained = std::isfinite(lp.bound);
  if (constrained) g_scale = std::max(g_scale, lp.bound);
  if (g_scale == 0.0) g_scale = 1.0;

  LinearProgram program;
  program.objective.assign(n, 0.0);
  program.eq_rows.assign(n_states, Vector(n, 0.0));
  program.eq_rhs.assign(n_states, 1.0);
  Vector g_row(n, 0.0);
  const double sign = lp.sense == Sense::maximize ? 1.0 : -1.0;
  for (std::size_t x = 0; x < n_states; ++x)
    for (std::size_t a = 0; a < lp.objective[x].size(); ++a) {
      const std::size_t col = order[offset[x] + a];
      program.objective[col] = sign * lp.objective[x][a] / o_scale;
      program.eq_rows[x][col] = 1.0;
      g_row[col] = lp.constraint[x][a] / g_scale;
    }
  if (constrained) {
    program.le_rows.push_back(std::move(g_row));
    program.le_rhs.push_back(lp.bound / g_scale);
  }

  const auto solved = solve_simplex(program, options.tol);
  LpSolution out;
  out.status = solved.status;
  if (solved.status != LpStatus::optimal) return out;

  out.rule.resize(n_states);
  for (std::size_t x = 0; x < n_states; ++x) {
    auto& rule = out.rule[x];
    rule.resize(lp.objective[x].size());
    double total = 0.0;
    for (std::size_t a = 0; a < rule.size(); ++a) {
      rule[a] = solved.solution[order[offset[x] + a]];
      total += rule[a];
    }
    for (double& q : rule) q /= total;
    for (std::size_t a = 0; a < rule.size(); ++a) {
      out.objective += lp.objective[x][a] * rule[a];
      out.constraint_value += lp.constraint[x][a] * rule[a];
    }
  }
  out.constraint_active = constrained && solved.slack[0] * g_scale <= options.tol * std::max(1.0, lp.bound);
  return out;
}

/// Plain-text dump of an epoch LP for external cross-checking.
inline void write_epoch_lp(std::ostream& os, const EpochLp& lp) {
  os.precision(17);
  os << "epoch " << lp.epoch + 1 << "\n";
  os << "sense " << to_string(lp.sense) << "\n";
  os << "bound " << lp.bound << "\n";
  os << "state action objective constraint\n";
  for (std::size_t x = 0; x < lp.objective.size(); ++x)
    for (std::size_t a = 0; a < lp.objective[x].size(); ++a)
      os << x << ' ' << a << ' ' << lp.objective[x][a] << ' ' << lp.constraint[x][a] << "\n";
}

/// Psi(policy) together with the factors it was built from.
struct PolicyLp {
  LpStatus status = LpStatus::optimal;
  std::optional<std::size_t> infeasible_epoch;
  Policy psi;
  Vector epoch_objectives;
  std::vector<bool> active;
};

inline PolicyLp solve_lp_of_policy(const RiskCmdpInstance& instance, const FactorSet& reward,
                                   const FactorSet& constraint, const LpOptions& options = {}) {
  PolicyLp out;
  const std::size_t epochs = instance.decision_epochs();
  out.psi.rules.resize(epochs);
  out.epoch_objectives.assign(epochs, 0.0);
  out.active.assign(epochs, false);
  for (std::size_t t = 0; t < epochs; ++t) {
    const auto lp = build_epoch_lp(t, reward, constraint, instance.bound(), instance.sense());
    auto solution = solve_epoch_lp(lp, options);
    if (solution.status != LpStatus::optimal) {
      out.status = solution.status;
      out.infeasible_epoch = t;
      out.psi.rules.clear();
      return out;
    }
    out.psi.rules[t] = std::move(solution.rule);
    out.epoch_objectives[t] = solution.objective;
    out.active[t] = solution.constraint_active;
  }
  return out;
}

inline PolicyLp solve_lp_of_policy(const RiskCmdpInstance& instance, const Policy& policy,
                                   const LpOptions& options = {}) {
  return solve_lp_of_policy(instance, compute_factors(instance, CostKind::reward, policy),
                            compute_factors(instance, CostKind::constraint, policy), options);
}

}  // namespace riskcmdp
