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

// Risk-sensitive constrained inventory-control instances: stock x in {0..M},
// order a in {0..M-x} arriving immediately, geometric daily demand D, excess
// demand lost. Costs are in expected (x,a) form.

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "riskcmdp/model.hpp"

namespace riskcmdp::inventory {

/// running_cost_constrained: minimize ordering + holding subject to a bound on
/// the shortage cost. order_count_constrained: minimize ordering + holding +
/// shortage subject to a bound on the ordered quantity.
enum class Example { running_cost_constrained, order_count_constrained };

/// continuation: P(D=k) = (1-p) p^k on {0,1,...}.
/// success:      P(D=k) = p (1-p)^k on {0,1,...}.
/// trials:       P(D=k) = p (1-p)^(k-1) on {1,2,...}.
enum class DemandConvention { continuation, success, trials };

inline const char* to_string(DemandConvention c) {
  switch (c) {
    case DemandConvention::continuation: return "continuation";
    case DemandConvention::success: return "success";
    case DemandConvention::trials: return "trials";
  }
  return "unknown";
}

struct InventoryParams {
  std::size_t capacity = 5;  ///< M
  double fixed_order = 0.2;  ///< O_f
  double unit_order = 0.4;   ///< O_u
  double holding = 0.1;      ///< C_h
  double shortage = 1.0;     ///< C_s
  double p = 0.7;
  DemandConvention convention = DemandConvention::continuation;
  double gamma = 0.5;
  double gamma_c = 0.05;
  double beta = 0.8;
  double beta_c = 0.8;
  double bound = std::exp(0.03);
  std::size_t horizon = 10;
  Example example = Example::running_cost_constrained;
};

/// Parameters of the shortage-constrained example with B = e^{0.6 gamma_c},
/// gamma_c = 0.1 gamma and success-parameter demand.
inline InventoryParams example1_params(double gamma = 0.5, std::size_t horizon = 10) {
  InventoryParams params;
  params.convention = DemandConvention::success;
  params.gamma = gamma;
  params.gamma_c = 0.1 * gamma;
  params.bound = std::exp(0.6 * params.gamma_c);
  params.horizon = horizon;
  return params;
}

/// Parameters of the order-count-constrained example with B = e^{b gamma_c},
/// gamma_c = gamma.
inline InventoryParams example2_params(double gamma, double normalized_bound, std::size_t horizon) {
  InventoryParams params;
  params.example = Example::order_count_constrained;
  params.convention = DemandConvention::success;
  params.unit_order = 0.2;
  params.shortage = 6.0;
  params.p = 0.6;
  params.beta = 0.7;
  params.beta_c = 0.7;
  params.gamma = gamma;
  params.gamma_c = gamma;
  params.bound = std::exp(normalized_bound * gamma);
  params.horizon = horizon;
  return params;
}

/// Geometric demand written as D = offset + G with P(G >= k) = q^k.
class DemandModel {
 public:
  DemandModel(double p, DemandConvention convention = DemandConvention::continuation)
      : q_(convention == DemandConvention::continuation ? p : 1.0 - p),
        offset_(convention == DemandConvention::trials ? 1 : 0) {
    if (!(p > 0.0 && p < 1.0)) throw ValidationError("demand parameter p must lie in (0,1)");
  }

  /// Probability that demand continues past each unit beyond the offset.
  double continuation() const { return q_; }
  std::size_t offset() const { return offset_; }
  double pmf(std::size_t k) const {
    return k < offset_ ? 0.0 : (1.0 - q_) * std::pow(q_, static_cast<double>(k - offset_));
  }
  /// P(D >= k).
  double tail(std::size_t k) const { return k <= offset_ ? 1.0 : std::pow(q_, static_cast<double>(k - offset_)); }
  double mean() const { return static_cast<double>(offset_) + q_ / (1.0 - q_); }

 private:
  double q_;
  std::size_t offset_;
};

/// E[(D - y)^+] = sum_{k > y} P(D >= k).
inline double expected_shortfall(std::size_t y, const DemandModel& demand) {
  const double q = demand.continuation();
  return std::pow(q, static_cast<double>(y + 1) - static_cast<double>(demand.offset())) / (1.0 - q);
}

/// E[(y - D)^+] = y - E[D] + E[(D - y)^+].
inline double expected_holdover(std::size_t y, const DemandModel& demand) {
  return static_cast<double>(y) - demand.mean() + expected_shortfall(y, demand);
}

/// Distribution of next stock max(x + a - D, 0) over {0..capacity}.
inline Vector inventory_transition(std::size_t x, std::size_t a, std::size_t capacity, const DemandModel& demand) {
  if (x > capacity || a > capacity - x)
    throw ValidationError("order " + std::to_string(a) + " out of range at stock " + std::to_string(x));
  const std::size_t y = x + a;
  Vector row(capacity + 1, 0.0);
  row[0] = demand.tail(y);
  for (std::size_t j = 1; j <= y; ++j) row[j] = demand.pmf(y - j);
  return row;
}

inline void validate_params(const InventoryParams& params) {
  using detail::require;
  require(params.capacity >= 1, "inventory capacity M must be at least 1");
  require(params.fixed_order >= 0.0 && params.unit_order >= 0.0 && params.holding >= 0.0 && params.shortage >= 0.0,
          "inventory costs must be nonnegative");
  require(params.p > 0.0 && params.p < 1.0, "demand parameter p must lie in (0,1)");
  require(params.horizon >= 2, "horizon must be at least 2");
}

inline double ordering_cost(const InventoryParams& params, std::size_t a) {
  return a > 0 ? params.fixed_order + static_cast<double>(a) * params.unit_order : 0.0;
}

/// Builds either example; `params.example` selects the cost structure.
inline RiskCmdpInstance build_inventory_instance(const InventoryParams& params) {
  validate_params(params);
  const DemandModel demand(params.p, params.convention);
  const std::size_t M = params.capacity;
  const std::size_t n = M + 1;

  EpochTable<Vector> kernel(1, std::vector<std::vector<Vector>>(n));
  EpochTable<Vector> reward(1, std::vector<std::vector<Vector>>(n));
  EpochTable<Vector> constraint(1, std::vector<std::vector<Vector>>(n));
  for (std::size_t x = 0; x < n; ++x) {
    for (std::size_t a = 0; a + x <= M; ++a) {
      const std::size_t y = x + a;
      kernel[0][x].push_back(inventory_transition(x, a, M, demand));
      double r = ordering_cost(params, a) + params.holding * expected_holdover(y, demand);
      double c = 0.0;
      if (params.example == Example::running_cost_constrained) {
        c = params.shortage * expected_shortfall(y, demand);
      } else {
        r += params.shortage * expected_shortfall(y, demand);
        c = static_cast<double>(a);
      }
      reward[0][x].push_back(Vector(n, r));
      constraint[0][x].push_back(Vector(n, c));
    }
  }

  Vector alpha(n);
  double total = 0.0;
  for (std::size_t s = 0; s < n; ++s) total += static_cast<double>(M - s + 1);
  for (std::size_t x = 0; x < n; ++x) alpha[x] = static_cast<double>(M - x + 1) / total;

  const std::size_t epochs = params.horizon - 1;
  InstanceConfig config;
  config.horizon = params.horizon;
  config.state_counts.assign(params.horizon, n);
  config.kernel.assign(epochs, kernel[0]);
  config.reward.running.assign(epochs, reward[0]);
  config.reward.terminal.assign(n, 0.0);
  config.reward.gamma = params.gamma;
  config.reward.beta = params.beta;
  config.reward.alpha = alpha;
  config.constraint.running.assign(epochs, constraint[0]);
  config.constraint.terminal.assign(n, 0.0);
  config.constraint.gamma = params.gamma_c;
  config.constraint.beta = params.beta_c;
  config.constraint.alpha = alpha;
  config.bound = params.bound;
  config.sense = Sense::minimize;
  return RiskCmdpInstance(std::move(config));
}

inline RiskCmdpInstance build_inventory_example1(InventoryParams params) {
  params.example = Example::running_cost_constrained;
  return build_inventory_instance(params);
}

inline RiskCmdpInstance build_inventory_example2(InventoryParams params) {
  params.example = Example::order_count_constrained;
  return build_inventory_instance(params);
}

}  // namespace riskcmdp::inventory
