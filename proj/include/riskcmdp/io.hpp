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

// JSON ingestion and persistence for instances, policies and solver settings.
//
// Instance document:
//   horizon     integer T >= 2
//   states      integer (shared) or [|S_1|, ..., |S_T|]
//   actions     optional; integer, [per state] or [[per state] per epoch],
//               checked against the kernel shape
//   stationary  optional bool; kernel and running costs given for one epoch
//               and replicated
//   kernel      [t][x][a][x'] probabilities
//   reward, constraint:
//     running   number, [t][x][a] (next-state independent) or [t][x][a][x']
//     terminal  number or [x]
//     gamma, beta, alpha
//   bound       number, "inf" or null (unconstrained)
//   sense       "maximize" | "minimize"
//
// A document with an "inventory" block is built by the inventory generator.

#include <cmath>
#include <cstddef>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "riskcmdp/grc.hpp"
#include "riskcmdp/inventory.hpp"
#include "riskcmdp/model.hpp"

namespace riskcmdp::io {

using nlohmann::json;

/// Malformed or invalid configuration; `what()` carries a located diagnostic.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

inline std::string line_col(const std::string& text, std::size_t byte) {
  std::size_t line = 1, col = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

inline const json& field(const json& doc, const char* key, const std::string& where) {
  if (!doc.is_object() || !doc.contains(key)) throw ConfigError(where + ": missing field '" + key + "'");
  return doc.at(key);
}

inline double number(const json& v, const std::string& where) {
  if (!v.is_number()) throw ConfigError(where + ": expected a number");
  return v.get<double>();
}

inline std::size_t count(const json& v, const std::string& where) {
  if (!v.is_number_integer() || v.get<long long>() < 0) throw ConfigError(where + ": expected a nonnegative integer");
  return v.get<std::size_t>();
}

inline Vector vector(const json& v, const std::string& where) {
  if (!v.is_array()) throw ConfigError(where + ": expected an array");
  Vector out;
  out.reserve(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out.push_back(number(v[i], where + "[" + std::to_string(i) + "]"));
  return out;
}

inline std::vector<json> epochs(const json& v, std::size_t n, bool stationary, const std::string& where) {
  if (!v.is_array()) throw ConfigError(where + ": expected an array");
  if (stationary) return std::vector<json>(n, v);
  if (v.size() != n)
    throw ConfigError(where + ": expected " + std::to_string(n) + " epochs, found " + std::to_string(v.size()));
  return std::vector<json>(v.begin(), v.end());
}

inline TransitionTable kernel(const json& v, const InstanceConfig& config, bool stationary) {
  const auto per_epoch = epochs(v, config.horizon - 1, stationary, "kernel");
  TransitionTable out(per_epoch.size());
  for (std::size_t t = 0; t < per_epoch.size(); ++t) {
    const std::string where = "kernel[" + std::to_string(t) + "]";
    if (!per_epoch[t].is_array()) throw ConfigError(where + ": expected an array of states");
    out[t].resize(per_epoch[t].size());
    for (std::size_t x = 0; x < per_epoch[t].size(); ++x) {
      const auto& acts = per_epoch[t][x];
      if (!acts.is_array()) throw ConfigError(where + "[" + std::to_string(x) + "]: expected an array of actions");
      for (std::size_t a = 0; a < acts.size(); ++a)
        out[t][x].push_back(vector(acts[a], where + "[" + std::to_string(x) + "][" + std::to_string(a) + "]"));
    }
  }
  return out;
}

/// Running costs shaped like `shape` (the kernel); accepts a scalar, (x,a)
/// form or full (x,a,x') form.
inline TransitionTable running(const json& v, const TransitionTable& shape, bool stationary,
                               const std::string& where) {
  TransitionTable out = shape;
  if (v.is_number()) {
    const double c = v.get<double>();
    for (auto& epoch : out)
      for (auto& state : epoch)
        for (auto& row : state)
          for (double& d : row) d = c;
    return out;
  }
  const auto per_epoch = epochs(v, shape.size(), stationary, where);
  for (std::size_t t = 0; t < shape.size(); ++t) {
    const std::string wt = where + "[" + std::to_string(t) + "]";
    const auto& ej = per_epoch[t];
    if (!ej.is_array() || ej.size() != shape[t].size()) throw ConfigError(wt + ": state count differs from kernel");
    for (std::size_t x = 0; x < shape[t].size(); ++x) {
      const std::string wx = wt + "[" + std::to_string(x) + "]";
      const auto& xj = ej[x];
      if (!xj.is_array() || xj.size() != shape[t][x].size()) throw ConfigError(wx + ": action count differs from kernel");
      for (std::size_t a = 0; a < shape[t][x].size(); ++a) {
        const std::string wa = wx + "[" + std::to_string(a) + "]";
        if (xj[a].is_number()) {
          for (double& d : out[t][x][a]) d = xj[a].get<double>();
        } else {
          out[t][x][a] = vector(xj[a], wa);
          if (out[t][x][a].size() != shape[t][x][a].size()) throw ConfigError(wa + ": next-state count differs from kernel");
        }
      }
    }
  }
  return out;
}

inline CostSpec cost_spec(const json& v, const InstanceConfig& config, bool stationary, const std::string& where) {
  if (!v.is_object()) throw ConfigError(where + ": expected an object");
  CostSpec spec;
  spec.running = v.contains("running") ? running(v.at("running"), config.kernel, stationary, where + ".running")
                                       : running(json(0.0), config.kernel, true, where + ".running");
  const std::size_t last = config.state_counts.back();
  if (!v.contains("terminal")) spec.terminal.assign(last, 0.0);
  else if (v.at("terminal").is_number()) spec.terminal.assign(last, v.at("terminal").get<double>());
  else spec.terminal = vector(v.at("terminal"), where + ".terminal");
  spec.gamma = number(field(v, "gamma", where), where + ".gamma");
  spec.beta = number(field(v, "beta", where), where + ".beta");
  spec.alpha = vector(field(v, "alpha", where), where + ".alpha");
  return spec;
}

inline double bound(const json& v) {
  if (v.is_null()) return kInfiniteBound;
  if (v.is_string()) {
    const auto s = v.get<std::string>();
    if (s == "inf" || s == "infinity" || s == "+inf") return kInfiniteBound;
    throw ConfigError("bound: expected a number, \"inf\" or null");
  }
  return number(v, "bound");
}

inline Sense sense(const json& v) {
  const auto s = v.is_string() ? v.get<std::string>() : std::string();
  if (s == "maximize" || s == "max") return Sense::maximize;
  if (s == "minimize" || s == "min") return Sense::minimize;
  throw ConfigError("sense: expected \"maximize\" or \"minimize\"");
}

inline void check_actions(const json& v, const InstanceConfig& config, bool stationary) {
  for (std::size_t t = 0; t + 1 < config.horizon; ++t)
    for (std::size_t x = 0; x < config.kernel[t].size(); ++x) {
      std::size_t expected = 0;
      if (v.is_number_integer()) expected = v.get<std::size_t>();
      else if (v.is_array() && !v.empty() && v[0].is_number()) expected = count(v.at(x), "actions");
      else if (v.is_array()) expected = count(v.at(stationary ? 0 : t).at(x), "actions");
      else throw ConfigError("actions: expected an integer or nested arrays of integers");
      if (expected != config.kernel[t][x].size())
        throw ConfigError("actions: A_{" + std::to_string(t + 1) + "," + std::to_string(x) +
                          "} disagrees with the kernel");
    }
}

}  // namespace detail

inline inventory::InventoryParams inventory_params_from_json(const json& v) {
  using detail::number;
  inventory::InventoryParams p;
  if (!v.is_object()) throw ConfigError("inventory: expected an object");
  if (v.contains("example")) {
    const auto& e = v.at("example");
    if (e == 1 || e == "running_cost_constrained") p = inventory::example1_params();
    else if (e == 2 || e == "order_count_constrained") p = inventory::example2_params(0.5, 4.0, 10);
    else throw ConfigError("inventory.example: expected 1, 2, \"running_cost_constrained\" or \"order_count_constrained\"");
  }
  auto num = [&](const char* key, double& slot) {
    if (v.contains(key)) slot = number(v.at(key), std::string("inventory.") + key);
  };
  if (v.contains("capacity")) p.capacity = detail::count(v.at("capacity"), "inventory.capacity");
  if (v.contains("horizon")) p.horizon = detail::count(v.at("horizon"), "inventory.horizon");
  num("fixed_order", p.fixed_order);
  num("unit_order", p.unit_order);
  num("holding", p.holding);
  num("shortage", p.shortage);
  num("p", p.p);
  num("beta", p.beta);
  num("beta_c", p.beta_c);
  if (v.contains("gamma")) {
    // gamma_c follows gamma at the example's ratio unless given explicitly.
    const double ratio = p.gamma_c / p.gamma;
    p.gamma = number(v.at("gamma"), "inventory.gamma");
    p.gamma_c = ratio * p.gamma;
  }
  num("gamma_c", p.gamma_c);
  if (v.contains("convention")) {
    const auto c = v.at("convention");
    if (c == "continuation") p.convention = inventory::DemandConvention::continuation;
    else if (c == "success") p.convention = inventory::DemandConvention::success;
    else if (c == "trials") p.convention = inventory::DemandConvention::trials;
    else throw ConfigError("inventory.convention: expected \"continuation\", \"success\" or \"trials\"");
  }
  if (v.contains("normalized_bound")) p.bound = std::exp(number(v.at("normalized_bound"), "inventory.normalized_bound") * p.gamma_c);
  else if (v.contains("bound")) p.bound = detail::bound(v.at("bound"));
  else p.bound = p.example == inventory::Example::running_cost_constrained ? std::exp(0.6 * p.gamma_c)
                                                                           : std::exp(4.0 * p.gamma_c);
  return p;
}

inline json to_json(const inventory::InventoryParams& p) {
  return json{{"example", p.example == inventory::Example::running_cost_constrained ? "running_cost_constrained"
                                                                                    : "order_count_constrained"},
              {"capacity", p.capacity},
              {"fixed_order", p.fixed_order},
              {"unit_order", p.unit_order},
              {"holding", p.holding},
              {"shortage", p.shortage},
              {"p", p.p},
              {"convention", inventory::to_string(p.convention)},
              {"gamma", p.gamma},
              {"gamma_c", p.gamma_c},
              {"beta", p.beta},
              {"beta_c", p.beta_c},
              {"bound", std::isfinite(p.bound) ? json(p.bound) : json("inf")},
              {"horizon", p.horizon}};
}

/// Instance config from a parsed document (without validation).
inline InstanceConfig instance_config_from_json(const json& doc) {
  if (doc.contains("inventory"))
    return inventory::build_inventory_instance(inventory_params_from_json(doc.at("inventory"))).config();

  InstanceConfig config;
  config.horizon = detail::count(detail::field(doc, "horizon", "instance"), "horizon");
  if (config.horizon < 2) throw ConfigError("horizon: must be at least 2");
  const bool stationary = doc.value("stationary", false);
  const auto& states = detail::field(doc, "states", "instance");
  if (states.is_number_integer()) {
    config.state_counts.assign(config.horizon, detail::count(states, "states"));
  } else if (states.is_array() && states.size() == config.horizon) {
    for (std::size_t t = 0; t < states.size(); ++t) config.state_counts.push_back(detail::count(states[t], "states"));
  } else {
    throw ConfigError("states: expected an integer or one count per epoch");
  }
  config.kernel = detail::kernel(detail::field(doc, "kernel", "instance"), config, stationary);
  if (doc.contains("actions")) detail::check_actions(doc.at("actions"), config, stationary);
  config.reward = detail::cost_spec(detail::field(doc, "reward", "instance"), config, stationary, "reward");
  config.constraint = doc.contains("constraint")
                          ? detail::cost_spec(doc.at("constraint"), config, stationary, "constraint")
                          : config.reward;
  config.bound = doc.contains("bound") ? detail::bound(doc.at("bound")) : kInfiniteBound;
  config.sense = doc.contains("sense") ? detail::sense(doc.at("sense")) : Sense::maximize;
  return config;
}

inline json parse(const std::string& text, const std::string& source) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(source + ": parse error at " + detail::line_col(text, e.byte == 0 ? 0 : e.byte - 1) + ": " +
                      e.what());
  }
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path + ": cannot open file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// Parses and validates an instance document; validation failures surface as
/// ConfigError.
inline RiskCmdpInstance instance_from_json(const json& doc) {
  try {
    return build_instance(instance_config_from_json(doc));
  } catch (const ValidationError& e) {
    throw ConfigError(std::string("invalid instance: ") + e.what());
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed instance: ") + e.what());
  }
}

inline RiskCmdpInstance load_instance(const std::string& path) {
  return instance_from_json(parse(read_file(path), path));
}

inline json cost_to_json(const CostSpec& spec) {
  return json{{"running", spec.running},
              {"terminal", spec.terminal},
              {"gamma", spec.gamma},
              {"beta", spec.beta},
              {"alpha", spec.alpha}};
}

/// Full-precision document in explicit (x,a,x') form; reading it back yields
/// an identical config.
inline json to_json(const InstanceConfig& config) {
  return json{{"horizon", config.horizon},
              {"states", config.state_counts},
              {"kernel", config.kernel},
              {"reward", cost_to_json(config.reward)},
              {"constraint", cost_to_json(config.constraint)},
              {"bound", std::isfinite(config.bound) ? json(config.bound) : json("inf")},
              {"sense", to_string(config.sense)}};
}

inline json to_json(const Policy& policy) { return json{{"rules", policy.rules}}; }

inline Policy policy_from_json(const json& doc) {
  try {
    Policy policy;
    policy.rules = detail::field(doc, "rules", "policy").get<EpochTable<double>>();
    return policy;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed policy: ") + e.what());
  }
}

inline Policy load_policy(const std::string& path) { return policy_from_json(parse(read_file(path), path)); }

/// Overrides `config` with the fields present in a "solver" block.
inline void apply_solver_json(const json& v, GrcConfig& config) {
  if (!v.is_object()) throw ConfigError("solver: expected an object");
  try {
    if (v.contains("max_iters")) config.max_iters = v.at("max_iters").get<std::size_t>();
    if (v.contains("restart_weight")) config.restart_weight = v.at("restart_weight").get<double>();
    if (v.contains("step_c")) config.step_c = v.at("step_c").get<double>();
    if (v.contains("step_k0")) config.step_k0 = v.at("step_k0").get<double>();
    if (v.contains("restart_mode")) {
      const auto m = v.at("restart_mode").get<std::string>();
      if (m == "corner") config.restart_mode = RestartMode::corner;
      else if (m == "interior") config.restart_mode = RestartMode::interior;
      else throw ConfigError("solver.restart_mode: expected \"corner\" or \"interior\"");
    }
    if (v.contains("seed")) config.seed = v.at("seed").get<std::uint64_t>();
    if (v.contains("feasibility_tol")) config.feasibility_tol = v.at("feasibility_tol").get<double>();
    if (v.contains("residual_tol")) config.residual_tol = v.at("residual_tol").get<double>();
    if (v.contains("early_stop")) config.early_stop = v.at("early_stop").get<bool>();
    if (v.contains("early_stop_window")) config.early_stop_window = v.at("early_stop_window").get<std::size_t>();
    if (v.contains("trace_stride")) config.trace_stride = v.at("trace_stride").get<std::size_t>();
    if (v.contains("randomize_ties")) config.randomize_ties = v.at("randomize_ties").get<bool>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("solver: ") + e.what());
  }
}

inline json to_json(const GrcConfig& c) {
  return json{{"max_iters", c.max_iters},
              {"restart_weight", c.restart_weight},
              {"step_c", c.step_c},
              {"step_k0", c.step_k0},
              {"restart_mode", to_string(c.restart_mode)},
              {"seed", c.seed},
              {"feasibility_tol", c.feasibility_tol},
              {"residual_tol", c.residual_tol},
              {"early_stop", c.early_stop},
              {"early_stop_window", c.early_stop_window},
              {"trace_stride", c.trace_stride},
              {"randomize_ties", c.randomize_ties}};
}

/// %.17g; NaN becomes an empty field.
inline std::string csv_number(double v) {
  if (std::isnan(v)) return "";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline json json_number(double v) {
  if (std::isfinite(v)) return v;
  if (std::isnan(v)) return nullptr;
  return v > 0 ? "inf" : "-inf";
}

inline void write_trace_csv(std::ostream& os, const std::vector<TraceRow>& trace) {
  os << "k,restarted,J_r,J_c,feasible,best_J_r,residual\n";
  for (const auto& row : trace)
    os << row.k << ',' << (row.restarted ? 1 : 0) << ',' << csv_number(row.j_r) << ',' << csv_number(row.j_c) << ','
       << (row.feasible ? 1 : 0) << ',' << csv_number(row.best_j_r) << ',' << csv_number(row.residual) << '\n';
}

}  // namespace riskcmdp::io
