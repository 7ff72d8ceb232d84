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

// Dense two-phase tableau simplex with Bland's anti-cycling rule.
//
//   maximize    c^T y
//   subject to  A_eq y  = b_eq
//               A_le y <= b_le
//               y >= 0

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <vector>

namespace riskcmdp {

struct LinearProgram {
  std::vector<double> objective;
  std::vector<std::vector<double>> eq_rows;
  std::vector<double> eq_rhs;
  std::vector<std::vector<double>> le_rows;
  std::vector<double> le_rhs;
};

enum class LpStatus { optimal, infeasible, unbounded };

inline const char* to_string(LpStatus s) {
  switch (s) {
    case LpStatus::optimal: return "optimal";
    case LpStatus::infeasible: return "infeasible";
    case LpStatus::unbounded: return "unbounded";
  }
  return "unknown";
}

struct SimplexResult {
  LpStatus status = LpStatus::infeasible;
  std::vector<double> solution;  ///< original variables only
  std::vector<double> slack;     ///< one per <= row
  double objective = 0.0;
  std::size_t pivots = 0;
};

/// Thrown when the pivot budget is exhausted; with Bland's rule this signals a bug.
class SimplexCycling : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

namespace detail {

class Tableau {
 public:
  Tableau(std::size_t rows, std::size_t cols)
      : rows_(rows), cols_(cols), data_((rows + 1) * (cols + 1), 0.0), basis_(rows, 0) {}

  double& at(std::size_t r, std::size_t c) { return data_[r * (cols_ + 1) + c]; }
  double at(std::size_t r, std::size_t c) const { return data_[r * (cols_ + 1) + c]; }
  double& rhs(std::size_t r) { return at(r, cols_); }
  double rhs(std::size_t r) const { return at(r, cols_); }
  /// Objective row stores reduced costs c_j - z_j; its rhs holds -z.
  double& cost(std::size_t c) { return at(rows_, c); }
  double cost(std::size_t c) const { return at(rows_, c); }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::vector<std::size_t>& basis() { return basis_; }

  void pivot(std::size_t row, std::size_t col) {
    const double p = at(row, col);
    for (std::size_t c = 0; c <= cols_; ++c) at(row, c) /= p;
    at(row, col) = 1.0;
    for (std::size_t r = 0; r <= rows_; ++r) {
      if (r == row) continue;
      const double factor = at(r, col);
      if (factor == 0.0) continue;
      for (std::size_t c = 0; c <= cols_; ++c) at(r, c) -= factor * at(row, c);
      at(r, col) = 0.0;
    }
    basis_[row] = col;
  }

  /// Loads reduced costs for `objective` (maximize) given the current basis.
  void set_objective(const std::vector<double>& objective) {
    for (std::size_t c = 0; c <= cols_; ++c) cost(c) = c < cols_ ? objective[c] : 0.0;
    for (std::size_t r = 0; r < rows_; ++r) {
      const double cb = objective[basis_[r]];
      if (cb == 0.0) continue;
      for (std::size_t c = 0; c <= cols_; ++c) cost(c) -= cb * at(r, c);
    }
  }

  /// Runs Bland-rule pivots over columns flagged in `allowed`.
  LpStatus optimize(const std::vector<bool>& allowed, double tol, std::size_t& pivots, std::size_t budget) {
    for (;;) {
      std::size_t enter = cols_;
      for (std::size_t c = 0; c < cols_; ++c) {
        if (allowed[c] && cost(c) > tol) {
          enter = c;
          break;
        }
      }
      if (enter == cols_) return LpStatus::optimal;

      std::size_t leave = rows_;
      double best_ratio = std::numeric_limits<double>::infinity();
      for (std::size_t r = 0; r < rows_; ++r) {
        const double a = at(r, enter);
        if (a <= kPivotEps) continue;
        const double ratio = rhs(r) / a;
        if (ratio < best_ratio - kRatioEps ||
            (ratio <= best_ratio + kRatioEps && leave < rows_ && basis_[r] < basis_[leave])) {
          if (ratio < best_ratio) best_ratio = ratio;
          leave = r;
        }
      }
      if (leave == rows_) return LpStatus::unbounded;
      if (++pivots > budget) throw SimplexCycling("simplex pivot budget exhausted");
      pivot(leave, enter);
    }
  }

  static constexpr double kPivotEps = 1e-12;
  static constexpr double kRatioEps = 1e-14;

 private:
  std::size_t rows_;
  std::size_t cols_;
  std::vector<double> data_;
  std::vector<std::size_t> basis_;
};

}  // namespace detail

inline SimplexResult solve_simplex(const LinearProgram& lp, double tol = 1e-9) {
  const std::size_t n = lp.objective.size();
  const std::size_t n_eq = lp.eq_rows.size();
  const std::size_t n_le = lp.le_rows.size();
  const std::size_t m = n_eq + n_le;
  if (lp.eq_rhs.size() != n_eq || lp.le_rhs.size() != n_le)
    throw std::invalid_argument("solve_simplex: rhs size mismatch");

  // Columns: originals, one slack per <= row, then artificials as needed.
  std::vector<bool> needs_artificial(m, false);
  for (std::size_t r = 0; r < n_eq; ++r) needs_artificial[r] = true;
  for (std::size_t r = 0; r < n_le; ++r) needs_artificial[n_eq + r] = lp.le_rhs[r] < 0.0;
  std::size_t n_art = 0;
  for (bool b : needs_artificial) n_art += b ? 1 : 0;

  const std::size_t slack0 = n;
  const std::size_t art0 = n + n_le;
  const std::size_t cols = art0 + n_art;
  detail::Tableau tab(m, cols);

  std::size_t next_art = art0;
  for (std::size_t r = 0; r < m; ++r) {
    const bool eq = r < n_eq;
    const auto& row = eq ? lp.eq_rows[r] : lp.le_rows[r - n_eq];
    if (row.size() != n) throw std::invalid_argument("solve_simplex: row width mismatch");
    double rhs = eq ? lp.eq_rhs[r] : lp.le_rhs[r - n_eq];
    const double sign = rhs < 0.0 ? -1.0 : 1.0;
    for (std::size_t c = 0; c < n; ++c) tab.at(r, c) = sign * row[c];
    if (!eq) tab.at(r, slack0 + (r - n_eq)) = sign;
    tab.rhs(r) = sign * rhs;
    if (needs_artificial[r]) {
      tab.at(r, next_art) = 1.0;
      tab.basis()[r] = next_art++;
    } else {
      tab.basis()[r] = slack0 + (r - n_eq);
    }
  }

  SimplexResult result;
  const std::size_t budget = 1000 + 50 * (m + cols);
  std::vector<bool> allowed(cols, true);

  if (n_art > 0) {
    std::vector<double> phase1(cols, 0.0);
    for (std::size_t c = art0; c < cols; ++c) phase1[c] = -1.0;
    tab.set_objective(phase1);
    tab.optimize(allowed, tol, result.pivots, budget);
    double infeasibility = 0.0;
    for (std::size_t r = 0; r < m; ++r)
      if (tab.basis()[r] >= art0) infeasibility += tab.rhs(r);
    double scale = 1.0;
    for (std::size_t r = 0; r < m; ++r) scale = std::max(scale, std::abs(tab.rhs(r)));
    if (infeasibility > tol * scale) {
      result.status = LpStatus::infeasible;
      return result;
    }
    // Drive zero-level artificials out of the basis where possible.
    for (std::size_t r = 0; r < m; ++r) {
      if (tab.basis()[r] < art0) continue;
      for (std::size_t c = 0; c < art0; ++c) {
        if (std::abs(tab.at(r, c)) > detail::Tableau::kPivotEps) {
          tab.pivot(r, c);
          ++result.pivots;
          break;
        }
      }
    }
    for (std::size_t c = art0; c < cols; ++c) allowed[c] = false;
  }

  std::vector<double> phase2(cols, 0.0);
  for (std::size_t c = 0; c < n; ++c) phase2[c] = lp.objective[c];
  tab.set_objective(phase2);
  result.status = tab.optimize(allowed, tol, result.pivots, budget);
  if (result.status != LpStatus::optimal) return result;

  result.solution.assign(n, 0.0);
  result.slack.assign(n_le, 0.0);
  for (std::size_t r = 0; r < m; ++r) {
    const std::size_t b = tab.basis()[r];
    const double v = std::max(0.0, tab.rhs(r));
    if (b < n) result.solution[b] = v;
    else if (b < art0) result.slack[b - slack0] = v;
  }
  result.objective = 0.0;
  for (std::size_t c = 0; c < n; ++c) result.objective += lp.objective[c] * result.solution[c];
  return result;
}

}  // namespace riskcmdp
