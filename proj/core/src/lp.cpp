// Copyright 2026 The linswap Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "linswap/lp.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <Eigen/LU>

namespace linswap {

void LinearProgram::add_row(const std::vector<std::pair<int, double>>& entries,
                            RowSense sense, double rhs) {
  for (const auto& [var, coeff] : entries) {
    (void)coeff;
    if (var < 0 || var >= num_vars())
      throw SolveError("row references variable out of range");
  }
  rows_.push_back(entries);
  senses_.push_back(sense);
  rhs_.push_back(rhs);
}

std::string LinearProgram::dump() const {
  std::ostringstream os;
  os << (maximize_ ? "maximize" : "minimize") << "\n ";
  for (int j = 0; j < num_vars(); ++j)
    if (c_[j] != 0) os << " " << (c_[j] > 0 ? "+" : "") << c_[j] << " x" << j;
  os << "\nsubject to\n";
  for (int i = 0; i < num_rows(); ++i) {
    os << "  r" << i << ":";
    for (const auto& [var, coeff] : rows_[i])
      os << " " << (coeff > 0 ? "+" : "") << coeff << " x" << var;
    switch (senses_[i]) {
      case RowSense::kLe: os << " <= "; break;
      case RowSense::kEq: os << " = "; break;
      case RowSense::kGe: os << " >= "; break;
    }
    os << rhs_[i] << "\n";
  }
  os << "bounds\n";
  for (int j = 0; j < num_vars(); ++j)
    os << "  " << lower_[j] << " <= x" << j << " <= " << upper_[j] << "\n";
  return os.str();
}

namespace {

constexpr double kPivotTol = 1e-10;
constexpr double kCostTol = 1e-9;

// Bounded-variable revised simplex over equality rows with an explicit
// dense basis inverse; desk-scale only.
class Simplex {
 public:
  explicit Simplex(int m) : m_(m) {}

  int add_column(const std::vector<std::pair<int, double>>& entries, double lo,
                 double hi, double cost, double start) {
    cols_.push_back(entries);
    lo_.push_back(lo);
    hi_.push_back(hi);
    cost_.push_back(cost);
    xval_.push_back(start);
    in_basis_.push_back(false);
    return static_cast<int>(cols_.size()) - 1;
  }

  int num_cols() const { return static_cast<int>(cols_.size()); }
  double value(int j) const { return xval_[j]; }
  void set_cost(int j, double c) { cost_[j] = c; }
  void fix_at_zero(int j) { lo_[j] = hi_[j] = 0; }
  void set_rhs(const Eigen::VectorXd& b) { b_ = b; }

  void set_basis(const std::vector<int>& basis) {
    basis_ = basis;
    std::fill(in_basis_.begin(), in_basis_.end(), false);
    for (int j : basis_) in_basis_[j] = true;
    refactor();
    recompute_basics();
  }

  void refresh() {
    refactor();
    recompute_basics();
  }

  // One guaranteed-independent unit column per row (the artificials);
  // used to repair a numerically singular basis.
  void set_unit_columns(const std::vector<int>& cols) { unit_cols_ = cols; }

  void set_safe_mode(bool safe) { safe_mode_ = safe; }

  LpStatus run(int max_iters) {
    int stall = 0;
    for (; iters_ < max_iters; ++iters_) {
      const bool bland = safe_mode_ || stall > 200;
      const Eigen::VectorXd y = dual_prices();

      // Pricing.
      int enter = -1, enter_dir = 0;
      double best = kCostTol;
      for (int j = 0; j < num_cols(); ++j) {
        if (in_basis_[j] || lo_[j] == hi_[j]) continue;
        const double d = cost_[j] - dot(cols_[j], y);
        const bool at_lower = std::isfinite(lo_[j]) && xval_[j] <= lo_[j] + 1e-11;
        const bool at_upper = std::isfinite(hi_[j]) && xval_[j] >= hi_[j] - 1e-11;
        int dir = 0;
        if (d < -kCostTol && (at_lower || (!at_lower && !at_upper)))
          dir = +1;
        else if (d > kCostTol && (at_upper || (!at_lower && !at_upper)))
          dir = -1;
        if (dir == 0) continue;
        if (bland) {
          enter = j;
          enter_dir = dir;
          break;
        }
        if (std::abs(d) > best) {
          best = std::abs(d);
          enter = j;
          enter_dir = dir;
        }
      }
      if (enter < 0) return LpStatus::kOptimal;

      const Eigen::VectorXd w = ftran(cols_[enter]);

      // Ratio test, pass 1: tightest step over the basic rows.
      const double flip = hi_[enter] - lo_[enter];
      double basic_theta = kInf;
      for (int i = 0; i < m_; ++i) {
        const double step = -enter_dir * w[i];
        if (std::abs(step) < kPivotTol) continue;
        const int bj = basis_[i];
        double room;
        if (step > 0)
          room = std::isfinite(hi_[bj]) ? (hi_[bj] - xval_[bj]) / step : kInf;
        else
          room = std::isfinite(lo_[bj]) ? (xval_[bj] - lo_[bj]) / (-step) : kInf;
        basic_theta = std::min(basic_theta, std::max(room, 0.0));
      }
      if (!std::isfinite(basic_theta) && !std::isfinite(flip))
        return LpStatus::kUnbounded;

      if (std::isfinite(flip) && flip <= basic_theta) {
        // Bound flip: traverse the whole range and land exactly on the
        // opposite bound.
        for (int i = 0; i < m_; ++i)
          xval_[basis_[i]] -= enter_dir * flip * w[i];
        xval_[enter] = enter_dir > 0 ? hi_[enter] : lo_[enter];
        stall = (flip <= 1e-12) ? stall + 1 : 0;
        continue;
      }

      // Pass 2: pick the leaving row among the near-ties (largest pivot,
      // or the lowest column index under Bland's rule), then step by that
      // row's exact room so the leaving variable lands on its bound
      // without perturbing the rest of the solution.
      int leave = -1, leave_bound = 0;
      double leave_pivot = 0, theta = 0;
      for (int i = 0; i < m_; ++i) {
        const double step = -enter_dir * w[i];
        if (std::abs(step) < kPivotTol) continue;
        const int bj = basis_[i];
        double room;
        int bound;
        if (step > 0) {
          if (!std::isfinite(hi_[bj])) continue;
          room = std::max((hi_[bj] - xval_[bj]) / step, 0.0);
          bound = +1;
        } else {
          if (!std::isfinite(lo_[bj])) continue;
          room = std::max((xval_[bj] - lo_[bj]) / (-step), 0.0);
          bound = -1;
        }
        if (room > basic_theta + 1e-12) continue;
        const bool better =
            leave < 0 || (bland ? bj < basis_[leave]
                                : std::abs(w[i]) > std::abs(leave_pivot));
        if (better) {
          leave = i;
          leave_pivot = w[i];
          leave_bound = bound;
          theta = room;
        }
      }
      if (leave < 0) return LpStatus::kUnbounded;
      stall = (theta <= 1e-12) ? stall + 1 : 0;

      for (int i = 0; i < m_; ++i)
        xval_[basis_[i]] -= enter_dir * theta * w[i];
      xval_[enter] += enter_dir * theta;

      const int out = basis_[leave];
      in_basis_[out] = false;
      xval_[out] = leave_bound > 0 ? hi_[out] : lo_[out];
      basis_[leave] = enter;
      in_basis_[enter] = true;
      if (std::abs(leave_pivot) < 1e-7 ||
          ++pivots_since_factor_ > (safe_mode_ ? 16 : 96)) {
        refactor();
        recompute_basics();
      } else {
        update_inverse(leave, w);
      }
    }
    return LpStatus::kIterationLimit;
  }

  double objective() const {
    double v = 0;
    for (int j = 0; j < num_cols(); ++j) v += cost_[j] * xval_[j];
    return v;
  }

  double primal_residual() const {
    Eigen::VectorXd r = b_;
    for (int j = 0; j < num_cols(); ++j) {
      if (xval_[j] == 0) continue;
      for (const auto& [row, coeff] : cols_[j]) r[row] -= coeff * xval_[j];
    }
    double res = r.size() ? r.cwiseAbs().maxCoeff() : 0.0;
    for (int j = 0; j < num_cols(); ++j) {
      if (std::isfinite(lo_[j])) res = std::max(res, lo_[j] - xval_[j]);
      if (std::isfinite(hi_[j])) res = std::max(res, xval_[j] - hi_[j]);
    }
    return res;
  }

  void recompute_basics() {
    Eigen::VectorXd rhs = b_;
    for (int j = 0; j < num_cols(); ++j) {
      if (in_basis_[j] || xval_[j] == 0) continue;
      for (const auto& [row, coeff] : cols_[j]) rhs[row] -= coeff * xval_[j];
    }
    const Eigen::VectorXd xb = binv_ * rhs;
    for (int i = 0; i < m_; ++i) xval_[basis_[i]] = xb[i];
  }

  int iterations() const { return iters_; }

 private:
  static double dot(const std::vector<std::pair<int, double>>& col,
                    const Eigen::VectorXd& y) {
    double v = 0;
    for (const auto& [row, coeff] : col) v += coeff * y[row];
    return v;
  }

  Eigen::VectorXd dual_prices() const {
    Eigen::VectorXd cb(m_);
    for (int i = 0; i < m_; ++i) cb[i] = cost_[basis_[i]];
    return binv_.transpose() * cb;
  }

  Eigen::VectorXd ftran(const std::vector<std::pair<int, double>>& col) const {
    Eigen::VectorXd a = Eigen::VectorXd::Zero(m_);
    for (const auto& [row, coeff] : col) a[row] += coeff;
    return binv_ * a;
  }

  void refactor() {
    Eigen::MatrixXd B = Eigen::MatrixXd::Zero(m_, m_);
    for (int i = 0; i < m_; ++i)
      for (const auto& [row, coeff] : cols_[basis_[i]]) B(row, i) = coeff;
    Eigen::FullPivLU<Eigen::MatrixXd> lu(B);
    lu.setThreshold(1e-10);
    if (lu.rank() < m_ && !unit_cols_.empty()) {
      // The basis drifted into singularity (a pivot on a numerically zero
      // entry). Keep an independent subset of its columns and fill the
      // uncovered rows with their unit columns.
      const auto& colperm = lu.permutationQ().indices();
      const auto& rowperm = lu.permutationP().indices();
      const int rank = static_cast<int>(lu.rank());
      std::vector<int> repaired;
      auto contains = [&](int col) {
        for (int kept : repaired)
          if (kept == col) return true;
        return false;
      };
      for (int k = 0; k < rank; ++k) repaired.push_back(basis_[colperm[k]]);
      for (int k = rank; k < m_; ++k) {
        // Row without a pivot: bring in its unit column.
        int row = 0;
        for (int i = 0; i < m_; ++i)
          if (rowperm[i] == k) row = i;
        if (!contains(unit_cols_[row])) repaired.push_back(unit_cols_[row]);
      }
      for (int row = 0; static_cast<int>(repaired.size()) < m_ && row < m_; ++row)
        if (!contains(unit_cols_[row])) repaired.push_back(unit_cols_[row]);
      for (int k = 0; k < m_; ++k) {
        // Kicked-out columns become nonbasic on their nearest bound.
        const int out = basis_[k];
        if (contains(out)) continue;
        const double v = xval_[out];
        if (std::isfinite(lo_[out]) &&
            (!std::isfinite(hi_[out]) ||
             std::abs(v - lo_[out]) <= std::abs(v - hi_[out])))
          xval_[out] = lo_[out];
        else if (std::isfinite(hi_[out]))
          xval_[out] = hi_[out];
        else
          xval_[out] = 0.0;
      }
      std::fill(in_basis_.begin(), in_basis_.end(), false);
      basis_ = repaired;
      for (int j : basis_) in_basis_[j] = true;
      B.setZero();
      for (int i = 0; i < m_; ++i)
        for (const auto& [row, coeff] : cols_[basis_[i]]) B(row, i) = coeff;
      lu.compute(B);
      if (lu.rank() < m_) {
        // Last resort: restart from the all-unit basis.
        for (int i = 0; i < m_; ++i) basis_[i] = unit_cols_[i];
        std::fill(in_basis_.begin(), in_basis_.end(), false);
        for (int j : basis_) in_basis_[j] = true;
        B.setZero();
        for (int i = 0; i < m_; ++i)
          for (const auto& [row, coeff] : cols_[basis_[i]]) B(row, i) = coeff;
        lu.compute(B);
      }
    }
    binv_ = lu.inverse();
    pivots_since_factor_ = 0;
  }

  void update_inverse(int r, const Eigen::VectorXd& w) {
    const double piv = w[r];
    const Eigen::RowVectorXd row_r = binv_.row(r) / piv;
    for (int i = 0; i < m_; ++i) {
      if (i == r || w[i] == 0) continue;
      binv_.row(i) -= w[i] * row_r;
    }
    binv_.row(r) = row_r;
  }

  int m_;
  std::vector<std::vector<std::pair<int, double>>> cols_;
  std::vector<double> lo_, hi_, cost_, xval_;
  std::vector<bool> in_basis_;
  std::vector<int> basis_;
  std::vector<int> unit_cols_;
  Eigen::MatrixXd binv_;
  Eigen::VectorXd b_;
  int pivots_since_factor_ = 0;
  int iters_ = 0;
  bool safe_mode_ = false;
};

double initial_value(double lo, double hi) {
  if (std::isfinite(lo) && std::isfinite(hi))
    return std::abs(lo) <= std::abs(hi) ? lo : hi;
  if (std::isfinite(lo)) return lo;
  if (std::isfinite(hi)) return hi;
  return 0.0;
}

}  // namespace

namespace {

LpResult solve_lp_once(const LinearProgram& lp, bool safe_mode) {
  const int n = lp.num_vars();
  const int m = lp.num_rows();
  Simplex sx(m);
  sx.set_safe_mode(safe_mode);

  std::vector<std::vector<std::pair<int, double>>> cols(n);
  for (int i = 0; i < m; ++i)
    for (const auto& [var, coeff] : lp.rows()[i])
      cols[var].emplace_back(i, coeff);

  const double sign = lp.maximize() ? -1.0 : 1.0;
  Eigen::VectorXd residual(m);
  for (int i = 0; i < m; ++i) residual[i] = lp.rhs()[i];

  for (int j = 0; j < n; ++j) {
    const double start = initial_value(lp.lower()[j], lp.upper()[j]);
    sx.add_column(cols[j], lp.lower()[j], lp.upper()[j], 0.0, start);
    if (start != 0)
      for (const auto& [row, coeff] : cols[j]) residual[row] -= coeff * start;
  }
  for (int i = 0; i < m; ++i) {
    double lo = 0, hi = 0;
    switch (lp.senses()[i]) {
      case RowSense::kLe: lo = 0; hi = kInf; break;
      case RowSense::kEq: lo = 0; hi = 0; break;
      case RowSense::kGe: lo = -kInf; hi = 0; break;
    }
    sx.add_column({{i, 1.0}}, lo, hi, 0.0, 0.0);
  }

  Eigen::VectorXd b(m);
  for (int i = 0; i < m; ++i) b[i] = lp.rhs()[i];
  sx.set_rhs(b);

  std::vector<int> art(m), basis(m);
  for (int i = 0; i < m; ++i) {
    art[i] = sx.add_column({{i, residual[i] >= 0 ? 1.0 : -1.0}}, 0, kInf, 1.0,
                           std::abs(residual[i]));
    basis[i] = art[i];
  }
  sx.set_unit_columns(art);
  sx.set_basis(basis);

  const int max_iters = 2000 + 60 * (m + sx.num_cols());
  LpResult result;

  LpStatus st = sx.run(max_iters);
  result.iterations = sx.iterations();
  if (st == LpStatus::kIterationLimit) {
    result.status = st;
    return result;
  }
  double art_mass = 0;
  for (int i = 0; i < m; ++i) art_mass += std::abs(sx.value(art[i]));
  if (art_mass > 1e-7) {
    result.status = LpStatus::kInfeasible;
    result.objective = art_mass;
    return result;
  }

  for (int j = 0; j < n; ++j) sx.set_cost(j, sign * lp.objective()[j]);
  for (int i = 0; i < m; ++i) {
    sx.set_cost(art[i], 0.0);
    sx.fix_at_zero(art[i]);
  }
  sx.refresh();
  st = sx.run(max_iters);
  result.iterations = sx.iterations();
  if (st != LpStatus::kOptimal) {
    result.status = st;
    return result;
  }

  sx.refresh();
  result.status = LpStatus::kOptimal;
  result.x = Eigen::VectorXd(n);
  for (int j = 0; j < n; ++j) result.x[j] = sx.value(j);
  result.objective = sign * sx.objective();
  result.max_residual = sx.primal_residual();
  return result;
}

}  // namespace

LpResult solve_lp(const LinearProgram& lp) {
  LpResult result = solve_lp_once(lp, /*safe_mode=*/false);
  if (result.status == LpStatus::kOptimal && result.max_residual <= 1e-8)
    return result;
  // Numerical trouble or a questionable verdict: redo the whole solve
  // with Bland's rule and frequent refactorization.
  LpResult safe = solve_lp_once(lp, /*safe_mode=*/true);
  if (safe.status == LpStatus::kOptimal && safe.max_residual > 1e-7)
    throw SolveError("simplex returned an infeasible point (residual " +
                     std::to_string(safe.max_residual) + ")");
  return safe;
}

}  // namespace linswap
