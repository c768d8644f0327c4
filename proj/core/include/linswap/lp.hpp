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

#ifndef LINSWAP_LP_HPP_
#define LINSWAP_LP_HPP_

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace linswap {

struct SolveError : std::runtime_error {
  explicit SolveError(const std::string& message)
      : std::runtime_error(message) {}
};

inline constexpr double kInf = std::numeric_limits<double>::infinity();

enum class RowSense { kLe, kEq, kGe };

// min/max cᵀx subject to row constraints and variable bounds. Rows are
// stored sparse; bounds may be ±inf and lower == upper pins a variable.
class LinearProgram {
 public:
  explicit LinearProgram(int num_vars)
      : c_(Eigen::VectorXd::Zero(num_vars)),
        lower_(Eigen::VectorXd::Constant(num_vars, -kInf)),
        upper_(Eigen::VectorXd::Constant(num_vars, kInf)) {}

  int num_vars() const { return static_cast<int>(c_.size()); }
  int num_rows() const { return static_cast<int>(senses_.size()); }

  void set_objective(const Eigen::VectorXd& c, bool maximize) {
    c_ = c;
    maximize_ = maximize;
  }
  void set_bounds(int var, double lo, double hi) {
    lower_[var] = lo;
    upper_[var] = hi;
  }
  // entries: (var, coeff) pairs.
  void add_row(const std::vector<std::pair<int, double>>& entries,
               RowSense sense, double rhs);

  const Eigen::VectorXd& objective() const { return c_; }
  bool maximize() const { return maximize_; }
  const Eigen::VectorXd& lower() const { return lower_; }
  const Eigen::VectorXd& upper() const { return upper_; }
  const std::vector<std::vector<std::pair<int, double>>>& rows() const {
    return rows_;
  }
  const std::vector<RowSense>& senses() const { return senses_; }
  const std::vector<double>& rhs() const { return rhs_; }

  std::string dump() const;  // LP-style text export

 private:
  Eigen::VectorXd c_;
  bool maximize_ = false;
  Eigen::VectorXd lower_, upper_;
  std::vector<std::vector<std::pair<int, double>>> rows_;
  std::vector<RowSense> senses_;
  std::vector<double> rhs_;
};

enum class LpStatus { kOptimal, kInfeasible, kUnbounded, kIterationLimit };

struct LpResult {
  LpStatus status = LpStatus::kIterationLimit;
  Eigen::VectorXd x;
  double objective = 0;
  double max_residual = 0;  // primal feasibility of the returned point
  int iterations = 0;
};

// Dense bounded-variable revised simplex, two phases, Bland fallback under
// stalling. Intended for desk-scale programs (hundreds of rows).
LpResult solve_lp(const LinearProgram& lp);

}  // namespace linswap

#endif  // LINSWAP_LP_HPP_
