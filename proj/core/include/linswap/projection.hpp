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

#ifndef LINSWAP_PROJECTION_HPP_
#define LINSWAP_PROJECTION_HPP_

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <optional>
#include <string>
#include <vector>

namespace linswap {

// Feasible set {y : Ey = f, lo ≤ y ≤ hi} (entries of lo/hi may be ±inf).
struct EqualityBoxSystem {
  Eigen::SparseMatrix<double> E;
  Eigen::VectorXd f;
  Eigen::VectorXd lo, hi;

  int rows() const { return static_cast<int>(E.rows()); }
  int dim() const { return static_cast<int>(E.cols()); }
  double residual(const Eigen::VectorXd& y) const;
  double box_half_width() const;  // finite part, used for certificates
};

struct ProjectionResult {
  Eigen::VectorXd y;
  double eq_residual = 0;   // ‖Ey − f‖∞
  double sq_dist_bound = 0; // bound on ‖y − y*‖² from the dual certificate
  double dual_value = 0;
  Eigen::VectorXd multipliers;  // warm-start handle for the next call
  int iterations = 0;
};

// Euclidean projection of q onto the system, solved by maximizing the
// Lagrangian dual with a semismooth Newton method (the inner box-clamped
// minimizer is closed form). Gradient-ascent steps are used as a fallback
// whenever a Newton step fails to improve the dual.
//
// Accuracy contract: on success eq_residual ≤ feas_tol and the certified
// squared distance to the exact projection is ≤ accuracy. The certificate
// is 2·(P_ref − g(λ)): weak duality against the best known feasible
// primal value P_ref (from `feasible_ref` when given, otherwise from the
// returned point with an infeasibility allowance).
// Throws SolveError when the iteration budget runs out, reporting the gap
// reached.
ProjectionResult euclidean_project(
    const EqualityBoxSystem& sys, const Eigen::VectorXd& q, double accuracy,
    const Eigen::VectorXd* warm_multipliers = nullptr,
    const Eigen::VectorXd* feasible_ref = nullptr, double feas_tol = 1e-10,
    int max_iterations = 4000);

// Largest ⟨q − y, z − y⟩ over the supplied feasible points; nonpositive at
// the exact projection, and at most δ(ε) = √ε·(‖q − y‖ + 2·diameter) for an
// ε-accurate one.
double variational_inequality_slack(const Eigen::VectorXd& q,
                                    const Eigen::VectorXd& y,
                                    const std::vector<Eigen::VectorXd>& zs);

}  // namespace linswap

#endif  // LINSWAP_PROJECTION_HPP_
