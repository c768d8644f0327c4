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

#ifndef LINSWAP_POLYTOPE_HPP_
#define LINSWAP_POLYTOPE_HPP_

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <string>
#include <vector>

namespace linswap {

// A standard-form polytope {x : Px = p, x ≥ 0} together with an explicit
// box bound: every feasible point lies in [0, gamma]^d.
struct StandardPolytope {
  Eigen::SparseMatrix<double> P;  // k × d
  Eigen::VectorXd p;              // k
  double gamma = 1.0;
  std::vector<std::string> var_names;

  int rows() const { return static_cast<int>(P.rows()); }
  int dim() const { return static_cast<int>(P.cols()); }

  // max(‖Px − p‖∞, bound violation).
  double residual(const Eigen::VectorXd& x) const;
  bool contains(const Eigen::VectorXd& x, double tol) const {
    return residual(x) <= tol;
  }
};

// Rewrites a bounded inequality-form polytope {y : Cy ≤ c} ⊆ [−γ, γ]^n in
// standard form over shifted variables and scaled slacks:
//   [C | kn·I] (ỹ, s) = c + γC·1,  (ỹ, s) ≥ 0,  ỹ = y + γ·1,
// with k = max(‖C‖∞, ‖c‖∞). The result lies in [0, 2γ]^{n+m}.
struct InequalityLift {
  StandardPolytope standard;
  int original_dim = 0;
  double shift = 0;  // γ: y = ỹ − γ·1

  Eigen::VectorXd to_original(const Eigen::VectorXd& lifted) const;
};

InequalityLift inequality_to_standard(const Eigen::MatrixXd& C,
                                      const Eigen::VectorXd& c, double gamma);

}  // namespace linswap

#endif  // LINSWAP_POLYTOPE_HPP_
