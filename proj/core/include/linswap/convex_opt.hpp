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

#ifndef LINSWAP_CONVEX_OPT_HPP_
#define LINSWAP_CONVEX_OPT_HPP_

#include <Eigen/Dense>

#include "linswap/linmap.hpp"
#include "linswap/lp.hpp"
#include "linswap/sequence_form.hpp"

namespace linswap {

// x ∈ Q with Ax = x, computed as an LP minimizing the L1 residual of
// (A − I)x over the sequence-form polytope. For members of the self-map
// system the optimum is zero and the returned point satisfies
// ‖Ax − x‖∞ ≤ fixed-point tolerance; otherwise a SolveError reports how
// far the matrix is from admitting one.
Eigen::VectorXd fixed_point(const Eigen::MatrixXd& A,
                            const SequenceIndex& index);

// max ⟨objective, x⟩ over the sequence-form polytope via the LP solver
// (the DP in sequence_form is the independent route).
double max_linear_over_polytope_lp(const SequenceIndex& index,
                                   const Eigen::VectorXd& objective,
                                   Eigen::VectorXd* argmax = nullptr);

// LP over a compiled system: optimize ⟨G, A⟩_F over feasible matrices.
// Returns the optimal matrix; `value` receives the objective.
Eigen::MatrixXd optimize_over_system(const LinMapSystem& system,
                                     const Eigen::MatrixXd& G, bool maximize,
                                     double* value = nullptr);

}  // namespace linswap

#endif  // LINSWAP_CONVEX_OPT_HPP_
