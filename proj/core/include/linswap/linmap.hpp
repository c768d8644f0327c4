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

#ifndef LINSWAP_LINMAP_HPP_
#define LINSWAP_LINMAP_HPP_

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "linswap/lp.hpp"
#include "linswap/polytope.hpp"
#include "linswap/projection.hpp"
#include "linswap/sequence_form.hpp"

namespace linswap {

enum class MatrixProvenance { kCompiledFeasible, kCanonicalized, kTrigger, kExternal };

struct DeviationMatrix {
  Eigen::MatrixXd A;  // target_dim × |Σ|
  MatrixProvenance provenance = MatrixProvenance::kExternal;
};

// The constraint system whose feasible matrices are exactly the linear
// maps from the source sequence-form polytope into the target polytope.
// Decision variables are the matrix columns A_(σ) ∈ R^d plus one auxiliary
// vector b_j ∈ R^k per source infoset:
//   - P·A_(ja) = b_j            for terminal sequences ja
//   - A_(σ) = 0                 for non-terminal σ (pinned via bounds)
//   - Σ_{j ∈ C_∅} b_j = p
//   - Σ_{j' ∈ C_(ja)} b_j' = b_j for non-terminal ja ≠ ∅
//   - A_(σ) ∈ [0, γ]^d
// A source without infosets degenerates to the single column constraint
// P·A_(∅) = p.
class LinMapSystem {
 public:
  SequenceIndex source;
  StandardPolytope target;

  // Variable layout: columns first (σ-major, d entries each), then the
  // auxiliary vectors (infoset-major, k entries each).
  int col_var(int seq, int row) const { return seq * d() + row; }
  int aux_var(int infoset, int row) const {
    return num_seqs() * d() + infoset * k() + row;
  }
  int num_seqs() const { return source.num_seqs(); }
  int d() const { return target.dim(); }
  int k() const { return target.rows(); }
  int num_vars() const {
    return num_seqs() * d() + source.num_infosets() * k();
  }

  const EqualityBoxSystem& constraints() const { return constraints_; }

  // The same feasible set expressed over the matrix columns alone: the
  // auxiliary vectors are forced bottom-up by the columns, so they can be
  // substituted away. Euclidean projections of matrix iterates must use
  // this form (Frobenius distance is over the columns only).
  const EqualityBoxSystem& matrix_space_constraints() const;

  Eigen::VectorXd pack(const Eigen::MatrixXd& A,
                       const Eigen::MatrixXd& aux) const;
  Eigen::MatrixXd unpack_matrix(const Eigen::VectorXd& y) const;
  Eigen::MatrixXd unpack_aux(const Eigen::VectorXd& y) const;

  std::string dump() const;  // LP-style text export of the constraints

  friend LinMapSystem compile_linmap_system(const SequenceIndex& source,
                                            const StandardPolytope& target);

 private:
  EqualityBoxSystem constraints_;
  mutable EqualityBoxSystem matrix_constraints_;
  mutable bool matrix_constraints_built_ = false;
};

LinMapSystem compile_linmap_system(const SequenceIndex& source,
                                   const StandardPolytope& target);

// compile_linmap_system with the source's own polytope as target.
LinMapSystem compile_self_map_system(const SequenceIndex& index);

struct MembershipReport {
  bool member = false;
  double max_residual = 0;
  std::vector<std::string> violations;
};

// Deterministic membership test: auxiliary vectors are forced bottom-up
// from the terminal columns, so no solver is involved. All candidate
// reads of b_j must agree within tol, the child sums must close at the
// root, non-terminal columns must vanish, and entries must lie in [0, γ].
MembershipReport check_membership(const Eigen::MatrixXd& A,
                                  const LinMapSystem& system, double tol);

// Rewrites any matrix mapping the source polytope into the target as an
// equivalent member of the compiled system: non-terminal columns are
// spread onto the action columns of their first child infoset top-down,
// and sibling subtree blocks are shifted against each other (transferring
// multiples of the per-block row indicators) until every block maps
// nonnegatively. Members of the system are returned unchanged.
// vertex_cap bounds the plan enumeration used to verify the precondition;
// pass 0 to skip verification.
DeviationMatrix canonicalize(const Eigen::MatrixXd& B,
                             const LinMapSystem& system,
                             long vertex_cap = 100000);

// The linear map that, whenever a plan prescribes trigger = (j, a),
// replaces all behavior at j and below with the continuation (a point of
// the subtree polytope at j), and acts as the identity otherwise.
// Returned in canonical form for the self-map system.
DeviationMatrix trigger_deviation_matrix(const SequenceIndex& index,
                                         int trigger_seq,
                                         const Eigen::VectorXd& continuation);

// Raw (non-canonical) version of the same map: I − diag(1_{σ ⪰ trigger})
// plus the continuation in column `trigger`.
Eigen::MatrixXd raw_trigger_matrix(const SequenceIndex& index, int trigger_seq,
                                   const Eigen::VectorXd& continuation);

// Vertex of the system optimizing a random dense objective; used to draw
// spot-check samples of feasible matrices.
Eigen::MatrixXd sample_feasible_matrix(const LinMapSystem& system,
                                       RandomStream& rng);

}  // namespace linswap

#endif  // LINSWAP_LINMAP_HPP_
