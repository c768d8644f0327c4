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

#include "linswap/linmap.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <sstream>

#include "linswap/convex_opt.hpp"
#include "linswap/tolerances.hpp"

namespace linswap {

Eigen::VectorXd LinMapSystem::pack(const Eigen::MatrixXd& A,
                                   const Eigen::MatrixXd& aux) const {
  Eigen::VectorXd y = Eigen::VectorXd::Zero(num_vars());
  for (int s = 0; s < num_seqs(); ++s)
    for (int r = 0; r < d(); ++r) y[col_var(s, r)] = A(r, s);
  for (int j = 0; j < source.num_infosets(); ++j)
    for (int r = 0; r < k(); ++r) y[aux_var(j, r)] = aux(r, j);
  return y;
}

Eigen::MatrixXd LinMapSystem::unpack_matrix(const Eigen::VectorXd& y) const {
  Eigen::MatrixXd A(d(), num_seqs());
  for (int s = 0; s < num_seqs(); ++s)
    for (int r = 0; r < d(); ++r) A(r, s) = y[col_var(s, r)];
  return A;
}

Eigen::MatrixXd LinMapSystem::unpack_aux(const Eigen::VectorXd& y) const {
  Eigen::MatrixXd aux(k(), source.num_infosets());
  for (int j = 0; j < source.num_infosets(); ++j)
    for (int r = 0; r < k(); ++r) aux(r, j) = y[aux_var(j, r)];
  return aux;
}

LinMapSystem compile_linmap_system(const SequenceIndex& source,
                                   const StandardPolytope& target) {
  LinMapSystem sys;
  sys.source = source;
  sys.target = target;
  const int d = sys.d();
  const int k = sys.k();
  const int nseq = sys.num_seqs();

  EqualityBoxSystem& cons = sys.constraints_;
  cons.lo = Eigen::VectorXd::Zero(sys.num_vars());
  cons.hi = Eigen::VectorXd::Zero(sys.num_vars());
  for (int s = 0; s < nseq; ++s) {
    const bool terminal = source.is_terminal(s);
    for (int r = 0; r < d; ++r) {
      cons.lo[sys.col_var(s, r)] = 0.0;
      cons.hi[sys.col_var(s, r)] = terminal ? target.gamma : 0.0;
    }
  }
  for (int j = 0; j < source.num_infosets(); ++j)
    for (int r = 0; r < k; ++r) {
      cons.lo[sys.aux_var(j, r)] = -kInf;
      cons.hi[sys.aux_var(j, r)] = kInf;
    }

  std::vector<Eigen::Triplet<double>> trips;
  std::vector<double> rhs;
  int row = 0;
  auto p_entries = [&](int seq, int base_row) {
    for (int col = 0; col < target.P.outerSize(); ++col)
      for (Eigen::SparseMatrix<double>::InnerIterator it(target.P, col); it;
           ++it)
        trips.emplace_back(base_row + static_cast<int>(it.row()),
                           sys.col_var(seq, static_cast<int>(it.col())),
                           it.value());
  };

  // Terminal columns map into the parametric polytope of their infoset.
  for (int s = 0; s < nseq; ++s) {
    if (!source.is_terminal(s)) continue;
    p_entries(s, row);
    if (s == 0) {
      // No decision points at all: the single column must land in the target.
      for (int r = 0; r < k; ++r) rhs.push_back(target.p[r]);
    } else {
      const int j = source.seq_infoset[s];
      for (int r = 0; r < k; ++r) {
        trips.emplace_back(row + r, sys.aux_var(j, r), -1.0);
        rhs.push_back(0.0);
      }
    }
    row += k;
  }
  // Root closure.
  if (!source.children[0].empty()) {
    for (int j : source.children[0])
      for (int r = 0; r < k; ++r)
        trips.emplace_back(row + r, sys.aux_var(j, r), 1.0);
    for (int r = 0; r < k; ++r) rhs.push_back(target.p[r]);
    row += k;
  }
  // Child sums collapse onto the parent vector at interior sequences.
  for (int s = 1; s < nseq; ++s) {
    if (source.is_terminal(s)) continue;
    for (int j : source.children[s])
      for (int r = 0; r < k; ++r)
        trips.emplace_back(row + r, sys.aux_var(j, r), 1.0);
    const int j = source.seq_infoset[s];
    for (int r = 0; r < k; ++r) {
      trips.emplace_back(row + r, sys.aux_var(j, r), -1.0);
      rhs.push_back(0.0);
    }
    row += k;
  }

  cons.E.resize(row, sys.num_vars());
  cons.E.setFromTriplets(trips.begin(), trips.end());
  cons.f = Eigen::Map<Eigen::VectorXd>(rhs.data(), rhs.size());
  return sys;
}

LinMapSystem compile_self_map_system(const SequenceIndex& index) {
  return compile_linmap_system(index, sequence_form_polytope(index));
}

const EqualityBoxSystem& LinMapSystem::matrix_space_constraints() const {
  if (matrix_constraints_built_) return matrix_constraints_;
  const SequenceIndex& idx = source;
  const int nvars = num_seqs() * d();

  EqualityBoxSystem& out = matrix_constraints_;
  out.lo = constraints_.lo.head(nvars);
  out.hi = constraints_.hi.head(nvars);

  // Substitute each auxiliary vector by the expression its first action
  // forces, bottom-up; the remaining actions and the root closure become
  // equality rows over the columns.
  using Expr = std::vector<std::map<int, double>>;  // k sparse rows
  auto column_image = [&](int seq) {
    Expr e(k());
    for (int col = 0; col < target.P.outerSize(); ++col)
      for (Eigen::SparseMatrix<double>::InnerIterator it(target.P, col); it;
           ++it)
        e[it.row()][col_var(seq, static_cast<int>(it.col()))] += it.value();
    return e;
  };
  auto add_expr = [&](Expr& into, const Expr& from, double w) {
    for (int r = 0; r < k(); ++r)
      for (const auto& [v, coeff] : from[r]) into[r][v] += w * coeff;
  };

  std::vector<Expr> forced(idx.num_infosets());
  std::vector<Eigen::Triplet<double>> trips;
  std::vector<double> rhs;
  int row = 0;

  auto action_expr = [&](int seq) {
    if (idx.is_terminal(seq)) return column_image(seq);
    Expr e(k());
    for (int child : idx.children[seq]) add_expr(e, forced[child], 1.0);
    return e;
  };
  auto emit = [&](const Expr& e, const Eigen::VectorXd& target_rhs) {
    for (int r = 0; r < k(); ++r) {
      for (const auto& [v, coeff] : e[r])
        if (coeff != 0) trips.emplace_back(row + r, v, coeff);
      rhs.push_back(target_rhs.size() ? target_rhs[r] : 0.0);
    }
    row += k();
  };

  for (int j = idx.num_infosets() - 1; j >= 0; --j) {
    forced[j] = action_expr(idx.infosets[j].seqs[0]);
    for (size_t a = 1; a < idx.infosets[j].seqs.size(); ++a) {
      Expr e = action_expr(idx.infosets[j].seqs[a]);
      add_expr(e, forced[j], -1.0);
      emit(e, Eigen::VectorXd());
    }
  }
  if (idx.num_infosets() == 0) {
    emit(column_image(0), target.p);
  } else {
    Expr root(k());
    for (int j : idx.children[0]) add_expr(root, forced[j], 1.0);
    emit(root, target.p);
  }

  out.E.resize(row, nvars);
  out.E.setFromTriplets(trips.begin(), trips.end());
  out.f = Eigen::Map<Eigen::VectorXd>(rhs.data(), rhs.size());
  matrix_constraints_built_ = true;
  return matrix_constraints_;
}

MembershipReport check_membership(const Eigen::MatrixXd& A,
                                  const LinMapSystem& sys, double tol) {
  if (A.rows() != sys.d() || A.cols() != sys.num_seqs())
    throw ValidationError("matrix shape does not match the system");
  const SequenceIndex& idx = sys.source;
  MembershipReport rep;
  auto note = [&](double r, const std::string& what) {
    rep.max_residual = std::max(rep.max_residual, r);
    if (r > tol) rep.violations.push_back(what);
  };

  for (int s = 0; s < sys.num_seqs(); ++s) {
    if (!idx.is_terminal(s)) {
      const double r = A.col(s).cwiseAbs().maxCoeff();
      note(r, "non-terminal column " + idx.seq_names[s] + " is not zero");
    } else {
      for (int r = 0; r < sys.d(); ++r) {
        note(-A(r, s), "negative entry in column " + idx.seq_names[s]);
        note(A(r, s) - sys.target.gamma,
             "entry above the box bound in column " + idx.seq_names[s]);
      }
    }
  }

  if (idx.num_infosets() == 0) {
    const Eigen::VectorXd img = sys.target.P * A.col(0);
    note((img - sys.target.p).cwiseAbs().maxCoeff(),
         "degenerate column misses the target");
    rep.member = rep.max_residual <= tol;
    return rep;
  }

  // Bottom-up read of the auxiliary vectors; every candidate must agree.
  Eigen::MatrixXd b = Eigen::MatrixXd::Zero(sys.k(), idx.num_infosets());
  for (int j = idx.num_infosets() - 1; j >= 0; --j) {
    bool have = false;
    Eigen::VectorXd bj;
    for (int s : idx.infosets[j].seqs) {
      Eigen::VectorXd cand;
      if (idx.is_terminal(s)) {
        cand = sys.target.P * A.col(s);
      } else {
        cand = Eigen::VectorXd::Zero(sys.k());
        for (int child : idx.children[s]) cand += b.col(child);
      }
      if (!have) {
        bj = cand;
        have = true;
      } else {
        note((cand - bj).cwiseAbs().maxCoeff(),
             "actions of infoset " + idx.infosets[j].label +
                 " induce conflicting parent vectors");
      }
    }
    b.col(j) = bj;
  }
  Eigen::VectorXd root = Eigen::VectorXd::Zero(sys.k());
  for (int j : idx.children[0]) root += b.col(j);
  note((root - sys.target.p).cwiseAbs().maxCoeff(),
       "root decomposition does not close");

  rep.member = rep.max_residual <= tol;
  return rep;
}

namespace {

// Minimal per-coordinate shifts that restore nonnegative images across a
// sibling family: mandatory negative parts are applied as-is, positive
// amounts are drawn greedily only to cover the last block's deficit, so a
// family that is already nonnegative is left untouched.
void sibling_shift(Eigen::MatrixXd& A, const SequenceIndex& idx,
                   const std::vector<int>& kids) {
  const int m = static_cast<int>(kids.size());
  const int d = static_cast<int>(A.rows());
  Eigen::MatrixXd beta_raw(d, m);
  for (int i = 0; i < m; ++i)
    for (int r = 0; r < d; ++r)
      beta_raw(r, i) =
          min_linear_over_subtree(idx, kids[i], A.row(r).transpose());

  Eigen::MatrixXd chosen = Eigen::MatrixXd::Zero(d, m - 1);
  for (int r = 0; r < d; ++r) {
    double sum = 0;
    for (int i = 0; i + 1 < m; ++i) {
      chosen(r, i) = std::min(beta_raw(r, i), 0.0);
      sum += chosen(r, i);
    }
    double deficit = -beta_raw(r, m - 1) - sum;
    for (int i = 0; i + 1 < m && deficit > 1e-15; ++i) {
      const double take = std::min(std::max(beta_raw(r, i), 0.0), deficit);
      chosen(r, i) += take;
      deficit -= take;
    }
  }

  Eigen::VectorXd total = Eigen::VectorXd::Zero(d);
  for (int i = 0; i + 1 < m; ++i) {
    const Eigen::VectorXd shift = chosen.col(i);
    if (shift.isZero(0)) continue;
    for (int s : idx.infosets[kids[i]].seqs) A.col(s) -= shift;
    total += shift;
  }
  if (!total.isZero(0))
    for (int s : idx.infosets[kids[m - 1]].seqs) A.col(s) += total;
}

void canonicalize_below(Eigen::MatrixXd& A, const SequenceIndex& idx, int seq) {
  const std::vector<int>& kids = idx.children[seq];
  if (kids.empty()) return;
  // Spread the interior column onto the first child's action columns.
  if (A.col(seq).cwiseAbs().maxCoeff() > 0) {
    for (int s : idx.infosets[kids[0]].seqs) A.col(s) += A.col(seq);
    A.col(seq).setZero();
  }
  if (kids.size() > 1) sibling_shift(A, idx, kids);
  for (int j : kids)
    for (int s : idx.infosets[j].seqs) canonicalize_below(A, idx, s);
}

}  // namespace

DeviationMatrix canonicalize(const Eigen::MatrixXd& B, const LinMapSystem& sys,
                             long vertex_cap) {
  if (B.rows() != sys.d() || B.cols() != sys.num_seqs())
    throw ValidationError("matrix shape does not match the system");
  if (vertex_cap > 0 &&
      count_reduced_plans(sys.source) <= static_cast<double>(vertex_cap)) {
    for (const ReducedPlan& plan : enumerate_reduced_plans(sys.source, vertex_cap)) {
      const double r = sys.target.residual(B * plan);
      if (r > tols().audit) {
        std::ostringstream os;
        os << "matrix does not map the source into the target: vertex [";
        for (int s = 0; s < plan.size(); ++s)
          if (plan[s] > 0.5) os << " " << sys.source.seq_names[s];
        os << " ] lands " << r << " outside";
        throw ValidationError(os.str());
      }
    }
  }
  DeviationMatrix out;
  out.A = B;
  out.provenance = MatrixProvenance::kCanonicalized;
  canonicalize_below(out.A, sys.source, 0);
  return out;
}

Eigen::MatrixXd raw_trigger_matrix(const SequenceIndex& idx, int trigger_seq,
                                   const Eigen::VectorXd& continuation) {
  const int n = idx.num_seqs();
  Eigen::MatrixXd phi = Eigen::MatrixXd::Identity(n, n);
  for (int s : idx.seqs_below(trigger_seq)) phi(s, s) = 0.0;
  phi.col(trigger_seq) += continuation;
  return phi;
}

DeviationMatrix trigger_deviation_matrix(const SequenceIndex& idx,
                                         int trigger_seq,
                                         const Eigen::VectorXd& continuation) {
  if (trigger_seq <= 0 || trigger_seq >= idx.num_seqs())
    throw ValidationError("trigger must be a non-empty sequence");
  const int j = idx.seq_infoset[trigger_seq];
  // Continuation feasibility over the subtree rooted at the trigger's
  // infoset: root actions sum to one, flow below, support inside.
  double residual = 0;
  {
    double root_mass = 0;
    for (int s : idx.infosets[j].seqs) root_mass += continuation[s];
    residual = std::abs(root_mass - 1.0);
    const std::vector<int>& inside = idx.subtree_seqs(j);
    std::vector<bool> member(idx.num_seqs(), false);
    for (int s : inside) member[s] = true;
    for (int s = 0; s < idx.num_seqs(); ++s) {
      if (!member[s])
        residual = std::max(residual, std::abs(continuation[s]));
      else
        residual = std::max(residual, -continuation[s]);
    }
    for (int jj = 0; jj < idx.num_infosets(); ++jj) {
      if (jj == j || !member[idx.infosets[jj].parent_seq]) continue;
      double sum = 0;
      for (int s : idx.infosets[jj].seqs) sum += continuation[s];
      residual =
          std::max(residual, std::abs(sum - continuation[idx.infosets[jj].parent_seq]));
    }
  }
  if (residual > tols().feasibility)
    throw ValidationError("continuation is not feasible in the subtree (residual " +
                          std::to_string(residual) + ")");
  LinMapSystem sys = compile_self_map_system(idx);
  DeviationMatrix out =
      canonicalize(raw_trigger_matrix(idx, trigger_seq, continuation), sys);
  out.provenance = MatrixProvenance::kTrigger;
  return out;
}

Eigen::MatrixXd sample_feasible_matrix(const LinMapSystem& sys,
                                       RandomStream& rng) {
  Eigen::MatrixXd G(sys.d(), sys.num_seqs());
  for (int r = 0; r < sys.d(); ++r)
    for (int s = 0; s < sys.num_seqs(); ++s)
      G(r, s) = 2.0 * rng.uniform() - 1.0;
  return optimize_over_system(sys, G, /*maximize=*/true);
}

std::string LinMapSystem::dump() const {
  std::ostringstream os;
  os << "vars " << num_vars() << " (columns " << num_seqs() << "x" << d()
     << ", parent vectors " << source.num_infosets() << "x" << k() << ")\n";
  auto var_name = [&](int v) -> std::string {
    if (v < num_seqs() * d()) {
      const int s = v / d(), r = v % d();
      return "A[" + source.seq_names[s] + "][" + std::to_string(r) + "]";
    }
    const int rest = v - num_seqs() * d();
    const int j = rest / k(), r = rest % k();
    return "b[" + source.infosets[j].label + "][" + std::to_string(r) + "]";
  };
  const EqualityBoxSystem& cons = constraints_;
  std::vector<std::vector<std::pair<int, double>>> rows(cons.rows());
  for (int col = 0; col < cons.E.outerSize(); ++col)
    for (Eigen::SparseMatrix<double>::InnerIterator it(cons.E, col); it; ++it)
      rows[it.row()].emplace_back(static_cast<int>(it.col()), it.value());
  for (int i = 0; i < cons.rows(); ++i) {
    os << "  e" << i << ":";
    for (const auto& [v, coeff] : rows[i])
      os << " " << (coeff >= 0 ? "+" : "") << coeff << " " << var_name(v);
    os << " = " << cons.f[i] << "\n";
  }
  os << "bounds\n";
  for (int v = 0; v < num_vars(); ++v) {
    if (std::isinf(cons.lo[v]) && std::isinf(cons.hi[v])) continue;
    os << "  " << cons.lo[v] << " <= " << var_name(v) << " <= " << cons.hi[v]
       << "\n";
  }
  return os.str();
}

}  // namespace linswap
