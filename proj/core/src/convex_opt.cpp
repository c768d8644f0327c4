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

#include "linswap/convex_opt.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>

#include "linswap/tolerances.hpp"

namespace linswap {

namespace {

const char* status_name(LpStatus st) {
  switch (st) {
    case LpStatus::kOptimal: return "optimal";
    case LpStatus::kInfeasible: return "infeasible";
    case LpStatus::kUnbounded: return "unbounded";
    case LpStatus::kIterationLimit: return "iteration-limit";
  }
  return "?";
}

void add_equality_rows(LinearProgram& lp, const EqualityBoxSystem& cons) {
  std::vector<std::vector<std::pair<int, double>>> rows(cons.rows());
  for (int col = 0; col < cons.E.outerSize(); ++col)
    for (Eigen::SparseMatrix<double>::InnerIterator it(cons.E, col); it; ++it)
      rows[it.row()].emplace_back(static_cast<int>(it.col()), it.value());
  for (int i = 0; i < cons.rows(); ++i)
    lp.add_row(rows[i], RowSense::kEq, cons.f[i]);
}

}  // namespace

Eigen::MatrixXd optimize_over_system(const LinMapSystem& sys,
                                     const Eigen::MatrixXd& G, bool maximize,
                                     double* value) {
  const EqualityBoxSystem& cons = sys.constraints();
  LinearProgram lp(sys.num_vars());
  Eigen::VectorXd c = Eigen::VectorXd::Zero(sys.num_vars());
  for (int r = 0; r < sys.d(); ++r)
    for (int s = 0; s < sys.num_seqs(); ++s)
      c[sys.col_var(s, r)] = G(r, s);
  lp.set_objective(c, maximize);
  for (int v = 0; v < sys.num_vars(); ++v)
    lp.set_bounds(v, cons.lo[v], cons.hi[v]);
  add_equality_rows(lp, cons);
  LpResult res = solve_lp(lp);
  if (res.status != LpStatus::kOptimal)
    throw SolveError(std::string("system optimization failed: ") +
                     status_name(res.status));
  if (value) *value = res.objective;
  return sys.unpack_matrix(res.x);
}

Eigen::VectorXd fixed_point(const Eigen::MatrixXd& A,
                            const SequenceIndex& index) {
  const int d = index.num_seqs();
  if (A.rows() != d || A.cols() != d)
    throw ValidationError("fixed point needs a square self-map matrix");
  // Variables: x, then elementwise positive/negative residual parts.
  LinearProgram lp(3 * d);
  Eigen::VectorXd c = Eigen::VectorXd::Zero(3 * d);
  for (int i = d; i < 3 * d; ++i) c[i] = 1.0;
  lp.set_objective(c, /*maximize=*/false);
  for (int i = 0; i < d; ++i) lp.set_bounds(i, 0.0, 1.0);
  for (int i = d; i < 3 * d; ++i) lp.set_bounds(i, 0.0, kInf);

  lp.add_row({{0, 1.0}}, RowSense::kEq, 1.0);
  for (int j = 0; j < index.num_infosets(); ++j) {
    std::vector<std::pair<int, double>> row;
    for (int s : index.infosets[j].seqs) row.emplace_back(s, 1.0);
    row.emplace_back(index.infosets[j].parent_seq, -1.0);
    lp.add_row(row, RowSense::kEq, 0.0);
  }
  for (int r = 0; r < d; ++r) {
    std::vector<std::pair<int, double>> row;
    for (int s = 0; s < d; ++s) {
      double coeff = A(r, s) - (r == s ? 1.0 : 0.0);
      if (coeff != 0.0) row.emplace_back(s, coeff);
    }
    row.emplace_back(d + r, 1.0);
    row.emplace_back(2 * d + r, -1.0);
    lp.add_row(row, RowSense::kEq, 0.0);
  }

  LpResult res;
  try {
    res = solve_lp(lp);
  } catch (const SolveError& e) {
    if (getenv("FPDUMP")) {
      FILE* f = fopen("/tmp/failA.txt", "w");
      fprintf(f, "%d\n", d);
      for (int r = 0; r < d; ++r) { for (int s = 0; s < d; ++s) fprintf(f, "%.17g ", A(r, s)); fprintf(f, "\n"); }
      fclose(f);
    }
    throw;
  }
  if (res.status != LpStatus::kOptimal)
    throw SolveError(std::string("fixed-point solve failed: ") +
                     status_name(res.status));
  Eigen::VectorXd x = res.x.head(d);
  const double fp_residual = (A * x - x).cwiseAbs().maxCoeff();
  if (fp_residual > tols().fixed_point)
    throw SolveError("no fixed point within tolerance (residual " +
                     std::to_string(fp_residual) +
                     "); the matrix is outside the self-map polytope");
  return x;
}

double max_linear_over_polytope_lp(const SequenceIndex& index,
                                   const Eigen::VectorXd& objective,
                                   Eigen::VectorXd* argmax) {
  const int d = index.num_seqs();
  LinearProgram lp(d);
  lp.set_objective(objective, /*maximize=*/true);
  for (int i = 0; i < d; ++i) lp.set_bounds(i, 0.0, 1.0);
  lp.add_row({{0, 1.0}}, RowSense::kEq, 1.0);
  for (int j = 0; j < index.num_infosets(); ++j) {
    std::vector<std::pair<int, double>> row;
    for (int s : index.infosets[j].seqs) row.emplace_back(s, 1.0);
    row.emplace_back(index.infosets[j].parent_seq, -1.0);
    lp.add_row(row, RowSense::kEq, 0.0);
  }
  LpResult res = solve_lp(lp);
  if (res.status != LpStatus::kOptimal)
    throw SolveError(std::string("polytope optimization failed: ") +
                     status_name(res.status));
  if (argmax) *argmax = res.x;
  return res.objective;
}

}  // namespace linswap
