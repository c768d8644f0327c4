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

#include "linswap/projection.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/SparseCholesky>

#include "linswap/lp.hpp"

namespace linswap {

double EqualityBoxSystem::residual(const Eigen::VectorXd& y) const {
  double r = rows() ? (E * y - f).cwiseAbs().maxCoeff() : 0.0;
  for (int i = 0; i < y.size(); ++i) {
    if (std::isfinite(lo[i])) r = std::max(r, lo[i] - y[i]);
    if (std::isfinite(hi[i])) r = std::max(r, y[i] - hi[i]);
  }
  return r;
}

double EqualityBoxSystem::box_half_width() const {
  double s = 0;
  for (int i = 0; i < lo.size(); ++i)
    if (std::isfinite(lo[i]) && std::isfinite(hi[i]))
      s += (hi[i] - lo[i]) * (hi[i] - lo[i]);
  return 0.5 * std::sqrt(s);
}

namespace {

Eigen::VectorXd clamp_to_box(const EqualityBoxSystem& sys,
                             const Eigen::VectorXd& v) {
  Eigen::VectorXd y = v;
  for (int i = 0; i < y.size(); ++i) {
    if (std::isfinite(sys.lo[i]) && y[i] < sys.lo[i]) y[i] = sys.lo[i];
    if (std::isfinite(sys.hi[i]) && y[i] > sys.hi[i]) y[i] = sys.hi[i];
  }
  return y;
}

struct DualEval {
  Eigen::VectorXd y;
  Eigen::VectorXd grad;  // Ey − f
  double value = 0;      // g(λ)
};

DualEval eval_dual(const EqualityBoxSystem& sys, const Eigen::VectorXd& q,
                   const Eigen::VectorXd& lambda) {
  DualEval out;
  const Eigen::VectorXd inner = q - sys.E.transpose() * lambda;
  out.y = clamp_to_box(sys, inner);
  out.grad = sys.E * out.y - sys.f;
  out.value = 0.5 * (out.y - q).squaredNorm() + lambda.dot(out.grad);
  return out;
}

// Exact maximization of the concave piecewise-quadratic t ↦ g(λ + tΔ).
// φ(t) = dg/dt = wᵀ·y(t) − Δᵀf with w = EᵀΔ is piecewise linear and
// nonincreasing; sweep the clamp breakpoints until it changes sign.
// Returns a negative value when the dual is unbounded along the ray
// (the primal system is infeasible).
double exact_line_search(const EqualityBoxSystem& sys, const Eigen::VectorXd& q,
                         const Eigen::VectorXd& lambda,
                         const Eigen::VectorXd& dir) {
  const Eigen::VectorXd inner0 = q - sys.E.transpose() * lambda;
  const Eigen::VectorXd w = sys.E.transpose() * dir;
  const double offset = dir.dot(sys.f);

  auto phi = [&](double t) {
    double v = -offset;
    for (int i = 0; i < w.size(); ++i) {
      double yi = inner0[i] - t * w[i];
      if (std::isfinite(sys.lo[i]) && yi < sys.lo[i]) yi = sys.lo[i];
      if (std::isfinite(sys.hi[i]) && yi > sys.hi[i]) yi = sys.hi[i];
      v += w[i] * yi;
    }
    return v;
  };

  if (phi(0.0) <= 0) return 0.0;

  std::vector<double> kinks;
  for (int i = 0; i < w.size(); ++i) {
    if (w[i] == 0) continue;
    if (std::isfinite(sys.lo[i])) {
      const double t = (inner0[i] - sys.lo[i]) / w[i];
      if (t > 0) kinks.push_back(t);
    }
    if (std::isfinite(sys.hi[i])) {
      const double t = (inner0[i] - sys.hi[i]) / w[i];
      if (t > 0) kinks.push_back(t);
    }
  }
  std::sort(kinks.begin(), kinks.end());

  double t_lo = 0.0, phi_lo = phi(0.0);
  for (double t : kinks) {
    if (t <= t_lo) continue;
    const double phi_t = phi(t);
    if (phi_t <= 0) {
      // Maximizer inside [t_lo, t]; φ is linear there.
      if (phi_lo - phi_t <= 0) return t;
      return t_lo + phi_lo * (t - t_lo) / (phi_lo - phi_t);
    }
    t_lo = t;
    phi_lo = phi_t;
  }
  // Tail segment: slope is −wᵀDw over the still-unclamped coordinates.
  double tail_slope = 0;
  for (int i = 0; i < w.size(); ++i) {
    if (w[i] == 0) continue;
    double yi = inner0[i] - (t_lo * (1 + 1e-9) + 1e-12) * w[i];
    const bool clamped = (std::isfinite(sys.lo[i]) && yi <= sys.lo[i]) ||
                         (std::isfinite(sys.hi[i]) && yi >= sys.hi[i]);
    if (!clamped) tail_slope -= w[i] * w[i];
  }
  if (tail_slope >= -1e-300) return -1.0;  // unbounded ascent ray
  return t_lo - phi_lo / tail_slope;
}

}  // namespace

ProjectionResult euclidean_project(const EqualityBoxSystem& sys,
                                   const Eigen::VectorXd& q, double accuracy,
                                   const Eigen::VectorXd* warm_multipliers,
                                   const Eigen::VectorXd* feasible_ref,
                                   double feas_tol, int max_iterations) {
  const int m = sys.rows();
  Eigen::VectorXd lambda =
      (warm_multipliers && warm_multipliers->size() == m)
          ? *warm_multipliers
          : Eigen::VectorXd::Zero(m);

  // Lipschitz bound for the fallback gradient step: ‖E‖² ≤ ‖E‖₁·‖E‖∞.
  Eigen::VectorXd row_abs = Eigen::VectorXd::Zero(m);
  Eigen::VectorXd col_abs = Eigen::VectorXd::Zero(sys.dim());
  for (int k = 0; k < sys.E.outerSize(); ++k)
    for (Eigen::SparseMatrix<double>::InnerIterator it(sys.E, k); it; ++it) {
      row_abs[it.row()] += std::abs(it.value());
      col_abs[it.col()] += std::abs(it.value());
    }
  const double lip = std::max(1e-12, row_abs.maxCoeff() * col_abs.maxCoeff());

  const double ref_primal =
      feasible_ref ? 0.5 * (*feasible_ref - q).squaredNorm()
                   : std::numeric_limits<double>::quiet_NaN();

  DualEval cur = eval_dual(sys, q, lambda);
  ProjectionResult res;
  double best_grad = kInf;
  double window_grad = kInf;
  double window_value = -kInf;
  int last_improvement = 0;

  // Exact finish: with the active set read off the current multipliers,
  // solve the equality-constrained projection on the free coordinates by
  // pseudoinverse. When the KKT sign conditions confirm the guess, the
  // result is the exact projection and the loop can stop regardless of
  // how degenerate the instance is.
  auto try_polish = [&](const Eigen::VectorXd& probe) -> bool {
    if (m == 0 || m > 2000) return false;
    const Eigen::VectorXd inner = q - sys.E.transpose() * probe;
    Eigen::VectorXd mask(sys.dim());
    Eigen::VectorXd clamped = Eigen::VectorXd::Zero(sys.dim());
    for (int i = 0; i < sys.dim(); ++i) {
      const bool below = std::isfinite(sys.lo[i]) && inner[i] <= sys.lo[i];
      const bool above = std::isfinite(sys.hi[i]) && inner[i] >= sys.hi[i];
      mask[i] = (below || above) ? 0.0 : 1.0;
      if (below) clamped[i] = sys.lo[i];
      if (above) clamped[i] = sys.hi[i];
    }
    Eigen::MatrixXd H = Eigen::MatrixXd::Zero(m, m);
    {
      const Eigen::SparseMatrix<double> Ed = sys.E * mask.asDiagonal();
      const Eigen::SparseMatrix<double> Hs = Ed * sys.E.transpose();
      H = Eigen::MatrixXd(Hs);
    }
    const Eigen::VectorXd rhs =
        sys.E * (mask.asDiagonal() * q + clamped) - sys.f;
    const Eigen::VectorXd nu =
        H.completeOrthogonalDecomposition().solve(rhs);
    DualEval cand = eval_dual(sys, q, nu);
    const double res_norm =
        cand.grad.size() ? cand.grad.cwiseAbs().maxCoeff() : 0.0;
    if (res_norm <= feas_tol &&
        cand.value >= cur.value - 1e-9 * (1.0 + std::abs(cur.value))) {
      lambda = nu;
      cur = cand;
      return true;
    }
    return false;
  };

  for (int iter = 0; iter < max_iterations; ++iter) {
    const double grad_norm = cur.grad.size() ? cur.grad.cwiseAbs().maxCoeff() : 0.0;
    // Squared-distance certificate: 2·(P* − g(λ)) bounds ‖y − y*‖² by
    // strong convexity. P* is bounded by any feasible primal value (the
    // reference) and, once the residual is negligible, by the current
    // point's own value plus the multiplier-weighted residual.
    double cert = 2.0 * std::max(0.0, -lambda.dot(cur.grad)) +
                  2.0 * lambda.norm() * cur.grad.norm();
    if (feasible_ref)
      cert = std::min(cert, 2.0 * std::max(0.0, ref_primal - cur.value));
    if (grad_norm <= feas_tol && cert <= accuracy) {
      res.y = cur.y;
      res.eq_residual = grad_norm;
      res.sq_dist_bound = cert;
      res.dual_value = cur.value;
      res.multipliers = lambda;
      res.iterations = iter;
      return res;
    }
    if (grad_norm <= 1e-6 && iter >= 4 && try_polish(lambda)) continue;

    // Generalized Newton step on the dual: H = E D Eᵀ with D selecting the
    // coordinates the clamp leaves free. H is often singular (whole rows
    // clamp away), so the direction is the least-norm solution from a
    // rank-revealing decomposition; the exact line search keeps any
    // ascent direction safe.
    const Eigen::VectorXd inner = q - sys.E.transpose() * lambda;
    Eigen::VectorXd mask(sys.dim());
    for (int i = 0; i < sys.dim(); ++i) {
      const bool below = std::isfinite(sys.lo[i]) && inner[i] <= sys.lo[i];
      const bool above = std::isfinite(sys.hi[i]) && inner[i] >= sys.hi[i];
      mask[i] = (below || above) ? 0.0 : 1.0;
    }
    Eigen::MatrixXd H;
    {
      const Eigen::SparseMatrix<double> Ed = sys.E * mask.asDiagonal();
      H = Eigen::MatrixXd(Eigen::SparseMatrix<double>(Ed * sys.E.transpose()));
    }

    // Try the Newton direction first; if its slope is negligible (the
    // residual can be orthogonal to the active Hessian's range), step
    // along the gradient instead, whose slope is ‖r‖². The exact line
    // search never decreases the dual, so steps are accepted whenever
    // they do not lose value to rounding — near the optimum the gains
    // fall below the resolution of g while the residual still improves.
    auto attempt = [&](const Eigen::VectorXd& dir) -> bool {
      const double t = exact_line_search(sys, q, lambda, dir);
      if (t < 0)
        throw SolveError(
            "projection target is infeasible (dual ascent is unbounded)");
      if (t == 0) return false;
      DualEval cand = eval_dual(sys, q, lambda + t * dir);
      if (cand.value < cur.value - 1e-12 * (1.0 + std::abs(cur.value)))
        return false;
      lambda += t * dir;
      cur = cand;
      return true;
    };

    bool moved = false;
    const Eigen::VectorXd delta =
        H.completeOrthogonalDecomposition().solve(cur.grad);
    // A Newton direction with negligible slope relative to the gradient's
    // ‖r‖² walks along a flat ridge; prefer the gradient then.
    if (delta.allFinite() &&
        cur.grad.dot(delta) > 1e-8 * cur.grad.squaredNorm())
      moved = attempt(delta);
    if (!moved) moved = attempt(cur.grad);
    if (!moved) {
      lambda += cur.grad / lip;
      cur = eval_dual(sys, q, lambda);
    }

    // Stall detection: while the dual value climbs or the residual keeps
    // halving we are fine; otherwise give the exact finish a try and stop.
    best_grad = std::min(best_grad, grad_norm);
    if (cur.value > window_value + 1e-13 * (1.0 + std::abs(window_value))) {
      window_value = cur.value;
      last_improvement = iter;
    } else if (grad_norm < 0.5 * window_grad) {
      window_grad = grad_norm;
      last_improvement = iter;
    } else if (iter - last_improvement > 60) {
      if (try_polish(lambda)) {
        last_improvement = iter;
        window_value = cur.value;
        continue;
      }
      break;
    }
  }

  {
    // Report the best available point with its achieved certificate; a
    // final polish replaces stale multipliers by the least-norm ones.
    try_polish(lambda);
    const double grad_norm =
        cur.grad.size() ? cur.grad.cwiseAbs().maxCoeff() : 0.0;
    double cert = 2.0 * std::max(0.0, -lambda.dot(cur.grad)) +
                  2.0 * lambda.norm() * cur.grad.norm();
    if (feasible_ref)
      cert = std::min(cert, 2.0 * std::max(0.0, ref_primal - cur.value));
    if (grad_norm <= feas_tol && cert <= accuracy) {
      res.y = cur.y;
      res.eq_residual = grad_norm;
      res.sq_dist_bound = cert;
      res.dual_value = cur.value;
      res.multipliers = lambda;
      res.iterations = max_iterations;
      return res;
    }
  }

  const double grad_norm = cur.grad.size() ? cur.grad.cwiseAbs().maxCoeff() : 0.0;
  throw SolveError("projection did not reach the requested accuracy (residual " +
                   std::to_string(grad_norm) + ")");
}

double variational_inequality_slack(const Eigen::VectorXd& q,
                                    const Eigen::VectorXd& y,
                                    const std::vector<Eigen::VectorXd>& zs) {
  double worst = -std::numeric_limits<double>::infinity();
  const Eigen::VectorXd dir = q - y;
  for (const Eigen::VectorXd& z : zs)
    worst = std::max(worst, dir.dot(z - y));
  return worst;
}

}  // namespace linswap
