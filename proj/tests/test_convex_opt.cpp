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

#include <cmath>

#include "doctest.h"
#include "helpers.hpp"
#include "linswap/convex_opt.hpp"
#include "linswap/efg.hpp"
#include "linswap/lp.hpp"
#include "linswap/projection.hpp"
#include "linswap/sequence_form.hpp"

using namespace linswap;

namespace {

EqualityBoxSystem strategy_system(const SequenceIndex& idx) {
  const StandardPolytope poly = sequence_form_polytope(idx);
  EqualityBoxSystem sys;
  sys.E = poly.P;
  sys.f = poly.p;
  sys.lo = Eigen::VectorXd::Zero(poly.dim());
  sys.hi = Eigen::VectorXd::Ones(poly.dim());
  return sys;
}

}  // namespace

TEST_CASE("linear programs, small and pinned") {
  SUBCASE("min x subject to x = 1") {
    LinearProgram lp(1);
    Eigen::VectorXd c(1);
    c << 1.0;
    lp.set_objective(c, false);
    lp.set_bounds(0, 0.0, kInf);
    lp.add_row({{0, 1.0}}, RowSense::kEq, 1.0);
    const LpResult res = solve_lp(lp);
    REQUIRE(res.status == LpStatus::kOptimal);
    CHECK(res.objective == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(res.x[0] == doctest::Approx(1.0).epsilon(1e-10));
  }
  SUBCASE("x >= 0 with x = -1 is infeasible") {
    LinearProgram lp(1);
    lp.set_bounds(0, 0.0, kInf);
    lp.add_row({{0, 1.0}}, RowSense::kEq, -1.0);
    CHECK(solve_lp(lp).status == LpStatus::kInfeasible);
  }
  SUBCASE("free improving ray is unbounded") {
    LinearProgram lp(1);
    Eigen::VectorXd c(1);
    c << 1.0;
    lp.set_objective(c, true);
    CHECK(solve_lp(lp).status == LpStatus::kUnbounded);
  }
  SUBCASE("bounded variables and an inequality") {
    LinearProgram lp(2);
    Eigen::VectorXd c(2);
    c << 1.0, 1.0;
    lp.set_objective(c, true);
    lp.set_bounds(0, 0.0, 2.0);
    lp.set_bounds(1, 1.0, 3.0);
    lp.add_row({{0, 1.0}, {1, 1.0}}, RowSense::kLe, 4.0);
    const LpResult res = solve_lp(lp);
    REQUIRE(res.status == LpStatus::kOptimal);
    CHECK(res.objective == doctest::Approx(4.0).epsilon(1e-10));
  }
  SUBCASE("greater-equal rows") {
    LinearProgram lp(2);
    Eigen::VectorXd c(2);
    c << 2.0, 3.0;
    lp.set_objective(c, false);
    lp.set_bounds(0, 0.0, kInf);
    lp.set_bounds(1, 0.0, kInf);
    lp.add_row({{0, 1.0}, {1, 1.0}}, RowSense::kGe, 2.0);
    const LpResult res = solve_lp(lp);
    REQUIRE(res.status == LpStatus::kOptimal);
    CHECK(res.objective == doctest::Approx(4.0).epsilon(1e-10));
    CHECK(res.max_residual <= 1e-9);
  }
  SUBCASE("dump renders") {
    LinearProgram lp(1);
    lp.add_row({{0, 1.0}}, RowSense::kEq, 1.0);
    CHECK(lp.dump().find("subject to") != std::string::npos);
  }
}

TEST_CASE("lp optimum equals the vertex-enumeration oracle") {
  for (const auto& [game, player] :
       std::vector<std::pair<GameTree, int>>{{build_figure_game(), 1},
                                             {build_kuhn_poker(3, 2), 1},
                                             {build_kuhn_poker(3, 2), 2}}) {
    const SequenceIndex idx = derive_sequence_index(game, player);
    const auto plans = enumerate_reduced_plans(idx, 1000);
    RandomStream rng(41 * player);
    for (int trial = 0; trial < 25; ++trial) {
      Eigen::VectorXd c(idx.num_seqs());
      for (int s = 0; s < c.size(); ++s) c[s] = 2.0 * rng.uniform() - 1.0;
      double best = -kInf;
      for (const ReducedPlan& plan : plans) best = std::max(best, c.dot(plan));
      Eigen::VectorXd arg;
      const double lp_value = max_linear_over_polytope_lp(idx, c, &arg);
      CHECK(lp_value == doctest::Approx(best).epsilon(1e-8));
      CHECK(sequence_form_residual(idx, arg) <= 1e-9);
      // The dynamic program is an independent third route.
      CHECK(-min_linear_over_polytope(idx, -c) ==
            doctest::Approx(best).epsilon(1e-10));
    }
  }
}

TEST_CASE("euclidean projection oracles") {
  SUBCASE("feasible queries are fixed points") {
    const SequenceIndex idx = derive_sequence_index(build_kuhn_poker(3, 2), 1);
    const EqualityBoxSystem sys = strategy_system(idx);
    RandomStream rng(5);
    for (int trial = 0; trial < 10; ++trial) {
      const Eigen::VectorXd x = random_sequence_strategy(idx, rng);
      const ProjectionResult res = euclidean_project(sys, x, 1e-10);
      CHECK((res.y - x).cwiseAbs().maxCoeff() <= 1e-9);
      CHECK(res.eq_residual <= 1e-9);
    }
  }
  SUBCASE("two-dimensional simplex has the closed form") {
    EqualityBoxSystem sys;
    sys.E.resize(1, 2);
    sys.E.insert(0, 0) = 1.0;
    sys.E.insert(0, 1) = 1.0;
    sys.f = Eigen::VectorXd::Ones(1);
    sys.lo = Eigen::VectorXd::Zero(2);
    sys.hi = Eigen::VectorXd::Ones(2);
    Eigen::VectorXd q(2);
    q << 0.8, 0.6;
    const ProjectionResult res = euclidean_project(sys, q, 1e-10);
    CHECK(res.y[0] == doctest::Approx(0.6).epsilon(1e-9));
    CHECK(res.y[1] == doctest::Approx(0.4).epsilon(1e-9));
    CHECK(res.sq_dist_bound <= 1e-10);
  }
  SUBCASE("queries shifted along constraint normals project back") {
    const SequenceIndex idx = derive_sequence_index(build_signaling_game(), 1);
    const EqualityBoxSystem sys = strategy_system(idx);
    RandomStream rng(9);
    for (int trial = 0; trial < 10; ++trial) {
      const Eigen::VectorXd y = random_sequence_strategy(idx, rng);
      Eigen::VectorXd mu(sys.rows());
      for (int i = 0; i < mu.size(); ++i) mu[i] = rng.uniform() - 0.5;
      const Eigen::VectorXd q = y + sys.E.transpose() * mu;
      const ProjectionResult res = euclidean_project(sys, q, 1e-10);
      CHECK((res.y - y).cwiseAbs().maxCoeff() <= 1e-7);
    }
  }
  SUBCASE("firm nonexpansiveness on random pairs") {
    const SequenceIndex idx = derive_sequence_index(build_kuhn_poker(3, 2), 2);
    const EqualityBoxSystem sys = strategy_system(idx);
    RandomStream rng(17);
    for (int trial = 0; trial < 100; ++trial) {
      Eigen::VectorXd u(idx.num_seqs()), v(idx.num_seqs());
      for (int s = 0; s < u.size(); ++s) {
        u[s] = 3.0 * rng.uniform() - 1.0;
        v[s] = 3.0 * rng.uniform() - 1.0;
      }
      const Eigen::VectorXd pu = euclidean_project(sys, u, 1e-10).y;
      const Eigen::VectorXd pv = euclidean_project(sys, v, 1e-10).y;
      CHECK((pu - pv).norm() <= (u - v).norm() + 1e-7);
    }
  }
  SUBCASE("variational inequality against sampled feasible points") {
    const SequenceIndex idx = derive_sequence_index(build_kuhn_poker(3, 2), 1);
    const EqualityBoxSystem sys = strategy_system(idx);
    RandomStream rng(23);
    std::vector<Eigen::VectorXd> zs;
    for (int i = 0; i < 50; ++i) zs.push_back(random_sequence_strategy(idx, rng));
    for (const ReducedPlan& plan : enumerate_reduced_plans(idx, 1000))
      zs.push_back(plan);
    const double eps = 1e-10;
    for (int trial = 0; trial < 10; ++trial) {
      Eigen::VectorXd q(idx.num_seqs());
      for (int s = 0; s < q.size(); ++s) q[s] = 2.0 * rng.uniform() - 0.5;
      const ProjectionResult res = euclidean_project(sys, q, eps);
      const double diam = 2.0 * sys.box_half_width();
      const double delta =
          std::sqrt(eps) * ((q - res.y).norm() + 2.0 * diam) + 1e-9;
      CHECK(variational_inequality_slack(q, res.y, zs) <= delta);
    }
  }
}

TEST_CASE("fixed points of self maps") {
  const GameTree g = build_signaling_game();
  const SequenceIndex idx = derive_sequence_index(g, 1);
  const int XG = idx.find_seq("G", "X"), YG = idx.find_seq("G", "Y");
  const int XB = idx.find_seq("B", "X"), YB = idx.find_seq("B", "Y");

  SUBCASE("identity accepts any feasible point") {
    const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(5, 5);
    const Eigen::VectorXd x = fixed_point(I, idx);
    CHECK(sequence_form_residual(idx, x) <= 1e-9);
  }
  SUBCASE("the copy-signal member pins the two infosets together") {
    // Canonical member that replays the first infoset's behavior at the
    // second: columns for the G actions carry the empty-sequence mass.
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(5, 5);
    A(0, XG) = 1.0;
    A(XG, XG) = 1.0;
    A(XB, XG) = 1.0;
    A(0, YG) = 1.0;
    A(YG, YG) = 1.0;
    A(YB, YG) = 1.0;
    const Eigen::VectorXd x = fixed_point(A, idx);
    CHECK(sequence_form_residual(idx, x) <= 1e-9);
    CHECK((A * x - x).cwiseAbs().maxCoeff() <= 1e-8);
    CHECK(x[XG] == doctest::Approx(x[XB]).epsilon(1e-8));
    CHECK(x[YG] == doctest::Approx(x[YB]).epsilon(1e-8));
  }
  SUBCASE("constant maps return their target plan") {
    const auto plans = enumerate_reduced_plans(idx, 10);
    for (const ReducedPlan& plan : plans) {
      Eigen::MatrixXd A = Eigen::MatrixXd::Zero(5, 5);
      // Spread the plan over the G action columns: column-stochastic on Q.
      A.col(XG) = plan;
      A.col(YG) = plan;
      const Eigen::VectorXd x = fixed_point(A, idx);
      CHECK((x - plan).cwiseAbs().maxCoeff() <= 1e-8);
    }
  }
  SUBCASE("maps without fixed points in the polytope are reported") {
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(5, 5);
    A.col(0) = 2.0 * Eigen::VectorXd::Ones(5);  // doubles the mass
    CHECK_THROWS_AS(fixed_point(A, idx), SolveError);
  }
}
