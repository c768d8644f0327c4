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
#include <functional>

#include "doctest.h"
#include "helpers.hpp"
#include "linswap/convex_opt.hpp"
#include "linswap/efg.hpp"
#include "linswap/linmap.hpp"
#include "linswap/projection.hpp"
#include "linswap/sequence_form.hpp"

using namespace linswap;

namespace {

GameTree single_infoset_game(int actions) {
  GameBuilder b(1);
  std::vector<std::string> labels;
  for (int a = 0; a < actions; ++a) labels.push_back("a" + std::to_string(a + 1));
  const int root = b.add_decision(1, "j", labels);
  for (int a = 0; a < actions; ++a) b.link(root, a, b.add_leaf({0.0}));
  return b.build();
}

// A matrix equivalent to `base` on the strategy polytope but scrambled by
// directions that vanish on it: forms ⟨P_row − p_row·e_(),  x⟩ are zero on
// every strategy.
Eigen::MatrixXd scramble_equivalent(const Eigen::MatrixXd& base,
                                    const StandardPolytope& poly,
                                    RandomStream& rng) {
  Eigen::MatrixXd out = base;
  const Eigen::MatrixXd P = Eigen::MatrixXd(poly.P);
  for (int r = 0; r < P.rows(); ++r) {
    Eigen::VectorXd dead = P.row(r).transpose();
    dead[0] -= poly.p[r];
    Eigen::VectorXd v(base.rows());
    for (int i = 0; i < v.size(); ++i) v[i] = 2.0 * rng.uniform() - 1.0;
    out += v * dead.transpose();
  }
  return out;
}

}  // namespace

TEST_CASE("compiled system dimensions and base case") {
  SUBCASE("single infoset: columns are points of the target") {
    const SequenceIndex idx = derive_sequence_index(single_infoset_game(3), 1);
    const LinMapSystem sys = compile_self_map_system(idx);
    CHECK(sys.num_vars() == sys.d() * sys.num_seqs() + sys.k() * 1);
    CHECK(sys.d() == 4);
    CHECK(sys.k() == 2);
    const auto plans = enumerate_reduced_plans(idx, 10);
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(4, 4);
    A.col(1) = plans[0];
    A.col(2) = plans[1];
    A.col(3) = plans[2];
    CHECK(check_membership(A, sys, 1e-9).member);
  }
  SUBCASE("worked decision process: variable count formula") {
    const SequenceIndex idx = derive_sequence_index(build_figure_game(), 1);
    const LinMapSystem sys = compile_self_map_system(idx);
    CHECK(sys.d() == 10);
    CHECK(sys.k() == 5);
    CHECK(sys.num_vars() == 10 * 10 + 5 * 4);
    CHECK(sys.target.gamma == 1.0);
  }
  SUBCASE("degenerate source without decisions") {
    const GameTree g = parse_game("players 1\nnode 0 leaf 0\n");
    const SequenceIndex idx = derive_sequence_index(g, 1);
    const LinMapSystem sys = compile_self_map_system(idx);
    Eigen::MatrixXd A = Eigen::MatrixXd::Ones(1, 1);
    CHECK(check_membership(A, sys, 1e-9).member);
    A(0, 0) = 0.5;
    CHECK_FALSE(check_membership(A, sys, 1e-9).member);
  }
}

TEST_CASE("sampled members map every plan into the target") {
  for (const auto& [game, player] :
       std::vector<std::pair<GameTree, int>>{{build_figure_game(), 1},
                                             {build_signaling_game(), 1},
                                             {build_signaling_game(), 2},
                                             {build_kuhn_poker(3, 2), 1}}) {
    const SequenceIndex idx = derive_sequence_index(game, player);
    const LinMapSystem sys = compile_self_map_system(idx);
    const StandardPolytope poly = sequence_form_polytope(idx);
    const auto plans = enumerate_reduced_plans(idx, 1000);
    RandomStream rng(101 + player);
    for (int k = 0; k < 20; ++k) {
      const Eigen::MatrixXd A = sample_feasible_matrix(sys, rng);
      CHECK(check_membership(A, sys, 1e-7).member);
      CHECK(A.minCoeff() >= -1e-9);
      CHECK(A.maxCoeff() <= 1.0 + 1e-9);
      for (const ReducedPlan& plan : plans)
        CHECK(poly.residual(A * plan) <= 1e-7);
    }
  }
}

TEST_CASE("membership is decided bottom-up without a solver") {
  const SequenceIndex idx = derive_sequence_index(build_figure_game(), 1);
  const LinMapSystem sys = compile_self_map_system(idx);
  SUBCASE("the zero matrix fails at the root") {
    const Eigen::MatrixXd Z = Eigen::MatrixXd::Zero(10, 10);
    const MembershipReport rep = check_membership(Z, sys, 1e-7);
    CHECK_FALSE(rep.member);
    bool mentions_root = false;
    for (const auto& v : rep.violations)
      mentions_root = mentions_root || v.find("root") != std::string::npos;
    CHECK(mentions_root);
  }
  SUBCASE("the raw identity fails on interior columns") {
    const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(10, 10);
    const MembershipReport rep = check_membership(I, sys, 1e-7);
    CHECK_FALSE(rep.member);
    bool mentions_interior = false;
    for (const auto& v : rep.violations)
      mentions_interior =
          mentions_interior || v.find("not zero") != std::string::npos;
    CHECK(mentions_interior);
  }
  SUBCASE("shape mismatches are rejected") {
    CHECK_THROWS_AS(check_membership(Eigen::MatrixXd::Zero(3, 3), sys, 1e-7),
                    ValidationError);
  }
}

TEST_CASE("canonicalization rewrites equivalent maps into the system") {
  SUBCASE("the identity map, everywhere") {
    for (const auto& [game, player] :
         std::vector<std::pair<GameTree, int>>{{build_figure_game(), 1},
                                               {build_signaling_game(), 1},
                                               {build_kuhn_poker(3, 2), 1},
                                               {build_kuhn_poker(3, 2), 2}}) {
      const SequenceIndex idx = derive_sequence_index(game, player);
      const LinMapSystem sys = compile_self_map_system(idx);
      const int n = idx.num_seqs();
      const DeviationMatrix canon =
          canonicalize(Eigen::MatrixXd::Identity(n, n), sys);
      CHECK(check_membership(canon.A, sys, 1e-9).member);
      for (const ReducedPlan& plan : enumerate_reduced_plans(idx, 1000))
        CHECK((canon.A * plan - plan).cwiseAbs().maxCoeff() <= 1e-7);
    }
  }
  SUBCASE("the signaling-game deviation matrix from the swap") {
    const GameTree g = build_signaling_game();
    const SequenceIndex idx = derive_sequence_index(g, 1);
    const LinMapSystem sys = compile_self_map_system(idx);
    const int XG = idx.find_seq("G", "X"), YG = idx.find_seq("G", "Y");
    const int XB = idx.find_seq("B", "X"), YB = idx.find_seq("B", "Y");
    // The 4×4 table (order X_G, Y_G, X_B, Y_B) padded with the empty
    // row/column: replay the first-infoset behavior at the second.
    Eigen::MatrixXd B = Eigen::MatrixXd::Zero(5, 5);
    B(0, 0) = 1.0;
    B(XG, XG) = 1.0;
    B(YG, YG) = 1.0;
    B(XB, XG) = 1.0;
    B(YB, YG) = 1.0;
    const DeviationMatrix canon = canonicalize(B, sys);
    CHECK(check_membership(canon.A, sys, 1e-9).member);
    const auto plans = enumerate_reduced_plans(idx, 10);
    for (const ReducedPlan& plan : plans) {
      const Eigen::VectorXd want = B * plan;
      CHECK((canon.A * plan - want).cwiseAbs().maxCoeff() <= 1e-7);
    }
    const int swap_from =
        linswap::testing::find_plan(idx, plans, {{"G", "X"}, {"B", "Y"}});
    const int swap_to =
        linswap::testing::find_plan(idx, plans, {{"G", "X"}, {"B", "X"}});
    CHECK((canon.A * plans[swap_from] - plans[swap_to]).cwiseAbs().maxCoeff() <=
          1e-7);
  }
  SUBCASE("members are fixed points of the procedure") {
    for (const auto& [game, player] :
         std::vector<std::pair<GameTree, int>>{{build_figure_game(), 1},
                                               {build_kuhn_poker(3, 2), 2}}) {
      const SequenceIndex idx = derive_sequence_index(game, player);
      const LinMapSystem sys = compile_self_map_system(idx);
      RandomStream rng(7);
      for (int k = 0; k < 10; ++k) {
        const Eigen::MatrixXd A = sample_feasible_matrix(sys, rng);
        const DeviationMatrix again = canonicalize(A, sys);
        CHECK((again.A - A).cwiseAbs().maxCoeff() <= 1e-12);
      }
    }
  }
  SUBCASE("scrambled equivalents canonicalize back into the system") {
    for (const auto& [game, player] :
         std::vector<std::pair<GameTree, int>>{{build_figure_game(), 1},
                                               {build_signaling_game(), 1},
                                               {build_kuhn_poker(3, 2), 1}}) {
      const SequenceIndex idx = derive_sequence_index(game, player);
      const LinMapSystem sys = compile_self_map_system(idx);
      const StandardPolytope poly = sequence_form_polytope(idx);
      const auto plans = enumerate_reduced_plans(idx, 1000);
      RandomStream rng(13 * player);
      for (int k = 0; k < 15; ++k) {
        const Eigen::MatrixXd M = sample_feasible_matrix(sys, rng);
        const Eigen::MatrixXd B = scramble_equivalent(M, poly, rng);
        const DeviationMatrix canon = canonicalize(B, sys);
        CHECK(check_membership(canon.A, sys, 1e-7).member);
        for (const ReducedPlan& plan : plans)
          CHECK((canon.A * plan - M * plan).cwiseAbs().maxCoeff() <= 1e-7);
      }
    }
  }
  SUBCASE("affine maps into the polytope lift through the empty column") {
    const SequenceIndex idx = derive_sequence_index(build_kuhn_poker(3, 2), 1);
    const LinMapSystem sys = compile_self_map_system(idx);
    const auto plans = enumerate_reduced_plans(idx, 1000);
    RandomStream rng(29);
    for (int k = 0; k < 20; ++k) {
      const Eigen::MatrixXd M = sample_feasible_matrix(sys, rng);
      const Eigen::VectorXd z = random_sequence_strategy(idx, rng);
      const double theta = rng.uniform();
      // g(x) = θ·Mx + (1−θ)·z maps the polytope into itself.
      Eigen::MatrixXd lift = theta * M;
      lift.col(0) += (1.0 - theta) * z;
      const DeviationMatrix canon = canonicalize(lift, sys);
      CHECK(check_membership(canon.A, sys, 1e-7).member);
      for (const ReducedPlan& plan : plans) {
        const Eigen::VectorXd want = theta * (M * plan) + (1.0 - theta) * z;
        CHECK((canon.A * plan - want).cwiseAbs().maxCoeff() <= 1e-7);
      }
    }
  }
  SUBCASE("maps leaving the target are rejected with the witness vertex") {
    const SequenceIndex idx = derive_sequence_index(build_figure_game(), 1);
    const LinMapSystem sys = compile_self_map_system(idx);
    Eigen::MatrixXd bad = Eigen::MatrixXd::Identity(10, 10) * 2.0;
    CHECK_THROWS_WITH_AS(canonicalize(bad, sys), doctest::Contains("vertex"),
                         ValidationError);
  }
}

TEST_CASE("trigger deviation matrices") {
  const GameTree g = build_signaling_game();
  const SequenceIndex idx = derive_sequence_index(g, 1);
  const LinMapSystem sys = compile_self_map_system(idx);
  const auto plans = enumerate_reduced_plans(idx, 10);
  const int XG = idx.find_seq("G", "X");
  const int YG = idx.find_seq("G", "Y");

  SUBCASE("rewrite below the first signal") {
    Eigen::VectorXd continuation = Eigen::VectorXd::Zero(5);
    continuation[YG] = 1.0;
    const DeviationMatrix dev = trigger_deviation_matrix(idx, XG, continuation);
    CHECK(check_membership(dev.A, sys, 1e-9).member);
    const int from =
        linswap::testing::find_plan(idx, plans, {{"G", "X"}, {"B", "X"}});
    const int to =
        linswap::testing::find_plan(idx, plans, {{"G", "Y"}, {"B", "X"}});
    CHECK((dev.A * plans[from] - plans[to]).cwiseAbs().maxCoeff() <= 1e-9);
    const int other =
        linswap::testing::find_plan(idx, plans, {{"G", "Y"}, {"B", "Y"}});
    CHECK((dev.A * plans[other] - plans[other]).cwiseAbs().maxCoeff() <= 1e-9);
  }
  SUBCASE("plan-level simulation across all triggers") {
    const SequenceIndex kidx = derive_sequence_index(build_kuhn_poker(3, 2), 1);
    const LinMapSystem ksys = compile_self_map_system(kidx);
    const auto kplans = enumerate_reduced_plans(kidx, 1000);
    RandomStream rng(55);
    for (int trig = 1; trig < kidx.num_seqs(); ++trig) {
      const int j = kidx.seq_infoset[trig];
      Eigen::VectorXd cont = Eigen::VectorXd::Zero(kidx.num_seqs());
      std::function<void(int, double)> fill = [&](int jj, double mass) {
        const auto& is = kidx.infosets[jj];
        std::vector<double> w(is.seqs.size());
        double total = 0;
        for (double& v : w) {
          v = 0.1 + rng.uniform();
          total += v;
        }
        for (size_t a = 0; a < is.seqs.size(); ++a) {
          cont[is.seqs[a]] = mass * w[a] / total;
          for (int child : kidx.children[is.seqs[a]])
            fill(child, cont[is.seqs[a]]);
        }
      };
      fill(j, 1.0);
      const DeviationMatrix dev = trigger_deviation_matrix(kidx, trig, cont);
      CHECK(check_membership(dev.A, ksys, 1e-9).member);
      const std::vector<int>& subtree = kidx.subtree_seqs(j);
      for (const ReducedPlan& plan : kplans) {
        Eigen::VectorXd want = plan;
        if (plan[trig] > 0.5)
          for (int s : subtree) want[s] = cont[s];
        CHECK((dev.A * plan - want).cwiseAbs().maxCoeff() <= 1e-9);
      }
    }
  }
  SUBCASE("infeasible continuations are rejected") {
    Eigen::VectorXd bad = Eigen::VectorXd::Zero(5);
    bad[XG] = 0.4;
    CHECK_THROWS_AS(trigger_deviation_matrix(idx, XG, bad), ValidationError);
    CHECK_THROWS_AS(trigger_deviation_matrix(idx, 0, bad), ValidationError);
  }
}

TEST_CASE("inequality-form targets lift to standard form") {
  // A box in two dimensions: {y : y ≤ (1,1), −y ≤ (1,1)} ⊆ [−1,1]².
  Eigen::MatrixXd C(4, 2);
  C << 1, 0, 0, 1, -1, 0, 0, -1;
  Eigen::VectorXd c(4);
  c << 1, 1, 1, 1;
  const InequalityLift lift = inequality_to_standard(C, c, 1.0);
  CHECK(lift.standard.dim() == 6);
  CHECK(lift.standard.gamma == 2.0);

  const SequenceIndex idx = derive_sequence_index(single_infoset_game(2), 1);
  const LinMapSystem sys = compile_linmap_system(idx, lift.standard);
  RandomStream rng(31);
  for (int k = 0; k < 10; ++k) {
    const Eigen::MatrixXd A = sample_feasible_matrix(sys, rng);
    CHECK(check_membership(A, sys, 1e-7).member);
    for (const ReducedPlan& plan : enumerate_reduced_plans(idx, 10)) {
      const Eigen::VectorXd lifted = A * plan;
      CHECK(lift.standard.residual(lifted) <= 1e-7);
      const Eigen::VectorXd y = lift.to_original(lifted);
      CHECK(((C * y - c).maxCoeff()) <= 1e-7);
    }
  }
}

TEST_CASE("system dump names the variables") {
  const SequenceIndex idx = derive_sequence_index(single_infoset_game(2), 1);
  const LinMapSystem sys = compile_self_map_system(idx);
  const std::string text = sys.dump();
  CHECK(text.find("A[ja1][") != std::string::npos);
  CHECK(text.find("b[j][") != std::string::npos);
  CHECK(text.find("bounds") != std::string::npos);
}

TEST_CASE("matrix-space constraints describe the same feasible set") {
  for (const auto& [game, player] :
       std::vector<std::pair<GameTree, int>>{{build_figure_game(), 1},
                                             {build_signaling_game(), 1},
                                             {build_kuhn_poker(3, 2), 1}}) {
    const SequenceIndex idx = derive_sequence_index(game, player);
    const LinMapSystem sys = compile_self_map_system(idx);
    const EqualityBoxSystem& mat = sys.matrix_space_constraints();
    CHECK(mat.dim() == sys.d() * sys.num_seqs());
    RandomStream rng(3 * player);
    for (int k = 0; k < 10; ++k) {
      const Eigen::MatrixXd A = sample_feasible_matrix(sys, rng);
      Eigen::VectorXd y(mat.dim());
      for (int s = 0; s < sys.num_seqs(); ++s)
        for (int r = 0; r < sys.d(); ++r) y[sys.col_var(s, r)] = A(r, s);
      CHECK(mat.residual(y) <= 1e-8);
    }
    RandomStream rng2(17 * player);
    Eigen::VectorXd q(mat.dim());
    for (int i = 0; i < q.size(); ++i) q[i] = 2.0 * rng2.uniform() - 0.5;
    const ProjectionResult pr = euclidean_project(mat, q, 1e-9);
    Eigen::MatrixXd A(sys.d(), sys.num_seqs());
    for (int s = 0; s < sys.num_seqs(); ++s)
      for (int r = 0; r < sys.d(); ++r) A(r, s) = pr.y[sys.col_var(s, r)];
    CHECK(check_membership(A, sys, 1e-7).member);
  }
}
