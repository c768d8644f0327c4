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
#include "linswap/efg.hpp"
#include "linswap/equilibrium.hpp"
#include "linswap/learners.hpp"

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

// Drives a standalone learner against a fixed loss sequence and captures
// the interaction as a single-player trace for the audits.
PlayTrace drive(const SequenceIndex& idx, const LearnerConfig& config,
                const std::vector<Eigen::VectorXd>& losses) {
  PlayTrace trace;
  trace.T = static_cast<int>(losses.size());
  trace.kinds = {config.kind};
  trace.indices = {idx};
  trace.players.resize(1);
  auto learner = make_learner(idx, config);
  PlayerTrace& pt = trace.players[0];
  for (const Eigen::VectorXd& loss : losses) {
    const Eigen::VectorXd x = learner->strategy();
    pt.xs.push_back(x);
    pt.losses.push_back(loss);
    pt.payoff.push_back(loss.dot(x));
    pt.cumulative_payoff += pt.payoff.back();
    pt.matrix_payoff.push_back(loss.dot(learner->matrix() * x));
    pt.max_membership_residual =
        std::max(pt.max_membership_residual, learner->membership_residual());
    pt.max_fixed_point_residual =
        std::max(pt.max_fixed_point_residual, learner->fixed_point_residual());
    learner->observe_loss(loss);
  }
  return trace;
}

std::vector<Eigen::VectorXd> alternating_losses(int nseq, int T) {
  std::vector<Eigen::VectorXd> out;
  for (int t = 0; t < T; ++t) {
    Eigen::VectorXd loss = Eigen::VectorXd::Zero(nseq);
    for (int s = 1; s < nseq; ++s)
      loss[s] = ((s + t) % 2 == 0) ? 1.0 : 0.0;
    out.push_back(loss);
  }
  return out;
}

}  // namespace

TEST_CASE("schedules") {
  LearnerConfig cfg;
  cfg.schedule = EtaSchedule::kInvSqrt;
  CHECK(cfg.eta_at(1) == 1.0);
  CHECK(cfg.eta_at(4) == doctest::Approx(0.5));
  CHECK(cfg.eta_at(4) <= cfg.eta_at(3));
  cfg.schedule = EtaSchedule::kConstant;
  cfg.eta = 0.1;
  CHECK(cfg.eta_at(77) == 0.1);
  CHECK(cfg.accuracy_at(1) == 1.0);
  CHECK(cfg.accuracy_at(4) == doctest::Approx(std::pow(4.0, -2.5)));
  cfg.accuracy_floor = 1e-3;
  CHECK(cfg.accuracy_at(1000) == 1e-3);
}

TEST_CASE("learner initialization") {
  SUBCASE("single infoset starts at the first vertex") {
    const SequenceIndex idx = derive_sequence_index(single_infoset_game(2), 1);
    LearnerConfig cfg;
    cfg.kind = LearnerKind::kLinearSwap;
    auto learner = make_learner(idx, cfg);
    const ReducedPlan first = first_reduced_plan(idx);
    CHECK((learner->strategy() - first).cwiseAbs().maxCoeff() == 0.0);
    // The initial matrix sends the whole simplex onto that vertex.
    const Eigen::MatrixXd A = learner->matrix();
    Eigen::VectorXd interior(3);
    interior << 1.0, 0.25, 0.75;
    CHECK((A * interior - first).cwiseAbs().maxCoeff() <= 1e-12);
  }
  SUBCASE("postconditions at the start, any game") {
    for (const auto& [game, player] :
         std::vector<std::pair<GameTree, int>>{{build_figure_game(), 1},
                                               {build_kuhn_poker(3, 2), 2}}) {
      const SequenceIndex idx = derive_sequence_index(game, player);
      LearnerConfig cfg;
      cfg.kind = LearnerKind::kLinearSwap;
      auto learner = make_learner(idx, cfg);
      CHECK(learner->membership_residual() <= 1e-9);
      CHECK(learner->fixed_point_residual() <= 1e-8);
      CHECK((learner->strategy() - first_reduced_plan(idx)).cwiseAbs().maxCoeff() ==
            0.0);
    }
  }
}

TEST_CASE("zero losses keep the state still") {
  const SequenceIndex idx = derive_sequence_index(build_figure_game(), 1);
  for (LearnerKind kind :
       {LearnerKind::kLinearSwap, LearnerKind::kTrigger, LearnerKind::kExternal}) {
    LearnerConfig cfg;
    cfg.kind = kind;
    auto learner = make_learner(idx, cfg);
    const Eigen::MatrixXd A0 = learner->matrix();
    const Eigen::VectorXd x0 = learner->strategy();
    for (int t = 0; t < 3; ++t)
      learner->observe_loss(Eigen::VectorXd::Zero(idx.num_seqs()));
    CHECK((learner->matrix() - A0).cwiseAbs().maxCoeff() <= 1e-7);
    CHECK((learner->strategy() - x0).cwiseAbs().maxCoeff() <= 1e-7);
  }
}

TEST_CASE("losses outside the unit range are rejected") {
  const SequenceIndex idx = derive_sequence_index(single_infoset_game(2), 1);
  LearnerConfig cfg;
  cfg.kind = LearnerKind::kLinearSwap;
  auto learner = make_learner(idx, cfg);
  Eigen::VectorXd bad(3);
  bad << 0.0, 1.5, 0.0;
  CHECK_THROWS_AS(learner->observe_loss(bad), ValidationError);
}

TEST_CASE("adversarial losses meet the theory bound") {
  // Average deviation regret after T steps stays below 4·|Σ|²/√T under
  // the decreasing schedule.
  const SequenceIndex idx = derive_sequence_index(single_infoset_game(2), 1);
  LearnerConfig cfg;
  cfg.kind = LearnerKind::kLinearSwap;
  cfg.schedule = EtaSchedule::kInvSqrt;
  const int T = 400;
  const PlayTrace trace = drive(idx, cfg, alternating_losses(3, T));
  CHECK(trace.players[0].max_membership_residual <= 1e-7);
  CHECK(trace.players[0].max_fixed_point_residual <= 1e-8);
  const GapCertificate cert = linear_swap_regret(trace, 1);
  const double bound = 4.0 * 9.0 / std::sqrt(static_cast<double>(T));
  CHECK(cert.gap <= bound);
  CHECK(cert.gap >= -1e-9);
}

TEST_CASE("loss vectors") {
  SUBCASE("constant-utility games give the zero vector") {
    GameBuilder b(2);
    const int r = b.add_decision(1, "j", {"a", "b"});
    b.link(r, 0, b.add_leaf({3.0, 3.0}));
    b.link(r, 1, b.add_leaf({3.0, 3.0}));
    const GameTree g = b.build();
    std::vector<SequenceIndex> indices = {derive_sequence_index(g, 1),
                                          derive_sequence_index(g, 2)};
    std::vector<Eigen::VectorXd> xs = {uniform_sequence_strategy(indices[0]),
                                       uniform_sequence_strategy(indices[1])};
    const Eigen::VectorXd loss = build_loss_vector(g, 1, xs, indices);
    CHECK(loss.cwiseAbs().maxCoeff() == 0.0);
  }
  SUBCASE("signaling game against the uniform opponent, pinned by hand") {
    const GameTree g = build_signaling_game();
    std::vector<SequenceIndex> indices = {derive_sequence_index(g, 1),
                                          derive_sequence_index(g, 2)};
    std::vector<Eigen::VectorXd> xs = {uniform_sequence_strategy(indices[0]),
                                       uniform_sequence_strategy(indices[1])};
    const Eigen::VectorXd loss = build_loss_vector(g, 1, xs, indices);
    // Utilities span [0, 10]; disutility of u is (10 − u)/10. Behind X_G
    // the reachable leaves give ((10−4)/10)/2 + ((10−0)/10)/2, halved by
    // the chance draw.
    CHECK(loss[indices[0].find_seq("G", "X")] == doctest::Approx(0.4).epsilon(1e-12));
    CHECK(loss[indices[0].find_seq("G", "Y")] == doctest::Approx(0.4).epsilon(1e-12));
    CHECK(loss[indices[0].find_seq("B", "X")] == doctest::Approx(0.35).epsilon(1e-12));
    CHECK(loss[indices[0].find_seq("B", "Y")] == doctest::Approx(0.35).epsilon(1e-12));
    CHECK(loss[0] == 0.0);
  }
  SUBCASE("inner products match a tree-walk oracle") {
    const GameTree g = build_kuhn_poker(3, 2);
    std::vector<SequenceIndex> indices = {derive_sequence_index(g, 1),
                                          derive_sequence_index(g, 2)};
    RandomStream rng(3);
    for (int trial = 0; trial < 10; ++trial) {
      std::vector<Eigen::VectorXd> xs = {
          random_sequence_strategy(indices[0], rng),
          random_sequence_strategy(indices[1], rng)};
      for (int player = 1; player <= 2; ++player) {
        const Eigen::VectorXd loss = build_loss_vector(g, player, xs, indices);
        CHECK(loss.minCoeff() >= 0.0);
        CHECK(loss.maxCoeff() <= 1.0 + 1e-12);
        // Oracle: direct recursive expectation of the normalized
        // disutility under the product strategy profile.
        const double span = g.max_utility() - g.min_utility();
        std::function<double(int, double, std::vector<int>&)> walk =
            [&](int id, double chance, std::vector<int>& seqs) -> double {
          const GameTree::Node& nd = g.node(id);
          if (nd.kind == GameTree::NodeKind::kLeaf) {
            double reach = chance;
            for (int k = 1; k <= 2; ++k) reach *= xs[k - 1][seqs[k - 1]];
            return reach * (g.max_utility() - nd.utilities[player - 1]) / span;
          }
          if (nd.kind == GameTree::NodeKind::kChance) {
            double total = 0;
            for (size_t a = 0; a < nd.children.size(); ++a)
              total += walk(nd.children[a], chance * nd.probs[a], seqs);
            return total;
          }
          const SequenceIndex& pidx = indices[nd.player - 1];
          const int j = pidx.from_registry[nd.infoset];
          const int saved = seqs[nd.player - 1];
          double total = 0;
          for (size_t a = 0; a < nd.children.size(); ++a) {
            seqs[nd.player - 1] = pidx.infosets[j].seqs[a];
            total += walk(nd.children[a], chance, seqs);
          }
          seqs[nd.player - 1] = saved;
          return total;
        };
        std::vector<int> seqs(2, 0);
        const double expect = walk(g.root(), 1.0, seqs);
        CHECK(loss.dot(xs[player - 1]) == doctest::Approx(expect).epsilon(1e-10));
      }
    }
  }
}

TEST_CASE("self play") {
  SUBCASE("a single iteration records one entry per player") {
    const GameTree g = build_signaling_game();
    std::vector<LearnerConfig> cfgs(2);
    cfgs[0].kind = LearnerKind::kLinearSwap;
    cfgs[1].kind = LearnerKind::kLinearSwap;
    const PlayTrace trace = self_play(g, cfgs, 1);
    REQUIRE(trace.players.size() == 2);
    for (int p = 0; p < 2; ++p) {
      CHECK(trace.players[p].xs.size() == 1);
      CHECK(trace.players[p].cumulative_payoff ==
            doctest::Approx(trace.players[p].payoff[0]));
    }
    CHECK_FALSE(trace.aborted);
  }
  SUBCASE("mixed kinds run to completion with the postconditions held") {
    const GameTree g = build_signaling_game();
    std::vector<LearnerConfig> cfgs(2);
    cfgs[0].kind = LearnerKind::kTrigger;
    cfgs[1].kind = LearnerKind::kLinearSwap;
    cfgs[0].eta = cfgs[1].eta = 0.1;
    cfgs[0].schedule = cfgs[1].schedule = EtaSchedule::kConstant;
    const PlayTrace trace = self_play(g, cfgs, 40);
    CHECK_FALSE(trace.aborted);
    for (int p = 0; p < 2; ++p) {
      CHECK(trace.players[p].max_membership_residual <= 1e-7);
      CHECK(trace.players[p].max_fixed_point_residual <= 1e-8);
      CHECK(trace.players[p].xs.size() == 40);
    }
    // Matrices are thinned but the first and last iterates are kept.
    CHECK(trace.players[0].matrices.count(1) == 1);
    CHECK(trace.players[0].matrices.count(40) == 1);
  }
  SUBCASE("deviation-class ordering holds on every short run") {
    const GameTree g = build_kuhn_poker(3, 2);
    for (LearnerKind kind : {LearnerKind::kLinearSwap, LearnerKind::kTrigger,
                             LearnerKind::kExternal}) {
      std::vector<LearnerConfig> cfgs(2);
      cfgs[0].kind = kind;
      cfgs[1].kind = kind;
      cfgs[0].schedule = cfgs[1].schedule = EtaSchedule::kConstant;
      cfgs[0].eta = cfgs[1].eta = 0.1;
      const PlayTrace trace = self_play(g, cfgs, 30);
      REQUIRE_FALSE(trace.aborted);
      for (int player = 1; player <= 2; ++player) {
        const double ext = external_regret(trace, player).gap;
        const double trig = trigger_regret(trace, player).gap;
        const double lin = linear_swap_regret(trace, player).gap;
        CHECK(ext <= trig + 1e-6);
        CHECK(trig <= lin + 1e-6);
        CHECK(lin >= -1e-9);
      }
    }
  }
  SUBCASE("matrix-level and strategy-level payoffs agree through the fixed point") {
    const GameTree g = build_signaling_game();
    std::vector<LearnerConfig> cfgs(2);
    cfgs[0].kind = LearnerKind::kLinearSwap;
    cfgs[1].kind = LearnerKind::kLinearSwap;
    const PlayTrace trace = self_play(g, cfgs, 25);
    for (int p = 0; p < 2; ++p) {
      double drift = 0;
      for (int t = 0; t < 25; ++t)
        drift += std::abs(trace.players[p].matrix_payoff[t] -
                          trace.players[p].payoff[t]);
      CHECK(drift <= 2e-6 * 25);
    }
  }
}
