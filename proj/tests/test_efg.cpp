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
#include "linswap/efg.hpp"

using namespace linswap;
using linswap::testing::census;
using linswap::testing::tree_walk_utility;

namespace {

const double kSignalingMatrix[4][4][2] = {
    {{5, 5}, {5, 5}, {0, 6}, {0, 6}},
    {{5, 5}, {2, 8}, {3, 3}, {0, 6}},
    {{5, 5}, {3, 3}, {2, 8}, {0, 6}},
    {{5, 5}, {0, 6}, {5, 5}, {0, 6}},
};

const double kCounterexampleMatrix[4][4][2] = {
    {{50.5, 0.0}, {50.5, 0.25}, {-27.75, -78.75}, {-27.75, -78.5}},
    {{0.0, 0.0}, {0.5, 1.0}, {-0.75, 0.0}, {-0.25, 1.0}},
    {{50.0, 0.5}, {49.5, -0.75}, {-27.0, -78.25}, {-27.5, -79.5}},
    {{-0.5, 0.5}, {-0.5, 0.0}, {0.0, 0.5}, {0.0, 0.0}},
};

}  // namespace

TEST_CASE("serialization round-trips for every generator") {
  const GameTree games[] = {build_figure_game(), build_signaling_game(),
                            build_counterexample_game(), build_kuhn_poker(3, 2),
                            build_kuhn_poker(4, 3),
                            build_sat_reduction({{1, 2}, {-1}}, 2)};
  for (const GameTree& g : games) {
    const std::string text = g.serialize();
    const GameTree reparsed = parse_game(text);
    CHECK(reparsed.serialize() == text);
    CHECK(reparsed.hash() == g.hash());
    CHECK(reparsed.num_infosets() == g.num_infosets());
    CHECK(reparsed.num_sequences() == g.num_sequences());
    CHECK(reparsed.num_terminals() == g.num_terminals());
  }
}

TEST_CASE("trivial single-leaf game parses") {
  const GameTree g = parse_game("players 2\nnode 0 leaf 0 0\n");
  CHECK(g.num_infosets() == 0);
  CHECK(g.num_terminals() == 1);
  const NormalFormView view = normal_form_view(g, 10);
  CHECK(view.num_profiles == 1);
  CHECK(view.utility({0, 0}, 1) == 0.0);
  CHECK(view.utility({0, 0}, 2) == 0.0);
}

TEST_CASE("parser reports line and column") {
  CHECK_THROWS_AS(parse_game("players 2\nnode 0 leaf 0 zero\n"), ParseError);
  try {
    parse_game("players 2\nnode 0 leaf 0 zero\n");
  } catch (const ParseError& e) {
    CHECK(e.line == 2);
    CHECK(e.column > 1);
  }
  CHECK_THROWS_AS(parse_game("node 0 leaf 0\n"), ParseError);
  CHECK_THROWS_AS(parse_game("players 2\nnode 0 gizmo\n"), ParseError);
}

TEST_CASE("mismatched infoset action lists are rejected") {
  const std::string text =
      "players 1\n"
      "node 0 chance 1:0.5 2:0.5\n"
      "node 1 player 1 infoset I 3:a 4:b\n"
      "node 2 player 1 infoset I 5:a\n"
      "node 3 leaf 0\nnode 4 leaf 0\nnode 5 leaf 0\n";
  CHECK_THROWS_WITH_AS(parse_game(text), doctest::Contains("I"),
                       ValidationError);
}

TEST_CASE("perfect recall violations name the infoset") {
  const std::string text =
      "players 1\n"
      "node 0 player 1 infoset A 1:l 2:r\n"
      "node 1 player 1 infoset B 3:x 4:y\n"
      "node 2 player 1 infoset B 5:x 6:y\n"
      "node 3 leaf 0\nnode 4 leaf 0\nnode 5 leaf 0\nnode 6 leaf 0\n";
  CHECK_THROWS_WITH_AS(parse_game(text), doctest::Contains("B"),
                       ValidationError);
}

TEST_CASE("chance probabilities must sum to one") {
  const std::string text =
      "players 1\n"
      "node 0 chance 1:0.5 2:0.4\n"
      "node 1 leaf 0\nnode 2 leaf 0\n";
  CHECK_THROWS_WITH_AS(parse_game(text), doctest::Contains("sum"),
                       ValidationError);
}

TEST_CASE("kuhn poker matches the benchmark census") {
  SUBCASE("thirteen ranks, three players") {
    const GameTree g = build_kuhn_poker(13, 3);
    CHECK(g.num_infosets() == 156);
    CHECK(g.num_sequences() == 315);
    CHECK(g.num_terminals() == 22308);
  }
  SUBCASE("classic two-player game against the census oracle") {
    const GameTree g = build_kuhn_poker(3, 2);
    const auto c = census(g);
    CHECK(g.num_infosets() == c.infosets);
    CHECK(g.num_sequences() == c.sequences);
    CHECK(g.num_terminals() == c.terminals);
    CHECK(c.infosets == 12);
    CHECK(c.sequences == 26);
    CHECK(c.terminals == 30);
  }
  SUBCASE("payoffs are zero sum") {
    const GameTree g = build_kuhn_poker(3, 2);
    const NormalFormView view = normal_form_view(g, 100000);
    for (long f = 0; f < view.num_profiles; ++f) {
      double sum = 0;
      for (int p = 1; p <= 2; ++p) sum += view.utilities[f * 2 + (p - 1)];
      CHECK(sum == doctest::Approx(0.0).epsilon(1e-12));
    }
  }
  SUBCASE("cannot deal three distinct cards from two ranks") {
    CHECK_THROWS_AS(build_kuhn_poker(2, 3), ValidationError);
  }
}

TEST_CASE("signaling game reproduces its payoff table") {
  const GameTree g = build_signaling_game();
  const NormalFormView view = normal_form_view(g, 100);
  REQUIRE(view.plan_counts[0] == 4);
  REQUIRE(view.plan_counts[1] == 4);
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 4; ++c) {
      CHECK(view.utility({r, c}, 1) ==
            doctest::Approx(kSignalingMatrix[r][c][0]).epsilon(1e-12));
      CHECK(view.utility({r, c}, 2) ==
            doctest::Approx(kSignalingMatrix[r][c][1]).epsilon(1e-12));
    }
}

TEST_CASE("counterexample game reproduces its payoff table") {
  const GameTree g = build_counterexample_game();
  const NormalFormView view = normal_form_view(g, 100);
  REQUIRE(view.plan_counts[0] == 4);
  REQUIRE(view.plan_counts[1] == 4);
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 4; ++c) {
      CHECK(view.utility({r, c}, 1) ==
            doctest::Approx(kCounterexampleMatrix[r][c][0]).epsilon(1e-12));
      CHECK(view.utility({r, c}, 2) ==
            doctest::Approx(kCounterexampleMatrix[r][c][1]).epsilon(1e-12));
    }

  SUBCASE("tensor equals an independent per-profile tree walk") {
    const std::string acts1[] = {"1", "2"};
    const std::string acts2[] = {"l", "r"};
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b)
        for (int q = 0; q < 2; ++q)
          for (int w = 0; w < 2; ++w) {
            const auto u = tree_walk_utility(g, {{{1, "a"}, acts1[a]},
                                                 {{1, "b"}, acts1[b]},
                                                 {{2, "q"}, acts2[q]},
                                                 {{2, "w"}, acts2[w]}});
            const int row = 2 * a + b, col = 2 * q + w;
            CHECK(u[0] == doctest::Approx(view.utility({row, col}, 1))
                              .epsilon(1e-12));
            CHECK(u[1] == doctest::Approx(view.utility({row, col}, 2))
                              .epsilon(1e-12));
          }
  }
}

TEST_CASE("sat reduction games") {
  SUBCASE("satisfiable formula admits a full-payoff profile") {
    const GameTree g = build_sat_reduction({{1, 2}, {-1}}, 2);
    const NormalFormView view = normal_form_view(g, 1000);
    double best = -1;
    for (long f = 0; f < view.num_profiles; ++f)
      best = std::max(best, view.utilities[f * 2]);
    CHECK(best == doctest::Approx(1.0).epsilon(1e-12));
  }
  SUBCASE("unsatisfiable formula caps every profile at 1 - 1/n") {
    const GameTree g = build_sat_reduction({{1}, {-1}}, 1);
    const NormalFormView view = normal_form_view(g, 1000);
    double best = -1;
    for (long f = 0; f < view.num_profiles; ++f)
      best = std::max(best, view.utilities[f * 2]);
    CHECK(best == doctest::Approx(0.5).epsilon(1e-12));
  }
  SUBCASE("single positive clause peaks at one") {
    const GameTree g = build_sat_reduction({{1}}, 1);
    const NormalFormView view = normal_form_view(g, 1000);
    double best = -1;
    for (long f = 0; f < view.num_profiles; ++f)
      best = std::max(best, view.utilities[f * 2]);
    CHECK(best == doctest::Approx(1.0).epsilon(1e-12));
  }
  SUBCASE("empty clauses are rejected") {
    CHECK_THROWS_AS(build_sat_reduction({{1}, {}}, 1), ValidationError);
  }
  SUBCASE("dimacs parsing") {
    int vars = 0;
    const auto cnf = parse_cnf("c comment\np cnf 2 2\n1 2 0\n-1 0\n", &vars);
    CHECK(vars == 2);
    REQUIRE(cnf.size() == 2);
    CHECK(cnf[0] == Clause{1, 2});
    CHECK(cnf[1] == Clause{-1});
  }
}

TEST_CASE("size guard on the normal form view") {
  const GameTree g = build_kuhn_poker(3, 2);
  CHECK_THROWS_AS(normal_form_view(g, 10), ValidationError);
}
