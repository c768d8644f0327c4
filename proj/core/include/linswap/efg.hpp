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

#ifndef LINSWAP_EFG_HPP_
#define LINSWAP_EFG_HPP_

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace linswap {

struct ParseError : std::runtime_error {
  ParseError(int line, int column, const std::string& message)
      : std::runtime_error("parse error at line " + std::to_string(line) +
                           ", column " + std::to_string(column) + ": " +
                           message),
        line(line),
        column(column) {}
  int line;
  int column;
};

struct ValidationError : std::runtime_error {
  explicit ValidationError(const std::string& message)
      : std::runtime_error(message) {}
};

// An n-player perfect-recall game tree with chance nodes. Immutable after
// construction; all mutation happens through GameBuilder or the parser.
class GameTree {
 public:
  enum class NodeKind { kChance, kDecision, kLeaf };

  struct Node {
    NodeKind kind = NodeKind::kLeaf;
    int player = -1;   // 1-based, decision nodes only
    int infoset = -1;  // index into infosets(player), decision nodes only
    std::vector<int> children;
    std::vector<std::string> actions;  // decision nodes, parallel to children
    std::vector<double> probs;         // chance nodes, parallel to children
    std::vector<double> utilities;     // leaves, one per player
  };

  struct Infoset {
    std::string label;
    std::vector<std::string> actions;
    std::vector<int> nodes;  // node ids, in encounter order
  };

  int num_players() const { return num_players_; }
  int num_nodes() const { return static_cast<int>(nodes_.size()); }
  const Node& node(int id) const { return nodes_[id]; }
  int root() const { return 0; }

  const std::vector<Infoset>& infosets(int player) const {
    return infosets_[player - 1];
  }
  int num_infosets() const;   // summed over players
  int num_sequences() const;  // summed over players, one empty seq each
  int num_terminals() const;

  // Expected utility per player for a pure profile. plans[i] maps infoset
  // index of player i+1 to the chosen action index.
  std::vector<double> expected_utility(
      const std::vector<std::vector<int>>& plans) const;

  double min_utility() const { return min_util_; }
  double max_utility() const { return max_util_; }

  std::string serialize() const;
  uint64_t hash() const;  // FNV-1a over the canonical serialization

  friend class GameBuilder;
  friend GameTree parse_game(const std::string& text);

 private:
  void validate() const;
  void index_infosets();

  int num_players_ = 0;
  std::vector<Node> nodes_;
  std::vector<std::vector<Infoset>> infosets_;  // per player
  double min_util_ = 0;
  double max_util_ = 0;
};

// Incremental construction helper used by the generators.
class GameBuilder {
 public:
  explicit GameBuilder(int num_players);
  int add_chance(const std::vector<double>& probs);
  int add_decision(int player, const std::string& infoset_label,
                   const std::vector<std::string>& actions);
  int add_leaf(const std::vector<double>& utilities);
  void link(int parent, int slot, int child);
  GameTree build();

 private:
  GameTree game_;
};

// Parses the line-oriented game format:
//   players <n>
//   node <id> chance <child:prob ...>
//   node <id> player <p> infoset <label> <child:action ...>
//   node <id> leaf <u1> ... <un>
// Node 0 is the root. Chance probabilities accept decimals or rationals a/b.
GameTree parse_game(const std::string& text);

// The decision process from the worked single-agent example, embedded as a
// two-player game with zero payoffs everywhere (the opponent structure is
// fixed arbitrarily; only Player 1's decision structure matters).
GameTree build_figure_game();

// Two-player signaling game: uniform chance over {G,B}, Player 1 signals
// X/Y from singleton infosets, Player 2 responds l/r without seeing the
// chance outcome.
GameTree build_signaling_game();

// Two-player game found by computational search whose joint-distribution
// analysis separates linear deviations from arbitrary plan swaps.
GameTree build_counterexample_game();

// Kuhn poker: one card per player from `ranks` ranks, one bet of size 1,
// no raises; after a bet the remaining players call or fold in seat order.
GameTree build_kuhn_poker(int ranks, int players);

// A CNF clause is a list of literals; variables are 1-based and a negative
// entry means negation.
using Clause = std::vector<int>;

// Chance picks a clause uniformly, Player 2 picks one of its literals
// (singleton infosets), Player 1 assigns the variable TRUE/FALSE with one
// infoset per variable. Both players get 1 iff the literal is satisfied.
GameTree build_sat_reduction(const std::vector<Clause>& cnf, int num_vars);

// Reads a CNF in a minimal DIMACS-like format: "p cnf <vars> <clauses>"
// then one clause per line, 0-terminated (the trailing 0 is optional).
std::vector<Clause> parse_cnf(const std::string& text, int* num_vars);

struct NormalFormView {
  // plans[i][k] maps infoset index of player i+1 to an action index.
  std::vector<std::vector<std::vector<int>>> plans;
  std::vector<std::string> plan_names(const GameTree& game, int player) const;
  // utilities[flat_profile * n + i]; profiles are row-major in player order.
  std::vector<double> utilities;
  std::vector<long> plan_counts;
  long num_profiles = 0;

  double utility(const std::vector<int>& profile, int player) const;
};

// Enumerates every reduced-plan profile and its exact expected utilities.
// Throws ValidationError when the profile count exceeds max_profiles.
NormalFormView normal_form_view(const GameTree& game, long max_profiles);

}  // namespace linswap

#endif  // LINSWAP_EFG_HPP_
