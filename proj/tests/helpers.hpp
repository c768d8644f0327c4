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

#ifndef LINSWAP_TESTS_HELPERS_HPP_
#define LINSWAP_TESTS_HELPERS_HPP_

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "linswap/efg.hpp"
#include "linswap/sequence_form.hpp"

namespace linswap::testing {

// Independent expected-utility oracle: a direct recursive walk that knows
// nothing about sequence indices. plans map (player, infoset label) to an
// action label.
inline std::vector<double> tree_walk_utility(
    const GameTree& game,
    const std::map<std::pair<int, std::string>, std::string>& choices) {
  std::vector<double> out(game.num_players(), 0.0);
  std::function<void(int, double)> walk = [&](int id, double reach) {
    const GameTree::Node& n = game.node(id);
    if (n.kind == GameTree::NodeKind::kLeaf) {
      for (int i = 0; i < game.num_players(); ++i)
        out[i] += reach * n.utilities[i];
      return;
    }
    if (n.kind == GameTree::NodeKind::kChance) {
      for (size_t a = 0; a < n.children.size(); ++a)
        walk(n.children[a], reach * n.probs[a]);
      return;
    }
    const std::string& label = game.infosets(n.player)[n.infoset].label;
    const std::string& action = choices.at({n.player, label});
    for (size_t a = 0; a < n.actions.size(); ++a)
      if (n.actions[a] == action) {
        walk(n.children[a], reach);
        return;
      }
    throw std::runtime_error("oracle: no action " + action + " at " + label);
  };
  walk(game.root(), 1.0);
  return out;
}

// Independent structural census used against the registry counters.
struct TreeCensus {
  int infosets = 0;
  int sequences = 0;
  int terminals = 0;
};

inline TreeCensus census(const GameTree& game) {
  TreeCensus c;
  std::map<std::pair<int, std::string>, int> actions;
  std::function<void(int)> walk = [&](int id) {
    const GameTree::Node& n = game.node(id);
    if (n.kind == GameTree::NodeKind::kLeaf) {
      ++c.terminals;
      return;
    }
    if (n.kind == GameTree::NodeKind::kDecision) {
      const std::string& label = game.infosets(n.player)[n.infoset].label;
      actions[{n.player, label}] = static_cast<int>(n.actions.size());
    }
    for (int child : n.children) walk(child);
  };
  walk(game.root());
  c.infosets = static_cast<int>(actions.size());
  c.sequences = game.num_players();  // one empty sequence per player
  for (const auto& [key, count] : actions) c.sequences += count;
  return c;
}

// Index of the plan that picks the given (infoset label, action label)
// pairs at its reached infosets.
inline int find_plan(const SequenceIndex& index,
                     const std::vector<ReducedPlan>& plans,
                     const std::vector<std::pair<std::string, std::string>>&
                         choices) {
  for (size_t i = 0; i < plans.size(); ++i) {
    bool ok = true;
    for (const auto& [label, action] : choices) {
      const int seq = index.find_seq(label, action);
      ok = ok && seq >= 0 && plans[i][seq] > 0.5;
    }
    if (ok) return static_cast<int>(i);
  }
  throw std::runtime_error("no plan matches the requested choices");
}

}  // namespace linswap::testing

#endif  // LINSWAP_TESTS_HELPERS_HPP_
