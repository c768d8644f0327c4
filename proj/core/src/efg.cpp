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

#include "linswap/efg.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <sstream>

namespace linswap {

namespace {

constexpr double kProbSumTol = 1e-12;

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

// ---------------------------------------------------------------------------
// GameBuilder

GameBuilder::GameBuilder(int num_players) {
  if (num_players < 1) throw ValidationError("need at least one player");
  game_.num_players_ = num_players;
  game_.infosets_.resize(num_players);
}

int GameBuilder::add_chance(const std::vector<double>& probs) {
  GameTree::Node n;
  n.kind = GameTree::NodeKind::kChance;
  n.probs = probs;
  n.children.assign(probs.size(), -1);
  game_.nodes_.push_back(std::move(n));
  return static_cast<int>(game_.nodes_.size()) - 1;
}

int GameBuilder::add_decision(int player, const std::string& infoset_label,
                              const std::vector<std::string>& actions) {
  if (player < 1 || player > game_.num_players_)
    throw ValidationError("player id out of range: " + std::to_string(player));
  auto& registry = game_.infosets_[player - 1];
  int infoset = -1;
  for (size_t i = 0; i < registry.size(); ++i) {
    if (registry[i].label == infoset_label) {
      infoset = static_cast<int>(i);
      break;
    }
  }
  if (infoset < 0) {
    registry.push_back({infoset_label, actions, {}});
    infoset = static_cast<int>(registry.size()) - 1;
  } else if (registry[infoset].actions != actions) {
    throw ValidationError("infoset '" + infoset_label + "' of player " +
                          std::to_string(player) +
                          " appears with mismatched action lists");
  }
  GameTree::Node n;
  n.kind = GameTree::NodeKind::kDecision;
  n.player = player;
  n.infoset = infoset;
  n.actions = actions;
  n.children.assign(actions.size(), -1);
  game_.nodes_.push_back(std::move(n));
  int id = static_cast<int>(game_.nodes_.size()) - 1;
  registry[infoset].nodes.push_back(id);
  return id;
}

int GameBuilder::add_leaf(const std::vector<double>& utilities) {
  if (static_cast<int>(utilities.size()) != game_.num_players_)
    throw ValidationError("leaf utility count does not match player count");
  GameTree::Node n;
  n.kind = GameTree::NodeKind::kLeaf;
  n.utilities = utilities;
  game_.nodes_.push_back(std::move(n));
  return static_cast<int>(game_.nodes_.size()) - 1;
}

void GameBuilder::link(int parent, int slot, int child) {
  game_.nodes_[parent].children[slot] = child;
}

GameTree GameBuilder::build() {
  game_.validate();
  game_.index_infosets();
  return std::move(game_);
}

// ---------------------------------------------------------------------------
// GameTree

void GameTree::validate() const {
  if (nodes_.empty()) throw ValidationError("empty game tree");
  std::vector<int> indegree(nodes_.size(), 0);
  for (size_t id = 0; id < nodes_.size(); ++id) {
    const Node& n = nodes_[id];
    switch (n.kind) {
      case NodeKind::kChance: {
        if (n.children.size() != n.probs.size())
          throw ValidationError("chance node " + std::to_string(id) +
                                " has mismatched outcome lists");
        double sum = 0;
        for (double p : n.probs) {
          if (p < 0)
            throw ValidationError("chance node " + std::to_string(id) +
                                  " has a negative probability");
          sum += p;
        }
        if (std::abs(sum - 1.0) > kProbSumTol)
          throw ValidationError("chance node " + std::to_string(id) +
                                " probabilities sum to " + format_double(sum));
        break;
      }
      case NodeKind::kDecision:
        if (n.children.size() != n.actions.size() || n.actions.empty())
          throw ValidationError("decision node " + std::to_string(id) +
                                " has no actions");
        break;
      case NodeKind::kLeaf:
        if (static_cast<int>(n.utilities.size()) != num_players_)
          throw ValidationError("leaf " + std::to_string(id) +
                                " has wrong utility count");
        break;
    }
    for (int c : n.children) {
      if (c < 0 || c >= static_cast<int>(nodes_.size()))
        throw ValidationError("node " + std::to_string(id) +
                              " references missing child");
      ++indegree[c];
    }
  }
  if (indegree[0] != 0)
    throw ValidationError("root node 0 must not be referenced as a child");
  for (size_t id = 1; id < nodes_.size(); ++id)
    if (indegree[id] != 1)
      throw ValidationError("node " + std::to_string(id) +
                            " must be referenced exactly once");

  // Infoset consistency: identical action lists (checked at registration
  // for built games, re-checked here for parsed ones) and perfect recall:
  // every node of an infoset sees the same own-action experience.
  for (int p = 1; p <= num_players_; ++p) {
    for (const Infoset& is : infosets_[p - 1]) {
      for (int id : is.nodes) {
        if (nodes_[id].actions != is.actions)
          throw ValidationError("infoset '" + is.label + "' of player " +
                                std::to_string(p) +
                                " appears with mismatched action lists");
      }
    }
  }
  // Experience per node of player p: list of (infoset, action) indices on
  // the root path, owned moves only. Perfect recall requires the lists to
  // agree across each infoset's nodes.
  for (int p = 1; p <= num_players_; ++p) {
    std::vector<std::vector<std::pair<int, int>>> seen(
        infosets_[p - 1].size());
    std::vector<bool> visited(infosets_[p - 1].size(), false);
    bool ok = true;
    std::string bad;
    std::vector<std::pair<int, int>> path;
    std::function<void(int)> walk = [&](int id) {
      if (!ok) return;
      const Node& n = nodes_[id];
      if (n.kind == NodeKind::kLeaf) return;
      if (n.kind == NodeKind::kDecision && n.player == p) {
        if (!visited[n.infoset]) {
          visited[n.infoset] = true;
          seen[n.infoset] = path;
        } else if (seen[n.infoset] != path) {
          ok = false;
          bad = infosets_[p - 1][n.infoset].label;
          return;
        }
        for (size_t a = 0; a < n.children.size(); ++a) {
          path.emplace_back(n.infoset, static_cast<int>(a));
          walk(n.children[a]);
          path.pop_back();
          if (!ok) return;
        }
        return;
      }
      for (int c : n.children) walk(c);
    };
    walk(0);
    if (!ok)
      throw ValidationError("perfect-recall violation at infoset '" + bad +
                            "' of player " + std::to_string(p));
  }
}

void GameTree::index_infosets() {
  // Utility range cache.
  bool first = true;
  for (const Node& n : nodes_) {
    if (n.kind != NodeKind::kLeaf) continue;
    for (double u : n.utilities) {
      if (first || u < min_util_) min_util_ = u;
      if (first || u > max_util_) max_util_ = u;
      first = false;
    }
  }
}

int GameTree::num_infosets() const {
  int total = 0;
  for (const auto& reg : infosets_) total += static_cast<int>(reg.size());
  return total;
}

int GameTree::num_sequences() const {
  int total = 0;
  for (const auto& reg : infosets_) {
    total += 1;  // the empty sequence
    for (const Infoset& is : reg) total += static_cast<int>(is.actions.size());
  }
  return total;
}

int GameTree::num_terminals() const {
  int total = 0;
  for (const Node& n : nodes_)
    if (n.kind == NodeKind::kLeaf) ++total;
  return total;
}

std::vector<double> GameTree::expected_utility(
    const std::vector<std::vector<int>>& plans) const {
  std::vector<double> out(num_players_, 0.0);
  std::function<void(int, double)> walk = [&](int id, double reach) {
    const Node& n = nodes_[id];
    switch (n.kind) {
      case NodeKind::kLeaf:
        for (int i = 0; i < num_players_; ++i) out[i] += reach * n.utilities[i];
        return;
      case NodeKind::kChance:
        for (size_t k = 0; k < n.children.size(); ++k)
          if (n.probs[k] > 0) walk(n.children[k], reach * n.probs[k]);
        return;
      case NodeKind::kDecision: {
        int a = plans[n.player - 1][n.infoset];
        if (a < 0 || a >= static_cast<int>(n.children.size()))
          throw ValidationError("profile does not select an action at infoset '" +
                                infosets_[n.player - 1][n.infoset].label + "'");
        walk(n.children[a], reach);
        return;
      }
    }
  };
  walk(0, 1.0);
  return out;
}

std::string GameTree::serialize() const {
  std::ostringstream os;
  os << "players " << num_players_ << "\n";
  for (size_t id = 0; id < nodes_.size(); ++id) {
    const Node& n = nodes_[id];
    os << "node " << id;
    switch (n.kind) {
      case NodeKind::kChance:
        os << " chance";
        for (size_t k = 0; k < n.children.size(); ++k)
          os << " " << n.children[k] << ":" << format_double(n.probs[k]);
        break;
      case NodeKind::kDecision:
        os << " player " << n.player << " infoset "
           << infosets_[n.player - 1][n.infoset].label;
        for (size_t k = 0; k < n.children.size(); ++k)
          os << " " << n.children[k] << ":" << n.actions[k];
        break;
      case NodeKind::kLeaf:
        os << " leaf";
        for (double u : n.utilities) os << " " << format_double(u);
        break;
    }
    os << "\n";
  }
  return os.str();
}

uint64_t GameTree::hash() const {
  const std::string text = serialize();
  uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

// ---------------------------------------------------------------------------
// Parser

namespace {

struct Token {
  std::string text;
  int column;
};

std::vector<Token> tokenize(const std::string& line) {
  std::vector<Token> out;
  size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i])))
      ++i;
    if (i >= line.size() || line[i] == '#') break;
    size_t start = i;
    while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i])))
      ++i;
    out.push_back({line.substr(start, i - start), static_cast<int>(start) + 1});
  }
  return out;
}

double parse_number(const Token& tok, int line) {
  const std::string& s = tok.text;
  size_t slash = s.find('/');
  try {
    size_t used = 0;
    if (slash != std::string::npos) {
      double num = std::stod(s.substr(0, slash), &used);
      if (used != slash) throw std::invalid_argument(s);
      double den = std::stod(s.substr(slash + 1), &used);
      if (used != s.size() - slash - 1 || den == 0)
        throw std::invalid_argument(s);
      return num / den;
    }
    double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ParseError(line, tok.column, "expected a number, got '" + s + "'");
  }
}

int parse_int(const Token& tok, int line) {
  try {
    size_t used = 0;
    int v = std::stoi(tok.text, &used);
    if (used != tok.text.size()) throw std::invalid_argument(tok.text);
    return v;
  } catch (const std::exception&) {
    throw ParseError(line, tok.column,
                     "expected an integer, got '" + tok.text + "'");
  }
}

}  // namespace

GameTree parse_game(const std::string& text) {
  std::istringstream is(text);
  std::string line;
  int lineno = 0;
  int num_players = -1;

  struct RawNode {
    int line = 0;
    GameTree::Node node;
    std::string infoset_label;
  };
  std::map<int, RawNode> raw;

  while (std::getline(is, line)) {
    ++lineno;
    auto toks = tokenize(line);
    if (toks.empty()) continue;
    if (toks[0].text == "players") {
      if (toks.size() != 2)
        throw ParseError(lineno, toks[0].column, "players <n>");
      num_players = parse_int(toks[1], lineno);
      if (num_players < 1)
        throw ParseError(lineno, toks[1].column, "need at least one player");
      continue;
    }
    if (toks[0].text != "node")
      throw ParseError(lineno, toks[0].column,
                       "expected 'players' or 'node', got '" + toks[0].text +
                           "'");
    if (num_players < 0)
      throw ParseError(lineno, toks[0].column,
                       "the 'players' header must come first");
    if (toks.size() < 3)
      throw ParseError(lineno, toks[0].column, "truncated node line");
    int id = parse_int(toks[1], lineno);
    if (raw.count(id))
      throw ParseError(lineno, toks[1].column,
                       "duplicate node id " + std::to_string(id));
    RawNode rn;
    rn.line = lineno;
    const std::string& kind = toks[2].text;
    if (kind == "chance") {
      rn.node.kind = GameTree::NodeKind::kChance;
      for (size_t k = 3; k < toks.size(); ++k) {
        size_t colon = toks[k].text.rfind(':');
        if (colon == std::string::npos)
          throw ParseError(lineno, toks[k].column,
                           "expected child:prob, got '" + toks[k].text + "'");
        Token childtok{toks[k].text.substr(0, colon), toks[k].column};
        Token probtok{toks[k].text.substr(colon + 1),
                      toks[k].column + static_cast<int>(colon) + 1};
        rn.node.children.push_back(parse_int(childtok, lineno));
        rn.node.probs.push_back(parse_number(probtok, lineno));
      }
      if (rn.node.children.empty())
        throw ParseError(lineno, toks[2].column, "chance node with no outcomes");
    } else if (kind == "player") {
      if (toks.size() < 7 || toks[4].text != "infoset")
        throw ParseError(lineno, toks[2].column,
                         "node <id> player <p> infoset <label> <child:action ...>");
      rn.node.kind = GameTree::NodeKind::kDecision;
      rn.node.player = parse_int(toks[3], lineno);
      if (rn.node.player < 1 || rn.node.player > num_players)
        throw ParseError(lineno, toks[3].column, "player id out of range");
      rn.infoset_label = toks[5].text;
      for (size_t k = 6; k < toks.size(); ++k) {
        size_t colon = toks[k].text.find(':');
        if (colon == std::string::npos)
          throw ParseError(lineno, toks[k].column,
                           "expected child:action, got '" + toks[k].text + "'");
        Token childtok{toks[k].text.substr(0, colon), toks[k].column};
        rn.node.children.push_back(parse_int(childtok, lineno));
        rn.node.actions.push_back(toks[k].text.substr(colon + 1));
      }
    } else if (kind == "leaf") {
      rn.node.kind = GameTree::NodeKind::kLeaf;
      for (size_t k = 3; k < toks.size(); ++k)
        rn.node.utilities.push_back(parse_number(toks[k], lineno));
      if (static_cast<int>(rn.node.utilities.size()) != num_players)
        throw ParseError(lineno, toks[2].column,
                         "leaf must list one utility per player");
    } else {
      throw ParseError(lineno, toks[2].column,
                       "unknown node kind '" + kind + "'");
    }
    raw.emplace(id, std::move(rn));
  }
  if (num_players < 0) throw ParseError(1, 1, "missing 'players' header");
  if (raw.empty()) throw ParseError(lineno, 1, "no nodes");
  if (!raw.count(0)) throw ParseError(lineno, 1, "missing root node 0");

  // Remap arbitrary ids onto dense indices, root first.
  std::map<int, int> dense;
  dense[0] = 0;
  for (const auto& [id, rn] : raw)
    if (id != 0) dense.emplace(id, static_cast<int>(dense.size()));

  GameTree game;
  game.num_players_ = num_players;
  game.infosets_.resize(num_players);
  game.nodes_.resize(raw.size());
  for (const auto& [id, rn] : raw) {
    GameTree::Node n = rn.node;
    for (int& c : n.children) {
      auto it = dense.find(c);
      if (it == dense.end())
        throw ParseError(rn.line, 1,
                         "node " + std::to_string(id) +
                             " references missing child " + std::to_string(c));
      c = it->second;
    }
    if (n.kind == GameTree::NodeKind::kDecision) {
      auto& registry = game.infosets_[n.player - 1];
      int infoset = -1;
      for (size_t i = 0; i < registry.size(); ++i)
        if (registry[i].label == rn.infoset_label) {
          infoset = static_cast<int>(i);
          break;
        }
      if (infoset < 0) {
        registry.push_back({rn.infoset_label, n.actions, {}});
        infoset = static_cast<int>(registry.size()) - 1;
      } else if (registry[infoset].actions != n.actions) {
        throw ValidationError("infoset '" + rn.infoset_label + "' of player " +
                              std::to_string(n.player) +
                              " appears with mismatched action lists");
      }
      n.infoset = infoset;
      registry[infoset].nodes.push_back(dense[id]);
    }
    game.nodes_[dense[id]] = std::move(n);
  }
  game.validate();
  game.index_infosets();
  return game;
}

// ---------------------------------------------------------------------------
// Generators

GameTree build_figure_game() {
  GameBuilder b(2);
  int A = b.add_decision(1, "A", {"1", "2"});
  int X = b.add_decision(2, "X", {"l", "r"});
  int Y = b.add_decision(2, "Y", {"l", "r"});
  int B = b.add_decision(1, "B", {"3", "4"});
  int C = b.add_decision(1, "C", {"5", "6"});
  int D1 = b.add_decision(1, "D", {"7", "8", "9"});
  int D2 = b.add_decision(1, "D", {"7", "8", "9"});
  b.link(A, 0, X);
  b.link(A, 1, Y);
  b.link(X, 0, B);
  b.link(X, 1, C);
  b.link(Y, 0, D1);
  b.link(Y, 1, D2);
  // Payoffs are fixed to zero: only Player 1's decision structure matters.
  auto leaf = [&] { return b.add_leaf({0, 0}); };
  for (int node : {B, C})
    for (int slot : {0, 1}) b.link(node, slot, leaf());
  for (int node : {D1, D2})
    for (int slot : {0, 1, 2}) b.link(node, slot, leaf());
  return b.build();
}

GameTree build_signaling_game() {
  GameBuilder b(2);
  int root = b.add_chance({0.5, 0.5});
  int G = b.add_decision(1, "G", {"X", "Y"});
  int B = b.add_decision(1, "B", {"X", "Y"});
  b.link(root, 0, G);
  b.link(root, 1, B);
  int XG = b.add_decision(2, "x", {"l", "r"});
  int YG = b.add_decision(2, "y", {"l", "r"});
  int XB = b.add_decision(2, "x", {"l", "r"});
  int YB = b.add_decision(2, "y", {"l", "r"});
  b.link(G, 0, XG);
  b.link(G, 1, YG);
  b.link(B, 0, XB);
  b.link(B, 1, YB);
  auto leaf = [&](double u1, double u2) { return b.add_leaf({u1, u2}); };
  b.link(XG, 0, leaf(4, 10));
  b.link(XG, 1, leaf(0, 6));
  b.link(YG, 0, leaf(4, 10));
  b.link(YG, 1, leaf(0, 6));
  b.link(XB, 0, leaf(6, 0));
  b.link(XB, 1, leaf(0, 6));
  b.link(YB, 0, leaf(6, 0));
  b.link(YB, 1, leaf(0, 6));
  return b.build();
}

GameTree build_counterexample_game() {
  GameBuilder b(2);
  int root = b.add_chance({0.25, 0.25, 0.25, 0.25});
  int a1 = b.add_decision(1, "a", {"1", "2"});
  int a2 = b.add_decision(1, "a", {"1", "2"});
  int b1 = b.add_decision(1, "b", {"1", "2"});
  int b2 = b.add_decision(1, "b", {"1", "2"});
  b.link(root, 0, a1);
  b.link(root, 1, a2);
  b.link(root, 2, b1);
  b.link(root, 3, b2);
  auto q = [&] { return b.add_decision(2, "q", {"l", "r"}); };
  auto w = [&] { return b.add_decision(2, "w", {"l", "r"}); };
  int Q1 = q(), W1 = w(), W2 = w(), Q2 = q(), Q3 = q(), W3 = w(), W4 = w(),
      Q4 = q();
  // The second node of each Player-1 infoset crosses its actions.
  b.link(a1, 0, Q1);
  b.link(a1, 1, W1);
  b.link(a2, 0, W2);
  b.link(a2, 1, Q2);
  b.link(b1, 0, Q3);
  b.link(b1, 1, W3);
  b.link(b2, 0, W4);
  b.link(b2, 1, Q4);
  auto leaf = [&](double u1, double u2) { return b.add_leaf({u1, u2}); };
  b.link(Q1, 0, leaf(0, 0));
  b.link(Q1, 1, leaf(-3, 0));
  b.link(Q2, 0, leaf(-2, 0));
  b.link(Q2, 1, leaf(0, 0));
  b.link(Q3, 0, leaf(0, 0));
  b.link(Q3, 1, leaf(-310, -315));
  b.link(Q4, 0, leaf(0, 0));
  b.link(Q4, 1, leaf(0, 0));
  b.link(W1, 0, leaf(0, 2));
  b.link(W1, 1, leaf(0, 0));
  b.link(W2, 0, leaf(0, 0));
  b.link(W2, 1, leaf(2, 4));
  b.link(W3, 0, leaf(0, 0));
  b.link(W3, 1, leaf(0, 0));
  b.link(W4, 0, leaf(202, 0));
  b.link(W4, 1, leaf(200, -3));
  return b.build();
}

namespace {

struct KuhnSpec {
  int ranks;
  int players;
};

// Betting proceeds in seat order: check (k) or bet (b); once somebody
// bets, the remaining players call (c) or fold (f) in cyclic order after
// the bettor. One bet, no raises.
struct BettingState {
  std::string history;
  int next = 0;           // seat to act
  int bettor = -1;
  int responders_done = 0;

  bool terminal(int players) const {
    if (bettor < 0) return next == players && !history.empty();
    return responders_done == players - 1;
  }
  int actor() const { return next; }
  bool betting_open() const { return bettor < 0; }
};

void build_kuhn_rec(GameBuilder& b, const KuhnSpec& spec,
                    const std::vector<int>& cards, const BettingState& st,
                    int parent, int slot) {
  const int n = spec.players;
  if (st.terminal(n)) {
    // Contributions: 1 ante each, +1 for the bettor and every caller.
    std::vector<double> contrib(n, 1.0);
    std::vector<bool> in(n, true);
    if (st.bettor >= 0) {
      contrib[st.bettor] = 2.0;
      size_t pos = st.history.find('b') + 1;
      for (int r = 1; r < n; ++r) {
        int seat = (st.bettor + r) % n;
        char c = st.history[pos + r - 1];
        if (c == 'c')
          contrib[seat] = 2.0;
        else
          in[seat] = false;
      }
    }
    double pot = 0;
    for (double c : contrib) pot += c;
    int winner = -1;
    for (int i = 0; i < n; ++i)
      if (in[i] && (winner < 0 || cards[i] > cards[winner])) winner = i;
    std::vector<double> util(n);
    for (int i = 0; i < n; ++i)
      util[i] = (i == winner ? pot : 0.0) - contrib[i];
    b.link(parent, slot, b.add_leaf(util));
    return;
  }
  int seat = st.actor();
  std::string label =
      std::to_string(cards[seat]) + "|" + (st.history.empty() ? "-" : st.history);
  std::vector<std::string> actions =
      st.betting_open() ? std::vector<std::string>{"k", "b"}
                        : std::vector<std::string>{"f", "c"};
  int node = b.add_decision(seat + 1, label, actions);
  b.link(parent, slot, node);
  for (size_t a = 0; a < actions.size(); ++a) {
    BettingState nxt = st;
    nxt.history += actions[a];
    if (st.betting_open()) {
      if (actions[a] == "b") {
        nxt.bettor = seat;
        nxt.next = (seat + 1) % n;
      } else {
        nxt.next = seat + 1;
      }
    } else {
      ++nxt.responders_done;
      nxt.next = (seat + 1) % n;
    }
    build_kuhn_rec(b, spec, cards, nxt, node, static_cast<int>(a));
  }
}

}  // namespace

GameTree build_kuhn_poker(int ranks, int players) {
  if (players != 2 && players != 3)
    throw ValidationError("kuhn poker supports 2 or 3 players");
  if (ranks < players)
    throw ValidationError("cannot deal " + std::to_string(players) +
                          " distinct cards from " + std::to_string(ranks) +
                          " ranks");
  KuhnSpec spec{ranks, players};
  // All ordered deals of distinct cards, uniform.
  std::vector<std::vector<int>> deals;
  std::vector<int> cards(players, 0);
  std::function<void(int)> deal = [&](int seat) {
    if (seat == players) {
      deals.push_back(cards);
      return;
    }
    for (int c = 1; c <= ranks; ++c) {
      bool used = false;
      for (int s = 0; s < seat; ++s) used = used || cards[s] == c;
      if (used) continue;
      cards[seat] = c;
      deal(seat + 1);
    }
  };
  deal(0);

  GameBuilder b(players);
  int root = b.add_chance(
      std::vector<double>(deals.size(), 1.0 / static_cast<double>(deals.size())));
  for (size_t d = 0; d < deals.size(); ++d) {
    BettingState st;
    build_kuhn_rec(b, spec, deals[d], st, root, static_cast<int>(d));
  }
  return b.build();
}

GameTree build_sat_reduction(const std::vector<Clause>& cnf, int num_vars) {
  if (cnf.empty()) throw ValidationError("need at least one clause");
  if (num_vars < 1) throw ValidationError("need at least one variable");
  for (const Clause& cl : cnf) {
    if (cl.empty()) throw ValidationError("empty clause");
    for (int lit : cl)
      if (lit == 0 || std::abs(lit) > num_vars)
        throw ValidationError("literal out of range: " + std::to_string(lit));
  }
  GameBuilder b(2);
  const int n = static_cast<int>(cnf.size());
  int root = b.add_chance(std::vector<double>(n, 1.0 / n));
  for (int i = 0; i < n; ++i) {
    std::vector<std::string> lits;
    for (int lit : cnf[i])
      lits.push_back(lit > 0 ? "x" + std::to_string(lit)
                             : "!x" + std::to_string(-lit));
    int picker =
        b.add_decision(2, "c" + std::to_string(i + 1), lits);
    b.link(root, i, picker);
    for (size_t k = 0; k < cnf[i].size(); ++k) {
      int lit = cnf[i][k];
      int assigner = b.add_decision(1, "v" + std::to_string(std::abs(lit)),
                                    {"T", "F"});
      b.link(picker, static_cast<int>(k), assigner);
      bool positive = lit > 0;
      b.link(assigner, 0, b.add_leaf({positive ? 1.0 : 0.0, positive ? 1.0 : 0.0}));
      b.link(assigner, 1, b.add_leaf({positive ? 0.0 : 1.0, positive ? 0.0 : 1.0}));
    }
  }
  return b.build();
}

std::vector<Clause> parse_cnf(const std::string& text, int* num_vars) {
  std::istringstream is(text);
  std::string line;
  std::vector<Clause> cnf;
  Clause current;
  int declared_vars = 0;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    auto toks = tokenize(line);
    if (toks.empty() || toks[0].text == "c") continue;
    if (toks[0].text == "p") {
      if (toks.size() < 4 || toks[1].text != "cnf")
        throw ParseError(lineno, toks[0].column, "expected 'p cnf <vars> <clauses>'");
      declared_vars = parse_int(toks[2], lineno);
      continue;
    }
    for (const Token& t : toks) {
      int lit = parse_int(t, lineno);
      if (lit == 0) {
        if (!current.empty()) {
          cnf.push_back(current);
          current.clear();
        }
      } else {
        current.push_back(lit);
        declared_vars = std::max(declared_vars, std::abs(lit));
      }
    }
  }
  if (!current.empty()) cnf.push_back(current);
  if (num_vars) *num_vars = declared_vars;
  return cnf;
}

// ---------------------------------------------------------------------------
// Normal form

namespace {

// Per-player reduced-plan structure discovered directly from the tree:
// which infosets are roots of the player's decision forest, and which
// become reachable under each (infoset, action).
struct DecisionForest {
  std::vector<int> order;                       // registry ids, DFS discovery
  std::vector<int> roots;                       // registry ids
  std::map<std::pair<int, int>, std::vector<int>> children;
  int num_actions(const GameTree& g, int player, int reg) const {
    return static_cast<int>(g.infosets(player)[reg].actions.size());
  }
};

DecisionForest discover_forest(const GameTree& g, int player) {
  DecisionForest f;
  std::vector<bool> seen(g.infosets(player).size(), false);
  // (registry, action) pair of the player's last own move, or (-1,-1).
  std::function<void(int, std::pair<int, int>)> walk =
      [&](int id, std::pair<int, int> last) {
        const GameTree::Node& n = g.node(id);
        if (n.kind == GameTree::NodeKind::kLeaf) return;
        if (n.kind == GameTree::NodeKind::kDecision && n.player == player) {
          if (!seen[n.infoset]) {
            seen[n.infoset] = true;
            f.order.push_back(n.infoset);
            if (last.first < 0)
              f.roots.push_back(n.infoset);
            else
              f.children[last].push_back(n.infoset);
          }
          for (size_t a = 0; a < n.children.size(); ++a)
            walk(n.children[a], {n.infoset, static_cast<int>(a)});
          return;
        }
        for (int c : n.children) walk(c, last);
      };
  walk(g.root(), {-1, -1});
  return f;
}

// Reduced plans in the canonical recursive order: the first discovered
// infoset varies slowest, actions in declared order, unreachable infosets
// left at -1.
void enumerate_plans_rec(const GameTree& g, int player, const DecisionForest& f,
                         const std::vector<int>& frontier, size_t pos,
                         std::vector<int>& current,
                         std::vector<std::vector<int>>& out, long cap) {
  if (pos == frontier.size()) {
    out.push_back(current);
    if (cap > 0 && static_cast<long>(out.size()) > cap)
      throw ValidationError("plan enumeration exceeds cap");
    return;
  }
  int reg = frontier[pos];
  int na = f.num_actions(g, player, reg);
  for (int a = 0; a < na; ++a) {
    current[reg] = a;
    auto it = f.children.find({reg, a});
    if (it == f.children.end()) {
      enumerate_plans_rec(g, player, f, frontier, pos + 1, current, out, cap);
    } else {
      // Splice the newly reachable infosets right after this one.
      std::vector<int> extended = frontier;
      extended.insert(extended.begin() + pos + 1, it->second.begin(),
                      it->second.end());
      enumerate_plans_rec(g, player, f, extended, pos + 1, current, out, cap);
    }
  }
  current[reg] = -1;
}

std::vector<std::vector<int>> enumerate_game_plans(const GameTree& g,
                                                   int player, long cap) {
  DecisionForest f = discover_forest(g, player);
  std::vector<std::vector<int>> out;
  std::vector<int> current(g.infosets(player).size(), -1);
  enumerate_plans_rec(g, player, f, f.roots, 0, current, out, cap);
  if (out.empty()) out.push_back(current);  // no decisions: one trivial plan
  return out;
}

}  // namespace

double NormalFormView::utility(const std::vector<int>& profile,
                               int player) const {
  long flat = 0;
  for (size_t i = 0; i < profile.size(); ++i)
    flat = flat * plan_counts[i] + profile[i];
  return utilities[flat * static_cast<long>(plan_counts.size()) + (player - 1)];
}

std::vector<std::string> NormalFormView::plan_names(const GameTree& game,
                                                    int player) const {
  std::vector<std::string> names;
  for (const auto& plan : plans[player - 1]) {
    std::string name;
    for (size_t reg = 0; reg < plan.size(); ++reg) {
      if (plan[reg] < 0) continue;
      const auto& is = game.infosets(player)[reg];
      if (!name.empty()) name += " ";
      name += is.actions[plan[reg]] + "_" + is.label;
    }
    if (name.empty()) name = "-";
    names.push_back(name);
  }
  return names;
}

NormalFormView normal_form_view(const GameTree& game, long max_profiles) {
  NormalFormView view;
  const int n = game.num_players();
  view.plans.resize(n);
  view.plan_counts.resize(n);
  long profiles = 1;
  for (int p = 1; p <= n; ++p) {
    view.plans[p - 1] = enumerate_game_plans(game, p, max_profiles);
    view.plan_counts[p - 1] = static_cast<long>(view.plans[p - 1].size());
    if (profiles > max_profiles / std::max<long>(view.plan_counts[p - 1], 1) &&
        profiles * view.plan_counts[p - 1] > max_profiles)
      throw ValidationError("profile count exceeds the size guard");
    profiles *= view.plan_counts[p - 1];
  }
  if (profiles > max_profiles)
    throw ValidationError("profile count exceeds the size guard");
  view.num_profiles = profiles;
  view.utilities.assign(profiles * n, 0.0);

  std::vector<int> profile(n, 0);
  std::vector<std::vector<int>> choice(n);
  for (long flat = 0; flat < profiles; ++flat) {
    long rest = flat;
    for (int i = n - 1; i >= 0; --i) {
      profile[i] = static_cast<int>(rest % view.plan_counts[i]);
      rest /= view.plan_counts[i];
    }
    for (int i = 0; i < n; ++i) choice[i] = view.plans[i][profile[i]];
    std::vector<double> u = game.expected_utility(choice);
    for (int i = 0; i < n; ++i) view.utilities[flat * n + i] = u[i];
  }
  return view;
}

}  // namespace linswap
