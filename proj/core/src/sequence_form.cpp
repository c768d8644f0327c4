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

#include "linswap/sequence_form.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>

#include "linswap/tolerances.hpp"

namespace linswap {

uint64_t RandomStream::next() {
  state_ ^= state_ >> 12;
  state_ ^= state_ << 25;
  state_ ^= state_ >> 27;
  return state_ * 0x2545f4914f6cdd1dULL;
}

double RandomStream::uniform() {
  return static_cast<double>(next() >> 11) * 0x1.0p-53;
}

std::vector<int> SequenceIndex::terminal_seqs() const {
  std::vector<int> out;
  for (int s = 0; s < num_seqs(); ++s)
    if (is_terminal(s)) out.push_back(s);
  return out;
}

int SequenceIndex::find_infoset(const std::string& label) const {
  for (int j = 0; j < num_infosets(); ++j)
    if (infosets[j].label == label) return j;
  return -1;
}

int SequenceIndex::find_seq(const std::string& infoset_label,
                            const std::string& action) const {
  int j = find_infoset(infoset_label);
  if (j < 0) return -1;
  for (size_t a = 0; a < infosets[j].actions.size(); ++a)
    if (infosets[j].actions[a] == action) return infosets[j].seqs[a];
  return -1;
}

void SequenceIndex::finalize() {
  const int nj = num_infosets();
  subtree_seqs_.assign(nj, {});
  // Children are discovered after their parent infoset, so a reverse pass
  // sees every subtree before its root.
  for (int j = nj - 1; j >= 0; --j) {
    std::vector<int>& acc = subtree_seqs_[j];
    for (int s : infosets[j].seqs) {
      acc.push_back(s);
      for (int child : children[s])
        acc.insert(acc.end(), subtree_seqs_[child].begin(),
                   subtree_seqs_[child].end());
    }
    std::sort(acc.begin(), acc.end());
  }
  seqs_below_.assign(num_seqs(), {});
  for (int s = 0; s < num_seqs(); ++s) {
    std::vector<int>& acc = seqs_below_[s];
    acc.push_back(s);
    for (int child : children[s])
      acc.insert(acc.end(), subtree_seqs_[child].begin(),
                 subtree_seqs_[child].end());
    std::sort(acc.begin(), acc.end());
  }
}

SequenceIndex derive_sequence_index(const GameTree& game, int player) {
  SequenceIndex index;
  index.player = player;
  index.seq_infoset.push_back(-1);
  index.seq_action.push_back(-1);
  index.seq_names.push_back("()");
  index.children.push_back({});
  index.from_registry.assign(game.infosets(player).size(), -1);

  std::vector<int>& from_registry = index.from_registry;

  std::function<void(int, int)> walk = [&](int id, int current_seq) {
    const GameTree::Node& n = game.node(id);
    if (n.kind == GameTree::NodeKind::kLeaf) return;
    if (n.kind == GameTree::NodeKind::kDecision && n.player == player) {
      int j = from_registry[n.infoset];
      if (j < 0) {
        j = index.num_infosets();
        from_registry[n.infoset] = j;
        SequenceIndex::Infoset is;
        is.label = game.infosets(player)[n.infoset].label;
        is.parent_seq = current_seq;
        is.actions = n.actions;
        for (size_t a = 0; a < n.actions.size(); ++a) {
          int seq = index.num_seqs();
          is.seqs.push_back(seq);
          index.seq_infoset.push_back(j);
          index.seq_action.push_back(static_cast<int>(a));
          index.seq_names.push_back(is.label + n.actions[a]);
          index.children.push_back({});
        }
        index.infosets.push_back(is);
        index.children[current_seq].push_back(j);
      }
      // Recursion below grows index.infosets, so copy the action list.
      const std::vector<int> seqs = index.infosets[j].seqs;
      for (size_t a = 0; a < n.children.size(); ++a)
        walk(n.children[a], seqs[a]);
      return;
    }
    for (int c : n.children) walk(c, current_seq);
  };
  walk(game.root(), 0);
  index.finalize();
  return index;
}

StandardPolytope sequence_form_polytope(const SequenceIndex& index) {
  StandardPolytope poly;
  const int d = index.num_seqs();
  const int k = index.num_infosets() + 1;
  std::vector<Eigen::Triplet<double>> trips;
  poly.p = Eigen::VectorXd::Zero(k);
  trips.emplace_back(0, 0, 1.0);
  poly.p[0] = 1.0;
  for (int j = 0; j < index.num_infosets(); ++j) {
    const auto& is = index.infosets[j];
    for (int s : is.seqs) trips.emplace_back(1 + j, s, 1.0);
    trips.emplace_back(1 + j, is.parent_seq, -1.0);
  }
  poly.P.resize(k, d);
  poly.P.setFromTriplets(trips.begin(), trips.end());
  poly.gamma = 1.0;
  poly.var_names = index.seq_names;
  return poly;
}

StandardPolytope subtree_polytope(const SequenceIndex& index, int infoset) {
  if (infoset < 0 || infoset >= index.num_infosets())
    throw ValidationError("unknown infoset id " + std::to_string(infoset));
  const std::vector<int>& seqs = index.subtree_seqs(infoset);
  std::vector<int> local(index.num_seqs(), -1);
  for (size_t i = 0; i < seqs.size(); ++i) local[seqs[i]] = static_cast<int>(i);

  // Infosets in the subtree: the root plus everything below it.
  std::vector<int> js;
  for (int j = 0; j < index.num_infosets(); ++j) {
    bool inside = true;
    for (int s : index.infosets[j].seqs)
      inside = inside && local[s] >= 0;
    if (inside) js.push_back(j);
  }
  StandardPolytope poly;
  const int d = static_cast<int>(seqs.size());
  const int k = static_cast<int>(js.size());
  poly.p = Eigen::VectorXd::Zero(k);
  std::vector<Eigen::Triplet<double>> trips;
  for (size_t r = 0; r < js.size(); ++r) {
    const auto& is = index.infosets[js[r]];
    for (int s : is.seqs) trips.emplace_back(static_cast<int>(r), local[s], 1.0);
    if (js[r] == infoset) {
      poly.p[r] = 1.0;  // root infoset mass
    } else {
      trips.emplace_back(static_cast<int>(r), local[is.parent_seq], -1.0);
    }
  }
  poly.P.resize(k, d);
  poly.P.setFromTriplets(trips.begin(), trips.end());
  poly.gamma = 1.0;
  for (int s : seqs) poly.var_names.push_back(index.seq_names[s]);
  return poly;
}

double count_reduced_plans(const SequenceIndex& index) {
  std::vector<double> memo(index.num_infosets(), -1.0);
  std::function<double(int)> count = [&](int j) -> double {
    if (memo[j] >= 0) return memo[j];
    double total = 0;
    for (int s : index.infosets[j].seqs) {
      double prod = 1;
      for (int child : index.children[s]) prod *= count(child);
      total += prod;
    }
    return memo[j] = total;
  };
  double total = 1;
  for (int j : index.children[0]) total *= count(j);
  return total;
}

namespace {

void enumerate_rec(const SequenceIndex& index, std::vector<int> frontier,
                   size_t pos, Eigen::VectorXd& current,
                   std::vector<ReducedPlan>& out, long cap) {
  if (pos == frontier.size()) {
    if (cap > 0 && static_cast<long>(out.size()) >= cap)
      throw ValidationError("plan enumeration exceeds cap");
    out.push_back(current);
    return;
  }
  int j = frontier[pos];
  for (int s : index.infosets[j].seqs) {
    current[s] = 1.0;
    const std::vector<int>& kids = index.children[s];
    if (kids.empty()) {
      enumerate_rec(index, frontier, pos + 1, current, out, cap);
    } else {
      std::vector<int> extended = frontier;
      extended.insert(extended.begin() + pos + 1, kids.begin(), kids.end());
      enumerate_rec(index, extended, pos + 1, current, out, cap);
    }
    current[s] = 0.0;
  }
}

}  // namespace

std::vector<ReducedPlan> enumerate_reduced_plans(const SequenceIndex& index,
                                                 long cap) {
  double count = count_reduced_plans(index);
  if (cap > 0 && count > static_cast<double>(cap))
    throw ValidationError("plan enumeration exceeds cap (" +
                          std::to_string(count) + " plans)");
  std::vector<ReducedPlan> out;
  Eigen::VectorXd current = Eigen::VectorXd::Zero(index.num_seqs());
  current[0] = 1.0;
  enumerate_rec(index, index.children[0], 0, current, out, cap);
  return out;
}

ReducedPlan first_reduced_plan(const SequenceIndex& index) {
  Eigen::VectorXd plan = Eigen::VectorXd::Zero(index.num_seqs());
  plan[0] = 1.0;
  std::function<void(int)> visit = [&](int j) {
    const int s = index.infosets[j].seqs[0];
    plan[s] = 1.0;
    for (int child : index.children[s]) visit(child);
  };
  for (int j : index.children[0]) visit(j);
  return plan;
}

double sequence_form_residual(const SequenceIndex& index,
                              const Eigen::VectorXd& x) {
  double r = std::abs(x[0] - 1.0);
  for (int j = 0; j < index.num_infosets(); ++j) {
    double sum = 0;
    for (int s : index.infosets[j].seqs) sum += x[s];
    r = std::max(r, std::abs(sum - x[index.infosets[j].parent_seq]));
  }
  for (int s = 0; s < index.num_seqs(); ++s) r = std::max(r, -x[s]);
  return r;
}

ReducedPlan sample_plan(const SequenceIndex& index, const Eigen::VectorXd& x,
                        RandomStream& rng) {
  if (sequence_form_residual(index, x) > tols().feasibility)
    throw ValidationError("strategy is not feasible within tolerance");
  Eigen::VectorXd plan = Eigen::VectorXd::Zero(index.num_seqs());
  plan[0] = 1.0;
  std::function<void(int)> visit = [&](int j) {
    const auto& is = index.infosets[j];
    double denom = x[is.parent_seq];
    int chosen = 0;
    if (denom > 1e-12) {
      double u = rng.uniform() * denom;
      double cum = 0;
      chosen = static_cast<int>(is.seqs.size()) - 1;
      for (size_t a = 0; a < is.seqs.size(); ++a) {
        cum += std::max(x[is.seqs[a]], 0.0);
        if (u < cum) {
          chosen = static_cast<int>(a);
          break;
        }
      }
    }
    int seq = is.seqs[chosen];
    plan[seq] = 1.0;
    for (int child : index.children[seq]) visit(child);
  };
  for (int j : index.children[0]) visit(j);
  return plan;
}

PlanMixture plan_mixture(const SequenceIndex& index, const Eigen::VectorXd& x,
                         long cap) {
  if (sequence_form_residual(index, x) > tols().feasibility)
    throw ValidationError("strategy is not feasible within tolerance");
  PlanMixture mix;
  mix.plans = enumerate_reduced_plans(index, cap);
  mix.probs.reserve(mix.plans.size());
  for (const ReducedPlan& plan : mix.plans) {
    double q = 1.0;
    for (int j = 0; j < index.num_infosets(); ++j) {
      const auto& is = index.infosets[j];
      if (plan[is.parent_seq] < 0.5) continue;  // infoset unreached by plan
      int chosen = -1;
      for (size_t a = 0; a < is.seqs.size(); ++a)
        if (plan[is.seqs[a]] > 0.5) chosen = static_cast<int>(a);
      double denom = x[is.parent_seq];
      if (denom > 1e-12)
        q *= std::max(x[is.seqs[chosen]], 0.0) / denom;
      else
        q *= (chosen == 0) ? 1.0 : 0.0;  // zero reach: first action
      if (q == 0) break;
    }
    mix.probs.push_back(q);
  }
  return mix;
}

Eigen::VectorXd PlanMixture::mean() const {
  Eigen::VectorXd m = Eigen::VectorXd::Zero(plans.empty() ? 0 : plans[0].size());
  for (size_t i = 0; i < plans.size(); ++i) m += probs[i] * plans[i];
  return m;
}

Eigen::VectorXd uniform_sequence_strategy(const SequenceIndex& index) {
  Eigen::VectorXd x = Eigen::VectorXd::Zero(index.num_seqs());
  x[0] = 1.0;
  for (int j = 0; j < index.num_infosets(); ++j) {
    const auto& is = index.infosets[j];
    double share = x[is.parent_seq] / static_cast<double>(is.seqs.size());
    for (int s : is.seqs) x[s] = share;
  }
  return x;
}

Eigen::VectorXd random_sequence_strategy(const SequenceIndex& index,
                                         RandomStream& rng) {
  Eigen::VectorXd x = Eigen::VectorXd::Zero(index.num_seqs());
  x[0] = 1.0;
  for (int j = 0; j < index.num_infosets(); ++j) {
    const auto& is = index.infosets[j];
    std::vector<double> w(is.seqs.size());
    double total = 0;
    for (double& v : w) {
      v = 0.05 + rng.uniform();
      total += v;
    }
    for (size_t a = 0; a < is.seqs.size(); ++a)
      x[is.seqs[a]] = x[is.parent_seq] * (w[a] / total);
  }
  return x;
}

double min_linear_over_subtree(const SequenceIndex& index, int infoset,
                               const Eigen::VectorXd& cost,
                               Eigen::VectorXd* argmin) {
  std::vector<double> value(index.num_infosets(), 0.0);
  std::vector<int> best(index.num_infosets(), 0);
  std::function<void(int)> solve = [&](int j) {
    double vbest = 0;
    int abest = 0;
    const auto& is = index.infosets[j];
    for (size_t a = 0; a < is.seqs.size(); ++a) {
      int s = is.seqs[a];
      double v = cost[s];
      for (int child : index.children[s]) {
        solve(child);
        v += value[child];
      }
      if (a == 0 || v < vbest) {
        vbest = v;
        abest = static_cast<int>(a);
      }
    }
    value[j] = vbest;
    best[j] = abest;
  };
  // Children may be shared ancestors? No: the infoset forest is a tree, so
  // a single pass suffices.
  solve(infoset);
  if (argmin) {
    *argmin = Eigen::VectorXd::Zero(index.num_seqs());
    std::function<void(int)> fill = [&](int j) {
      int s = index.infosets[j].seqs[best[j]];
      (*argmin)[s] = 1.0;
      for (int child : index.children[s]) fill(child);
    };
    fill(infoset);
  }
  return value[infoset];
}

double min_linear_over_polytope(const SequenceIndex& index,
                                const Eigen::VectorXd& cost,
                                Eigen::VectorXd* argmin) {
  double total = cost[0];
  if (argmin) {
    *argmin = Eigen::VectorXd::Zero(index.num_seqs());
    (*argmin)[0] = 1.0;
  }
  for (int j : index.children[0]) {
    Eigen::VectorXd piece;
    total += min_linear_over_subtree(index, j, cost, argmin ? &piece : nullptr);
    if (argmin) *argmin += piece;
  }
  return total;
}

std::string describe_index(const SequenceIndex& index) {
  std::ostringstream os;
  os << "player " << index.player << ": " << index.num_infosets()
     << " infosets, " << index.num_seqs() << " sequences ("
     << count_reduced_plans(index) << " reduced plans)\n";
  for (int j = 0; j < index.num_infosets(); ++j) {
    const auto& is = index.infosets[j];
    os << "  infoset " << is.label << " (parent "
       << index.seq_names[is.parent_seq] << "):";
    for (size_t a = 0; a < is.seqs.size(); ++a)
      os << " " << index.seq_names[is.seqs[a]]
         << (index.is_terminal(is.seqs[a]) ? "*" : "");
    os << "\n";
  }
  return os.str();
}

}  // namespace linswap
