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

#include "linswap/equilibrium.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "linswap/convex_opt.hpp"
#include "linswap/tolerances.hpp"

namespace linswap {

namespace {

int effective_T(const PlayTrace& trace, int player, int upto) {
  const int stored = static_cast<int>(trace.players[player - 1].xs.size());
  if (upto <= 0 || upto > stored) return stored;
  return upto;
}

// Gradient of player i's expected utility in their own sequence-form
// coordinates, holding the co-players at the given strategies (reduced
// plans included): w[σ] = Σ_z chance(z) · Π_{k≠i} x_k[σ_k(z)] · u_i(z).
Eigen::VectorXd utility_gradient(const GameTree& game, int player,
                                 const std::vector<SequenceIndex>& indices,
                                 const std::vector<const Eigen::VectorXd*>& xs) {
  const int n = game.num_players();
  Eigen::VectorXd w = Eigen::VectorXd::Zero(indices[player - 1].num_seqs());
  std::vector<int> seq(n, 0);
  std::function<void(int, double)> walk = [&](int id, double chance) {
    const GameTree::Node& nd = game.node(id);
    switch (nd.kind) {
      case GameTree::NodeKind::kLeaf: {
        double reach = chance;
        for (int k = 1; k <= n; ++k)
          if (k != player) reach *= (*xs[k - 1])[seq[k - 1]];
        if (reach != 0) w[seq[player - 1]] += reach * nd.utilities[player - 1];
        return;
      }
      case GameTree::NodeKind::kChance:
        for (size_t a = 0; a < nd.children.size(); ++a)
          if (nd.probs[a] > 0) walk(nd.children[a], chance * nd.probs[a]);
        return;
      case GameTree::NodeKind::kDecision: {
        const SequenceIndex& idx = indices[nd.player - 1];
        const int j = idx.from_registry[nd.infoset];
        const int saved = seq[nd.player - 1];
        for (size_t a = 0; a < nd.children.size(); ++a) {
          seq[nd.player - 1] = idx.infosets[j].seqs[a];
          walk(nd.children[a], chance);
        }
        seq[nd.player - 1] = saved;
        return;
      }
    }
  };
  walk(game.root(), 1.0);
  return w;
}

std::vector<SequenceIndex> all_indices(const GameTree& game) {
  std::vector<SequenceIndex> out;
  for (int p = 1; p <= game.num_players(); ++p)
    out.push_back(derive_sequence_index(game, p));
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// Trace regrets

GapCertificate external_regret(const PlayTrace& trace, int player, int upto) {
  const int T = effective_T(trace, player, upto);
  const PlayerTrace& pt = trace.players[player - 1];
  const SequenceIndex& idx = trace.indices[player - 1];
  Eigen::VectorXd cum = Eigen::VectorXd::Zero(idx.num_seqs());
  double paid = 0;
  for (int t = 0; t < T; ++t) {
    cum += pt.losses[t];
    paid += pt.payoff[t];
  }
  GapCertificate cert;
  cert.player = player;
  cert.deviation = DeviationClass::kExternal;
  Eigen::VectorXd best;
  const double value = min_linear_over_polytope(idx, cum, &best);
  cert.gap = (paid - value) / T;
  cert.continuation = best;
  return cert;
}

GapCertificate trigger_regret(const PlayTrace& trace, int player, int upto) {
  const int T = effective_T(trace, player, upto);
  const PlayerTrace& pt = trace.players[player - 1];
  const SequenceIndex& idx = trace.indices[player - 1];
  const int nseq = idx.num_seqs();

  GapCertificate cert;
  cert.player = player;
  cert.deviation = DeviationClass::kTrigger;
  bool first = true;
  for (int trig = 0; trig < nseq; ++trig) {
    // Accumulated loss the trigger would erase, and the loss field the
    // continuation faces (weighted by how often the trigger fired).
    double erased = 0;
    Eigen::VectorXd field = Eigen::VectorXd::Zero(nseq);
    const std::vector<int>& below = idx.seqs_below(trig);
    for (int t = 0; t < T; ++t) {
      const Eigen::VectorXd& loss = pt.losses[t];
      const Eigen::VectorXd& x = pt.xs[t];
      for (int s : below) erased += loss[s] * x[s];
      const double fired = x[trig];
      if (fired == 0) continue;
      if (trig == 0) {
        field += fired * loss;
      } else {
        for (int s : idx.subtree_seqs(idx.seq_infoset[trig]))
          field[s] += fired * loss[s];
      }
    }
    Eigen::VectorXd continuation;
    double best;
    if (trig == 0)
      best = min_linear_over_polytope(idx, field, &continuation);
    else
      best = min_linear_over_subtree(idx, idx.seq_infoset[trig], field,
                                     &continuation);
    const double value = erased - best;
    if (first || value > cert.gap * T) {
      cert.gap = value / T;
      cert.trigger_seq = trig == 0 ? -1 : trig;
      cert.continuation = continuation;
      first = false;
    }
  }
  return cert;
}

GapCertificate linear_swap_regret(const PlayTrace& trace, int player,
                                  int upto) {
  const int T = effective_T(trace, player, upto);
  const PlayerTrace& pt = trace.players[player - 1];
  const SequenceIndex& idx = trace.indices[player - 1];
  Eigen::MatrixXd G = Eigen::MatrixXd::Zero(idx.num_seqs(), idx.num_seqs());
  double paid = 0;
  for (int t = 0; t < T; ++t) {
    G += pt.losses[t] * pt.xs[t].transpose();
    paid += pt.payoff[t];
  }
  LinMapSystem sys = compile_self_map_system(idx);
  double best = 0;
  Eigen::MatrixXd A = optimize_over_system(sys, G, /*maximize=*/false, &best);
  GapCertificate cert;
  cert.player = player;
  cert.deviation = DeviationClass::kLinearSwap;
  cert.gap = (paid - best) / T;
  cert.matrix = A;
  return cert;
}

double reevaluate_certificate(const PlayTrace& trace, int player,
                              const GapCertificate& cert) {
  const int T = effective_T(trace, player, 0);
  const PlayerTrace& pt = trace.players[player - 1];
  const SequenceIndex& idx = trace.indices[player - 1];
  Eigen::MatrixXd A;
  switch (cert.deviation) {
    case DeviationClass::kExternal: {
      double total = 0;
      for (int t = 0; t < T; ++t)
        total += pt.losses[t].dot(pt.xs[t] - cert.continuation);
      return total / T;
    }
    case DeviationClass::kTrigger:
      if (cert.trigger_seq < 0) {
        A = Eigen::MatrixXd::Zero(idx.num_seqs(), idx.num_seqs());
        A.col(0) = cert.continuation;
      } else {
        A = raw_trigger_matrix(idx, cert.trigger_seq, cert.continuation);
      }
      break;
    case DeviationClass::kLinearSwap:
      A = cert.matrix;
      break;
    case DeviationClass::kFullSwap:
      throw ValidationError("full-swap certificates apply to joint distributions");
  }
  double total = 0;
  for (int t = 0; t < T; ++t)
    total += pt.losses[t].dot(pt.xs[t] - A * pt.xs[t]);
  return total / T;
}

// ---------------------------------------------------------------------------
// Joint distributions

double JointDistribution::total() const {
  double s = 0;
  for (const auto& [profile, prob] : probs) s += prob;
  return s;
}

Eigen::VectorXd JointDistribution::marginal(int player) const {
  Eigen::VectorXd m =
      Eigen::VectorXd::Zero(plans[player - 1].empty()
                                ? 0
                                : plans[player - 1][0].size());
  for (const auto& [profile, prob] : probs)
    m += prob * plans[player - 1][profile[player - 1]];
  return m;
}

namespace {

JointDistribution joint_skeleton(const std::vector<SequenceIndex>& indices,
                                 long cap) {
  JointDistribution mu;
  long product = 1;
  for (const SequenceIndex& idx : indices) {
    mu.plans.push_back(enumerate_reduced_plans(idx, cap));
    mu.plan_counts.push_back(static_cast<long>(mu.plans.back().size()));
    if (product > cap / std::max<long>(mu.plan_counts.back(), 1))
      throw ValidationError("profile space exceeds the enumeration cap");
    product *= mu.plan_counts.back();
  }
  return mu;
}

int match_plan(const std::vector<ReducedPlan>& plans, const ReducedPlan& p) {
  for (size_t i = 0; i < plans.size(); ++i)
    if ((plans[i] - p).cwiseAbs().maxCoeff() < 0.5) return static_cast<int>(i);
  throw ValidationError("plan not found in the enumeration");
}

}  // namespace

JointDistribution empirical_joint(const PlayTrace& trace, long cap) {
  JointDistribution mu = joint_skeleton(trace.indices, cap);
  const int n = static_cast<int>(trace.indices.size());
  const int T = static_cast<int>(trace.players[0].xs.size());
  const double weight = 1.0 / T;
  for (int t = 0; t < T; ++t) {
    std::vector<PlanMixture> mixes(n);
    for (int p = 0; p < n; ++p)
      mixes[p] = plan_mixture(trace.indices[p], trace.players[p].xs[t], cap);
    // Cross product of the per-player supports.
    std::vector<int> profile(n, 0);
    std::function<void(int, double)> cross = [&](int p, double prob) {
      if (prob < 1e-15) return;
      if (p == n) {
        mu.probs[profile] += weight * prob;
        return;
      }
      for (size_t i = 0; i < mixes[p].plans.size(); ++i) {
        if (mixes[p].probs[i] < 1e-15) continue;
        profile[p] = match_plan(mu.plans[p], mixes[p].plans[i]);
        cross(p + 1, prob * mixes[p].probs[i]);
      }
    };
    cross(0, 1.0);
  }
  return mu;
}

JointDistribution empirical_joint_sampled(const PlayTrace& trace, long cap,
                                          uint64_t seed) {
  JointDistribution mu = joint_skeleton(trace.indices, cap);
  const int n = static_cast<int>(trace.indices.size());
  const int T = static_cast<int>(trace.players[0].xs.size());
  RandomStream rng(seed);
  for (int t = 0; t < T; ++t) {
    std::vector<int> profile(n);
    for (int p = 0; p < n; ++p) {
      const ReducedPlan plan =
          sample_plan(trace.indices[p], trace.players[p].xs[t], rng);
      profile[p] = match_plan(mu.plans[p], plan);
    }
    mu.probs[profile] += 1.0 / T;
  }
  return mu;
}

double joint_utility(const JointDistribution& mu, const GameTree& game,
                     int player) {
  const std::vector<SequenceIndex> indices = all_indices(game);
  double total = 0;
  for (const auto& [profile, prob] : mu.probs) {
    std::vector<const Eigen::VectorXd*> xs;
    for (int p = 0; p < game.num_players(); ++p)
      xs.push_back(&mu.plans[p][profile[p]]);
    const Eigen::VectorXd w = utility_gradient(game, player, indices, xs);
    total += prob * w.dot(*xs[player - 1]);
  }
  return total;
}

namespace {

// Shared precomputation for the joint-distribution gap audits: for every
// support profile, the utility gradient against the co-players and the
// realized utility.
struct JointAudit {
  std::vector<SequenceIndex> indices;
  std::vector<Eigen::VectorXd> grads;   // per support entry
  std::vector<const ReducedPlan*> own;  // player's plan per entry
  std::vector<double> probs;
  double base_utility = 0;  // E_mu[u_i]
};

JointAudit prepare_audit(const JointDistribution& mu, const GameTree& game,
                         int player) {
  JointAudit audit;
  audit.indices = all_indices(game);
  for (const auto& [profile, prob] : mu.probs) {
    std::vector<const Eigen::VectorXd*> xs;
    for (int p = 0; p < game.num_players(); ++p)
      xs.push_back(&mu.plans[p][profile[p]]);
    Eigen::VectorXd w = utility_gradient(game, player, audit.indices, xs);
    audit.base_utility += prob * w.dot(*xs[player - 1]);
    audit.grads.push_back(std::move(w));
    audit.own.push_back(&mu.plans[player - 1][profile[player - 1]]);
    audit.probs.push_back(prob);
  }
  return audit;
}

}  // namespace

GapCertificate lce_gap(const JointDistribution& mu, const GameTree& game,
                       int player) {
  JointAudit audit = prepare_audit(mu, game, player);
  const SequenceIndex& idx = audit.indices[player - 1];
  Eigen::MatrixXd G = Eigen::MatrixXd::Zero(idx.num_seqs(), idx.num_seqs());
  for (size_t e = 0; e < audit.probs.size(); ++e)
    G += audit.probs[e] * audit.grads[e] * audit.own[e]->transpose();
  LinMapSystem sys = compile_self_map_system(idx);
  double best = 0;
  Eigen::MatrixXd A = optimize_over_system(sys, G, /*maximize=*/true, &best);
  GapCertificate cert;
  cert.player = player;
  cert.deviation = DeviationClass::kLinearSwap;
  cert.gap = best - audit.base_utility;
  cert.matrix = A;
  return cert;
}

GapCertificate external_gap(const JointDistribution& mu, const GameTree& game,
                            int player) {
  JointAudit audit = prepare_audit(mu, game, player);
  const SequenceIndex& idx = audit.indices[player - 1];
  Eigen::VectorXd w = Eigen::VectorXd::Zero(idx.num_seqs());
  for (size_t e = 0; e < audit.probs.size(); ++e)
    w += audit.probs[e] * audit.grads[e];
  GapCertificate cert;
  cert.player = player;
  cert.deviation = DeviationClass::kExternal;
  Eigen::VectorXd best;
  const double value = -min_linear_over_polytope(idx, -w, &best);
  cert.gap = value - audit.base_utility;
  cert.continuation = best;
  return cert;
}

GapCertificate trigger_gap(const JointDistribution& mu, const GameTree& game,
                           int player) {
  JointAudit audit = prepare_audit(mu, game, player);
  const SequenceIndex& idx = audit.indices[player - 1];
  const int nseq = idx.num_seqs();
  GapCertificate cert;
  cert.player = player;
  cert.deviation = DeviationClass::kTrigger;
  bool first = true;
  for (int trig = 0; trig < nseq; ++trig) {
    double erased = 0;
    Eigen::VectorXd field = Eigen::VectorXd::Zero(nseq);
    const std::vector<int>& below = idx.seqs_below(trig);
    for (size_t e = 0; e < audit.probs.size(); ++e) {
      const Eigen::VectorXd& w = audit.grads[e];
      const ReducedPlan& pi = *audit.own[e];
      for (int s : below) erased += audit.probs[e] * w[s] * pi[s];
      if (pi[trig] < 0.5) continue;
      if (trig == 0)
        field += audit.probs[e] * w;
      else
        for (int s : idx.subtree_seqs(idx.seq_infoset[trig]))
          field[s] += audit.probs[e] * w[s];
    }
    Eigen::VectorXd continuation;
    double best;
    if (trig == 0)
      best = -min_linear_over_polytope(idx, -field, &continuation);
    else
      best = -min_linear_over_subtree(idx, idx.seq_infoset[trig], -field,
                                      &continuation);
    const double value = best - erased;
    if (first || value > cert.gap) {
      cert.gap = value;
      cert.trigger_seq = trig == 0 ? -1 : trig;
      cert.continuation = continuation;
      first = false;
    }
  }
  return cert;
}

GapCertificate full_swap_gap(const JointDistribution& mu, const GameTree& game,
                             int player) {
  JointAudit audit = prepare_audit(mu, game, player);
  const long count = mu.plan_counts[player - 1];
  if (count > 6)
    throw ValidationError("full-swap brute force is capped at 6 plans");
  // Utility of playing plan r against each support entry's co-players.
  const size_t entries = audit.probs.size();
  Eigen::MatrixXd U(count, entries);
  for (long r = 0; r < count; ++r)
    for (size_t e = 0; e < entries; ++e)
      U(r, e) = audit.grads[e].dot(mu.plans[player - 1][r]);
  std::vector<int> own_index(entries);
  for (size_t e = 0; e < entries; ++e)
    own_index[e] = match_plan(mu.plans[player - 1], *audit.own[e]);

  std::vector<int> table(count, 0), best_table(count, 0);
  double best_gain = -kInf;
  // Odometer over all plan→plan tables.
  while (true) {
    double gain = 0;
    for (size_t e = 0; e < entries; ++e)
      gain += audit.probs[e] * (U(table[own_index[e]], e) - U(own_index[e], e));
    if (gain > best_gain) {
      best_gain = gain;
      best_table = table;
    }
    long pos = 0;
    while (pos < count && ++table[pos] == count) table[pos++] = 0;
    if (pos == count) break;
  }
  GapCertificate cert;
  cert.player = player;
  cert.deviation = DeviationClass::kFullSwap;
  cert.gap = best_gain;
  cert.swap_table = best_table;
  return cert;
}

double swap_gain(const JointDistribution& mu, const GameTree& game, int player,
                 const std::vector<int>& swap_table) {
  if (static_cast<long>(swap_table.size()) != mu.plan_counts[player - 1])
    throw ValidationError("swap table must cover every enumerated plan");
  for (int target : swap_table)
    if (target < 0 || target >= mu.plan_counts[player - 1])
      throw ValidationError("swap table maps outside the plan list");
  JointAudit audit = prepare_audit(mu, game, player);
  // Per-profile utility differences accumulated over the support without
  // reweighting by the profile probabilities.
  double gain = 0;
  for (size_t e = 0; e < audit.probs.size(); ++e) {
    if (audit.probs[e] <= 0) continue;
    const int own = match_plan(mu.plans[player - 1], *audit.own[e]);
    gain += audit.grads[e].dot(mu.plans[player - 1][swap_table[own]]) -
            audit.grads[e].dot(*audit.own[e]);
  }
  return gain;
}

SwapLinearity is_linear_swap(const SequenceIndex& index,
                             const std::vector<ReducedPlan>& plans,
                             const std::vector<int>& swap_table) {
  if (swap_table.size() != plans.size())
    throw ValidationError("swap table must cover every enumerated plan");
  LinMapSystem sys = compile_self_map_system(index);
  const EqualityBoxSystem& cons = sys.constraints();
  LinearProgram lp(sys.num_vars());
  for (int v = 0; v < sys.num_vars(); ++v) lp.set_bounds(v, cons.lo[v], cons.hi[v]);
  {
    std::vector<std::vector<std::pair<int, double>>> rows(cons.rows());
    for (int col = 0; col < cons.E.outerSize(); ++col)
      for (Eigen::SparseMatrix<double>::InnerIterator it(cons.E, col); it; ++it)
        rows[it.row()].emplace_back(static_cast<int>(it.col()), it.value());
    for (int i = 0; i < cons.rows(); ++i)
      lp.add_row(rows[i], RowSense::kEq, cons.f[i]);
  }
  // A · plan = swapped plan, rowwise.
  for (size_t v = 0; v < plans.size(); ++v) {
    const ReducedPlan& src = plans[v];
    const ReducedPlan& dst = plans[swap_table[v]];
    for (int r = 0; r < index.num_seqs(); ++r) {
      std::vector<std::pair<int, double>> row;
      for (int s = 0; s < index.num_seqs(); ++s)
        if (src[s] > 0.5) row.emplace_back(sys.col_var(s, r), 1.0);
      lp.add_row(row, RowSense::kEq, dst[r]);
    }
  }
  LpResult res = solve_lp(lp);
  SwapLinearity out;
  if (res.status == LpStatus::kInfeasible) {
    out.linear = false;
    return out;
  }
  if (res.status != LpStatus::kOptimal)
    throw SolveError("swap linearity check did not converge");
  out.linear = true;
  out.matrix = sys.unpack_matrix(res.x);
  return out;
}

JointDistribution make_joint(const GameTree& game,
                             const std::vector<std::vector<int>>& profiles,
                             const std::vector<double>& probs, long cap) {
  JointDistribution mu = joint_skeleton(all_indices(game), cap);
  for (size_t i = 0; i < profiles.size(); ++i) mu.probs[profiles[i]] += probs[i];
  return mu;
}

MaxpaySolution maxpay_search(const GameTree& game,
                             const std::vector<double>& weights, long cap,
                             double gap_tol, int max_cuts) {
  const int n = game.num_players();
  if (static_cast<int>(weights.size()) != n)
    throw ValidationError("need one welfare weight per player");
  JointDistribution skeleton = joint_skeleton(all_indices(game), cap);

  // Flat profile enumeration.
  std::vector<std::vector<int>> profiles;
  std::vector<int> profile(n, 0);
  std::function<void(int)> enumerate = [&](int p) {
    if (p == n) {
      profiles.push_back(profile);
      return;
    }
    for (int i = 0; i < skeleton.plan_counts[p]; ++i) {
      profile[p] = i;
      enumerate(p + 1);
    }
  };
  enumerate(0);

  std::vector<double> welfare(profiles.size(), 0.0);
  {
    const std::vector<SequenceIndex> indices = all_indices(game);
    for (size_t f = 0; f < profiles.size(); ++f) {
      std::vector<const Eigen::VectorXd*> xs;
      for (int p = 0; p < n; ++p)
        xs.push_back(&skeleton.plans[p][profiles[f][p]]);
      for (int i = 1; i <= n; ++i) {
        const Eigen::VectorXd w = utility_gradient(game, i, indices, xs);
        welfare[f] += weights[i - 1] * w.dot(*xs[i - 1]);
      }
    }
  }

  LinearProgram lp(static_cast<int>(profiles.size()));
  Eigen::VectorXd c(profiles.size());
  for (size_t f = 0; f < profiles.size(); ++f) c[f] = welfare[f];
  lp.set_objective(c, /*maximize=*/true);
  for (size_t f = 0; f < profiles.size(); ++f)
    lp.set_bounds(static_cast<int>(f), 0.0, 1.0);
  {
    std::vector<std::pair<int, double>> mass;
    for (size_t f = 0; f < profiles.size(); ++f)
      mass.emplace_back(static_cast<int>(f), 1.0);
    lp.add_row(mass, RowSense::kEq, 1.0);
  }

  MaxpaySolution sol;
  for (int round = 0; round <= max_cuts; ++round) {
    LpResult res = solve_lp(lp);
    if (res.status != LpStatus::kOptimal)
      throw SolveError("welfare LP did not solve");
    JointDistribution mu = skeleton;
    mu.probs.clear();
    for (size_t f = 0; f < profiles.size(); ++f)
      if (res.x[f] > 1e-12) mu.probs[profiles[f]] += res.x[f];

    bool clean = true;
    for (int i = 1; i <= n && clean; ++i) {
      GapCertificate cert = lce_gap(mu, game, i);
      if (cert.gap <= gap_tol) continue;
      clean = false;
      // Cut: the witness deviation must not profit under any feasible mu.
      const std::vector<SequenceIndex> indices = all_indices(game);
      std::vector<std::pair<int, double>> row;
      for (size_t f = 0; f < profiles.size(); ++f) {
        std::vector<const Eigen::VectorXd*> xs;
        for (int p = 0; p < n; ++p)
          xs.push_back(&skeleton.plans[p][profiles[f][p]]);
        const Eigen::VectorXd w = utility_gradient(game, i, indices, xs);
        const double diff = w.dot(cert.matrix * (*xs[i - 1])) - w.dot(*xs[i - 1]);
        if (std::abs(diff) > 1e-14)
          row.emplace_back(static_cast<int>(f), diff);
      }
      lp.add_row(row, RowSense::kLe, 0.0);
    }
    if (clean) {
      sol.welfare = res.objective;
      sol.mu = mu;
      sol.cuts = round;
      return sol;
    }
  }
  throw SolveError("constraint generation exceeded the cut budget");
}

}  // namespace linswap
