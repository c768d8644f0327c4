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

#include "linswap/learners.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "linswap/tolerances.hpp"

namespace linswap {

double LearnerConfig::eta_at(int t) const {
  if (schedule == EtaSchedule::kConstant) return eta;
  return 1.0 / std::sqrt(static_cast<double>(t));
}

double LearnerConfig::accuracy_at(int t) const {
  const double e = std::pow(static_cast<double>(t), -2.5);
  return std::max(e, accuracy_floor);
}

namespace {

void check_loss(const Eigen::VectorXd& loss) {
  for (int i = 0; i < loss.size(); ++i)
    if (loss[i] < -tols().prob_sum || loss[i] > 1.0 + tols().prob_sum)
      throw ValidationError("loss vector leaves [0,1]");
}

Eigen::VectorXd vec_columns(const Eigen::MatrixXd& A) {
  return Eigen::Map<const Eigen::VectorXd>(A.data(), A.size());
}

Eigen::MatrixXd unvec_columns(const Eigen::VectorXd& y, int rows, int cols) {
  return Eigen::Map<const Eigen::MatrixXd>(y.data(), rows, cols);
}

// Gradient descent over the self-map polytope with per-step approximate
// Euclidean projections and LP fixed points.
class LinearSwapLearner : public Learner {
 public:
  LinearSwapLearner(const SequenceIndex& index, const LearnerConfig& config)
      : index_(index), config_(config), system_(compile_self_map_system(index)) {
    // Constant map onto the first plan; trivially a member.
    const ReducedPlan pi = first_reduced_plan(index_);
    Eigen::MatrixXd B = Eigen::MatrixXd::Zero(index_.num_seqs(), index_.num_seqs());
    B.col(0) = pi;
    A_ = canonicalize(B, system_, /*vertex_cap=*/0).A;
    x_ = pi;
    refresh_residuals();
  }

  const Eigen::VectorXd& strategy() const override { return x_; }
  Eigen::MatrixXd matrix() const override { return A_; }
  double membership_residual() const override { return membership_residual_; }
  double fixed_point_residual() const override { return fixed_point_residual_; }

  void observe_loss(const Eigen::VectorXd& loss) override {
    check_loss(loss);
    const double eta = config_.eta_at(t_);
    const double eps = config_.accuracy_at(t_);
    Eigen::MatrixXd target = A_ - eta * loss * x_.transpose();
    const Eigen::VectorXd q = vec_columns(target);
    const Eigen::VectorXd ref = vec_columns(A_);
    ProjectionResult pr = euclidean_project(
        system_.matrix_space_constraints(), q, eps,
        multipliers_.size() ? &multipliers_ : nullptr, &ref);
    multipliers_ = pr.multipliers;
    A_ = unvec_columns(pr.y, index_.num_seqs(), index_.num_seqs());
    x_ = fixed_point(A_, index_);
    ++t_;
    refresh_residuals();
  }

 private:
  void refresh_residuals() {
    membership_residual_ = check_membership(A_, system_, tols().audit).max_residual;
    fixed_point_residual_ = (A_ * x_ - x_).cwiseAbs().maxCoeff();
  }

  SequenceIndex index_;
  LearnerConfig config_;
  LinMapSystem system_;
  Eigen::MatrixXd A_;
  Eigen::VectorXd x_;
  Eigen::VectorXd multipliers_;
  double membership_residual_ = 0;
  double fixed_point_residual_ = 0;
};

// Gradient descent directly over the strategy polytope (constant
// deviations only).
class ExternalLearner : public Learner {
 public:
  ExternalLearner(const SequenceIndex& index, const LearnerConfig& config)
      : index_(index), config_(config) {
    const StandardPolytope poly = sequence_form_polytope(index_);
    sys_.E = poly.P;
    sys_.f = poly.p;
    sys_.lo = Eigen::VectorXd::Zero(poly.dim());
    sys_.hi = Eigen::VectorXd::Ones(poly.dim());
    x_ = first_reduced_plan(index_);
  }

  const Eigen::VectorXd& strategy() const override { return x_; }
  Eigen::MatrixXd matrix() const override {
    return Eigen::MatrixXd::Identity(index_.num_seqs(), index_.num_seqs());
  }
  double membership_residual() const override { return 0.0; }
  double fixed_point_residual() const override { return 0.0; }

  void observe_loss(const Eigen::VectorXd& loss) override {
    check_loss(loss);
    const Eigen::VectorXd q = x_ - config_.eta_at(t_) * loss;
    ProjectionResult pr =
        euclidean_project(sys_, q, config_.accuracy_at(t_),
                          multipliers_.size() ? &multipliers_ : nullptr, &x_);
    multipliers_ = pr.multipliers;
    x_ = pr.y;
    ++t_;
  }

 private:
  SequenceIndex index_;
  LearnerConfig config_;
  EqualityBoxSystem sys_;
  Eigen::VectorXd x_;
  Eigen::VectorXd multipliers_;
};

// Gradient descent over the convex hull of trigger rewrites: one atom per
// non-empty trigger sequence plus the root rewrite (constant deviations)
// and the identity. Each atom carries a subtree strategy scaled by its
// hull weight, which keeps the whole parameter set a polytope.
class TriggerLearner : public Learner {
 public:
  TriggerLearner(const SequenceIndex& index, const LearnerConfig& config)
      : index_(index), config_(config) {
    build_parameter_polytope();
    params_ = Eigen::VectorXd::Zero(num_params_);
    params_[0] = 1.0;  // identity atom
    x_ = first_reduced_plan(index_);
    A_ = Eigen::MatrixXd::Identity(index_.num_seqs(), index_.num_seqs());
    audit_system_ = std::make_unique<LinMapSystem>(compile_self_map_system(index_));
    refresh_residuals();
  }

  const Eigen::VectorXd& strategy() const override { return x_; }
  Eigen::MatrixXd matrix() const override { return A_; }
  double membership_residual() const override { return membership_residual_; }
  double fixed_point_residual() const override { return fixed_point_residual_; }

  void observe_loss(const Eigen::VectorXd& loss) override {
    check_loss(loss);
    const Eigen::VectorXd grad = pullback(loss);
    const Eigen::VectorXd q = params_ - config_.eta_at(t_) * grad;
    ProjectionResult pr =
        euclidean_project(sys_, q, config_.accuracy_at(t_),
                          multipliers_.size() ? &multipliers_ : nullptr,
                          &params_);
    multipliers_ = pr.multipliers;
    params_ = pr.y;
    A_ = materialize(params_);
    x_ = fixed_point(A_, index_);
    ++t_;
    refresh_residuals();
  }

 private:
  struct Atom {
    int trigger_seq = 0;   // 0 encodes the root rewrite
    int infoset = -1;      // subtree root (-1 for the root rewrite)
    int lambda_var = 0;
    int y_base = 0;        // block of subtree-strategy variables
    std::vector<int> seqs; // global sequence ids of the block
  };

  void build_parameter_polytope() {
    const int nseq = index_.num_seqs();
    num_params_ = 1;  // identity weight
    atoms_.clear();
    for (int s = 0; s < nseq; ++s) {
      Atom atom;
      atom.trigger_seq = s;
      atom.infoset = s == 0 ? -1 : index_.seq_infoset[s];
      atom.lambda_var = num_params_;
      atom.y_base = num_params_ + 1;
      if (s == 0) {
        atom.seqs.resize(nseq);
        for (int i = 0; i < nseq; ++i) atom.seqs[i] = i;
      } else {
        atom.seqs = index_.subtree_seqs(atom.infoset);
      }
      num_params_ = atom.y_base + static_cast<int>(atom.seqs.size());
      atoms_.push_back(std::move(atom));
    }

    std::vector<Eigen::Triplet<double>> trips;
    std::vector<double> rhs;
    int row = 0;
    // Hull weights sum to one.
    trips.emplace_back(row, 0, 1.0);
    for (const Atom& atom : atoms_) trips.emplace_back(row, atom.lambda_var, 1.0);
    rhs.push_back(1.0);
    ++row;
    // Scaled subtree flow per atom.
    for (const Atom& atom : atoms_) {
      std::vector<int> local(nseq, -1);
      for (size_t i = 0; i < atom.seqs.size(); ++i)
        local[atom.seqs[i]] = static_cast<int>(i);
      // Root mass of the block equals the atom weight.
      if (atom.trigger_seq == 0) {
        trips.emplace_back(row, atom.y_base + local[0], 1.0);
      } else {
        for (int s : index_.infosets[atom.infoset].seqs)
          trips.emplace_back(row, atom.y_base + local[s], 1.0);
      }
      trips.emplace_back(row, atom.lambda_var, -1.0);
      rhs.push_back(0.0);
      ++row;
      for (int j = 0; j < index_.num_infosets(); ++j) {
        const auto& is = index_.infosets[j];
        if (local[is.seqs[0]] < 0) continue;
        if (atom.trigger_seq != 0 && j == atom.infoset) continue;
        if (local[is.parent_seq] < 0) continue;
        for (int s : is.seqs) trips.emplace_back(row, atom.y_base + local[s], 1.0);
        trips.emplace_back(row, atom.y_base + local[is.parent_seq], -1.0);
        rhs.push_back(0.0);
        ++row;
      }
    }
    sys_.E.resize(row, num_params_);
    sys_.E.setFromTriplets(trips.begin(), trips.end());
    sys_.f = Eigen::Map<Eigen::VectorXd>(rhs.data(), rhs.size());
    sys_.lo = Eigen::VectorXd::Zero(num_params_);
    sys_.hi = Eigen::VectorXd::Ones(num_params_);
  }

  // ⟨ℓ x^T, A(p)⟩ as a linear function of the parameters.
  Eigen::VectorXd pullback(const Eigen::VectorXd& loss) const {
    Eigen::VectorXd g = Eigen::VectorXd::Zero(num_params_);
    const double full = loss.dot(x_);
    g[0] = full;
    for (const Atom& atom : atoms_) {
      if (atom.trigger_seq == 0) {
        g[atom.lambda_var] = 0.0;  // I − I
      } else {
        double below = 0;
        for (int s : index_.seqs_below(atom.trigger_seq))
          below += loss[s] * x_[s];
        g[atom.lambda_var] = full - below;
      }
      const double trigger_mass = x_[atom.trigger_seq];
      for (size_t i = 0; i < atom.seqs.size(); ++i)
        g[atom.y_base + static_cast<int>(i)] =
            loss[atom.seqs[i]] * trigger_mass;
    }
    return g;
  }

  Eigen::MatrixXd materialize(const Eigen::VectorXd& p) const {
    const int nseq = index_.num_seqs();
    Eigen::VectorXd diag = Eigen::VectorXd::Constant(nseq, p[0]);
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(nseq, nseq);
    for (const Atom& atom : atoms_) {
      const double lambda = p[atom.lambda_var];
      if (atom.trigger_seq == 0) {
        // I − S is zero for the root rewrite.
      } else {
        diag.array() += lambda;
        for (int s : index_.seqs_below(atom.trigger_seq)) diag[s] -= lambda;
      }
      for (size_t i = 0; i < atom.seqs.size(); ++i)
        A(atom.seqs[i], atom.trigger_seq) += p[atom.y_base + static_cast<int>(i)];
    }
    for (int s = 0; s < nseq; ++s) A(s, s) += diag[s];
    return A;
  }

  void refresh_residuals() {
    const DeviationMatrix canon = canonicalize(A_, *audit_system_, /*vertex_cap=*/0);
    membership_residual_ =
        check_membership(canon.A, *audit_system_, tols().audit).max_residual;
    fixed_point_residual_ = (A_ * x_ - x_).cwiseAbs().maxCoeff();
  }

  SequenceIndex index_;
  LearnerConfig config_;
  EqualityBoxSystem sys_;
  std::vector<Atom> atoms_;
  int num_params_ = 0;
  Eigen::VectorXd params_;
  Eigen::VectorXd x_;
  Eigen::MatrixXd A_;
  Eigen::VectorXd multipliers_;
  std::unique_ptr<LinMapSystem> audit_system_;
  double membership_residual_ = 0;
  double fixed_point_residual_ = 0;
};

}  // namespace

std::unique_ptr<Learner> make_learner(const SequenceIndex& index,
                                      const LearnerConfig& config) {
  switch (config.kind) {
    case LearnerKind::kLinearSwap:
      return std::make_unique<LinearSwapLearner>(index, config);
    case LearnerKind::kTrigger:
      return std::make_unique<TriggerLearner>(index, config);
    case LearnerKind::kExternal:
      return std::make_unique<ExternalLearner>(index, config);
  }
  throw ValidationError("unknown learner kind");
}

Eigen::VectorXd build_loss_vector(const GameTree& game, int player,
                                  const std::vector<Eigen::VectorXd>& strategies,
                                  const std::vector<SequenceIndex>& indices) {
  const int n = game.num_players();
  const SequenceIndex& own = indices[player - 1];
  Eigen::VectorXd loss = Eigen::VectorXd::Zero(own.num_seqs());
  const double span = game.max_utility() - game.min_utility();
  if (span <= 0) return loss;

  std::vector<int> seq(n, 0);  // current sequence per player
  std::function<void(int, double)> walk = [&](int id, double chance) {
    const GameTree::Node& nd = game.node(id);
    switch (nd.kind) {
      case GameTree::NodeKind::kLeaf: {
        double opp_reach = 1.0;
        for (int k = 1; k <= n; ++k)
          if (k != player) opp_reach *= strategies[k - 1][seq[k - 1]];
        if (opp_reach == 0 && chance == 0) return;
        const double disutility =
            (game.max_utility() - nd.utilities[player - 1]) / span;
        loss[seq[player - 1]] += chance * opp_reach * disutility;
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
  return loss;
}

PlayTrace self_play(const GameTree& game,
                    const std::vector<LearnerConfig>& configs, int T,
                    int store_matrices_every, bool sample_plans) {
  const int n = game.num_players();
  if (static_cast<int>(configs.size()) != n)
    throw ValidationError("need one learner config per player");
  if (T < 1) throw ValidationError("need at least one iteration");

  PlayTrace trace;
  trace.game_hash = game.hash();
  trace.T = T;
  for (int p = 1; p <= n; ++p) trace.indices.push_back(derive_sequence_index(game, p));
  trace.players.resize(n);

  std::vector<std::unique_ptr<Learner>> learners;
  std::vector<RandomStream> rngs;
  std::vector<std::vector<ReducedPlan>> plan_lists(n);
  for (int p = 0; p < n; ++p) {
    trace.kinds.push_back(configs[p].kind);
    learners.push_back(make_learner(trace.indices[p], configs[p]));
    rngs.emplace_back(configs[p].seed * 0x9e3779b97f4a7c15ULL + p + 1);
    if (sample_plans)
      plan_lists[p] = enumerate_reduced_plans(trace.indices[p], 1000000);
  }

  try {
    for (int t = 1; t <= T; ++t) {
      std::vector<Eigen::VectorXd> xs(n);
      for (int p = 0; p < n; ++p) xs[p] = learners[p]->strategy();
      std::vector<Eigen::VectorXd> losses(n);
      for (int p = 1; p <= n; ++p)
        losses[p - 1] = build_loss_vector(game, p, xs, trace.indices);

      for (int p = 0; p < n; ++p) {
        PlayerTrace& pt = trace.players[p];
        pt.xs.push_back(xs[p]);
        pt.losses.push_back(losses[p]);
        const double pay = losses[p].dot(xs[p]);
        pt.payoff.push_back(pay);
        pt.cumulative_payoff += pay;
        pt.matrix_payoff.push_back(losses[p].dot(learners[p]->matrix() * xs[p]));
        pt.max_membership_residual = std::max(
            pt.max_membership_residual, learners[p]->membership_residual());
        pt.max_fixed_point_residual = std::max(
            pt.max_fixed_point_residual, learners[p]->fixed_point_residual());
        if (store_matrices_every > 0 &&
            ((t - 1) % store_matrices_every == 0 || t == T))
          pt.matrices.emplace(t, learners[p]->matrix());
        if (sample_plans) {
          const ReducedPlan plan = sample_plan(trace.indices[p], xs[p], rngs[p]);
          int which = -1;
          for (size_t i = 0; i < plan_lists[p].size(); ++i)
            if ((plan_lists[p][i] - plan).cwiseAbs().maxCoeff() < 0.5) {
              which = static_cast<int>(i);
              break;
            }
          pt.sampled_plans.push_back(which);
        }
      }
      for (int p = 0; p < n; ++p) learners[p]->observe_loss(losses[p]);
    }
  } catch (const SolveError& err) {
    trace.aborted = true;
    trace.abort_reason = err.what();
  }
  return trace;
}

}  // namespace linswap
