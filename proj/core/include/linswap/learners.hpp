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

#ifndef LINSWAP_LEARNERS_HPP_
#define LINSWAP_LEARNERS_HPP_

#include <Eigen/Dense>
#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "linswap/convex_opt.hpp"
#include "linswap/efg.hpp"
#include "linswap/linmap.hpp"
#include "linswap/sequence_form.hpp"

namespace linswap {

enum class LearnerKind { kLinearSwap, kTrigger, kExternal };
enum class EtaSchedule { kInvSqrt, kConstant };

struct LearnerConfig {
  LearnerKind kind = LearnerKind::kLinearSwap;
  EtaSchedule schedule = EtaSchedule::kInvSqrt;
  double eta = 0.1;                  // constant schedule only
  double accuracy_floor = 1e-12;     // ε^t = max(t^{-5/2}, floor)
  uint64_t seed = 0;

  double eta_at(int t) const;        // t is 1-based
  double accuracy_at(int t) const;
};

// Gradient-descent learner over the compiled self-map system: project
// the matrix iterate after each loss, then recompute its fixed point.
class Learner {
 public:
  virtual ~Learner() = default;
  virtual const Eigen::VectorXd& strategy() const = 0;
  // Advances the state; loss entries must lie in [0, 1].
  virtual void observe_loss(const Eigen::VectorXd& loss) = 0;
  // Deviation matrix of the current iterate (identity-shaped for the
  // external learner).
  virtual Eigen::MatrixXd matrix() const = 0;
  virtual double membership_residual() const = 0;
  virtual double fixed_point_residual() const = 0;
  int iteration() const { return t_; }

 protected:
  int t_ = 1;
};

std::unique_ptr<Learner> make_learner(const SequenceIndex& index,
                                      const LearnerConfig& config);

// Loss vector against fixed opponent strategies: the chance-weighted,
// opponent-reach-weighted normalized disutility accumulated on each of the
// player's sequences. Utilities are rescaled per game so that losses lie
// in [0,1]; a constant-utility game yields the zero vector.
Eigen::VectorXd build_loss_vector(
    const GameTree& game, int player,
    const std::vector<Eigen::VectorXd>& strategies,
    const std::vector<SequenceIndex>& indices);

struct PlayerTrace {
  std::vector<Eigen::VectorXd> xs;       // x^t
  std::vector<Eigen::VectorXd> losses;   // ℓ^t
  std::vector<double> payoff;            // ⟨ℓ^t, x^t⟩
  std::vector<double> matrix_payoff;     // ⟨ℓ^t, A^t x^t⟩
  std::map<int, Eigen::MatrixXd> matrices;  // thinned: t → A^t
  std::vector<int> sampled_plans;        // plan sampling, when enabled
  double max_membership_residual = 0;
  double max_fixed_point_residual = 0;
  double cumulative_payoff = 0;
};

struct PlayTrace {
  uint64_t game_hash = 0;
  int T = 0;
  std::vector<LearnerKind> kinds;
  std::vector<SequenceIndex> indices;
  std::vector<PlayerTrace> players;
  bool aborted = false;
  std::string abort_reason;
};

// Simultaneous self-play: at every t all players emit x^t, losses are
// built from the co-players' strategies, and each state advances once.
// Solver errors abort with the partial trace flagged.
PlayTrace self_play(const GameTree& game,
                    const std::vector<LearnerConfig>& configs, int T,
                    int store_matrices_every = 100,
                    bool sample_plans = false);

}  // namespace linswap

#endif  // LINSWAP_LEARNERS_HPP_
