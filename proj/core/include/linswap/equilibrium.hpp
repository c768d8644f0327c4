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

#ifndef LINSWAP_EQUILIBRIUM_HPP_
#define LINSWAP_EQUILIBRIUM_HPP_

#include <Eigen/Dense>
#include <map>
#include <string>
#include <vector>

#include "linswap/efg.hpp"
#include "linswap/learners.hpp"
#include "linswap/linmap.hpp"
#include "linswap/sequence_form.hpp"

namespace linswap {

enum class DeviationClass { kExternal, kTrigger, kLinearSwap, kFullSwap };

struct GapCertificate {
  int player = 0;
  DeviationClass deviation = DeviationClass::kExternal;
  double gap = 0;
  // Witness: exactly one of the following is meaningful per class.
  Eigen::MatrixXd matrix;          // linear-swap
  int trigger_seq = -1;            // trigger; -1 means the root trigger
  Eigen::VectorXd continuation;    // trigger continuation / external target
  std::vector<int> swap_table;     // full-swap: plan index → plan index
};

// Average regrets of a trace prefix (1..upto; 0 = full trace), measured by
// optimizing over the corresponding deviation set.
GapCertificate external_regret(const PlayTrace& trace, int player,
                               int upto = 0);
// Triggers range over every non-empty sequence plus the root trigger that
// rewrites the whole strategy (so constant deviations are included); each
// inner maximization is a linear optimization over a subtree polytope.
GapCertificate trigger_regret(const PlayTrace& trace, int player,
                              int upto = 0);
// LP over the compiled self-map system.
GapCertificate linear_swap_regret(const PlayTrace& trace, int player,
                                  int upto = 0);

// Re-evaluates a certificate's witness directly on the trace; the result
// must reproduce the reported gap within the audit tolerance.
double reevaluate_certificate(const PlayTrace& trace, int player,
                              const GapCertificate& cert);

// A joint distribution over reduced-plan profiles, supported on the
// enumerated plan lists of every player.
struct JointDistribution {
  std::vector<std::vector<ReducedPlan>> plans;  // per player
  std::vector<long> plan_counts;
  std::map<std::vector<int>, double> probs;  // profile → probability

  double total() const;
  int num_players() const { return static_cast<int>(plan_counts.size()); }
  // Sequence-form marginal Σ_profile μ(profile)·plan_i.
  Eigen::VectorXd marginal(int player) const;
};

// μ = (1/T) Σ_t ⊗_i mixture(x_i^t), the exact-decomposition empirical
// joint. The sampled variant draws one plan profile per iteration.
JointDistribution empirical_joint(const PlayTrace& trace, long cap);
JointDistribution empirical_joint_sampled(const PlayTrace& trace, long cap,
                                          uint64_t seed);

// Expected utility of μ for one player, and the per-player deviation gaps
// of μ. lce_gap maximizes E_μ[u_i(A·π_i, π_{−i}) − u_i(π)] over the
// compiled self-map system.
double joint_utility(const JointDistribution& mu, const GameTree& game,
                     int player);
GapCertificate lce_gap(const JointDistribution& mu, const GameTree& game,
                       int player);
GapCertificate external_gap(const JointDistribution& mu, const GameTree& game,
                            int player);
GapCertificate trigger_gap(const JointDistribution& mu, const GameTree& game,
                           int player);
// Brute force over all plan→plan tables; plan count per player ≤ 6.
GapCertificate full_swap_gap(const JointDistribution& mu, const GameTree& game,
                             int player);

// Gain of applying a plan→plan table to player i, summed over the support
// profiles of μ (per-profile utility differences, no reweighting).
double swap_gain(const JointDistribution& mu, const GameTree& game, int player,
                 const std::vector<int>& swap_table);

struct SwapLinearity {
  bool linear = false;
  Eigen::MatrixXd matrix;  // witness when linear
};

// Is there a member A of the self-map system with A·π = swap(π) for every
// enumerated plan π? Decided by LP feasibility.
SwapLinearity is_linear_swap(const SequenceIndex& index,
                             const std::vector<ReducedPlan>& plans,
                             const std::vector<int>& swap_table);

struct MaxpaySolution {
  double welfare = 0;
  JointDistribution mu;
  int cuts = 0;
};

// Welfare-maximal joint distribution subject to zero deviation gaps for
// every player, solved by constraint generation with lce_gap as the
// separation oracle. Desk scale: profile count ≤ cap.
MaxpaySolution maxpay_search(const GameTree& game,
                             const std::vector<double>& weights, long cap,
                             double gap_tol = 1e-7, int max_cuts = 200);

// Helper for building joint distributions in tests and reports: profile
// indices refer to the enumerated plan lists.
JointDistribution make_joint(const GameTree& game,
                             const std::vector<std::vector<int>>& profiles,
                             const std::vector<double>& probs, long cap);

}  // namespace linswap

#endif  // LINSWAP_EQUILIBRIUM_HPP_
