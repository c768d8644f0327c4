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

#ifndef LINSWAP_SEQUENCE_FORM_HPP_
#define LINSWAP_SEQUENCE_FORM_HPP_

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "linswap/efg.hpp"
#include "linswap/polytope.hpp"

namespace linswap {

// Deterministic uniform stream; callers own the seed.
class RandomStream {
 public:
  explicit RandomStream(uint64_t seed) : state_(seed ? seed : 0x9e3779b97f4a7c15ULL) {}
  // xorshift* generator; uniform in [0, 1).
  double uniform();
  uint64_t next();

 private:
  uint64_t state_;
};

// Per-player tree-form decision structure. Sequence 0 is the empty
// sequence; the rest follow depth-first infoset discovery order.
class SequenceIndex {
 public:
  struct Infoset {
    std::string label;
    int parent_seq = 0;             // sequence that leads into this infoset
    std::vector<int> seqs;          // one per action, in action order
    std::vector<std::string> actions;
  };

  int player = 0;
  std::vector<Infoset> infosets;          // J, discovery order
  std::vector<int> seq_infoset;           // per sequence; -1 for the empty one
  std::vector<int> seq_action;            // action position within infoset
  std::vector<std::vector<int>> children; // C_σ: infoset ids hanging off σ
  std::vector<std::string> seq_names;
  std::vector<int> from_registry;         // game registry id → infoset id

  int num_seqs() const { return static_cast<int>(seq_infoset.size()); }
  int num_infosets() const { return static_cast<int>(infosets.size()); }
  bool is_terminal(int seq) const { return children[seq].empty(); }
  std::vector<int> terminal_seqs() const;

  // All sequences at infoset j and below, ascending.
  const std::vector<int>& subtree_seqs(int infoset) const {
    return subtree_seqs_[infoset];
  }
  // All sequences at or below sequence σ (σ itself first).
  const std::vector<int>& seqs_below(int seq) const { return seqs_below_[seq]; }

  int find_infoset(const std::string& label) const;
  int find_seq(const std::string& infoset_label, const std::string& action) const;

  void finalize();  // fills the derived caches above

 private:
  std::vector<std::vector<int>> subtree_seqs_;
  std::vector<std::vector<int>> seqs_below_;
};

// A deterministic strategy: 0/1 over sequences, vertices of the
// sequence-form polytope. Unreached infosets select no action.
using ReducedPlan = Eigen::VectorXd;

SequenceIndex derive_sequence_index(const GameTree& game, int player);

// {x ≥ 0 : x[∅] = 1, Σ_a x[ja] = x[parent(j)]}; γ = 1.
StandardPolytope sequence_form_polytope(const SequenceIndex& index);

// Strategies for the subtree rooted at infoset j, over subtree_seqs(j);
// the root infoset's actions sum to 1.
StandardPolytope subtree_polytope(const SequenceIndex& index, int infoset);

// Number of reduced plans (exact, via the recursive product-sum count).
double count_reduced_plans(const SequenceIndex& index);

// All vertices of the polytope, in a fixed recursive order whose first
// element picks the first action at every reached infoset. Throws
// ValidationError if the count exceeds cap.
std::vector<ReducedPlan> enumerate_reduced_plans(const SequenceIndex& index,
                                                 long cap);

// First plan of the enumeration order (first action everywhere), computed
// without enumerating.
ReducedPlan first_reduced_plan(const SequenceIndex& index);

// Top-down unbiased sampling: at each reached infoset pick action a with
// probability x[ja]/x[parent]; zero-reach infosets take the first action.
// E[plan] = x exactly. x must be feasible within tolerance.
ReducedPlan sample_plan(const SequenceIndex& index, const Eigen::VectorXd& x,
                        RandomStream& rng);

struct PlanMixture {
  std::vector<ReducedPlan> plans;
  std::vector<double> probs;
  Eigen::VectorXd mean() const;
};

// Exact decomposition of x into the distribution sample_plan draws from:
// the probability of each plan is the product of its top-down choice
// probabilities. Mixture mean reproduces x.
PlanMixture plan_mixture(const SequenceIndex& index, const Eigen::VectorXd& x,
                         long cap);

// Feasibility residual of x against the sequence-form constraints.
double sequence_form_residual(const SequenceIndex& index,
                              const Eigen::VectorXd& x);

// Random feasible point built from uniform behavior weights at every
// infoset; always exactly feasible.
Eigen::VectorXd random_sequence_strategy(const SequenceIndex& index,
                                         RandomStream& rng);

// Uniform behavior at every infoset.
Eigen::VectorXd uniform_sequence_strategy(const SequenceIndex& index);

// min_x ⟨cost, x⟩ over the subtree polytope at `infoset` (best-response
// dynamic program). cost is indexed by global sequences; only subtree
// entries are read. If argmin is non-null it receives the optimizing
// vertex (full-length vector, zero outside the subtree).
double min_linear_over_subtree(const SequenceIndex& index, int infoset,
                               const Eigen::VectorXd& cost,
                               Eigen::VectorXd* argmin = nullptr);

// Same over the whole polytope; the argmin vertex has x[∅] = 1.
double min_linear_over_polytope(const SequenceIndex& index,
                                const Eigen::VectorXd& cost,
                                Eigen::VectorXd* argmin = nullptr);

// Diagnostic text dump (CLI `inspect`).
std::string describe_index(const SequenceIndex& index);

}  // namespace linswap

#endif  // LINSWAP_SEQUENCE_FORM_HPP_
