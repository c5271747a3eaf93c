#pragma once

// Linear-chain lattice over possession edges: sequence scoring, forward /
// backward log-partition and marginals, NLL gradients, and decoders.
//
// The functions in namespace `pcrf` are the production kernels: the inner
// loop over edges at each time step runs as an OpenMP parallel-for, and when
// the table is masked the reductions range over the CSR predecessor /
// successor lists only (O(T |A|)). Every output element is produced by one
// thread in a fixed order, so results do not depend on the thread count.
//
// Namespace `pcrf::serial` holds a straightforward reference of every kernel
// (dense loops over all edge pairs with a membership test) used to check the
// production path.
//
// Argmax ties resolve to the smallest EdgeId everywhere.

#include <span>
#include <vector>

#include "pcrf/rules.hpp"
#include "pcrf/score_table.hpp"

namespace pcrf {

struct LatticeResult {
  double log_z = 0.0;
  /// steps x n_edges posterior edge marginals.
  std::vector<double> marginals_emission;
  /// (steps-1) x |A| posterior marginals of allowed transitions, rows in
  /// allowed_list order. In masked tables every row sums to one.
  std::vector<double> marginals_transition;
};

struct NllResult {
  double nll = 0.0;
  double log_z = 0.0;
  double gold_score = 0.0;
  /// Same shape as the input table; d nll / d score for every stored entry.
  /// Entries that are masked at lookup receive exactly zero.
  ScoreTable grad;
  /// Set when the gold path uses a pair outside the allowed set of a masked
  /// table; the nll is then dominated by |mask_value|.
  bool gold_illegal = false;
};

struct ViterbiResult {
  PossessionPath path;
  double score = 0.0;
};

/// f_1(e_1) + sum_{t>=2} (f_t(e_t) + psi_t(e_{t-1}, e_t)).
/// Throws std::invalid_argument on a length mismatch.
double score_sequence(const ScoreTable& scores, const RuleSet& rules,
                      std::span<const EdgeId> path);

double forward_log_z(const ScoreTable& scores, const RuleSet& rules);
LatticeResult forward_backward(const ScoreTable& scores, const RuleSet& rules);
NllResult nll_and_gradients(const ScoreTable& scores, const RuleSet& rules,
                            std::span<const EdgeId> gold);
ViterbiResult viterbi_decode(const ScoreTable& scores, const RuleSet& rules);

/// constrained == false: per-step argmax of the emission scores.
/// constrained == true: step 1 is the emission argmax; every later step is
/// the argmax of f_t(e) + psi_t(prev, e) over the allowed successors of the
/// previous choice.
PossessionPath greedy_decode(const ScoreTable& scores, const RuleSet& rules, bool constrained);

namespace serial {

double forward_log_z(const ScoreTable& scores, const RuleSet& rules);
LatticeResult forward_backward(const ScoreTable& scores, const RuleSet& rules);
NllResult nll_and_gradients(const ScoreTable& scores, const RuleSet& rules,
                            std::span<const EdgeId> gold);
ViterbiResult viterbi_decode(const ScoreTable& scores, const RuleSet& rules);

}  // namespace serial

}  // namespace pcrf
