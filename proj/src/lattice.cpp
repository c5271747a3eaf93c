#include "pcrf/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>

#include "logsumexp.hpp"

namespace pcrf {

namespace {

using detail::kNegInf;
using detail::LogSumExp;

constexpr std::size_t kNoSlot = std::numeric_limits<std::size_t>::max();

std::size_t idx(int t, EdgeId e, int n_edges) {
  return static_cast<std::size_t>(t) * static_cast<std::size_t>(n_edges) +
         static_cast<std::size_t>(e);
}

// Visits every predecessor p of `e` considered by the lattice at step t
// (allowed predecessors only when masked, all edges otherwise) in ascending
// order, passing psi_t(p, e) and the slot of (p, e) or kNoSlot.
template <class Fn>
void for_each_incoming(const ScoreTable& s, const RuleSet& r, int t, EdgeId e, Fn&& fn) {
  const auto preds = r.predecessors(e);
  const auto slots = r.predecessor_slots(e);
  const std::size_t n_allowed = r.n_allowed();
  if (s.masked) {
    for (std::size_t k = 0; k < preds.size(); ++k)
      fn(preds[k], s.allowed_score(t, preds[k], e, slots[k], n_allowed), std::size_t{slots[k]});
    return;
  }
  std::size_t k = 0;
  for (EdgeId p = 0; p < s.n_edges; ++p) {
    if (k < preds.size() && preds[k] == p) {
      fn(p, s.allowed_score(t, p, e, slots[k], n_allowed), std::size_t{slots[k]});
      ++k;
    } else {
      fn(p, s.disallowed_score(p, e), kNoSlot);
    }
  }
}

// Successor analogue of for_each_incoming; t is the step of the successor.
template <class Fn>
void for_each_outgoing(const ScoreTable& s, const RuleSet& r, int t, EdgeId p, Fn&& fn) {
  const auto succ = r.successors(p);
  const auto slots = r.successor_slots(p);
  const std::size_t n_allowed = r.n_allowed();
  if (s.masked) {
    for (std::size_t k = 0; k < succ.size(); ++k)
      fn(succ[k], s.allowed_score(t, p, succ[k], slots[k], n_allowed), std::size_t{slots[k]});
    return;
  }
  std::size_t k = 0;
  for (EdgeId n = 0; n < s.n_edges; ++n) {
    if (k < succ.size() && succ[k] == n) {
      fn(n, s.allowed_score(t, p, n, slots[k], n_allowed), std::size_t{slots[k]});
      ++k;
    } else {
      fn(n, s.disallowed_score(p, n), kNoSlot);
    }
  }
}

void check_shape(const ScoreTable& scores, const RuleSet& rules) {
  if (scores.steps < 1) throw std::invalid_argument("lattice: steps must be >= 1");
  if (scores.n_edges != rules.n_edges())
    throw std::invalid_argument("lattice: score table does not match rule set");
  if (scores.emission.size() != idx(scores.steps, 0, scores.n_edges) ||
      scores.transition.size() != transition_size(rules, scores.steps, scores.mode))
    throw std::invalid_argument("lattice: malformed score table");
}

std::vector<double> forward_table(const ScoreTable& s, const RuleSet& r) {
  const int n_e = s.n_edges;
  std::vector<double> alpha(s.emission);  // row 0 == f_1
  for (int t = 1; t < s.steps; ++t) {
    const double* prev = alpha.data() + idx(t - 1, 0, n_e);
    double* cur = alpha.data() + idx(t, 0, n_e);
#pragma omp parallel for schedule(static)
    for (EdgeId e = 0; e < n_e; ++e) {
      LogSumExp acc;
      for_each_incoming(s, r, t, e, [&](EdgeId p, double psi, std::size_t) { acc.add(prev[p] + psi); });
      cur[e] += acc.value();
    }
  }
  return alpha;
}

std::vector<double> backward_table(const ScoreTable& s, const RuleSet& r) {
  const int n_e = s.n_edges;
  std::vector<double> beta(idx(s.steps, 0, n_e), 0.0);
  for (int t = s.steps - 2; t >= 0; --t) {
    const double* next = beta.data() + idx(t + 1, 0, n_e);
    const double* f_next = s.emission.data() + idx(t + 1, 0, n_e);
    double* cur = beta.data() + idx(t, 0, n_e);
#pragma omp parallel for schedule(static)
    for (EdgeId p = 0; p < n_e; ++p) {
      LogSumExp acc;
      for_each_outgoing(s, r, t + 1, p,
                        [&](EdgeId n, double psi, std::size_t) { acc.add(psi + f_next[n] + next[n]); });
      cur[p] = acc.value();
    }
  }
  return beta;
}

double log_sum_exp_row(const double* row, int n) {
  LogSumExp acc;
  for (int e = 0; e < n; ++e) acc.add(row[e]);
  return acc.value();
}

}  // namespace

double score_sequence(const ScoreTable& scores, const RuleSet& rules,
                      std::span<const EdgeId> path) {
  if (path.size() != static_cast<std::size_t>(scores.steps))
    throw std::invalid_argument("score_sequence: path length " + std::to_string(path.size()) +
                                " != steps " + std::to_string(scores.steps));
  check_shape(scores, rules);
  for (EdgeId e : path)
    if (!rules.valid_edge(e)) throw std::invalid_argument("score_sequence: invalid edge id");
  double s = scores.emit(0, path[0]);
  for (int t = 1; t < scores.steps; ++t)
    s += scores.emit(t, path[t]) + scores.transition_score(rules, t, path[t - 1], path[t]);
  return s;
}

double forward_log_z(const ScoreTable& scores, const RuleSet& rules) {
  check_shape(scores, rules);
  const auto alpha = forward_table(scores, rules);
  return log_sum_exp_row(alpha.data() + idx(scores.steps - 1, 0, scores.n_edges), scores.n_edges);
}

LatticeResult forward_backward(const ScoreTable& scores, const RuleSet& rules) {
  check_shape(scores, rules);
  const int n_e = scores.n_edges;
  const int steps = scores.steps;
  const auto alpha = forward_table(scores, rules);
  const auto beta = backward_table(scores, rules);

  LatticeResult out;
  out.log_z = log_sum_exp_row(alpha.data() + idx(steps - 1, 0, n_e), n_e);
  const double log_z = out.log_z;

  out.marginals_emission.resize(alpha.size());
  const std::int64_t n_cells = static_cast<std::int64_t>(alpha.size());
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < n_cells; ++i)
    out.marginals_emission[static_cast<std::size_t>(i)] =
        std::exp(alpha[static_cast<std::size_t>(i)] + beta[static_cast<std::size_t>(i)] - log_z);

  const std::size_t n_allowed = rules.n_allowed();
  out.marginals_transition.assign(static_cast<std::size_t>(steps - 1) * n_allowed, 0.0);
  for (int t = 1; t < steps; ++t) {
    const double* a_prev = alpha.data() + idx(t - 1, 0, n_e);
    const double* b_cur = beta.data() + idx(t, 0, n_e);
    const double* f_cur = scores.emission.data() + idx(t, 0, n_e);
    double* row = out.marginals_transition.data() + static_cast<std::size_t>(t - 1) * n_allowed;
#pragma omp parallel for schedule(static)
    for (EdgeId p = 0; p < n_e; ++p) {
      const auto succ = rules.successors(p);
      const auto slots = rules.successor_slots(p);
      for (std::size_t k = 0; k < succ.size(); ++k) {
        const EdgeId n = succ[k];
        const double psi = scores.allowed_score(t, p, n, slots[k], n_allowed);
        row[slots[k]] = std::exp(a_prev[p] + psi + f_cur[n] + b_cur[n] - log_z);
      }
    }
  }
  return out;
}

NllResult nll_and_gradients(const ScoreTable& scores, const RuleSet& rules,
                            std::span<const EdgeId> gold) {
  NllResult out;
  out.gold_score = score_sequence(scores, rules, gold);
  const int n_e = scores.n_edges;
  const int steps = scores.steps;
  const std::size_t n_allowed = rules.n_allowed();

  const auto alpha = forward_table(scores, rules);
  const auto beta = backward_table(scores, rules);
  out.log_z = log_sum_exp_row(alpha.data() + idx(steps - 1, 0, n_e), n_e);
  out.nll = out.log_z - out.gold_score;
  const double log_z = out.log_z;

  out.grad = scores;
  std::fill(out.grad.transition.begin(), out.grad.transition.end(), 0.0);
  const std::int64_t n_cells = static_cast<std::int64_t>(alpha.size());
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < n_cells; ++i)
    out.grad.emission[static_cast<std::size_t>(i)] =
        std::exp(alpha[static_cast<std::size_t>(i)] + beta[static_cast<std::size_t>(i)] - log_z);
  for (int t = 0; t < steps; ++t) out.grad.emit(t, gold[t]) -= 1.0;

  switch (scores.mode) {
    case TransitionMode::none: break;
    case TransitionMode::dynamic_sparse: {
      for (int t = 1; t < steps; ++t) {
        const double* a_prev = alpha.data() + idx(t - 1, 0, n_e);
        const double* b_cur = beta.data() + idx(t, 0, n_e);
        const double* f_cur = scores.emission.data() + idx(t, 0, n_e);
        double* row = out.grad.transition.data() + static_cast<std::size_t>(t - 1) * n_allowed;
#pragma omp parallel for schedule(static)
        for (EdgeId p = 0; p < n_e; ++p) {
          const auto succ = rules.successors(p);
          const auto slots = rules.successor_slots(p);
          for (std::size_t k = 0; k < succ.size(); ++k) {
            const EdgeId n = succ[k];
            const double psi = scores.allowed_score(t, p, n, slots[k], n_allowed);
            row[slots[k]] = std::exp(a_prev[p] + psi + f_cur[n] + b_cur[n] - log_z);
          }
        }
        if (const auto s = rules.slot(gold[t - 1], gold[t])) row[*s] -= 1.0;
      }
      break;
    }
    case TransitionMode::static_dense: {
      // Each row p is owned by one thread; the sum over t runs innermost in
      // a fixed order.
#pragma omp parallel for schedule(static)
      for (EdgeId p = 0; p < n_e; ++p) {
        double* row = out.grad.transition.data() + static_cast<std::size_t>(p) * n_e;
        for (int t = 1; t < steps; ++t) {
          const double a_prev = alpha[idx(t - 1, p, n_e)];
          const double* b_cur = beta.data() + idx(t, 0, n_e);
          const double* f_cur = scores.emission.data() + idx(t, 0, n_e);
          for_each_outgoing(scores, rules, t, p, [&](EdgeId n, double psi, std::size_t slot) {
            if (slot == kNoSlot && scores.masked) return;
            row[n] += std::exp(a_prev + psi + f_cur[n] + b_cur[n] - log_z);
          });
        }
      }
      for (int t = 1; t < steps; ++t) {
        if (scores.masked && !rules.is_allowed(gold[t - 1], gold[t])) continue;
        out.grad.transition[static_cast<std::size_t>(gold[t - 1]) * n_e +
                            static_cast<std::size_t>(gold[t])] -= 1.0;
      }
      break;
    }
  }

  if (scores.masked)
    for (int t = 1; t < steps; ++t)
      if (!rules.is_allowed(gold[t - 1], gold[t])) out.gold_illegal = true;
  return out;
}

ViterbiResult viterbi_decode(const ScoreTable& scores, const RuleSet& rules) {
  check_shape(scores, rules);
  const int n_e = scores.n_edges;
  const int steps = scores.steps;
  std::vector<double> delta(scores.emission);
  std::vector<EdgeId> back(idx(steps, 0, n_e), -1);
  for (int t = 1; t < steps; ++t) {
    const double* prev = delta.data() + idx(t - 1, 0, n_e);
    double* cur = delta.data() + idx(t, 0, n_e);
    EdgeId* ptr = back.data() + idx(t, 0, n_e);
#pragma omp parallel for schedule(static)
    for (EdgeId e = 0; e < n_e; ++e) {
      double best = kNegInf;
      EdgeId arg = -1;
      for_each_incoming(scores, rules, t, e, [&](EdgeId p, double psi, std::size_t) {
        const double v = prev[p] + psi;
        if (arg < 0 || v > best) {
          best = v;
          arg = p;
        }
      });
      cur[e] += best;
      ptr[e] = arg;
    }
  }
  ViterbiResult out;
  out.path.resize(static_cast<std::size_t>(steps));
  const double* last = delta.data() + idx(steps - 1, 0, n_e);
  EdgeId arg = 0;
  for (EdgeId e = 1; e < n_e; ++e)
    if (last[e] > last[arg]) arg = e;
  out.path[static_cast<std::size_t>(steps - 1)] = arg;
  for (int t = steps - 1; t >= 1; --t)
    out.path[static_cast<std::size_t>(t - 1)] = back[idx(t, out.path[static_cast<std::size_t>(t)], n_e)];
  out.score = score_sequence(scores, rules, out.path);
  return out;
}

PossessionPath greedy_decode(const ScoreTable& scores, const RuleSet& rules, bool constrained) {
  check_shape(scores, rules);
  const int n_e = scores.n_edges;
  PossessionPath path(static_cast<std::size_t>(scores.steps));
  auto row_argmax = [&](int t) {
    const auto row = scores.emission_row(t);
    EdgeId arg = 0;
    for (EdgeId e = 1; e < n_e; ++e)
      if (row[static_cast<std::size_t>(e)] > row[static_cast<std::size_t>(arg)]) arg = e;
    return arg;
  };
  path[0] = row_argmax(0);
  const std::size_t n_allowed = rules.n_allowed();
  for (int t = 1; t < scores.steps; ++t) {
    if (!constrained) {
      path[static_cast<std::size_t>(t)] = row_argmax(t);
      continue;
    }
    const EdgeId p = path[static_cast<std::size_t>(t - 1)];
    const auto succ = rules.successors(p);
    const auto slots = rules.successor_slots(p);
    EdgeId arg = -1;
    double best = kNegInf;
    for (std::size_t k = 0; k < succ.size(); ++k) {
      const double v = scores.emit(t, succ[k]) + scores.allowed_score(t, p, succ[k], slots[k], n_allowed);
      if (arg < 0 || v > best) {
        best = v;
        arg = succ[k];
      }
    }
    path[static_cast<std::size_t>(t)] = arg;
  }
  return path;
}

}  // namespace pcrf
