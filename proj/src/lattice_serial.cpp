// Reference lattice kernels: single-threaded dense loops over every edge
// pair, skipping pairs outside the allowed set when the table is masked.
// Kept deliberately plain; the production kernels in lattice.cpp are
// checked against these.

#include <cmath>
#include <stdexcept>

#include "logsumexp.hpp"
#include "pcrf/lattice.hpp"

namespace pcrf::serial {

namespace {

using detail::kNegInf;
using detail::LogSumExp;

struct Tables {
  std::vector<std::vector<double>> alpha;
  std::vector<std::vector<double>> beta;
  double log_z = 0.0;
};

bool considered(const ScoreTable& s, const RuleSet& r, EdgeId p, EdgeId n) {
  return !s.masked || r.is_allowed(p, n);
}

Tables run(const ScoreTable& s, const RuleSet& r) {
  if (s.steps < 1 || s.n_edges != r.n_edges())
    throw std::invalid_argument("serial lattice: score table does not match rule set");
  const int n_e = s.n_edges;
  Tables tab;
  tab.alpha.assign(static_cast<std::size_t>(s.steps), std::vector<double>(static_cast<std::size_t>(n_e)));
  tab.beta.assign(static_cast<std::size_t>(s.steps), std::vector<double>(static_cast<std::size_t>(n_e), 0.0));
  for (EdgeId e = 0; e < n_e; ++e) tab.alpha[0][e] = s.emit(0, e);
  for (int t = 1; t < s.steps; ++t) {
    for (EdgeId e = 0; e < n_e; ++e) {
      LogSumExp acc;
      for (EdgeId p = 0; p < n_e; ++p)
        if (considered(s, r, p, e)) acc.add(tab.alpha[t - 1][p] + s.transition_score(r, t, p, e));
      tab.alpha[t][e] = s.emit(t, e) + acc.value();
    }
  }
  for (int t = s.steps - 2; t >= 0; --t) {
    for (EdgeId p = 0; p < n_e; ++p) {
      LogSumExp acc;
      for (EdgeId n = 0; n < n_e; ++n)
        if (considered(s, r, p, n))
          acc.add(s.transition_score(r, t + 1, p, n) + s.emit(t + 1, n) + tab.beta[t + 1][n]);
      tab.beta[t][p] = acc.value();
    }
  }
  LogSumExp z;
  for (double a : tab.alpha.back()) z.add(a);
  tab.log_z = z.value();
  return tab;
}

}  // namespace

double forward_log_z(const ScoreTable& scores, const RuleSet& rules) {
  return run(scores, rules).log_z;
}

LatticeResult forward_backward(const ScoreTable& scores, const RuleSet& rules) {
  const auto tab = run(scores, rules);
  const int n_e = scores.n_edges;
  LatticeResult out;
  out.log_z = tab.log_z;
  out.marginals_emission.reserve(static_cast<std::size_t>(scores.steps * n_e));
  for (int t = 0; t < scores.steps; ++t)
    for (EdgeId e = 0; e < n_e; ++e)
      out.marginals_emission.push_back(std::exp(tab.alpha[t][e] + tab.beta[t][e] - tab.log_z));
  const auto allowed = rules.allowed_list();
  out.marginals_transition.reserve(static_cast<std::size_t>(scores.steps - 1) * allowed.size());
  for (int t = 1; t < scores.steps; ++t)
    for (const auto& pair : allowed)
      out.marginals_transition.push_back(
          std::exp(tab.alpha[t - 1][pair.prev] + scores.transition_score(rules, t, pair.prev, pair.next) +
                   scores.emit(t, pair.next) + tab.beta[t][pair.next] - tab.log_z));
  return out;
}

NllResult nll_and_gradients(const ScoreTable& scores, const RuleSet& rules,
                            std::span<const EdgeId> gold) {
  NllResult out;
  out.gold_score = score_sequence(scores, rules, gold);
  const auto tab = run(scores, rules);
  out.log_z = tab.log_z;
  out.nll = tab.log_z - out.gold_score;
  const int n_e = scores.n_edges;

  out.grad = scores;
  for (int t = 0; t < scores.steps; ++t)
    for (EdgeId e = 0; e < n_e; ++e)
      out.grad.emit(t, e) = std::exp(tab.alpha[t][e] + tab.beta[t][e] - tab.log_z) - (gold[t] == e ? 1.0 : 0.0);

  auto pair_marginal = [&](int t, EdgeId p, EdgeId n) {
    return std::exp(tab.alpha[t - 1][p] + scores.transition_score(rules, t, p, n) + scores.emit(t, n) +
                    tab.beta[t][n] - tab.log_z);
  };

  std::fill(out.grad.transition.begin(), out.grad.transition.end(), 0.0);
  if (scores.mode == TransitionMode::dynamic_sparse) {
    const auto allowed = rules.allowed_list();
    for (int t = 1; t < scores.steps; ++t)
      for (std::size_t s = 0; s < allowed.size(); ++s) {
        const auto& pair = allowed[s];
        const bool is_gold = gold[t - 1] == pair.prev && gold[t] == pair.next;
        out.grad.transition[static_cast<std::size_t>(t - 1) * allowed.size() + s] =
            pair_marginal(t, pair.prev, pair.next) - (is_gold ? 1.0 : 0.0);
      }
  } else if (scores.mode == TransitionMode::static_dense) {
    for (EdgeId p = 0; p < n_e; ++p)
      for (EdgeId n = 0; n < n_e; ++n) {
        if (!considered(scores, rules, p, n)) continue;
        double g = 0.0;
        for (int t = 1; t < scores.steps; ++t) {
          g += pair_marginal(t, p, n);
          if (gold[t - 1] == p && gold[t] == n) g -= 1.0;
        }
        out.grad.transition[static_cast<std::size_t>(p) * n_e + n] = g;
      }
  }
  for (int t = 1; t < scores.steps; ++t)
    if (scores.masked && !rules.is_allowed(gold[t - 1], gold[t])) out.gold_illegal = true;
  return out;
}

ViterbiResult viterbi_decode(const ScoreTable& scores, const RuleSet& rules) {
  const int n_e = scores.n_edges;
  std::vector<std::vector<double>> delta(static_cast<std::size_t>(scores.steps),
                                         std::vector<double>(static_cast<std::size_t>(n_e)));
  std::vector<std::vector<EdgeId>> back(static_cast<std::size_t>(scores.steps),
                                        std::vector<EdgeId>(static_cast<std::size_t>(n_e), -1));
  for (EdgeId e = 0; e < n_e; ++e) delta[0][e] = scores.emit(0, e);
  for (int t = 1; t < scores.steps; ++t)
    for (EdgeId e = 0; e < n_e; ++e) {
      double best = kNegInf;
      EdgeId arg = -1;
      for (EdgeId p = 0; p < n_e; ++p) {
        if (!considered(scores, rules, p, e)) continue;
        const double v = delta[t - 1][p] + scores.transition_score(rules, t, p, e);
        if (arg < 0 || v > best) {
          best = v;
          arg = p;
        }
      }
      delta[t][e] = scores.emit(t, e) + best;
      back[t][e] = arg;
    }
  ViterbiResult out;
  out.path.assign(static_cast<std::size_t>(scores.steps), 0);
  EdgeId arg = 0;
  for (EdgeId e = 1; e < n_e; ++e)
    if (delta.back()[e] > delta.back()[arg]) arg = e;
  out.path.back() = arg;
  for (int t = scores.steps - 1; t >= 1; --t) out.path[t - 1] = back[t][out.path[t]];
  out.score = score_sequence(scores, rules, out.path);
  return out;
}

}  // namespace pcrf::serial
