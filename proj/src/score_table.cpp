#include "pcrf/score_table.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace pcrf {

std::size_t transition_size(const RuleSet& rules, int steps, TransitionMode mode) {
  switch (mode) {
    case TransitionMode::none: return 0;
    case TransitionMode::dynamic_sparse:
      return steps > 1 ? static_cast<std::size_t>(steps - 1) * rules.n_allowed() : 0;
    case TransitionMode::static_dense:
      return static_cast<std::size_t>(rules.n_edges()) * static_cast<std::size_t>(rules.n_edges());
  }
  return 0;
}

ScoreTable ScoreTable::zeros(const RuleSet& rules, int steps, TransitionMode mode, bool masked) {
  if (steps < 1) throw std::invalid_argument("ScoreTable: steps must be >= 1");
  ScoreTable table;
  table.steps = steps;
  table.n_edges = rules.n_edges();
  table.mode = mode;
  table.masked = masked;
  table.emission.assign(static_cast<std::size_t>(steps) * static_cast<std::size_t>(rules.n_edges()),
                        0.0);
  table.transition.assign(transition_size(rules, steps, mode), 0.0);
  return table;
}

double ScoreTable::transition_score(const RuleSet& rules, int t, EdgeId prev, EdgeId next) const {
  if (const auto s = rules.slot(prev, next))
    return allowed_score(t, prev, next, *s, rules.n_allowed());
  return disallowed_score(prev, next);
}

void ScoreTable::validate(const RuleSet& rules) const {
  if (steps < 1) throw std::invalid_argument("ScoreTable: steps must be >= 1");
  if (n_edges != rules.n_edges())
    throw std::invalid_argument("ScoreTable: edge count " + std::to_string(n_edges) +
                                " does not match rule set (" +
                                std::to_string(rules.n_edges()) + ")");
  if (emission.size() != static_cast<std::size_t>(steps) * static_cast<std::size_t>(n_edges))
    throw std::invalid_argument("ScoreTable: emission size mismatch");
  if (transition.size() != transition_size(rules, steps, mode))
    throw std::invalid_argument("ScoreTable: transition size mismatch");
  for (double v : emission)
    if (!std::isfinite(v)) throw std::invalid_argument("ScoreTable: non-finite emission score");
  for (double v : transition)
    if (!std::isfinite(v)) throw std::invalid_argument("ScoreTable: non-finite transition score");
  if (!std::isfinite(mask_value)) throw std::invalid_argument("ScoreTable: non-finite mask value");
}

}  // namespace pcrf
