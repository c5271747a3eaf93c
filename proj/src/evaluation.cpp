#include "pcrf/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <tuple>

#include "pcrf/align.hpp"

namespace pcrf {

void EdgeMetrics::merge(const EdgeMetrics& o) {
  steps += o.steps;
  edge_correct += o.edge_correct;
  sender_correct += o.sender_correct;
  receiver_correct += o.receiver_correct;
  transitions += o.transitions;
  violations += o.violations;
}

EdgeMetrics edge_metrics(std::span<const EdgeId> pred, std::span<const EdgeId> gold, const RuleSet& rules) {
  if (pred.size() != gold.size()) throw std::invalid_argument("edge_metrics: length mismatch");
  EdgeMetrics m;
  m.steps = pred.size();
  for (std::size_t t = 0; t < pred.size(); ++t) {
    const Edge p = rules.decode(pred[t]), g = rules.decode(gold[t]);
    m.edge_correct += pred[t] == gold[t];
    m.sender_correct += p.sender == g.sender;
    m.receiver_correct += p.receiver == g.receiver;
  }
  m.transitions = pred.size() > 1 ? pred.size() - 1 : 0;
  m.violations = count_violations(rules, pred);
  return m;
}

void EventMatchReport::merge(const EventMatchReport& o) {
  matched += o.matched;
  detected += o.detected;
  truth += o.truth;
  matches.insert(matches.end(), o.matches.begin(), o.matches.end());
}

void sort_events(std::vector<EventRecord>& events) {
  std::stable_sort(events.begin(), events.end(), [](const EventRecord& a, const EventRecord& b) {
    return std::tie(a.time_s, a.kind, a.actor, a.target) < std::tie(b.time_s, b.kind, b.actor, b.target);
  });
}

EventMatchReport match_events(std::vector<EventRecord> pred, std::vector<EventRecord> truth,
                              const MatchParams& params) {
  sort_events(pred);
  sort_events(truth);
  const Alignment al = needleman_wunsch(
      pred.size(), truth.size(),
      [&](std::size_t i, std::size_t j) -> std::optional<double> {
        const auto &p = pred[i], &t = truth[j];
        if (p.kind != t.kind || p.actor != t.actor || std::abs(p.time_s - t.time_s) > params.dt_max_s)
          return std::nullopt;
        return params.match_score;
      },
      params.gap_score);
  EventMatchReport r;
  r.detected = pred.size();
  r.truth = truth.size();
  for (const auto& m : al.matches()) {
    const auto& p = pred[static_cast<std::size_t>(m.a)];
    const auto& t = truth[static_cast<std::size_t>(m.b)];
    r.matches.push_back({p, t, p.time_s - t.time_s});
  }
  r.matched = r.matches.size();
  return r;
}

void RecallGrid::merge(const RecallGrid& o) {
  if (matched.empty()) {
    *this = o;
    return;
  }
  if (o.dt_grid != dt_grid || o.dx_grid != dx_grid) throw std::invalid_argument("RecallGrid: grids differ");
  truth += o.truth;
  for (std::size_t i = 0; i < matched.size(); ++i)
    for (std::size_t j = 0; j < matched[i].size(); ++j) matched[i][j] += o.matched[i][j];
}

RecallGrid relaxed_recall_curve(std::vector<EventRecord> pred, std::vector<EventRecord> truth,
                                std::span<const double> dt_grid, std::span<const double> dx_grid,
                                const MatchParams& params) {
  sort_events(pred);
  sort_events(truth);
  RecallGrid g;
  g.dt_grid.assign(dt_grid.begin(), dt_grid.end());
  g.dx_grid.assign(dx_grid.begin(), dx_grid.end());
  g.truth = truth.size();
  g.matched.assign(dt_grid.size(), std::vector<std::size_t>(dx_grid.size(), 0));
  for (std::size_t i = 0; i < dt_grid.size(); ++i)
    for (std::size_t j = 0; j < dx_grid.size(); ++j) {
      const double dt = dt_grid[i], dx = dx_grid[j];
      const Alignment al = needleman_wunsch(
          pred.size(), truth.size(),
          [&](std::size_t a, std::size_t b) -> std::optional<double> {
            const auto &p = pred[a], &t = truth[b];
            if (std::abs(p.time_s - t.time_s) > dt || distance(p.location, t.location) > dx) return std::nullopt;
            return params.match_score;
          },
          params.gap_score);
      g.matched[i][j] = al.matches().size();
    }
  return g;
}

}  // namespace pcrf
