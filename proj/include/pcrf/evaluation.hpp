#pragma once

// Edge-level accuracies, event matching (precision / recall / F1) and the
// relaxed-tolerance recall grid.

#include <span>
#include <vector>

#include "pcrf/events.hpp"
#include "pcrf/rules.hpp"
#include "pcrf/score_table.hpp"

namespace pcrf {

struct EdgeMetrics {
  std::size_t steps = 0;
  std::size_t edge_correct = 0;
  std::size_t sender_correct = 0;
  std::size_t receiver_correct = 0;
  std::size_t transitions = 0;  // consecutive predicted pairs
  std::size_t violations = 0;

  double edge_acc() const { return ratio(edge_correct, steps); }
  double sender_acc() const { return ratio(sender_correct, steps); }
  double receiver_acc() const { return ratio(receiver_correct, steps); }
  double violation_rate() const { return ratio(violations, transitions); }

  /// Pools the counts of another path pair.
  void merge(const EdgeMetrics& other);

 private:
  static double ratio(std::size_t a, std::size_t b) {
    return b == 0 ? 0.0 : static_cast<double>(a) / static_cast<double>(b);
  }
};

/// Throws std::invalid_argument on a length mismatch.
EdgeMetrics edge_metrics(std::span<const EdgeId> pred, std::span<const EdgeId> gold, const RuleSet& rules);

struct EventMatch {
  EventRecord pred;
  EventRecord truth;
  double dt_s = 0.0;  // pred.time_s - truth.time_s
};

struct EventMatchReport {
  std::size_t matched = 0;
  std::size_t detected = 0;
  std::size_t truth = 0;
  std::vector<EventMatch> matches;

  double precision() const { return detected == 0 ? 0.0 : static_cast<double>(matched) / detected; }
  double recall() const { return truth == 0 ? 0.0 : static_cast<double>(matched) / truth; }
  double f1() const {
    const double p = precision(), r = recall();
    return p + r == 0.0 ? 0.0 : 2.0 * p * r / (p + r);
  }
  /// Precision has no denominator; it is reported as 0.
  bool precision_undefined() const { return detected == 0; }
  bool recall_undefined() const { return truth == 0; }

  void merge(const EventMatchReport& other);
};

struct MatchParams {
  double dt_max_s = 1.0;
  double match_score = 1.0;
  double gap_score = -0.5;
};

/// Canonical event order used before alignment: time, then kind, actor,
/// target. Events with equal times therefore match the same way whatever
/// order they arrive in.
void sort_events(std::vector<EventRecord>& events);

/// Global alignment where a pair may match only with the same kind, the
/// same actor and |dt| <= dt_max_s.
EventMatchReport match_events(std::vector<EventRecord> pred, std::vector<EventRecord> truth,
                              const MatchParams& params = {});

/// matched[i][j] counts truth events matched under time tolerance
/// dt_grid[i] and distance tolerance dx_grid[j], ignoring kind and actor.
struct RecallGrid {
  std::vector<double> dt_grid;
  std::vector<double> dx_grid;
  std::vector<std::vector<std::size_t>> matched;
  std::size_t truth = 0;

  double recall(std::size_t i, std::size_t j) const {
    return truth == 0 ? 0.0 : static_cast<double>(matched[i][j]) / truth;
  }
  void merge(const RecallGrid& other);
};

RecallGrid relaxed_recall_curve(std::vector<EventRecord> pred, std::vector<EventRecord> truth,
                                std::span<const double> dt_grid, std::span<const double> dx_grid,
                                const MatchParams& params = {});

}  // namespace pcrf
