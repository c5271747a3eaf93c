#pragma once

// Hand-crafted node and edge features computed from a TrackingWindow.
//
// Edge feature vector phi(e, t) = [pair(s, r); node(s); node(r)] for the
// edge e = (s, r). Transition features are never materialised in bulk: the
// transition vector phi2(e', e, t) = [phi(e', t-1); phi(e, t); 1[e' == e]]
// is built on demand by `transition_features`.

#include <array>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "pcrf/rules.hpp"
#include "pcrf/tracking.hpp"

namespace pcrf {

inline constexpr int kNodeFeatures = 7;
inline constexpr int kPairFeatures = 7;
inline constexpr int kEdgeFeatures = kPairFeatures + 2 * kNodeFeatures;
inline constexpr int kTransitionFeatures = 2 * kEdgeFeatures + 1;

namespace node_feature {
enum : int {
  speed,
  accel,
  nearest_opponent,
  nearest_teammate,
  own_goal_line,
  opp_goal_line,
  is_outside,
};
}

namespace pair_feature {
enum : int {
  distance,
  distance_rate,
  receiver_velocity_cos,
  sender_speed,
  same_team,
  self_loop,
  receiver_outside,
};
}

extern const std::array<std::string_view, kNodeFeatures> kNodeFeatureNames;
extern const std::array<std::string_view, kPairFeatures> kPairFeatureNames;

/// Names of the kEdgeFeatures entries, e.g. "pair.distance", "sender.speed".
std::vector<std::string> edge_feature_names();
/// "prev.<edge name>", "next.<edge name>", then "identity".
std::vector<std::string> transition_feature_names();

struct FeatureTables {
  int steps = 0;
  int n_nodes = 0;
  int n_edges = 0;
  std::vector<double> node;  // steps x n_nodes x kNodeFeatures
  std::vector<double> edge;  // steps x n_edges x kEdgeFeatures

  std::span<const double> node_row(int t, NodeId v) const {
    return {node.data() + (static_cast<std::size_t>(t) * static_cast<std::size_t>(n_nodes) +
                           static_cast<std::size_t>(v)) * kNodeFeatures,
            kNodeFeatures};
  }
  std::span<const double> edge_row(int t, EdgeId e) const {
    return {edge.data() + (static_cast<std::size_t>(t) * static_cast<std::size_t>(n_edges) +
                           static_cast<std::size_t>(e)) * kEdgeFeatures,
            kEdgeFeatures};
  }
  std::span<double> edge_row(int t, EdgeId e) {
    return {edge.data() + (static_cast<std::size_t>(t) * static_cast<std::size_t>(n_edges) +
                           static_cast<std::size_t>(e)) * kEdgeFeatures,
            kEdgeFeatures};
  }
};

/// Deterministic node and edge features for every step. Throws
/// std::invalid_argument when the window roster disagrees with `rules`, and
/// DataError on non-finite positions or velocities.
FeatureTables extract_features(const TrackingWindow& window, const RuleSet& rules);

/// Writes phi2(prev, next, t) (1 <= t < steps) into `out` (size
/// kTransitionFeatures).
void transition_features(const FeatureTables& features, int t, EdgeId prev, EdgeId next,
                         std::span<double> out);

}  // namespace pcrf
