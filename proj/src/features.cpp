#include "pcrf/features.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "pcrf/error.hpp"

namespace pcrf {

const std::array<std::string_view, kNodeFeatures> kNodeFeatureNames = {
    "speed",         "accel",         "nearest_opponent", "nearest_teammate",
    "own_goal_line", "opp_goal_line", "is_outside",
};

const std::array<std::string_view, kPairFeatures> kPairFeatureNames = {
    "distance",  "distance_rate", "receiver_velocity_cos", "sender_speed",
    "same_team", "self_loop",     "receiver_outside",
};

std::vector<std::string> edge_feature_names() {
  std::vector<std::string> names;
  for (auto n : kPairFeatureNames) names.push_back("pair." + std::string(n));
  for (auto n : kNodeFeatureNames) names.push_back("sender." + std::string(n));
  for (auto n : kNodeFeatureNames) names.push_back("receiver." + std::string(n));
  return names;
}

std::vector<std::string> transition_feature_names() {
  std::vector<std::string> names;
  const auto edge = edge_feature_names();
  for (const auto& n : edge) names.push_back("prev." + n);
  for (const auto& n : edge) names.push_back("next." + n);
  names.push_back("identity");
  return names;
}

namespace {

constexpr double kTiny = 1e-9;

void node_features(const TrackingWindow& w, FeatureTables& out) {
  const Roster& roster = w.roster;
  const int n_players = roster.n_players();
  // Cap for "no such player" distances (one-team or single-player rosters).
  const double cap = std::hypot(w.pitch.length, w.pitch.width);
  for (int t = 0; t < w.steps; ++t) {
    for (NodeId v = 0; v < w.n_nodes(); ++v) {
      double* f = out.node.data() + (static_cast<std::size_t>(t) * static_cast<std::size_t>(w.n_nodes()) +
                                     static_cast<std::size_t>(v)) * kNodeFeatures;
      const Vec2 p = w.position(t, v);
      const Team team = roster.team_of(v);
      double nearest_opp = cap, nearest_mate = cap;
      for (NodeId u = 0; u < n_players; ++u) {
        if (u == v) continue;
        const double d = distance(p, w.position(t, u));
        // Outside nodes have no team; both slots hold the nearest player.
        if (team == Team::outside || roster.team_of(u) != team) nearest_opp = std::min(nearest_opp, d);
        if (team == Team::outside || roster.team_of(u) == team) nearest_mate = std::min(nearest_mate, d);
      }
      double accel = 0.0;
      if (w.steps > 1) {
        const int a = t == 0 ? 1 : t;
        accel = w.rate_hz * (w.velocity(a, v) - w.velocity(a - 1, v)).norm();
      }
      f[node_feature::speed] = w.velocity(t, v).norm();
      f[node_feature::accel] = accel;
      f[node_feature::nearest_opponent] = nearest_opp;
      f[node_feature::nearest_teammate] = nearest_mate;
      if (team == Team::outside) {
        f[node_feature::own_goal_line] = 0.0;
        f[node_feature::opp_goal_line] = 0.0;
      } else {
        const double to_left = p.x, to_right = w.pitch.length - p.x;
        f[node_feature::own_goal_line] = team == Team::home ? to_left : to_right;
        f[node_feature::opp_goal_line] = team == Team::home ? to_right : to_left;
      }
      f[node_feature::is_outside] = team == Team::outside ? 1.0 : 0.0;
    }
  }
}

}  // namespace

FeatureTables extract_features(const TrackingWindow& w, const RuleSet& rules) {
  if (w.roster.n_players() != rules.n_players() || w.roster.n_out != rules.n_out())
    throw std::invalid_argument("extract_features: window roster does not match rule set");
  if (w.steps < 1) throw std::invalid_argument("extract_features: empty window");
  const std::size_t cells = static_cast<std::size_t>(w.steps) * static_cast<std::size_t>(w.n_nodes());
  if (w.positions.size() != cells || w.velocities.size() != cells)
    throw std::invalid_argument("extract_features: window arrays have the wrong size");
  for (std::size_t k = 0; k < cells; ++k) {
    const Vec2 p = w.positions[k], v = w.velocities[k];
    if (!std::isfinite(p.x) || !std::isfinite(p.y) || !std::isfinite(v.x) || !std::isfinite(v.y))
      throw DataError("extract_features: non-finite tracking value in window of episode '" +
                      w.episode_id + "'");
  }

  FeatureTables out;
  out.steps = w.steps;
  out.n_nodes = w.n_nodes();
  out.n_edges = rules.n_edges();
  out.node.assign(cells * kNodeFeatures, 0.0);
  out.edge.assign(static_cast<std::size_t>(w.steps) * static_cast<std::size_t>(out.n_edges) * kEdgeFeatures,
                  0.0);
  node_features(w, out);

  const int n = w.n_nodes();
  for (int t = 0; t < w.steps; ++t) {
    for (NodeId s = 0; s < n; ++s) {
      const Vec2 ps = w.position(t, s), vs = w.velocity(t, s);
      for (NodeId r = 0; r < n; ++r) {
        const EdgeId e = rules.encode(s, r);
        auto f = out.edge_row(t, e);
        const Vec2 dp = w.position(t, r) - ps;
        const Vec2 dv = w.velocity(t, r) - vs;
        const Vec2 vr = w.velocity(t, r);
        const double d = dp.norm();
        f[pair_feature::distance] = d;
        f[pair_feature::distance_rate] = d > kTiny ? dp.dot(dv) / d : 0.0;
        const double vr_norm = vr.norm();
        f[pair_feature::receiver_velocity_cos] =
            (d > kTiny && vr_norm > kTiny) ? vr.dot(dp) / (vr_norm * d) : 0.0;
        f[pair_feature::sender_speed] = vs.norm();
        const Team ts = w.roster.team_of(s), tr = w.roster.team_of(r);
        f[pair_feature::same_team] = (ts != Team::outside && ts == tr) ? 1.0 : 0.0;
        f[pair_feature::self_loop] = s == r ? 1.0 : 0.0;
        f[pair_feature::receiver_outside] = tr == Team::outside ? 1.0 : 0.0;
        const auto ns = out.node_row(t, s), nr = out.node_row(t, r);
        std::copy(ns.begin(), ns.end(), f.begin() + kPairFeatures);
        std::copy(nr.begin(), nr.end(), f.begin() + kPairFeatures + kNodeFeatures);
      }
    }
  }
  return out;
}

void transition_features(const FeatureTables& features, int t, EdgeId prev, EdgeId next,
                         std::span<double> out) {
  if (t < 1 || t >= features.steps) throw std::out_of_range("transition_features: bad step");
  if (out.size() != static_cast<std::size_t>(kTransitionFeatures))
    throw std::invalid_argument("transition_features: output has the wrong size");
  const auto a = features.edge_row(t - 1, prev);
  const auto b = features.edge_row(t, next);
  std::copy(a.begin(), a.end(), out.begin());
  std::copy(b.begin(), b.end(), out.begin() + kEdgeFeatures);
  out[2 * kEdgeFeatures] = prev == next ? 1.0 : 0.0;
}

}  // namespace pcrf
