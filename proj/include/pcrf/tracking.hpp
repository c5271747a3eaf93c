#pragma once

// Tracking-data containers shared by labeling, scoring and analytics.
//
// Coordinates are meters with the origin at the bottom-left pitch corner,
// x along the pitch length and y along its width. Home defends the x = 0
// goal line, away defends x = length.

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "pcrf/rules.hpp"

namespace pcrf {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  friend Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
  friend Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
  friend Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
  friend bool operator==(const Vec2&, const Vec2&) = default;
  double norm() const { return std::hypot(x, y); }
  double dot(Vec2 o) const { return x * o.x + y * o.y; }
};

inline double distance(Vec2 a, Vec2 b) { return (a - b).norm(); }

struct Pitch {
  double length = 105.0;
  double width = 68.0;

  /// Midpoint of the boundary line for an outside node.
  Vec2 anchor(OutsideSide side) const;
};

enum class Team : std::uint8_t { home, away, outside };

std::string_view to_string(Team team);

/// Canonical node layout of one episode: home players, away players, then
/// the outside nodes.
struct Roster {
  int n_home = 11;
  int n_away = 11;
  int n_out = 4;
  std::vector<std::string> player_ids;  // n_home + n_away entries

  int n_players() const { return n_home + n_away; }
  int n_nodes() const { return n_players() + n_out; }
  Team team_of(NodeId v) const {
    if (v < n_home) return Team::home;
    if (v < n_players()) return Team::away;
    return Team::outside;
  }
  /// Player id, or the boundary name for outside nodes.
  std::string node_name(NodeId v) const;
  /// Inverse of node_name; nullopt when unknown.
  std::optional<NodeId> find(const std::string& name) const;
};

enum class TouchKind : std::uint8_t { touch, out_of_play };

std::string_view to_string(TouchKind kind);
std::optional<TouchKind> touch_kind_from_string(std::string_view name);

/// One annotated ball touch (or the ball leaving play through a boundary,
/// in which case `node` is that outside node).
struct TouchRecord {
  double time_s = 0.0;
  int frame = 0;  // frame index relative to the episode start, current grid
  NodeId node = 0;
  TouchKind kind = TouchKind::touch;
  friend bool operator==(const TouchRecord&, const TouchRecord&) = default;
};

/// A continuous in-play segment. The ball channel is optional and is only
/// read when constructing labels.
struct Episode {
  std::string id;
  double rate_hz = 25.0;
  double start_time_s = 0.0;
  int first_frame = 0;         // source frame number of frame 0
  double native_rate_hz = 0.0;  // source frame rate; 0 means rate_hz
  Roster roster;
  int n_frames = 0;
  std::vector<Vec2> positions;           // n_frames x n_players, frame major
  std::vector<std::optional<Vec2>> ball;  // n_frames entries or empty
  std::vector<TouchRecord> touches;

  Vec2 position(int frame, NodeId player) const {
    return positions[static_cast<std::size_t>(frame) * static_cast<std::size_t>(roster.n_players()) +
                     static_cast<std::size_t>(player)];
  }
  double time_of(int frame) const { return start_time_s + frame / rate_hz; }
  /// Source frame number of a frame on the current grid.
  int native_frame(int frame) const;
};

/// Fixed-rate positions and velocities of every node over `steps` steps.
/// Outside nodes sit at their constant boundary anchors.
struct TrackingWindow {
  std::string episode_id;
  int window_id = 0;
  int start_step = 0;  // offset into the episode grid
  int native_origin = 0;         // source frame number of episode frame 0
  double native_per_step = 1.0;  // source frames per step
  int steps = 0;
  double rate_hz = 5.0;
  double start_time_s = 0.0;
  Roster roster;
  Pitch pitch;
  std::vector<Vec2> positions;   // steps x n_nodes
  std::vector<Vec2> velocities;  // steps x n_nodes

  int n_nodes() const { return roster.n_nodes(); }
  Vec2 position(int t, NodeId v) const {
    return positions[static_cast<std::size_t>(t) * static_cast<std::size_t>(n_nodes()) +
                     static_cast<std::size_t>(v)];
  }
  Vec2 velocity(int t, NodeId v) const {
    return velocities[static_cast<std::size_t>(t) * static_cast<std::size_t>(n_nodes()) +
                      static_cast<std::size_t>(v)];
  }
  double time_of(int t) const { return start_time_s + t / rate_hz; }
  int native_frame(int t) const {
    return native_origin + static_cast<int>(std::lround((start_step + t) * native_per_step));
  }
};

/// Cuts [start, start + steps) out of an episode. Velocities are forward
/// differences on the episode grid (backward at the last frame), so the
/// velocity at step t describes the motion over [t, t+1), the interval a
/// possession state at t covers, and overlapping windows agree on shared
/// frames. Throws DataError on NaN
/// positions or a range outside the episode.
TrackingWindow make_window(const Episode& episode, int start, int steps, const Pitch& pitch,
                           int window_id = 0);

/// The whole episode as one window.
inline TrackingWindow episode_window(const Episode& episode, const Pitch& pitch) {
  return make_window(episode, 0, episode.n_frames, pitch);
}

}  // namespace pcrf
