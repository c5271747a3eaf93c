#include "pcrf/tracking.hpp"

#include <cmath>
#include <string>

#include "pcrf/error.hpp"

namespace pcrf {

Vec2 Pitch::anchor(OutsideSide side) const {
  switch (side) {
    case OutsideSide::left: return {0.0, width / 2};
    case OutsideSide::right: return {length, width / 2};
    case OutsideSide::top: return {length / 2, width};
    case OutsideSide::bottom: return {length / 2, 0.0};
  }
  return {};
}

std::string_view to_string(Team team) {
  switch (team) {
    case Team::home: return "home";
    case Team::away: return "away";
    case Team::outside: return "outside";
  }
  return "?";
}

std::string_view to_string(TouchKind kind) {
  return kind == TouchKind::touch ? "touch" : "out_of_play";
}

std::optional<TouchKind> touch_kind_from_string(std::string_view name) {
  if (name == "touch") return TouchKind::touch;
  if (name == "out_of_play") return TouchKind::out_of_play;
  return std::nullopt;
}

std::string Roster::node_name(NodeId v) const {
  if (v >= 0 && v < n_players()) return player_ids.at(static_cast<std::size_t>(v));
  const int k = v - n_players();
  if (k >= 0 && k < n_out) return std::string(to_string(static_cast<OutsideSide>(k)));
  return "?";
}

std::optional<NodeId> Roster::find(const std::string& name) const {
  for (NodeId v = 0; v < n_players(); ++v)
    if (player_ids[static_cast<std::size_t>(v)] == name) return v;
  if (const auto side = outside_side_from_string(name)) {
    const int k = static_cast<int>(*side);
    if (k < n_out) return n_players() + k;
  }
  return std::nullopt;
}

int Episode::native_frame(int frame) const {
  const double native = native_rate_hz > 0.0 ? native_rate_hz : rate_hz;
  return first_frame + static_cast<int>(std::lround(frame * native / rate_hz));
}

TrackingWindow make_window(const Episode& episode, int start, int steps, const Pitch& pitch,
                           int window_id) {
  if (start < 0 || steps < 1 || start + steps > episode.n_frames)
    throw DataError("make_window: range [" + std::to_string(start) + ", " +
                    std::to_string(start + steps) + ") outside episode '" + episode.id + "'");
  TrackingWindow w;
  w.episode_id = episode.id;
  w.window_id = window_id;
  w.start_step = start;
  w.steps = steps;
  w.rate_hz = episode.rate_hz;
  w.start_time_s = episode.time_of(start);
  w.native_origin = episode.first_frame;
  w.native_per_step = (episode.native_rate_hz > 0.0 ? episode.native_rate_hz : episode.rate_hz) / episode.rate_hz;
  w.roster = episode.roster;
  w.pitch = pitch;
  const int n_players = episode.roster.n_players();
  const int n_nodes = episode.roster.n_nodes();
  w.positions.resize(static_cast<std::size_t>(steps) * static_cast<std::size_t>(n_nodes));
  w.velocities.resize(w.positions.size());
  for (int t = 0; t < steps; ++t) {
    const int f = start + t;
    for (NodeId v = 0; v < n_nodes; ++v) {
      const std::size_t k = static_cast<std::size_t>(t) * static_cast<std::size_t>(n_nodes) +
                            static_cast<std::size_t>(v);
      if (v >= n_players) {
        w.positions[k] = pitch.anchor(static_cast<OutsideSide>(v - n_players));
        w.velocities[k] = {};
        continue;
      }
      const Vec2 p = episode.position(f, v);
      if (!std::isfinite(p.x) || !std::isfinite(p.y))
        throw DataError("make_window: non-finite position in episode '" + episode.id + "' frame " +
                        std::to_string(f));
      w.positions[k] = p;
      if (episode.n_frames < 2) {
        w.velocities[k] = {};
      } else if (f + 1 == episode.n_frames) {
        w.velocities[k] = episode.rate_hz * (p - episode.position(f - 1, v));
      } else {
        w.velocities[k] = episode.rate_hz * (episode.position(f + 1, v) - p);
      }
    }
  }
  return w;
}

}  // namespace pcrf
