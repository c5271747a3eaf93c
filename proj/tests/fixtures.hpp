#pragma once

#include <functional>
#include <string>

#include "pcrf/tracking.hpp"

namespace pcrf::fixtures {

/// Episode whose player positions come from `pos(frame, player)`.
inline Episode make_episode(int n_home, int n_away, int n_frames, double rate_hz,
                            const std::function<Vec2(int, int)>& pos, int n_out = 4) {
  Episode ep;
  ep.id = "ep";
  ep.rate_hz = rate_hz;
  ep.roster.n_home = n_home;
  ep.roster.n_away = n_away;
  ep.roster.n_out = n_out;
  for (int p = 0; p < n_home + n_away; ++p)
    ep.roster.player_ids.push_back((p < n_home ? "h" : "a") + std::to_string(p));
  ep.n_frames = n_frames;
  for (int f = 0; f < n_frames; ++f)
    for (int p = 0; p < n_home + n_away; ++p) ep.positions.push_back(pos(f, p));
  return ep;
}

}  // namespace pcrf::fixtures
