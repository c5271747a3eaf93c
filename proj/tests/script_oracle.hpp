#pragma once

// Random touch scripts and the events they describe, written from the
// touch-level event rules:
//  - a touch whose next touch is by someone else (or which sends the ball
//    out) is a kick toward that node;
//  - a touch that keeps the ball, after a flight from another player, is a
//    control;
//  - a dribble touch (same player before and after) is no event;
//  - the ball leaving play is an out-of-play event by the boundary;
//  - nothing happens at step 0.

#include <random>
#include <vector>

#include "pcrf/events.hpp"
#include "pcrf/tracking.hpp"

namespace pcrf::oracle {

struct ScriptEvent {
  int step;
  EventKind kind;
  NodeId actor;
  NodeId target;
};

/// Touches on a 5 Hz grid (frame == step), first touch at step 0.
inline std::vector<TouchRecord> random_script(std::mt19937_64& rng, int n_players, int n_out, int n_steps) {
  std::uniform_int_distribution<int> gap(1, 8), player(0, n_players - 1), coin(0, 3);
  std::vector<TouchRecord> out;
  NodeId holder = player(rng);
  int step = 0;
  while (step < n_steps) {
    out.push_back({step / 5.0, step, holder, TouchKind::touch});
    step += gap(rng);
    if (step >= n_steps) break;
    const int c = coin(rng);
    if (c == 0 && n_out > 0 && step + 1 < n_steps) {
      // Kick out: one flight step at least, then the boundary record.
      std::uniform_int_distribution<int> side(0, n_out - 1);
      out.push_back({step / 5.0, step, n_players + side(rng), TouchKind::out_of_play});
      break;
    }
    if (c == 1) continue;  // dribble touch by the same holder
    holder = player(rng);
  }
  return out;
}

inline std::vector<ScriptEvent> script_events(const std::vector<TouchRecord>& touches) {
  std::vector<ScriptEvent> out;
  for (std::size_t k = 0; k < touches.size(); ++k) {
    const auto& t = touches[k];
    if (t.kind == TouchKind::out_of_play) {
      out.push_back({t.frame, EventKind::out_of_play, t.node, -1});
      continue;
    }
    if (t.frame == 0) continue;
    const bool has_next = k + 1 < touches.size();
    const NodeId next = has_next ? touches[k + 1].node : t.node;
    const NodeId prev = k > 0 ? touches[k - 1].node : t.node;
    if (next != t.node)
      out.push_back({t.frame, EventKind::kick, t.node, next});
    else if (prev != t.node)
      out.push_back({t.frame, EventKind::control, t.node, -1});
  }
  return out;
}

}  // namespace pcrf::oracle
