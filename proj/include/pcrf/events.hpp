#pragma once

// On-ball events read off the change points of a possession path.

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "pcrf/rules.hpp"
#include "pcrf/tracking.hpp"

namespace pcrf {

enum class EventKind : std::uint8_t { control, kick, out_of_play };

std::string_view to_string(EventKind kind);
std::optional<EventKind> event_kind_from_string(std::string_view name);

struct EventRecord {
  int step = 0;           // step on the decode grid, relative to the window
  double time_s = 0.0;
  int native_frame = 0;   // nearest source frame
  EventKind kind = EventKind::control;
  NodeId actor = 0;       // player, or the outside node for out_of_play
  NodeId target = -1;     // kick receiver, -1 otherwise
  Vec2 location;          // actor position (boundary anchor for out_of_play)
  friend bool operator==(const EventRecord&, const EventRecord&) = default;
};

enum class TransitionClass : std::uint8_t { continuation, control, kick, out_of_play, violation };

std::string_view to_string(TransitionClass c);

/// continuation when prev == next, violation when the pair is not allowed,
/// otherwise the event class of `next`.
TransitionClass classify_transition(EdgeId prev, EdgeId next, const RuleSet& rules);

/// One event at every step t >= 1 with path[t-1] != path[t], classified by
/// the topology of path[t]: a player self-loop is a control, an edge
/// between distinct nodes a kick by its sender, an outside self-loop the
/// ball going out of play. Illegal transitions still produce the event of
/// the new edge. Throws std::invalid_argument on a length mismatch.
std::vector<EventRecord> extract_events(std::span<const EdgeId> path, const TrackingWindow& window,
                                        const RuleSet& rules);

}  // namespace pcrf
