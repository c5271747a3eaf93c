#include "pcrf/events.hpp"

#include <stdexcept>

namespace pcrf {

std::string_view to_string(EventKind kind) {
  switch (kind) {
    case EventKind::control: return "control";
    case EventKind::kick: return "kick";
    case EventKind::out_of_play: return "out_of_play";
  }
  return "?";
}

std::optional<EventKind> event_kind_from_string(std::string_view name) {
  if (name == "control") return EventKind::control;
  if (name == "kick") return EventKind::kick;
  if (name == "out_of_play") return EventKind::out_of_play;
  return std::nullopt;
}

std::string_view to_string(TransitionClass c) {
  switch (c) {
    case TransitionClass::continuation: return "continuation";
    case TransitionClass::control: return "control";
    case TransitionClass::kick: return "kick";
    case TransitionClass::out_of_play: return "out_of_play";
    case TransitionClass::violation: return "violation";
  }
  return "?";
}

namespace {

EventKind kind_of(const Edge& e, const RuleSet& rules) {
  if (e.sender != e.receiver) return EventKind::kick;
  return rules.is_outside(e.sender) ? EventKind::out_of_play : EventKind::control;
}

}  // namespace

TransitionClass classify_transition(EdgeId prev, EdgeId next, const RuleSet& rules) {
  if (prev == next) return TransitionClass::continuation;
  if (!rules.is_allowed(prev, next)) return TransitionClass::violation;
  switch (kind_of(rules.decode(next), rules)) {
    case EventKind::control: return TransitionClass::control;
    case EventKind::kick: return TransitionClass::kick;
    case EventKind::out_of_play: return TransitionClass::out_of_play;
  }
  return TransitionClass::violation;
}

std::vector<EventRecord> extract_events(std::span<const EdgeId> path, const TrackingWindow& window,
                                        const RuleSet& rules) {
  if (path.size() != static_cast<std::size_t>(window.steps))
    throw std::invalid_argument("extract_events: path length does not match the window");
  std::vector<EventRecord> out;
  for (int t = 1; t < window.steps; ++t) {
    const EdgeId prev = path[static_cast<std::size_t>(t - 1)], next = path[static_cast<std::size_t>(t)];
    if (prev == next) continue;
    const Edge e = rules.decode(next);
    EventRecord ev;
    ev.step = t;
    ev.time_s = window.time_of(t);
    ev.native_frame = window.native_frame(t);
    ev.kind = kind_of(e, rules);
    ev.actor = e.sender;
    ev.target = ev.kind == EventKind::kick ? e.receiver : -1;
    ev.location = window.position(t, e.sender);
    out.push_back(ev);
  }
  return out;
}

}  // namespace pcrf
