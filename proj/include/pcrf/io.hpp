#pragma once

// CSV formats shared by the CLI, the synthetic generator and the exporter.
//
//   tracking: episode_id,frame,time_s,team,player_id,x_m,y_m
//             (ball rows: player_id "ball", team empty)
//   touches:  episode_id,frame,time_s,player_id,kind
//             (kind touch|out_of_play; out-of-play rows name the boundary)
//   paths:    episode_id,step,sender_id,receiver_id
//   events:   episode_id,step,time_s,kind,actor_id,target_id,x_m,y_m
//
// Frames are source frame numbers. Readers report malformed rows as
// DataError "<file>:<line>: <reason>".

#include <map>
#include <string>
#include <vector>

#include "pcrf/events.hpp"
#include "pcrf/score_table.hpp"
#include "pcrf/tracking.hpp"

namespace pcrf {

void write_tracking_csv(const std::string& path, const std::vector<Episode>& episodes);

/// Episodes in order of first appearance. Home players come first, each
/// team in order of first appearance; every frame between an episode's
/// first and last must list every player. `rate_hz` is the frame rate of
/// the file and is checked against the time column.
std::vector<Episode> read_tracking_csv(const std::string& path, double rate_hz, int n_out = 4);

void write_touches_csv(const std::string& path, const std::vector<Episode>& episodes);

/// Replaces the touches of the matching episodes (sorted by time).
void read_touches_csv(const std::string& path, std::vector<Episode>& episodes);

struct PathRecord {
  std::string episode_id;
  const Roster* roster = nullptr;
  PossessionPath path;
};

void write_paths_csv(const std::string& path, const std::vector<PathRecord>& paths);

/// Paths keyed by episode id; node names resolve through `rosters`.
std::map<std::string, PossessionPath> read_paths_csv(const std::string& path,
                                                     const std::map<std::string, const Roster*>& rosters);

struct EventSet {
  std::string episode_id;
  const Roster* roster = nullptr;
  std::vector<EventRecord> events;
};

void write_events_csv(const std::string& path, const std::vector<EventSet>& sets);
std::map<std::string, std::vector<EventRecord>> read_events_csv(const std::string& path,
                                                                const std::map<std::string, const Roster*>& rosters);

}  // namespace pcrf
