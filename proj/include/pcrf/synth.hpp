#pragma once

// Seeded synthetic matches with known touch scripts.
//
// Each episode starts with a player on the ball. The holder dribbles toward
// the opponent goal, then kicks to a team-mate, to an opponent (an
// interception) or out of play, which ends the episode shortly after. During
// a flight the receiver runs onto the ball and the passer slows down; the
// opponent nearest the holder presses, everyone else drifts between random
// waypoints around a formation slot.

#include <cstdint>
#include <vector>

#include "pcrf/labeling.hpp"
#include "pcrf/tracking.hpp"

namespace pcrf {

struct SynthConfig {
  std::uint64_t seed = 0;
  int n_per_team = 11;
  int episodes_per_match = 4;
  double episode_length_s = 60.0;
  double episode_gap_s = 30.0;  // match-clock gap between episodes
  double native_hz = 25.0;
  double tempo_s = 2.0;  // mean hold time
  double min_touch_gap_s = 0.6;
  double pass_speed = 15.0;
  double dribble_speed = 4.5;
  double run_speed = 5.0;
  double max_speed = 9.0;
  double noise_sigma = 0.0;  // observation noise on player positions (m)
  double out_prob = 0.05;
  double intercept_prob = 0.15;
  double missed_touch_prob = 0.0;  // annotated touches silently dropped
  bool ball = true;
  Pitch pitch;

  /// Throws ConfigError on out-of-range values.
  void validate() const;
};

struct SynthMatch {
  /// Native-rate episodes; `touches` holds the annotations, which equal the
  /// scripts unless missed_touch_prob > 0.
  std::vector<Episode> episodes;
  std::vector<std::vector<TouchRecord>> scripts;
  /// build_gold_path of each script at the native rate.
  std::vector<GoldPath> gold;
};

/// Deterministic in (config, match_index). Episode ids are
/// "m<match>_e<episode>"; player ids are H01.. and A01...
SynthMatch generate_match(const SynthConfig& config, int match_index = 0);

}  // namespace pcrf
