#pragma once

// Training-data construction: resampling, ball-trajectory touch candidates,
// insertion of missed touches, gold possession paths and sliding windows.

#include <span>
#include <string>
#include <vector>

#include "pcrf/rules.hpp"
#include "pcrf/score_table.hpp"
#include "pcrf/tracking.hpp"

namespace pcrf {

enum class ResampleMode { reject, interpolate };

/// Decimates an episode to `to_hz`. With an integer ratio r = rate/to_hz,
/// frames 0, r, 2r, ... are kept. Otherwise `mode` decides: reject throws
/// ConfigError, interpolate samples positions (and the ball) linearly at
/// multiples of 1/to_hz. Touch times keep full precision; touch frames snap
/// to the nearest retained frame.
Episode resample(const Episode& episode, double to_hz, ResampleMode mode = ResampleMode::reject);

/// Indices of the vertices kept by Ramer-Douglas-Peucker simplification
/// with tolerance `epsilon` (distance to the chord segment). Always
/// includes both endpoints; empty input gives an empty result.
std::vector<std::size_t> rdp_simplify(std::span<const Vec2> points, double epsilon);

struct TouchCandidate {
  double time_s = 0.0;
  int frame = 0;
  Vec2 ball;
};

/// Interior RDP vertices of every contiguous run of ball samples.
std::vector<TouchCandidate> rdp_touch_candidates(const Episode& episode, double epsilon_m);

struct InsertionParams {
  double match_window_s = 0.4;
  double match_score = 1.0;
  double mismatch_score = -1.0;
  double gap_score = -0.5;
  double attribution_radius_m = 3.0;
};

struct InsertionResult {
  std::vector<TouchRecord> touches;
  std::size_t inserted = 0;
  std::size_t dropped = 0;
  std::vector<std::string> warnings;
};

/// Aligns candidates against the annotated touches (pairs within the match
/// window score match_score, other pairs mismatch_score) and inserts every
/// candidate that is not paired within the window. An inserted touch goes to
/// the player nearest the candidate's ball position; candidates with nobody
/// inside the attribution radius are dropped with a warning.
InsertionResult insert_missed_touches(const Episode& episode, std::span<const TouchCandidate> candidates,
                                      const InsertionParams& params = {});

struct GoldPath {
  PossessionPath path;
  /// Steps t >= 1 whose transition (t-1 -> t) is not allowed; normally empty.
  std::vector<int> illegal_steps;
};

/// Interval labelling from the episode's touch list (frames on the episode
/// grid): steps [s_k, s_k+1) get (u, v) for a touch by u followed by a
/// touch by v (a self-loop when v == u, and also after the last touch), and
/// (u, o) when the next record is the ball leaving through o, after which
/// every step is (o, o). Throws DataError when there are no touches, the
/// first touch is after frame 0, times are not strictly increasing, an
/// out-of-play record is not last, or nodes do not fit `rules`.
GoldPath build_gold_path(const Episode& episode, const RuleSet& rules);

/// Window start offsets: every multiple of `stride` s with s + length <= n_steps.
std::vector<int> window_starts(int n_steps, int length = 50, int stride = 5);

struct LabeledWindow {
  TrackingWindow window;
  PossessionPath gold;
};

/// Cuts windows out of an episode and its gold path.
std::vector<LabeledWindow> make_windows(const Episode& episode, const PossessionPath& gold, const Pitch& pitch,
                                        int length = 50, int stride = 5);

}  // namespace pcrf
