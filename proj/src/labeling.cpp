#include "pcrf/labeling.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>

#include "pcrf/align.hpp"
#include "pcrf/error.hpp"

namespace pcrf {

namespace {

double point_segment_distance(Vec2 p, Vec2 a, Vec2 b) {
  const Vec2 ab = b - a;
  const double len2 = ab.dot(ab);
  if (len2 == 0.0) return distance(p, a);
  const double s = std::clamp((p - a).dot(ab) / len2, 0.0, 1.0);
  return distance(p, a + s * ab);
}

int snap(double x, int n) { return std::clamp(static_cast<int>(std::lround(x)), 0, std::max(0, n - 1)); }

}  // namespace

Episode resample(const Episode& ep, double to_hz, ResampleMode mode) {
  if (!(to_hz > 0.0)) throw ConfigError("resample: target rate must be positive");
  const double from_hz = ep.rate_hz;
  Episode out = ep;
  out.rate_hz = to_hz;
  out.native_rate_hz = ep.native_rate_hz > 0.0 ? ep.native_rate_hz : from_hz;
  out.positions.clear();
  out.ball.clear();
  const int n_players = ep.roster.n_players();
  const double ratio = from_hz / to_hz;
  const double rounded = std::round(ratio);
  const bool integer = rounded >= 1.0 && std::abs(ratio - rounded) < 1e-9;

  if (integer) {
    const int r = static_cast<int>(rounded);
    out.n_frames = ep.n_frames == 0 ? 0 : (ep.n_frames + r - 1) / r;
    for (int k = 0; k < out.n_frames; ++k) {
      for (NodeId p = 0; p < n_players; ++p) out.positions.push_back(ep.position(k * r, p));
      if (!ep.ball.empty()) out.ball.push_back(ep.ball[static_cast<std::size_t>(k * r)]);
    }
    for (auto& touch : out.touches) touch.frame = snap(static_cast<double>(touch.frame) / r, out.n_frames);
    return out;
  }

  if (mode == ResampleMode::reject)
    throw ConfigError("resample: " + std::to_string(from_hz) + " Hz -> " + std::to_string(to_hz) +
                      " Hz is not an integer decimation (enable interpolation to allow it)");
  out.n_frames = ep.n_frames == 0 ? 0 : static_cast<int>(std::floor((ep.n_frames - 1) / ratio + 1e-9)) + 1;
  for (int k = 0; k < out.n_frames; ++k) {
    const double x = k * ratio;
    const int f0 = std::min(static_cast<int>(std::floor(x)), ep.n_frames - 1);
    const int f1 = std::min(f0 + 1, ep.n_frames - 1);
    const double a = x - f0;
    for (NodeId p = 0; p < n_players; ++p)
      out.positions.push_back((1.0 - a) * ep.position(f0, p) + a * ep.position(f1, p));
    if (!ep.ball.empty()) {
      const auto& b0 = ep.ball[static_cast<std::size_t>(f0)];
      const auto& b1 = ep.ball[static_cast<std::size_t>(f1)];
      out.ball.push_back(b0 && b1 ? std::optional<Vec2>((1.0 - a) * *b0 + a * *b1) : std::nullopt);
    }
  }
  for (auto& touch : out.touches) touch.frame = snap((touch.time_s - ep.start_time_s) * to_hz, out.n_frames);
  return out;
}

std::vector<std::size_t> rdp_simplify(std::span<const Vec2> points, double epsilon) {
  const std::size_t n = points.size();
  if (n == 0) return {};
  if (n == 1) return {0};
  std::vector<char> keep(n, 0);
  keep[0] = keep[n - 1] = 1;
  std::vector<std::pair<std::size_t, std::size_t>> stack{{0, n - 1}};
  while (!stack.empty()) {
    const auto [lo, hi] = stack.back();
    stack.pop_back();
    double best = -1.0;
    std::size_t best_k = lo;
    for (std::size_t k = lo + 1; k < hi; ++k) {
      const double d = point_segment_distance(points[k], points[lo], points[hi]);
      if (d > best) {
        best = d;
        best_k = k;
      }
    }
    if (best > epsilon) {
      keep[best_k] = 1;
      stack.emplace_back(lo, best_k);
      stack.emplace_back(best_k, hi);
    }
  }
  std::vector<std::size_t> out;
  for (std::size_t k = 0; k < n; ++k)
    if (keep[k]) out.push_back(k);
  return out;
}

std::vector<TouchCandidate> rdp_touch_candidates(const Episode& ep, double epsilon_m) {
  std::vector<TouchCandidate> out;
  const int n = static_cast<int>(ep.ball.size());
  int f = 0;
  while (f < n) {
    if (!ep.ball[static_cast<std::size_t>(f)]) {
      ++f;
      continue;
    }
    int end = f;
    std::vector<Vec2> run;
    while (end < n && ep.ball[static_cast<std::size_t>(end)]) run.push_back(*ep.ball[static_cast<std::size_t>(end++)]);
    const auto kept = rdp_simplify(run, epsilon_m);
    for (std::size_t k : kept) {
      if (k == 0 || k + 1 == run.size()) continue;
      const int frame = f + static_cast<int>(k);
      out.push_back({ep.time_of(frame), frame, run[k]});
    }
    f = end;
  }
  return out;
}

InsertionResult insert_missed_touches(const Episode& ep, std::span<const TouchCandidate> candidates,
                                      const InsertionParams& params) {
  InsertionResult result;
  result.touches = ep.touches;
  const auto& touches = ep.touches;
  const auto within = [&](std::size_t i, std::size_t j) {
    return std::abs(touches[i].time_s - candidates[j].time_s) <= params.match_window_s;
  };
  const Alignment al = needleman_wunsch(
      touches.size(), candidates.size(),
      [&](std::size_t i, std::size_t j) -> std::optional<double> {
        return within(i, j) ? params.match_score : params.mismatch_score;
      },
      params.gap_score);

  std::vector<char> aligned(candidates.size(), 0);
  for (const auto& p : al.matches())
    if (within(static_cast<std::size_t>(p.a), static_cast<std::size_t>(p.b))) aligned[static_cast<std::size_t>(p.b)] = 1;

  double out_time = std::numeric_limits<double>::infinity();
  for (const auto& t : touches)
    if (t.kind == TouchKind::out_of_play) out_time = std::min(out_time, t.time_s);

  const int n_players = ep.roster.n_players();
  for (std::size_t j = 0; j < candidates.size(); ++j) {
    if (aligned[j]) continue;
    const auto& c = candidates[j];
    auto warn = [&](const std::string& why) {
      ++result.dropped;
      result.warnings.push_back("episode '" + ep.id + "': candidate touch at " + std::to_string(c.time_s) +
                                " s dropped (" + why + ")");
    };
    if (c.frame < 0 || c.frame >= ep.n_frames) {
      warn("outside the episode");
      continue;
    }
    if (c.time_s >= out_time) {
      warn("after the ball left play");
      continue;
    }
    NodeId best = -1;
    double best_d = std::numeric_limits<double>::infinity();
    for (NodeId p = 0; p < n_players; ++p) {
      const double d = distance(ep.position(c.frame, p), c.ball);
      if (d < best_d) {
        best_d = d;
        best = p;
      }
    }
    if (best < 0 || best_d > params.attribution_radius_m) {
      warn("nearest player " + std::to_string(best_d) + " m from the ball");
      continue;
    }
    const bool clash = std::any_of(result.touches.begin(), result.touches.end(),
                                   [&](const TouchRecord& t) { return t.time_s == c.time_s; });
    if (clash) {
      warn("same time as an existing touch");
      continue;
    }
    result.touches.push_back({c.time_s, c.frame, best, TouchKind::touch});
    ++result.inserted;
  }
  std::stable_sort(result.touches.begin(), result.touches.end(),
                   [](const TouchRecord& a, const TouchRecord& b) { return a.time_s < b.time_s; });
  return result;
}

GoldPath build_gold_path(const Episode& ep, const RuleSet& rules) {
  if (ep.roster.n_players() != rules.n_players() || ep.roster.n_out != rules.n_out())
    throw DataError("build_gold_path: episode '" + ep.id + "' roster does not match the rule set");
  const auto& touches = ep.touches;
  if (touches.empty()) throw DataError("build_gold_path: episode '" + ep.id + "' has no touches");
  if (touches.front().frame > 0)
    throw DataError("build_gold_path: episode '" + ep.id + "' first touch is after the first frame");
  for (std::size_t k = 0; k < touches.size(); ++k) {
    const auto& t = touches[k];
    if (k > 0 && !(t.time_s > touches[k - 1].time_s))
      throw DataError("build_gold_path: episode '" + ep.id + "' touch times are not strictly increasing at record " +
                      std::to_string(k));
    if (k > 0 && t.frame < touches[k - 1].frame)
      throw DataError("build_gold_path: episode '" + ep.id + "' touch frames go backwards at record " +
                      std::to_string(k));
    if (t.kind == TouchKind::touch && !rules.is_player(t.node))
      throw DataError("build_gold_path: episode '" + ep.id + "' touch by a non-player node");
    if (t.kind == TouchKind::out_of_play) {
      if (!rules.is_outside(t.node))
        throw DataError("build_gold_path: episode '" + ep.id + "' out-of-play record without a boundary");
      if (k == 0) throw DataError("build_gold_path: episode '" + ep.id + "' starts out of play");
      if (k + 1 != touches.size())
        throw DataError("build_gold_path: episode '" + ep.id + "' has records after the ball left play");
    }
  }

  const int n = ep.n_frames;
  GoldPath gold;
  gold.path.assign(static_cast<std::size_t>(n), -1);
  auto fill = [&](int from, int to, EdgeId e) {
    for (int s = std::max(0, from); s < std::min(n, to); ++s) gold.path[static_cast<std::size_t>(s)] = e;
  };
  for (std::size_t k = 0; k < touches.size(); ++k) {
    const auto& t = touches[k];
    if (t.kind == TouchKind::out_of_play) {
      fill(t.frame, n, rules.encode(t.node, t.node));
      continue;
    }
    const bool last = k + 1 == touches.size();
    const NodeId next = last ? t.node : touches[k + 1].node;
    fill(t.frame, last ? n : touches[k + 1].frame, rules.encode(t.node, next));
  }
  for (int s = 1; s < n; ++s)
    if (!rules.is_allowed(gold.path[static_cast<std::size_t>(s - 1)], gold.path[static_cast<std::size_t>(s)]))
      gold.illegal_steps.push_back(s);
  return gold;
}

std::vector<int> window_starts(int n_steps, int length, int stride) {
  if (length < 1 || stride < 1) throw ConfigError("window length and stride must be positive");
  std::vector<int> out;
  for (int s = 0; s + length <= n_steps; s += stride) out.push_back(s);
  return out;
}

std::vector<LabeledWindow> make_windows(const Episode& ep, const PossessionPath& gold, const Pitch& pitch,
                                        int length, int stride) {
  if (gold.size() != static_cast<std::size_t>(ep.n_frames))
    throw DataError("make_windows: gold path length does not match episode '" + ep.id + "'");
  std::vector<LabeledWindow> out;
  int id = 0;
  for (int s : window_starts(ep.n_frames, length, stride)) {
    LabeledWindow lw;
    lw.window = make_window(ep, s, length, pitch, id++);
    lw.gold.assign(gold.begin() + s, gold.begin() + s + length);
    out.push_back(std::move(lw));
  }
  return out;
}

}  // namespace pcrf
