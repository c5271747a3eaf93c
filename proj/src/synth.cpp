#include "pcrf/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>

#include "pcrf/error.hpp"

namespace pcrf {

namespace {

Vec2 unit(Vec2 v) {
  const double n = v.norm();
  return n > 1e-9 ? (1.0 / n) * v : Vec2{};
}

Vec2 towards(Vec2 from, Vec2 to, double speed, double slow_radius = 0.0) {
  const Vec2 d = to - from;
  const double n = d.norm();
  if (slow_radius > 0.0) speed = std::min(speed, speed * n / slow_radius);
  return speed * unit(d);
}

std::string player_id(char team, int k) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%c%02d", team, k + 1);
  return buf;
}

class EpisodeSim {
 public:
  EpisodeSim(const SynthConfig& cfg, std::mt19937_64& rng) : cfg_(cfg), rng_(rng) {}

  Episode run(std::vector<TouchRecord>& script, const Roster& roster, double start_time_s) {
    const int n = roster.n_players();
    const double hz = cfg_.native_hz, dt = 1.0 / hz;
    const int max_frames = static_cast<int>(std::lround(cfg_.episode_length_s * hz));
    const int min_gap = static_cast<int>(std::ceil(cfg_.min_touch_gap_s * hz - 1e-9));
    const Pitch& pitch = cfg_.pitch;
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    std::normal_distribution<double> noise(0.0, 1.0);

    // Formation slots: home in the left half, away mirrored.
    slot_.assign(static_cast<std::size_t>(n), {});
    pos_.assign(static_cast<std::size_t>(n), {});
    vel_.assign(static_cast<std::size_t>(n), {});
    wp_.assign(static_cast<std::size_t>(n), {});
    wp_until_.assign(static_cast<std::size_t>(n), 0);
    for (NodeId p = 0; p < n; ++p) {
      const bool home = roster.team_of(p) == Team::home;
      const int k = home ? p : p - roster.n_home;
      const int size = home ? roster.n_home : roster.n_away;
      const int lines = std::max(1, std::min(4, size));
      const int line = k % lines;
      const int per_line = (size + lines - 1) / lines;
      const int slot_in_line = k / lines;
      double x = pitch.length * (0.1 + 0.35 * (line + 0.5) / lines);
      if (!home) x = pitch.length - x;
      const double y = pitch.width * (slot_in_line + 0.5) / per_line;
      slot_[static_cast<std::size_t>(p)] = {x, y};
      pos_[static_cast<std::size_t>(p)] = clamp_pitch(Vec2{x + 4.0 * (u01(rng_) - 0.5), y + 4.0 * (u01(rng_) - 0.5)});
    }

    std::uniform_int_distribution<int> pick(0, n - 1);
    NodeId holder = pick(rng_);
    NodeId receiver = -1;
    int kicker = -1;
    int phase_end = -1;  // kick frame during a hold, arrival frame during a flight
    Vec2 kick_pos, out_target, ball_pos = pos_[static_cast<std::size_t>(holder)];
    int out_node = -1;
    int end_frame = max_frames;
    Vec2 dribble_wp;

    auto start_hold = [&](int frame) {
      std::exponential_distribution<double> extra(1.0 / std::max(1e-3, cfg_.tempo_s - cfg_.min_touch_gap_s));
      const double hold = cfg_.min_touch_gap_s + (cfg_.tempo_s > cfg_.min_touch_gap_s ? extra(rng_) : 0.0);
      phase_end = frame + std::max(min_gap, static_cast<int>(std::lround(hold * hz)));
      dribble_wp = dribble_target(roster, holder);
    };

    script.clear();
    script.push_back({start_time_s, 0, holder, TouchKind::touch});
    start_hold(0);
    bool in_flight = false;
    int flight_start = 0;

    Episode ep;
    ep.rate_hz = hz;
    ep.start_time_s = start_time_s;
    ep.first_frame = static_cast<int>(std::lround(start_time_s * hz));
    ep.roster = roster;

    for (int f = 0; f < end_frame; ++f) {
      // Events scheduled for this frame.
      if (out_node < 0 && f == phase_end && f > 0) {
        if (!in_flight) {
          kick(roster, holder, f, min_gap, max_frames, receiver, out_node, out_target, phase_end, kick_pos);
          if (phase_end < 0) {
            phase_end = max_frames;  // no time left for a flight: keep the ball
          } else {
            script.push_back({start_time_s + f / hz, f, holder, TouchKind::touch});
            kicker = holder;
            flight_start = f;
            in_flight = true;
            if (out_node >= 0) {
              script.push_back({start_time_s + phase_end / hz, phase_end, out_node, TouchKind::out_of_play});
              end_frame = std::min(max_frames, phase_end + static_cast<int>(hz) + 1);
            }
          }
        } else {
          holder = receiver;
          receiver = -1;
          in_flight = false;
          script.push_back({start_time_s + f / hz, f, holder, TouchKind::touch});
          start_hold(f);
        }
      }
      // Ball.
      if (in_flight) {
        const int arrival = out_node >= 0 ? script.back().frame : phase_end;
        const double s = std::clamp(static_cast<double>(f - flight_start) / std::max(1, arrival - flight_start), 0.0, 1.0);
        const Vec2 target = out_node >= 0 ? out_target : pos_[static_cast<std::size_t>(receiver)];
        ball_pos = kick_pos + s * (target - kick_pos);
      } else {
        const Vec2 h = pos_[static_cast<std::size_t>(holder)];
        ball_pos = h + 0.5 * unit(vel_[static_cast<std::size_t>(holder)]);
      }

      // Record the frame, then move everyone.
      for (NodeId p = 0; p < n; ++p) {
        Vec2 q = pos_[static_cast<std::size_t>(p)];
        if (cfg_.noise_sigma > 0.0) q = q + Vec2{cfg_.noise_sigma * noise(rng_), cfg_.noise_sigma * noise(rng_)};
        ep.positions.push_back(q);
      }
      if (cfg_.ball) ep.ball.emplace_back(ball_pos);

      NodeId presser = -1;
      if (!in_flight) {
        double best = 1e300;
        for (NodeId p = 0; p < n; ++p) {
          if (roster.team_of(p) == roster.team_of(holder)) continue;
          const double d = distance(pos_[static_cast<std::size_t>(p)], pos_[static_cast<std::size_t>(holder)]);
          if (d < best) {
            best = d;
            presser = p;
          }
        }
      }
      for (NodeId p = 0; p < n; ++p) {
        const auto i = static_cast<std::size_t>(p);
        Vec2 desired;
        if (!in_flight && p == holder) {
          if (distance(pos_[i], dribble_wp) < 1.5) dribble_wp = dribble_target(roster, holder);
          desired = towards(pos_[i], dribble_wp, cfg_.dribble_speed);
        } else if (in_flight && p == receiver && out_node < 0) {
          desired = towards(pos_[i], ball_pos, cfg_.run_speed, 1.0);
        } else if (p == presser) {
          const Vec2 h = pos_[static_cast<std::size_t>(holder)];
          desired = distance(pos_[i], h) > 2.0 ? towards(pos_[i], h, 2.5, 2.0) : Vec2{};
        } else {
          if (f >= wp_until_[i] || (in_flight && p == kicker)) refresh_waypoint(p, ball_pos, f);
          desired = p == kicker && in_flight ? Vec2{} : towards(pos_[i], wp_[i], 2.0, 4.0);
        }
        vel_[i] = vel_[i] + std::min(1.0, dt / 0.1) * (desired - vel_[i]);
        const double sp = vel_[i].norm();
        if (sp > cfg_.max_speed) vel_[i] = (cfg_.max_speed / sp) * vel_[i];
        Vec2 next = pos_[i] + dt * vel_[i];
        const Vec2 clamped = clamp_pitch(next);
        if (clamped.x != next.x) vel_[i].x = 0.0;
        if (clamped.y != next.y) vel_[i].y = 0.0;
        pos_[i] = clamped;
      }
    }
    ep.n_frames = end_frame;
    return ep;
  }

 private:
  Vec2 clamp_pitch(Vec2 p) const {
    return {std::clamp(p.x, 0.5, cfg_.pitch.length - 0.5), std::clamp(p.y, 0.5, cfg_.pitch.width - 0.5)};
  }

  Vec2 dribble_target(const Roster& roster, NodeId holder) {
    std::uniform_real_distribution<double> lateral(-12.0, 12.0);
    const Vec2 h = pos_[static_cast<std::size_t>(holder)];
    const double dir = roster.team_of(holder) == Team::home ? 1.0 : -1.0;
    const double x = std::clamp(h.x + dir * 15.0, 8.0, cfg_.pitch.length - 8.0);
    return clamp_pitch({x, std::clamp(h.y + lateral(rng_), 4.0, cfg_.pitch.width - 4.0)});
  }

  void refresh_waypoint(NodeId p, Vec2 ball, int frame) {
    std::uniform_real_distribution<double> jitter(-6.0, 6.0);
    std::uniform_int_distribution<int> hold(static_cast<int>(2 * cfg_.native_hz), static_cast<int>(4 * cfg_.native_hz));
    const auto i = static_cast<std::size_t>(p);
    const Vec2 anchor{slot_[i].x + 0.3 * (ball.x - cfg_.pitch.length / 2), slot_[i].y};
    wp_[i] = clamp_pitch(anchor + Vec2{jitter(rng_), jitter(rng_)});
    wp_until_[i] = frame + hold(rng_);
  }

  // Chooses the kick outcome at frame f. Sets phase_end to the arrival
  // frame, or to -1 when the flight would not finish inside the episode.
  void kick(const Roster& roster, NodeId holder, int f, int min_gap, int max_frames, NodeId& receiver, int& out_node,
            Vec2& out_target, int& phase_end, Vec2& kick_pos) {
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    const int n = roster.n_players();
    const Vec2 h = pos_[static_cast<std::size_t>(holder)];
    kick_pos = h;
    const double r = u01(rng_);
    Vec2 target;
    NodeId chosen = -1;
    int side = -1;
    if (r < cfg_.out_prob && roster.n_out == 4) {
      const double d[4] = {h.x, cfg_.pitch.length - h.x, cfg_.pitch.width - h.y, h.y};
      side = static_cast<int>(std::min_element(d, d + 4) - d);
      switch (static_cast<OutsideSide>(side)) {
        case OutsideSide::left: target = {-1.0, h.y}; break;
        case OutsideSide::right: target = {cfg_.pitch.length + 1.0, h.y}; break;
        case OutsideSide::top: target = {h.x, cfg_.pitch.width + 1.0}; break;
        case OutsideSide::bottom: target = {h.x, -1.0}; break;
      }
    } else {
      const bool intercept = r < cfg_.out_prob + cfg_.intercept_prob;
      std::vector<std::pair<double, NodeId>> cands;
      for (NodeId p = 0; p < n; ++p) {
        if (p == holder) continue;
        const bool mate = roster.team_of(p) == roster.team_of(holder);
        if (mate == intercept) continue;
        cands.emplace_back(distance(pos_[static_cast<std::size_t>(p)], h), p);
      }
      if (cands.empty()) {
        phase_end = -1;
        return;
      }
      std::sort(cands.begin(), cands.end());
      const int k = std::min<int>(static_cast<int>(cands.size()), intercept ? 2 : 4);
      chosen = cands[static_cast<std::size_t>(std::uniform_int_distribution<int>(0, k - 1)(rng_))].second;
      target = pos_[static_cast<std::size_t>(chosen)];
    }
    const double flight_s = std::max(cfg_.min_touch_gap_s, distance(h, target) / cfg_.pass_speed);
    const int arrival = f + std::max(min_gap, static_cast<int>(std::ceil(flight_s * cfg_.native_hz)));
    if (arrival >= max_frames) {
      phase_end = -1;
      return;
    }
    phase_end = arrival;
    if (side >= 0) {
      out_node = roster.n_players() + side;
      out_target = target;
    } else {
      receiver = chosen;
    }
  }

  const SynthConfig& cfg_;
  std::mt19937_64& rng_;
  std::vector<Vec2> slot_, pos_, vel_, wp_;
  std::vector<int> wp_until_;
};

}  // namespace

void SynthConfig::validate() const {
  auto positive = [](double v, const char* name) {
    if (!(v > 0.0)) throw ConfigError(std::string("synth: ") + name + " must be positive");
  };
  if (n_per_team < 1) throw ConfigError("synth: n_per_team must be at least 1");
  if (episodes_per_match < 1) throw ConfigError("synth: episodes_per_match must be at least 1");
  positive(episode_length_s, "episode_length_s");
  positive(native_hz, "native_hz");
  positive(tempo_s, "tempo_s");
  positive(min_touch_gap_s, "min_touch_gap_s");
  positive(pass_speed, "pass_speed");
  positive(dribble_speed, "dribble_speed");
  positive(run_speed, "run_speed");
  positive(max_speed, "max_speed");
  if (episode_gap_s < 0.0 || noise_sigma < 0.0) throw ConfigError("synth: negative gap or noise");
  auto prob = [](double v, const char* name) {
    if (!(v >= 0.0 && v <= 1.0)) throw ConfigError(std::string("synth: ") + name + " must be in [0, 1]");
  };
  prob(out_prob, "out_prob");
  prob(intercept_prob, "intercept_prob");
  prob(missed_touch_prob, "missed_touch_prob");
  if (out_prob + intercept_prob > 1.0) throw ConfigError("synth: out_prob + intercept_prob exceeds 1");
  if (std::max(dribble_speed, run_speed) > max_speed) throw ConfigError("synth: dribble/run speed above max_speed");
  if (episode_length_s < 2.0 * min_touch_gap_s) throw ConfigError("synth: episodes too short");
}

SynthMatch generate_match(const SynthConfig& config, int match_index) {
  config.validate();
  std::seed_seq seq{static_cast<std::uint32_t>(config.seed), static_cast<std::uint32_t>(config.seed >> 32),
                    static_cast<std::uint32_t>(match_index)};
  std::mt19937_64 rng(seq);
  std::uniform_real_distribution<double> u01(0.0, 1.0);

  Roster roster;
  roster.n_home = roster.n_away = config.n_per_team;
  roster.n_out = 4;
  for (int k = 0; k < config.n_per_team; ++k) roster.player_ids.push_back(player_id('H', k));
  for (int k = 0; k < config.n_per_team; ++k) roster.player_ids.push_back(player_id('A', k));
  const RuleSet& rules = shared_rule_set(roster.n_players(), roster.n_out);

  SynthMatch match;
  EpisodeSim sim(config, rng);
  for (int e = 0; e < config.episodes_per_match; ++e) {
    std::vector<TouchRecord> script;
    const double start = e * (config.episode_length_s + config.episode_gap_s);
    Episode ep = sim.run(script, roster, start);
    char id[32];
    std::snprintf(id, sizeof id, "m%02d_e%02d", match_index, e);
    ep.id = id;
    ep.native_rate_hz = config.native_hz;
    ep.touches = script;
    match.gold.push_back(build_gold_path(ep, rules));
    if (config.missed_touch_prob > 0.0) {
      std::vector<TouchRecord> annotated;
      for (std::size_t k = 0; k < script.size(); ++k) {
        const bool keep = k == 0 || script[k].kind == TouchKind::out_of_play || u01(rng) >= config.missed_touch_prob;
        if (keep) annotated.push_back(script[k]);
      }
      ep.touches = std::move(annotated);
    }
    match.scripts.push_back(std::move(script));
    match.episodes.push_back(std::move(ep));
  }
  return match;
}

}  // namespace pcrf
