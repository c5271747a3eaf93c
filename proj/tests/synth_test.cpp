#include "pcrf/synth.hpp"

#include <gtest/gtest.h>

#include "pcrf/error.hpp"
#include "pcrf/evaluation.hpp"
#include "pcrf/events.hpp"
#include "pcrf/lattice.hpp"
#include "pcrf/scorer.hpp"
#include "script_oracle.hpp"

namespace pcrf {
namespace {

SynthConfig small_config() {
  SynthConfig c;
  c.seed = 11;
  c.n_per_team = 4;
  c.episodes_per_match = 3;
  c.episode_length_s = 30.0;
  return c;
}

TEST(Synth, SeedDeterminesOutput) {
  const auto a = generate_match(small_config(), 2);
  const auto b = generate_match(small_config(), 2);
  ASSERT_EQ(a.episodes.size(), b.episodes.size());
  for (std::size_t e = 0; e < a.episodes.size(); ++e) {
    EXPECT_EQ(a.episodes[e].positions, b.episodes[e].positions);
    EXPECT_EQ(a.episodes[e].ball, b.episodes[e].ball);
    EXPECT_EQ(a.scripts[e], b.scripts[e]);
  }
  const auto c = generate_match(small_config(), 3);
  EXPECT_NE(a.episodes[0].positions, c.episodes[0].positions);
  auto other = small_config();
  other.seed = 12;
  EXPECT_NE(a.episodes[0].positions, generate_match(other, 2).episodes[0].positions);
}

TEST(Synth, EpisodeLayout) {
  const auto m = generate_match(small_config(), 0);
  ASSERT_EQ(m.episodes.size(), 3u);
  const auto& ep = m.episodes[1];
  EXPECT_EQ(ep.id, "m00_e01");
  EXPECT_EQ(ep.roster.player_ids.front(), "H01");
  EXPECT_EQ(ep.roster.player_ids.back(), "A04");
  EXPECT_EQ(ep.rate_hz, 25.0);
  EXPECT_DOUBLE_EQ(ep.start_time_s, 60.0);
  EXPECT_EQ(ep.first_frame, 1500);
  EXPECT_LE(ep.n_frames, 750);
  EXPECT_EQ(ep.ball.size(), static_cast<std::size_t>(ep.n_frames));
  EXPECT_EQ(ep.positions.size(), static_cast<std::size_t>(ep.n_frames) * 8u);
}

TEST(Synth, TempoSetsTouchCount) {
  SynthConfig c;
  c.seed = 5;
  c.episodes_per_match = 6;
  c.out_prob = 0.0;
  c.tempo_s = 2.0;
  c.episode_length_s = 60.0;
  const auto m = generate_match(c, 0);
  const RuleSet& rules = shared_rule_set(22, 4);
  for (std::size_t e = 0; e < m.episodes.size(); ++e) {
    const auto ep5 = resample(m.episodes[e], 5.0);
    const auto gold = build_gold_path(ep5, rules);
    const auto events = extract_events(gold.path, episode_window(ep5, Pitch{}), rules);
    const auto expected = oracle::script_events(ep5.touches);
    ASSERT_EQ(events.size(), expected.size());
    for (std::size_t k = 0; k < events.size(); ++k) {
      EXPECT_EQ(events[k].step, expected[k].step);
      EXPECT_EQ(events[k].kind, expected[k].kind);
      EXPECT_EQ(events[k].actor, expected[k].actor);
    }
    // Each hold (mean 2 s) is followed by a flight of at least 0.6 s.
    EXPECT_GE(m.scripts[e].size(), 15u);
    EXPECT_LE(m.scripts[e].size(), 45u);
  }
}

TEST(Synth, SpeedAndPitchBounds) {
  SynthConfig c = small_config();
  c.n_per_team = 11;
  const auto m = generate_match(c, 4);
  for (const auto& ep : m.episodes) {
    const int n = ep.roster.n_players();
    for (int f = 0; f < ep.n_frames; ++f)
      for (NodeId p = 0; p < n; ++p) {
        const Vec2 q = ep.position(f, p);
        EXPECT_GE(q.x, 0.0);
        EXPECT_LE(q.x, c.pitch.length);
        EXPECT_GE(q.y, 0.0);
        EXPECT_LE(q.y, c.pitch.width);
        if (f > 0) EXPECT_LE(distance(q, ep.position(f - 1, p)) * ep.rate_hz, c.max_speed + 1e-9);
      }
  }
}

TEST(Synth, ScriptsAreWellFormedAndGoldIsLegal) {
  SynthConfig c = small_config();
  c.out_prob = 0.2;
  for (int match = 0; match < 5; ++match) {
    const auto m = generate_match(c, match);
    const RuleSet& rules = shared_rule_set(8, 4);
    for (std::size_t e = 0; e < m.episodes.size(); ++e) {
      const auto& script = m.scripts[e];
      ASSERT_FALSE(script.empty());
      EXPECT_EQ(script.front().frame, 0);
      for (std::size_t k = 1; k < script.size(); ++k)
        EXPECT_GE(script[k].time_s - script[k - 1].time_s, c.min_touch_gap_s - 1e-9);
      EXPECT_TRUE(m.gold[e].illegal_steps.empty());
      EXPECT_EQ(violation_rate(rules, m.gold[e].path), 0.0);
      EXPECT_TRUE(build_gold_path(resample(m.episodes[e], 5.0), rules).illegal_steps.empty());
    }
  }
}

TEST(Synth, MissedTouchesOnlyThinAnnotations) {
  SynthConfig c = small_config();
  c.missed_touch_prob = 0.5;
  const auto m = generate_match(c, 1);
  for (std::size_t e = 0; e < m.episodes.size(); ++e) {
    EXPECT_LT(m.episodes[e].touches.size(), m.scripts[e].size());
    EXPECT_EQ(m.episodes[e].touches.front(), m.scripts[e].front());
  }
}

TEST(Synth, RejectsBadConfig) {
  SynthConfig c;
  c.tempo_s = 0.0;
  EXPECT_THROW(generate_match(c), ConfigError);
  c = SynthConfig{};
  c.out_prob = 0.9;
  c.intercept_prob = 0.2;
  EXPECT_THROW(generate_match(c), ConfigError);
  c = SynthConfig{};
  c.dribble_speed = 12.0;
  EXPECT_THROW(generate_match(c), ConfigError);
}

TEST(Synth, TrainedScorerFitsItsTrainingSet) {
  SynthConfig c;
  c.seed = 3;
  c.n_per_team = 3;
  c.episodes_per_match = 2;
  c.episode_length_s = 24.0;
  c.out_prob = 0.0;
  const RuleSet& rules = shared_rule_set(6, 4);
  std::vector<TrackingWindow> windows;
  std::vector<PossessionPath> gold;
  const auto m = generate_match(c, 0);
  for (const auto& ep : m.episodes) {
    const auto ep5 = resample(ep, 5.0);
    const auto g = build_gold_path(ep5, rules);
    for (auto& lw : make_windows(ep5, g.path, Pitch{}, 50, 5)) {
      windows.push_back(std::move(lw.window));
      gold.push_back(std::move(lw.gold));
    }
  }
  ASSERT_GE(windows.size(), 10u);
  auto model = ScorerModel::zeros(TransitionScoring::dynamic, true, rules);
  TrainConfig tc;
  tc.learning_rate = 0.05;
  tc.batch_size = 4;
  tc.epochs = 60;
  train(model, windows, gold, tc);
  EdgeMetrics metrics;
  for (std::size_t k = 0; k < windows.size(); ++k)
    metrics.merge(edge_metrics(viterbi_decode(score_window(model, windows[k], rules), rules).path, gold[k], rules));
  EXPECT_GE(metrics.edge_acc(), 0.95);
}

}  // namespace
}  // namespace pcrf
