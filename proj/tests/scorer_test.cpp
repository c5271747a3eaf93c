#include "pcrf/scorer.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "fixtures.hpp"
#include "pcrf/error.hpp"

namespace pcrf {
namespace {

using fixtures::make_episode;

TrackingWindow wiggly_window(int n_home, int n_away, int steps, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<Vec2> base;
  for (int p = 0; p < n_home + n_away; ++p) base.push_back({20.0 + 15.0 * p + 5 * u(rng), 10.0 + 8.0 * p + 5 * u(rng)});
  std::vector<Vec2> jitter;
  for (int k = 0; k < steps * (n_home + n_away); ++k) jitter.push_back({u(rng), u(rng)});
  const auto ep = make_episode(n_home, n_away, steps, 5.0, [&](int f, int p) {
    return base[static_cast<std::size_t>(p)] + jitter[static_cast<std::size_t>(f * (n_home + n_away) + p)];
  }, 1);
  return episode_window(ep, Pitch{});
}

void randomize(ScorerModel& m, std::mt19937_64& rng, double scale = 0.3) {
  std::normal_distribution<double> n(0.0, scale);
  for (auto* v : {&m.w_emit, &m.w_trans, &m.w_sender, &m.w_receiver, &m.static_trans})
    for (double& x : *v) x = n(rng);
}

TEST(Scorer, ZeroModelGivesZeroTable) {
  const RuleSet rules(3, 1);
  const auto w = wiggly_window(2, 1, 4, 1);
  for (auto mode : {TransitionScoring::none, TransitionScoring::dynamic, TransitionScoring::static_table}) {
    const auto s = score_window(ScorerModel::zeros(mode, true, rules), w, rules);
    for (double v : s.emission) EXPECT_EQ(v, 0.0);
    for (double v : s.transition) EXPECT_EQ(v, 0.0);
    EXPECT_EQ(s.transition.size(), transition_size(rules, 4, s.mode));
  }
}

TEST(Scorer, HandSetWeightsReproduceDotProducts) {
  // Two stationary players 10 m apart, no standardisation.
  const auto ep = make_episode(1, 1, 2, 5.0, [](int, int p) { return Vec2{40.0 + 10.0 * p, 34.0}; }, 0);
  const RuleSet rules(2, 0);
  auto model = ScorerModel::zeros(TransitionScoring::dynamic, true, rules);
  model.w_emit[pair_feature::distance] = 0.5;
  model.w_emit[pair_feature::self_loop] = 2.0;
  model.w_emit[kPairFeatures + node_feature::own_goal_line] = 0.1;   // sender
  model.w_emit[kPairFeatures + kNodeFeatures + node_feature::nearest_opponent] = -1.0;  // receiver
  const auto s = score_window(model, episode_window(ep, Pitch{}), rules);
  // Own goal line: home player at x=40 -> 40, away player at x=50 -> 55.
  // Nearest opponent is 10 m for both.
  EXPECT_DOUBLE_EQ(s.emit(0, rules.encode(0, 0)), 2.0 + 4.0 - 10.0);
  EXPECT_DOUBLE_EQ(s.emit(0, rules.encode(0, 1)), 5.0 + 4.0 - 10.0);
  EXPECT_DOUBLE_EQ(s.emit(0, rules.encode(1, 0)), 5.0 + 5.5 - 10.0);
  EXPECT_DOUBLE_EQ(s.emit(1, rules.encode(1, 1)), 2.0 + 5.5 - 10.0);
}

TEST(Scorer, DynamicTransitionsMatchMaterialisedFeatures) {
  const RuleSet rules(3, 1);
  const auto w = wiggly_window(2, 1, 5, 2);
  std::mt19937_64 rng(3);
  auto model = ScorerModel::zeros(TransitionScoring::dynamic, false, rules);
  randomize(model, rng);
  fit_standardizer(model, std::span(&w, 1));
  const auto s = score_window(model, w, rules);
  const auto f = standardize(model, extract_features(w, rules));
  std::vector<double> phi2(kTransitionFeatures);
  const auto allowed = rules.allowed_list();
  for (int t = 1; t < 5; ++t)
    for (std::size_t k = 0; k < allowed.size(); ++k) {
      transition_features(f, t, allowed[k].prev, allowed[k].next, phi2);
      double expected = 0.0;
      for (int i = 0; i < kTransitionFeatures; ++i) expected += model.w_trans[i] * phi2[i];
      EXPECT_NEAR(s.transition[static_cast<std::size_t>(t - 1) * allowed.size() + k], expected, 1e-12);
    }
  EXPECT_FALSE(s.masked);
}

TEST(Scorer, LinearInWeights) {
  const RuleSet rules(3, 1);
  const auto w = wiggly_window(1, 2, 3, 4);
  std::mt19937_64 rng(5);
  auto a = ScorerModel::zeros(TransitionScoring::dynamic, true, rules), b = a, sum = a;
  randomize(a, rng);
  randomize(b, rng);
  for (std::size_t k = 0; k < a.w_emit.size(); ++k) sum.w_emit[k] = a.w_emit[k] + 2.0 * b.w_emit[k];
  for (std::size_t k = 0; k < a.w_trans.size(); ++k) sum.w_trans[k] = a.w_trans[k] + 2.0 * b.w_trans[k];
  const auto sa = score_window(a, w, rules), sb = score_window(b, w, rules), ss = score_window(sum, w, rules);
  for (std::size_t k = 0; k < ss.emission.size(); ++k)
    EXPECT_NEAR(ss.emission[k], sa.emission[k] + 2.0 * sb.emission[k], 1e-9);
  for (std::size_t k = 0; k < ss.transition.size(); ++k)
    EXPECT_NEAR(ss.transition[k], sa.transition[k] + 2.0 * sb.transition[k], 1e-9);
}

TEST(Scorer, PositiveScalingKeepsViterbiPath) {
  const RuleSet rules(4, 1);
  const auto w = wiggly_window(2, 2, 6, 6);
  std::mt19937_64 rng(7);
  auto model = ScorerModel::zeros(TransitionScoring::dynamic, true, rules);
  randomize(model, rng);
  auto scaled = model;
  for (auto* v : {&scaled.w_emit, &scaled.w_trans}) for (double& x : *v) x *= 3.0;
  const auto s1 = score_window(model, w, rules), s3 = score_window(scaled, w, rules);
  for (std::size_t k = 0; k < s1.emission.size(); ++k) EXPECT_NEAR(s3.emission[k], 3.0 * s1.emission[k], 1e-9);
  EXPECT_EQ(viterbi_decode(s1, rules).path, viterbi_decode(s3, rules).path);
}

TEST(Scorer, RejectsMismatchedModels) {
  const RuleSet rules(3, 1);
  const auto w = wiggly_window(2, 1, 3, 8);
  auto model = ScorerModel::zeros(TransitionScoring::static_table, true, RuleSet(2, 1));
  EXPECT_THROW(score_window(model, w, rules), ConfigError);
  model = ScorerModel::zeros(TransitionScoring::dynamic, true, rules);
  model.w_emit.pop_back();
  EXPECT_THROW(score_window(model, w, rules), ConfigError);
}

PossessionPath some_gold(const RuleSet& rules, int steps) {
  // 0 holds, kicks to 1, 1 controls, then kicks out to the boundary.
  const NodeId o = rules.n_players();
  PossessionPath p{rules.encode(0, 0), rules.encode(0, 1), rules.encode(1, 1), rules.encode(1, o), rules.encode(o, o)};
  p.resize(static_cast<std::size_t>(steps), rules.encode(o, o));
  return p;
}

TEST(Scorer, ZeroLambdasReduceToCrfNll) {
  const RuleSet rules(3, 1);
  const auto w = wiggly_window(2, 1, 5, 9);
  std::mt19937_64 rng(10);
  auto model = ScorerModel::zeros(TransitionScoring::dynamic, true, rules);
  randomize(model, rng);
  model.lambda1 = model.lambda2 = 0.0;
  const auto gold = some_gold(rules, 5);
  const auto loss = window_loss(model, w, gold, rules);
  const auto nll = nll_and_gradients(score_window(model, w, rules), rules, gold);
  EXPECT_DOUBLE_EQ(loss.total, nll.nll);
  EXPECT_DOUBLE_EQ(loss.crf, nll.nll);
}

class ScorerGradient : public ::testing::TestWithParam<std::tuple<TransitionScoring, bool, bool>> {};

TEST_P(ScorerGradient, MatchesFiniteDifferences) {
  const auto [mode, masked, crf] = GetParam();
  const RuleSet rules(3, 1);
  const auto w = wiggly_window(2, 1, 5, 11);
  std::mt19937_64 rng(12);
  auto model = ScorerModel::zeros(mode, masked, rules);
  randomize(model, rng);
  model.use_crf_loss = crf;
  model.lambda1 = 0.7;
  model.lambda2 = 1.3;
  fit_standardizer(model, std::span(&w, 1));
  const auto gold = some_gold(rules, 5);
  auto grad = ModelGradient::zeros_like(model);
  window_loss(model, w, gold, rules, &grad);
  const double h = 1e-5;
  auto check = [&](std::vector<double> ScorerModel::*param, const std::vector<double>& g, std::size_t stride) {
    for (std::size_t k = 0; k < g.size(); k += stride) {
      auto plus = model, minus = model;
      (plus.*param)[k] += h;
      (minus.*param)[k] -= h;
      const double fd = (window_loss(plus, w, gold, rules).total - window_loss(minus, w, gold, rules).total) / (2 * h);
      EXPECT_NEAR(g[k], fd, 1e-5 * std::max(1.0, std::abs(fd))) << k;
    }
  };
  check(&ScorerModel::w_emit, grad.w_emit, 1);
  check(&ScorerModel::w_sender, grad.w_sender, 1);
  check(&ScorerModel::w_receiver, grad.w_receiver, 1);
  if (mode == TransitionScoring::dynamic) check(&ScorerModel::w_trans, grad.w_trans, 1);
  if (mode == TransitionScoring::static_table) check(&ScorerModel::static_trans, grad.static_trans, 7);
}

INSTANTIATE_TEST_SUITE_P(Modes, ScorerGradient,
                         ::testing::Combine(::testing::Values(TransitionScoring::none, TransitionScoring::dynamic,
                                                              TransitionScoring::static_table),
                                            ::testing::Bool(), ::testing::Bool()));

TEST(Scorer, PermutingPlayersPermutesScoresAndKeepsLoss) {
  const RuleSet rules(4, 1);
  auto w = wiggly_window(2, 2, 5, 13);
  std::mt19937_64 rng(14);
  auto model = ScorerModel::zeros(TransitionScoring::dynamic, true, rules);
  randomize(model, rng);
  fit_standardizer(model, std::span(&w, 1));
  // Swap the two away players (nodes 2 and 3).
  auto perm = [](NodeId v) { return v == 2 ? 3 : v == 3 ? 2 : v; };
  TrackingWindow swapped = w;
  for (int t = 0; t < w.steps; ++t)
    for (NodeId v = 0; v < w.n_nodes(); ++v) {
      const std::size_t k = static_cast<std::size_t>(t * w.n_nodes() + perm(v));
      swapped.positions[k] = w.position(t, v);
      swapped.velocities[k] = w.velocity(t, v);
    }
  const auto a = score_window(model, w, rules), b = score_window(model, swapped, rules);
  for (int t = 0; t < w.steps; ++t)
    for (NodeId s = 0; s < 5; ++s)
      for (NodeId r = 0; r < 5; ++r)
        EXPECT_NEAR(a.emit(t, rules.encode(s, r)), b.emit(t, rules.encode(perm(s), perm(r))), 1e-9);
  const PossessionPath gold{rules.encode(0, 0), rules.encode(0, 2), rules.encode(2, 2), rules.encode(2, 3), rules.encode(3, 3)};
  PossessionPath gold_swapped;
  for (EdgeId e : gold) {
    const Edge d = rules.decode(e);
    gold_swapped.push_back(rules.encode(perm(d.sender), perm(d.receiver)));
  }
  EXPECT_NEAR(window_loss(model, w, gold, rules).total, window_loss(model, swapped, gold_swapped, rules).total, 1e-9);
}

TEST(Scorer, OverfitsSingleWindowToGold) {
  const RuleSet rules(2, 1);
  const auto w = wiggly_window(1, 1, 6, 15);
  const PossessionPath gold{rules.encode(0, 0), rules.encode(0, 0), rules.encode(0, 1), rules.encode(1, 1),
                            rules.encode(1, 2), rules.encode(2, 2)};
  auto model = ScorerModel::zeros(TransitionScoring::dynamic, true, rules);
  std::vector<TrackingWindow> windows(8, w);
  std::vector<PossessionPath> golds(8, gold);
  TrainConfig cfg;
  cfg.learning_rate = 0.05;
  cfg.batch_size = 4;
  cfg.epochs = 60;
  const auto hist = train(model, windows, golds, cfg);
  EXPECT_LT(hist.back().mean_loss, hist.front().mean_loss);
  EXPECT_EQ(viterbi_decode(score_window(model, w, rules), rules).path, gold);
}

TEST(Scorer, TrainingIsDeterministicAndAblationGridRuns) {
  const RuleSet rules(3, 1);
  std::vector<TrackingWindow> windows{wiggly_window(2, 1, 5, 16), wiggly_window(2, 1, 5, 17), wiggly_window(2, 1, 5, 18)};
  std::vector<PossessionPath> golds(3, some_gold(rules, 5));
  TrainConfig cfg;
  cfg.learning_rate = 0.01;
  cfg.batch_size = 2;
  cfg.epochs = 3;
  cfg.seed = 42;
  for (double l1 : {0.0, 1.0})
    for (double l2 : {0.0, 1.0}) {
      auto a = ScorerModel::zeros(TransitionScoring::dynamic, true, rules);
      a.lambda1 = l1;
      a.lambda2 = l2;
      auto b = a;
      const auto ha = train(a, windows, golds, cfg);
      const auto hb = train(b, windows, golds, cfg);
      ASSERT_EQ(ha.size(), 3u);
      EXPECT_EQ(ha.back().mean_loss, hb.back().mean_loss);
      EXPECT_EQ(a.w_emit, b.w_emit);
      EXPECT_EQ(a.w_trans, b.w_trans);
      if (l1 == 0.0) EXPECT_EQ(a.w_sender, std::vector<double>(kNodeFeatures, 0.0));
    }
}

TEST(Scorer, TrainRejectsBadData) {
  const RuleSet rules(3, 1);
  auto model = ScorerModel::zeros(TransitionScoring::dynamic, true, rules);
  std::vector<TrackingWindow> windows{wiggly_window(2, 1, 5, 19)};
  std::vector<PossessionPath> golds{PossessionPath(4, 0)};
  EXPECT_THROW(train(model, windows, golds, {}), DataError);
  EXPECT_THROW(train(model, std::span<const TrackingWindow>{}, std::span<const PossessionPath>{}, {}), DataError);
}

TEST(Scorer, CheckpointRoundTrip) {
  const RuleSet rules(2, 1);
  std::mt19937_64 rng(20);
  for (auto mode : {TransitionScoring::none, TransitionScoring::dynamic, TransitionScoring::static_table}) {
    auto model = ScorerModel::zeros(mode, mode != TransitionScoring::none, rules);
    randomize(model, rng);
    const auto w = wiggly_window(1, 1, 3, 21);
    fit_standardizer(model, std::span(&w, 1));
    model.lambda1 = 0.25;
    const auto back = model_from_json(model_to_json(model));
    EXPECT_EQ(back.w_emit, model.w_emit);
    EXPECT_EQ(back.w_trans, model.w_trans);
    EXPECT_EQ(back.static_trans, model.static_trans);
    EXPECT_EQ(back.edge_norm.mean, model.edge_norm.mean);
    EXPECT_EQ(back.node_norm.scale, model.node_norm.scale);
    EXPECT_EQ(back.lambda1, 0.25);
    EXPECT_EQ(back.transition, mode);
    EXPECT_EQ(model_to_json(back), model_to_json(model));
  }
  EXPECT_THROW(model_from_json("{\"format\": \"other\"}"), ConfigError);
  EXPECT_THROW(model_from_json("not json"), ConfigError);
}

}  // namespace
}  // namespace pcrf
