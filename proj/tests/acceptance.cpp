// Acceptance run: one PASS/FAIL line per primary criterion.

#include <json.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>

#include "oracle.hpp"
#include "pcrf/analytics.hpp"
#include "pcrf/evaluation.hpp"
#include "pcrf/events.hpp"
#include "pcrf/labeling.hpp"
#include "pcrf/lattice.hpp"
#include "pcrf/pipeline.hpp"
#include "pcrf/scorer.hpp"
#include "pcrf/synth.hpp"
#include "script_oracle.hpp"

namespace {

using namespace pcrf;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, auto... args) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome cardinalities() {
  const auto t0 = Clock::now();
  std::size_t id = 0, kick = 0, rec = 0, out = 0, agree = 0;
  const RuleSet rules(22, 4);
  const int n = 26, n_edges = n * n;
  for (int p = 0; p < n_edges; ++p)
    for (int q = 0; q < n_edges; ++q) {
      const auto k = oracle::classify(22, 4, p / n, p % n, q / n, q % n);
      switch (k) {
        case oracle::Kind::identity: ++id; break;
        case oracle::Kind::kick: ++kick; break;
        case oracle::Kind::reception: ++rec; break;
        case oracle::Kind::out: ++out; break;
        case oracle::Kind::illegal: break;
      }
      if ((k != oracle::Kind::illegal) == rules.is_allowed(p, q)) ++agree;
    }
  const double secs = seconds_since(t0);
  const auto& c = rules.counts();
  const bool ok = id == 676 && kick == 550 && rec == 12012 && out == 88 && c.identity == id && c.kick == kick &&
                  c.reception == rec && c.out == out && rules.n_allowed() == 13326 &&
                  agree == static_cast<std::size_t>(n_edges) * n_edges && secs < 1.0;
  return {ok, fmt("id=%zu kick=%zu rec=%zu out=%zu total=%zu, membership agrees on %zu/456976 pairs, %.2fs", id,
                  kick, rec, out, rules.n_allowed(), agree, secs)};
}

Outcome oracle_equivalence() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(500);
  int ok_count = 0;
  double worst = 0.0;
  for (int i = 0; i < 500; ++i) {
    const auto inst = oracle::random_instance(rng, 4, i % 4 == 0);
    const RuleSet rules(inst.n_players, inst.n_out);
    const oracle::Layout lay(inst.n_players, inst.n_out);
    const auto bf = oracle::brute_force(lay, inst.table);
    const double rel = std::abs(forward_log_z(inst.table, rules) - bf.log_z) / std::max(1.0, std::abs(bf.log_z));
    worst = std::max(worst, rel);
    const auto vit = viterbi_decode(inst.table, rules);
    if (rel <= 1e-9 && vit.score == bf.best_score &&
        std::vector<int>(vit.path.begin(), vit.path.end()) == bf.best_path)
      ++ok_count;
  }
  const double secs = seconds_since(t0);
  return {ok_count == 500 && secs < 30.0,
          fmt("%d/500 instances agree, worst log Z rel err %.1e, %.2fs", ok_count, worst, secs)};
}

Outcome gradient_check() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(100);
  const double h = 1e-3;
  double worst = 0.0;
  std::size_t entries = 0;
  static const std::pair<int, int> rosters[] = {{3, 0}, {2, 1}, {1, 2}, {2, 0}};
  for (int i = 0; i < 100; ++i) {
    const auto [np, no] = rosters[i % 4];
    const RuleSet rules(np, no);
    const auto mode = static_cast<TransitionMode>(i % 3);
    auto s = ScoreTable::zeros(rules, 2 + i % 4, mode, (i / 3) % 2 == 0);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (auto& v : s.emission) v = u(rng);
    for (auto& v : s.transition) v = u(rng);
    std::uniform_int_distribution<int> first(0, rules.n_edges() - 1);
    PossessionPath gold{first(rng)};
    while (static_cast<int>(gold.size()) < s.steps) {
      const auto succ = rules.successors(gold.back());
      std::uniform_int_distribution<std::size_t> pick(0, succ.size() - 1);
      gold.push_back(succ[pick(rng)]);
    }
    const auto r = nll_and_gradients(s, rules, gold);
    auto nll = [&](const ScoreTable& t) { return serial::forward_log_z(t, rules) - score_sequence(t, rules, gold); };
    auto probe = [&](std::vector<double> ScoreTable::*field, const std::vector<double>& grad) {
      for (std::size_t k = 0; k < (s.*field).size(); ++k) {
        auto plus = s, minus = s;
        (plus.*field)[k] += h;
        (minus.*field)[k] -= h;
        worst = std::max(worst, std::abs(grad[k] - (nll(plus) - nll(minus)) / (2 * h)));
        ++entries;
      }
    };
    probe(&ScoreTable::emission, r.grad.emission);
    probe(&ScoreTable::transition, r.grad.transition);
  }
  const double secs = seconds_since(t0);
  return {worst <= 1e-4 && secs < 60.0,
          fmt("%zu gradient entries over 100 instances, max |analytic - FD| %.1e, %.2fs", entries, worst, secs)};
}

Outcome zero_violations() {
  std::mt19937_64 rng(1000);
  static const std::pair<int, int> rosters[] = {{22, 4}, {6, 4}, {4, 2}, {3, 1}, {2, 0}};
  std::size_t vit_bad = 0, gcd_bad = 0, steps = 0, adv_bad = 0, adv_steps = 0;
  std::normal_distribution<double> g(0.0, 3.0);
  for (int i = 0; i < 1000; ++i) {
    const auto [np, no] = rosters[i % 5];
    const RuleSet& rules = shared_rule_set(np, no);
    const auto mode = static_cast<TransitionMode>(i % 3);
    auto s = ScoreTable::zeros(rules, np == 22 ? 6 : 12, mode, true);
    for (auto& v : s.emission) v = g(rng);
    for (auto& v : s.transition) v = g(rng);
    vit_bad += count_violations(rules, viterbi_decode(s, rules).path);
    gcd_bad += count_violations(rules, greedy_decode(decoder_table(s, Decoder::gcd), rules, true));
    steps += static_cast<std::size_t>(s.steps - 1);

    // Adversarial: emissions alternate between two players' self-loops.
    auto adv = ScoreTable::zeros(rules, s.steps, TransitionMode::none, true);
    const EdgeId a = 0, b = static_cast<EdgeId>(1 * rules.n_nodes() + 1);
    for (int t = 0; t < adv.steps; ++t) adv.emit(t, t % 2 == 0 ? a : b) = 5.0;
    const auto free = greedy_decode(adv, rules, false);
    adv_bad += count_violations(rules, free);
    adv_steps += static_cast<std::size_t>(adv.steps - 1);
  }
  const double adv_rate = static_cast<double>(adv_bad) / static_cast<double>(adv_steps);
  return {vit_bad == 0 && gcd_bad == 0 && adv_rate > 0.0,
          fmt("1000 masked tables, %zu transitions: Viterbi %zu, GCD %zu violations; adversarial argmax rate %.3f",
              steps, vit_bad, gcd_bad, adv_rate)};
}

Outcome round_trip() {
  std::mt19937_64 rng(100);
  int ok_count = 0;
  std::size_t events = 0;
  for (int rep = 0; rep < 100; ++rep) {
    const int n_home = 1 + rep % 11, n_away = rep % 12, n_out = rep % 5;
    const int np = n_home + n_away;
    const RuleSet rules(np, n_out);
    Episode ep;
    ep.id = "script";
    ep.rate_hz = 5.0;
    ep.n_frames = 60;
    ep.roster.n_home = n_home;
    ep.roster.n_away = n_away;
    ep.roster.n_out = n_out;
    for (int p = 0; p < np; ++p) ep.roster.player_ids.push_back("p" + std::to_string(p));
    for (int f = 0; f < ep.n_frames; ++f)
      for (int p = 0; p < np; ++p) ep.positions.push_back({3.0 * p + 1.0, 10.0});
    ep.touches = oracle::random_script(rng, np, n_out, ep.n_frames);
    const auto gold = build_gold_path(ep, rules);
    const auto got = extract_events(gold.path, episode_window(ep, Pitch{}), rules);
    const auto want = oracle::script_events(ep.touches);
    bool same = gold.illegal_steps.empty() && count_violations(rules, gold.path) == 0 && got.size() == want.size();
    for (std::size_t k = 0; same && k < got.size(); ++k)
      same = got[k].step == want[k].step && got[k].kind == want[k].kind && got[k].actor == want[k].actor &&
             got[k].target == want[k].target;
    ok_count += same;
    events += want.size();
  }
  return {ok_count == 100, fmt("%d/100 scripts recovered event-for-event (%zu events), gold paths legal", ok_count,
                               events)};
}

Outcome baseline_ordering() {
  const auto t0 = Clock::now();
  RunConfig c;
  c.seed = 20;
  c.synth.config.seed = c.seed;
  c.synth.config.episodes_per_match = 2;
  c.train.learning_rate = 0.02;
  c.train.epochs = 2;
  std::vector<Episode> train_eps, test_eps;
  for (int m = 0; m < 20; ++m) {
    auto match = generate_match(c.synth.config, m);
    auto& dst = m < 16 ? train_eps : test_eps;
    for (auto& ep : match.episodes) dst.push_back(std::move(ep));
  }
  const auto train = prepare_split(c, std::move(train_eps));
  const auto test = prepare_split(c, std::move(test_eps));
  const auto model = train_model(c, train).model;

  std::vector<PossessionPath> vit_paths, arg_paths;
  for (const auto& p : test.episodes) {
    c.decode.decoder = Decoder::viterbi;
    vit_paths.push_back(decode_episode(c, model, p.episode).path);
    c.decode.decoder = Decoder::argmax;
    arg_paths.push_back(decode_episode(c, model, p.episode).path);
  }
  const auto vit = evaluate_split(c, test, vit_paths);
  const auto arg = evaluate_split(c, test, arg_paths);

  std::size_t windows = 0, dominated = 0;
  for (const auto& p : test.episodes) {
    const RuleSet& rules = shared_rule_set(p.episode.roster.n_players(), p.episode.roster.n_out);
    for (const auto& lw : make_windows(p.episode, p.gold.path, c.data.pitch, c.data.window, c.data.stride)) {
      const auto table = score_window(model, lw.window, rules);
      const double v = viterbi_decode(table, rules).score;
      const auto gcd = run_decoder(decoder_table(table, Decoder::gcd), rules, Decoder::gcd);
      const double g = score_sequence(table, rules, gcd);
      ++windows;
      // Same terms summed in a different order: allow rounding only.
      dominated += v >= g - 1e-9 * std::max(1.0, std::abs(g));
    }
  }
  const double secs = seconds_since(t0);
  const bool ok = vit.events.precision() >= arg.events.precision() && dominated == windows && windows > 0 &&
                  secs < 600.0;
  return {ok, fmt("20 matches (16 train / 4 test): precision Viterbi %.3f vs argmax %.3f; Viterbi >= GCD on "
                  "%zu/%zu windows; %.0fs",
                  vit.events.precision(), arg.events.precision(), dominated, windows, secs)};
}

Outcome metrics_consistency() {
  RunConfig c;
  c.synth.config.seed = 7;
  c.synth.config.episodes_per_match = 3;
  const auto split = prepare_split(c, generate_match(c.synth.config, 0).episodes);
  std::vector<PossessionPath> gold;
  for (const auto& p : split.episodes) gold.push_back(p.gold.path);
  const auto r = evaluate_split(c, split, gold);
  bool ok = r.edges.edge_acc() == 1.0 && r.edges.sender_acc() == 1.0 && r.edges.receiver_acc() == 1.0 &&
            r.events.precision() == 1.0 && r.events.recall() == 1.0 && r.events.f1() == 1.0 &&
            r.pred_home_share == r.gold_home_share;

  double sim_max = 0.0;
  for (Team team : {Team::home, Team::away}) {
    PassNetworkBuilder a(team), b(team);
    for (const auto& p : split.episodes) {
      a.add_episode(p.gold_events, p.episode.roster);
      b.add_episode(p.gold_events, p.episode.roster);
    }
    const auto s = network_similarity(a.build(), b.build());
    sim_max = std::max({sim_max, s.degree_mae, s.weight_mae, s.jsd, s.spectral});
  }
  ok = ok && sim_max == 0.0;

  // Relaxed recall on randomly perturbed predictions.
  std::mt19937_64 rng(3);
  std::normal_distribution<double> jitter_t(0.0, 0.8), jitter_x(0.0, 4.0);
  std::bernoulli_distribution drop(0.2);
  const std::vector<double> dts{0.0, 0.2, 0.5, 1.0, 2.0, 3.0}, dxs{0.0, 1.0, 2.0, 4.0, 10.0, 20.0};
  int monotone = 0;
  for (int trial = 0; trial < 50; ++trial) {
    const auto& truth = split.episodes[static_cast<std::size_t>(trial) % split.episodes.size()].gold_events;
    std::vector<EventRecord> pred;
    for (auto e : truth) {
      if (drop(rng)) continue;
      e.time_s += jitter_t(rng);
      e.location.x += jitter_x(rng);
      e.location.y += jitter_x(rng);
      pred.push_back(e);
    }
    std::sort(pred.begin(), pred.end(), [](const auto& a, const auto& b) { return a.time_s < b.time_s; });
    const auto g = relaxed_recall_curve(pred, truth, dts, dxs);
    bool mono = true;
    for (std::size_t i = 0; i < dts.size(); ++i)
      for (std::size_t k = 0; k < dxs.size(); ++k) {
        if (i > 0 && g.recall(i, k) < g.recall(i - 1, k)) mono = false;
        if (k > 0 && g.recall(i, k) < g.recall(i, k - 1)) mono = false;
      }
    monotone += mono;
  }
  ok = ok && monotone == 50;
  return {ok, fmt("pred = gold: edge/sender/receiver acc %.1f, P=R=F1=%.1f, share error %.1f, network "
                  "similarity max %.1f; relaxed recall monotone on %d/50 perturbations",
                  r.edges.edge_acc(), r.events.f1(), std::abs(r.pred_home_share - r.gold_home_share), sim_max,
                  monotone)};
}

Outcome determinism() {
  const fs::path root = fs::temp_directory_path() / "pcrf_acceptance_determinism";
  fs::remove_all(root);
  RunConfig c;
  c.seed = 8;
  c.synth.config.seed = c.seed;
  c.synth.config.episodes_per_match = 2;
  c.synth.config.episode_length_s = 20.0;
  c.synth.train_matches = 1;
  c.synth.test_matches = 1;
  c.train.learning_rate = 0.02;
  c.train.epochs = 1;
  c.synth.out_dir = (root / "data").string();
  c.data.train_dir = (root / "data" / "train").string();
  c.data.test_dir = (root / "data" / "test").string();
  command_synth(c, c.synth.out_dir);
  command_pipeline(c, (root / "a").string());
  command_pipeline(c, (root / "b").string());
  std::size_t compared = 0, differ = 0;
  auto check = [&](const fs::path& rel) {
    ++compared;
    if (slurp(root / "a" / rel) != slurp(root / "b" / rel)) ++differ;
  };
  for (const char* f : {"metrics/metrics.json", "metrics/metrics.txt", "metrics/relaxed_recall.csv"}) check(f);
  std::size_t scores = 0;
  for (const auto& e : fs::directory_iterator(root / "a" / "decodes" / "scores")) {
    check(fs::path("decodes") / "scores" / e.path().filename());
    ++scores;
  }
  fs::remove_all(root);
  return {differ == 0 && scores > 0,
          fmt("%zu files compared (%zu score files), %zu differ", compared, scores, differ)};
}

Outcome window_arithmetic() {
  const auto starts = window_starts(60, 50, 5);
  RunConfig c;
  PreparedSplit s;
  s.episodes.resize(1);
  s.episodes[0].episode.n_frames = 60;
  const bool ok = starts == std::vector<int>{0, 5, 10} && split_windows(c, s) == 3;
  return {ok, fmt("60-step episode -> %zu windows (starts 0, 5, 10)", starts.size())};
}

}  // namespace

int main() {
  const std::pair<const char*, std::function<Outcome()>> criteria[] = {
      {"transition-set cardinalities", cardinalities},
      {"forward/Viterbi oracle equivalence", oracle_equivalence},
      {"gradient check", gradient_check},
      {"zero-violation guarantee", zero_violations},
      {"gold path / event round trip", round_trip},
      {"baseline ordering", baseline_ordering},
      {"metrics self-consistency", metrics_consistency},
      {"determinism", determinism},
      {"window arithmetic", window_arithmetic},
  };
  int failed = 0;
  for (const auto& [name, run] : criteria) {
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += !o.pass;
    std::printf("%s  %s: %s\n", o.pass ? "PASS" : "FAIL", name, o.detail.c_str());
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
