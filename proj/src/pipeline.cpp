#include "pcrf/pipeline.hpp"

#include <json.hpp>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "pcrf/error.hpp"
#include "pcrf/io.hpp"
#include "pcrf/lattice.hpp"
#include "pcrf/score_file.hpp"

namespace pcrf {

namespace fs = std::filesystem;
using nlohmann::json;
using ordered_json = nlohmann::ordered_json;

std::string_view to_string(Decoder d) {
  switch (d) {
    case Decoder::argmax: return "argmax";
    case Decoder::greedy: return "greedy";
    case Decoder::gcd: return "gcd";
    case Decoder::vcd: return "vcd";
    case Decoder::viterbi: return "viterbi";
  }
  return "?";
}

std::optional<Decoder> decoder_from_string(std::string_view name) {
  for (auto d : {Decoder::argmax, Decoder::greedy, Decoder::gcd, Decoder::vcd, Decoder::viterbi})
    if (to_string(d) == name) return d;
  return std::nullopt;
}

// ---- configuration --------------------------------------------------------

namespace {

// Reads one JSON object, remembering which keys were consumed so that
// leftovers can be reported as unknown.
class Section {
 public:
  Section(const json& j, std::string where) : j_(j), where_(std::move(where)) {
    if (!j_.is_object()) throw ConfigError(label() + " must be an object");
  }

  template <typename T>
  void get(const char* key, T& out) {
    used_.insert(key);
    const auto it = j_.find(key);
    if (it == j_.end()) return;
    try {
      out = it->get<T>();
    } catch (const json::exception&) {
      throw ConfigError(label(key) + " has the wrong type");
    }
  }

  void get_path(const char* key, std::string& out, const std::string& base) {
    get(key, out);
    if (!out.empty() && fs::path(out).is_relative()) out = (fs::path(base) / out).lexically_normal().string();
  }

  template <typename E, typename Parse>
  void get_enum(const char* key, E& out, Parse parse) {
    used_.insert(key);
    const auto it = j_.find(key);
    if (it == j_.end()) return;
    if (!it->is_string()) throw ConfigError(label(key) + " must be a string");
    const auto v = parse(it->template get<std::string>());
    if (!v) throw ConfigError(label(key) + ": unknown value '" + it->template get<std::string>() + "'");
    out = *v;
  }

  std::optional<Section> sub(const char* key) {
    used_.insert(key);
    const auto it = j_.find(key);
    if (it == j_.end()) return std::nullopt;
    return Section(*it, label(key));
  }

  void finish() const {
    for (const auto& [key, _] : j_.items())
      if (!used_.count(key)) throw ConfigError("unknown configuration key " + label(key));
  }

 private:
  std::string label(const std::string& key = "") const {
    if (key.empty()) return where_.empty() ? "configuration" : "'" + where_ + "'";
    return "'" + (where_.empty() ? key : where_ + "." + key) + "'";
  }

  const json& j_;
  std::string where_;
  std::set<std::string> used_;
};

void read_synth(Section& s, SynthConfig& c) {
  s.get("n_per_team", c.n_per_team);
  s.get("episodes_per_match", c.episodes_per_match);
  s.get("episode_length_s", c.episode_length_s);
  s.get("episode_gap_s", c.episode_gap_s);
  s.get("native_hz", c.native_hz);
  s.get("tempo_s", c.tempo_s);
  s.get("min_touch_gap_s", c.min_touch_gap_s);
  s.get("pass_speed", c.pass_speed);
  s.get("dribble_speed", c.dribble_speed);
  s.get("run_speed", c.run_speed);
  s.get("max_speed", c.max_speed);
  s.get("noise_sigma", c.noise_sigma);
  s.get("out_prob", c.out_prob);
  s.get("intercept_prob", c.intercept_prob);
  s.get("missed_touch_prob", c.missed_touch_prob);
  s.get("ball", c.ball);
}

}  // namespace

void RunConfig::validate() const {
  if (jobs < 0) throw ConfigError("jobs must be >= 0");
  if (!(data.tracking_hz > 0.0) || !(data.decode_hz > 0.0)) throw ConfigError("data rates must be positive");
  if (data.decode_hz > data.tracking_hz) throw ConfigError("decode_hz cannot exceed tracking_hz");
  if (data.window < 1 || data.stride < 1) throw ConfigError("window and stride must be positive");
  if (!(data.pitch.length > 0.0) || !(data.pitch.width > 0.0)) throw ConfigError("pitch dimensions must be positive");
  if (!(data.rdp_epsilon_m > 0.0)) throw ConfigError("rdp_epsilon_m must be positive");
  if (!(data.insertion.attribution_radius_m > 0.0) || !(data.insertion.match_window_s >= 0.0))
    throw ConfigError("insertion radius and window must be positive");
  if (model.lambda1 < 0.0 || model.lambda2 < 0.0) throw ConfigError("lambda1 and lambda2 must be >= 0");
  if (!(model.mask_value < 0.0)) throw ConfigError("mask_value must be negative");
  if (!model.use_crf_loss && model.lambda1 == 0.0 && model.lambda2 == 0.0)
    throw ConfigError("all loss terms are disabled");
  if (!(train.learning_rate > 0.0) || train.batch_size < 1 || train.epochs < 1)
    throw ConfigError("train: learning_rate, batch_size and epochs must be positive");
  if (!(evaluation.match.dt_max_s >= 0.0)) throw ConfigError("evaluation.match_window_s must be >= 0");
  if (evaluation.recall_dt_s.empty() || evaluation.recall_dx_m.empty())
    throw ConfigError("relaxed-recall grids must not be empty");
  if (!(analytics.possession.bin_minutes > 0.0)) throw ConfigError("bin_minutes must be positive");
  if (!(analytics.kde.bandwidth_m > 0.0) || !(analytics.kde.cell_m > 0.0))
    throw ConfigError("kde bandwidth and cell size must be positive");
  if (synth.train_matches < 0 || synth.test_matches < 0) throw ConfigError("synth match counts must be >= 0");
  synth.config.validate();
}

RunConfig config_from_json(const std::string& text, const std::string& base_dir) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("configuration is not valid JSON: ") + e.what());
  }
  RunConfig c;
  Section root(j, "");
  root.get("seed", c.seed);
  root.get("jobs", c.jobs);
  root.get_path("run_dir", c.run_dir, base_dir);
  c.data.train_dir = (fs::path(base_dir) / c.data.train_dir).lexically_normal().string();
  c.data.test_dir = (fs::path(base_dir) / c.data.test_dir).lexically_normal().string();
  c.synth.out_dir = (fs::path(base_dir) / c.synth.out_dir).lexically_normal().string();
  if (c.run_dir == "run") c.run_dir = (fs::path(base_dir) / c.run_dir).lexically_normal().string();
  if (auto s = root.sub("data")) {
    s->get_path("train_dir", c.data.train_dir, base_dir);
    s->get_path("test_dir", c.data.test_dir, base_dir);
    s->get("tracking_hz", c.data.tracking_hz);
    s->get("decode_hz", c.data.decode_hz);
    s->get("interpolate", c.data.interpolate);
    s->get("window", c.data.window);
    s->get("stride", c.data.stride);
    s->get("pitch_length_m", c.data.pitch.length);
    s->get("pitch_width_m", c.data.pitch.width);
    s->get("insert_missed_touches", c.data.insert_missed_touches);
    s->get("rdp_epsilon_m", c.data.rdp_epsilon_m);
    if (auto ins = s->sub("insertion")) {
      ins->get("match_window_s", c.data.insertion.match_window_s);
      ins->get("match_score", c.data.insertion.match_score);
      ins->get("mismatch_score", c.data.insertion.mismatch_score);
      ins->get("gap_score", c.data.insertion.gap_score);
      ins->get("attribution_radius_m", c.data.insertion.attribution_radius_m);
      ins->finish();
    }
    s->finish();
  }
  if (auto s = root.sub("model")) {
    s->get_enum("transition", c.model.transition, transition_scoring_from_string);
    s->get("masked", c.model.masked);
    s->get("mask_value", c.model.mask_value);
    s->get("lambda1", c.model.lambda1);
    s->get("lambda2", c.model.lambda2);
    s->get("use_crf_loss", c.model.use_crf_loss);
    s->finish();
  }
  if (auto s = root.sub("train")) {
    s->get("learning_rate", c.train.learning_rate);
    s->get("batch_size", c.train.batch_size);
    s->get("epochs", c.train.epochs);
    s->finish();
  }
  if (auto s = root.sub("decode")) {
    s->get_enum("decoder", c.decode.decoder, decoder_from_string);
    s->get("per_window", c.decode.per_window);
    s->get("write_scores", c.decode.write_scores);
    s->finish();
  }
  if (auto s = root.sub("evaluation")) {
    s->get("match_window_s", c.evaluation.match.dt_max_s);
    s->get("match_score", c.evaluation.match.match_score);
    s->get("gap_score", c.evaluation.match.gap_score);
    s->get("recall_dt_s", c.evaluation.recall_dt_s);
    s->get("recall_dx_m", c.evaluation.recall_dx_m);
    s->finish();
  }
  if (auto s = root.sub("analytics")) {
    s->get("bin_minutes", c.analytics.possession.bin_minutes);
    s->get("exclude_flights", c.analytics.possession.exclude_flights);
    s->get("kde_bandwidth_m", c.analytics.kde.bandwidth_m);
    s->get("kde_cell_m", c.analytics.kde.cell_m);
    s->get("kde_scott", c.analytics.kde.scott);
    s->get("substitutions", c.analytics.substitutions);
    s->finish();
  }
  if (auto s = root.sub("synth")) {
    s->get_path("out_dir", c.synth.out_dir, base_dir);
    s->get("train_matches", c.synth.train_matches);
    s->get("test_matches", c.synth.test_matches);
    read_synth(*s, c.synth.config);
    s->finish();
  }
  root.finish();
  c.synth.config.seed = c.seed;
  c.synth.config.pitch = c.data.pitch;
  c.validate();
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read configuration " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  const auto base = fs::path(path).parent_path();
  return config_from_json(ss.str(), base.empty() ? "." : base.string());
}

std::string config_to_json(const RunConfig& c) {
  ordered_json j;
  j["seed"] = c.seed;
  j["jobs"] = c.jobs;
  j["run_dir"] = c.run_dir;
  auto& d = j["data"];
  d["train_dir"] = c.data.train_dir;
  d["test_dir"] = c.data.test_dir;
  d["tracking_hz"] = c.data.tracking_hz;
  d["decode_hz"] = c.data.decode_hz;
  d["interpolate"] = c.data.interpolate;
  d["window"] = c.data.window;
  d["stride"] = c.data.stride;
  d["pitch_length_m"] = c.data.pitch.length;
  d["pitch_width_m"] = c.data.pitch.width;
  d["insert_missed_touches"] = c.data.insert_missed_touches;
  d["rdp_epsilon_m"] = c.data.rdp_epsilon_m;
  d["insertion"] = {{"match_window_s", c.data.insertion.match_window_s},
                    {"match_score", c.data.insertion.match_score},
                    {"mismatch_score", c.data.insertion.mismatch_score},
                    {"gap_score", c.data.insertion.gap_score},
                    {"attribution_radius_m", c.data.insertion.attribution_radius_m}};
  j["model"] = {{"transition", std::string(to_string(c.model.transition))},
                {"masked", c.model.masked},
                {"mask_value", c.model.mask_value},
                {"lambda1", c.model.lambda1},
                {"lambda2", c.model.lambda2},
                {"use_crf_loss", c.model.use_crf_loss}};
  j["train"] = {{"learning_rate", c.train.learning_rate},
                {"batch_size", c.train.batch_size},
                {"epochs", c.train.epochs}};
  j["decode"] = {{"decoder", std::string(to_string(c.decode.decoder))},
                 {"per_window", c.decode.per_window},
                 {"write_scores", c.decode.write_scores}};
  j["evaluation"] = {{"match_window_s", c.evaluation.match.dt_max_s},
                     {"match_score", c.evaluation.match.match_score},
                     {"gap_score", c.evaluation.match.gap_score},
                     {"recall_dt_s", c.evaluation.recall_dt_s},
                     {"recall_dx_m", c.evaluation.recall_dx_m}};
  j["analytics"] = {{"bin_minutes", c.analytics.possession.bin_minutes},
                    {"exclude_flights", c.analytics.possession.exclude_flights},
                    {"kde_bandwidth_m", c.analytics.kde.bandwidth_m},
                    {"kde_cell_m", c.analytics.kde.cell_m},
                    {"kde_scott", c.analytics.kde.scott},
                    {"substitutions", c.analytics.substitutions}};
  const auto& s = c.synth.config;
  j["synth"] = {{"out_dir", c.synth.out_dir},
                {"train_matches", c.synth.train_matches},
                {"test_matches", c.synth.test_matches},
                {"n_per_team", s.n_per_team},
                {"episodes_per_match", s.episodes_per_match},
                {"episode_length_s", s.episode_length_s},
                {"episode_gap_s", s.episode_gap_s},
                {"native_hz", s.native_hz},
                {"tempo_s", s.tempo_s},
                {"min_touch_gap_s", s.min_touch_gap_s},
                {"pass_speed", s.pass_speed},
                {"dribble_speed", s.dribble_speed},
                {"run_speed", s.run_speed},
                {"max_speed", s.max_speed},
                {"noise_sigma", s.noise_sigma},
                {"out_prob", s.out_prob},
                {"intercept_prob", s.intercept_prob},
                {"missed_touch_prob", s.missed_touch_prob},
                {"ball", s.ball}};
  return j.dump(2) + "\n";
}

// ---- in-memory stages -----------------------------------------------------

namespace {

const RuleSet& rules_for(const Roster& roster) { return shared_rule_set(roster.n_players(), roster.n_out); }

}  // namespace

PreparedSplit prepare_split(const RunConfig& config, std::vector<Episode> native_episodes) {
  PreparedSplit out;
  const auto mode = config.data.interpolate ? ResampleMode::interpolate : ResampleMode::reject;
  for (auto& ep : native_episodes) {
    if (ep.native_rate_hz <= 0.0) ep.native_rate_hz = ep.rate_hz;
    out.native_frames += static_cast<std::size_t>(ep.n_frames);
    if (config.data.insert_missed_touches && !ep.ball.empty()) {
      const auto candidates = rdp_touch_candidates(ep, config.data.rdp_epsilon_m);
      auto res = insert_missed_touches(ep, candidates, config.data.insertion);
      ep.touches = std::move(res.touches);
      out.inserted += res.inserted;
      out.dropped += res.dropped;
      out.warnings.insert(out.warnings.end(), res.warnings.begin(), res.warnings.end());
    }
    PreparedEpisode p;
    p.episode = resample(ep, config.data.decode_hz, mode);
    p.episode.ball.clear();
    const RuleSet& rules = rules_for(p.episode.roster);
    p.gold = build_gold_path(p.episode, rules);
    p.gold_events = extract_events(p.gold.path, episode_window(p.episode, config.data.pitch), rules);
    out.touches += p.episode.touches.size();
    out.episodes.push_back(std::move(p));
  }
  return out;
}

PreparedSplit load_split(const RunConfig& config, const std::string& dir) {
  const auto tracking = fs::path(dir) / "tracking.csv";
  const auto touches = fs::path(dir) / "touches.csv";
  if (!fs::exists(tracking)) throw DataError("no tracking.csv in " + dir);
  if (!fs::exists(touches)) throw DataError("no touches.csv in " + dir);
  auto episodes = read_tracking_csv(tracking.string(), config.data.tracking_hz);
  read_touches_csv(touches.string(), episodes);
  return prepare_split(config, std::move(episodes));
}

std::size_t split_windows(const RunConfig& config, const PreparedSplit& split) {
  std::size_t n = 0;
  for (const auto& p : split.episodes)
    n += window_starts(p.episode.n_frames, config.data.window, config.data.stride).size();
  return n;
}

TrainedModel train_model(const RunConfig& config, const PreparedSplit& split,
                         const std::function<void(const EpochStats&)>& on_epoch) {
  std::vector<TrackingWindow> windows;
  std::vector<PossessionPath> gold;
  for (const auto& p : split.episodes)
    for (auto& lw : make_windows(p.episode, p.gold.path, config.data.pitch, config.data.window, config.data.stride)) {
      windows.push_back(std::move(lw.window));
      gold.push_back(std::move(lw.gold));
    }
  if (windows.empty())
    throw DataError("no training windows: every episode is shorter than " + std::to_string(config.data.window) +
                    " steps");
  TrainedModel out;
  out.model = ScorerModel::zeros(config.model.transition, config.model.masked, rules_for(windows.front().roster));
  out.model.mask_value = config.model.mask_value;
  out.model.lambda1 = config.model.lambda1;
  out.model.lambda2 = config.model.lambda2;
  out.model.use_crf_loss = config.model.use_crf_loss;
  TrainConfig tc;
  tc.learning_rate = config.train.learning_rate;
  tc.batch_size = config.train.batch_size;
  tc.epochs = config.train.epochs;
  tc.seed = config.seed;
  tc.jobs = config.jobs;
  tc.on_epoch = on_epoch;
  out.epochs = train(out.model, windows, gold, tc);
  return out;
}

ScoreTable decoder_table(ScoreTable table, Decoder decoder) {
  if (decoder == Decoder::gcd || decoder == Decoder::vcd) {
    table.mode = TransitionMode::none;
    table.transition.clear();
    table.masked = true;
  }
  return table;
}

PossessionPath run_decoder(const ScoreTable& table, const RuleSet& rules, Decoder decoder) {
  switch (decoder) {
    case Decoder::argmax: return greedy_decode(table, rules, false);
    case Decoder::greedy:
    case Decoder::gcd: return greedy_decode(table, rules, true);
    case Decoder::vcd:
    case Decoder::viterbi: return viterbi_decode(table, rules).path;
  }
  throw std::logic_error("run_decoder: unknown decoder");
}

DecodedEpisode decode_episode(const RunConfig& config, const ScorerModel& model, const Episode& episode) {
  const RuleSet& rules = rules_for(episode.roster);
  DecodedEpisode out;
  const int n = episode.n_frames;
  const int seg = config.decode.per_window ? config.data.window : n;
  for (int start = 0; start < n; start += seg) {
    const int len = std::min(seg, n - start);
    const auto w = make_window(episode, start, len, config.data.pitch);
    auto table = decoder_table(score_window(model, w, rules), config.decode.decoder);
    const auto part = run_decoder(table, rules, config.decode.decoder);
    out.path.insert(out.path.end(), part.begin(), part.end());
    out.tables.push_back(std::move(table));
  }
  out.events = extract_events(out.path, episode_window(episode, config.data.pitch), rules);
  return out;
}

EvaluationReport evaluate_split(const RunConfig& config, const PreparedSplit& split,
                                const std::vector<PossessionPath>& predictions) {
  if (predictions.size() != split.episodes.size())
    throw DataError("evaluate: " + std::to_string(predictions.size()) + " predicted paths for " +
                    std::to_string(split.episodes.size()) + " episodes");
  EvaluationReport r;
  std::vector<PathSegment> pred_segments, gold_segments;
  for (std::size_t k = 0; k < predictions.size(); ++k) {
    const auto& p = split.episodes[k];
    const RuleSet& rules = rules_for(p.episode.roster);
    if (predictions[k].size() != p.gold.path.size())
      throw DataError("evaluate: predicted path of episode '" + p.episode.id + "' has the wrong length");
    r.edges.merge(edge_metrics(predictions[k], p.gold.path, rules));
    const auto pred_events = extract_events(predictions[k], episode_window(p.episode, config.data.pitch), rules);
    r.events.merge(match_events(pred_events, p.gold_events, config.evaluation.match));
    r.recall.merge(relaxed_recall_curve(pred_events, p.gold_events, config.evaluation.recall_dt_s,
                                        config.evaluation.recall_dx_m, config.evaluation.match));
    pred_segments.push_back({predictions[k], &p.episode.roster, p.episode.start_time_s, p.episode.rate_hz});
    gold_segments.push_back({p.gold.path, &p.episode.roster, p.episode.start_time_s, p.episode.rate_hz});
  }
  r.pred_home_share = possession_stats(pred_segments, config.analytics.possession).share();
  r.gold_home_share = possession_stats(gold_segments, config.analytics.possession).share();
  return r;
}

std::string metrics_json(const EvaluationReport& r) {
  ordered_json j;
  j["edge"] = {{"steps", r.edges.steps},
               {"edge_acc", r.edges.edge_acc()},
               {"sender_acc", r.edges.sender_acc()},
               {"receiver_acc", r.edges.receiver_acc()},
               {"transitions", r.edges.transitions},
               {"violations", r.edges.violations},
               {"violation_rate", r.edges.violation_rate()}};
  j["events"] = {{"matched", r.events.matched},
                 {"detected", r.events.detected},
                 {"truth", r.events.truth},
                 {"precision", r.events.precision()},
                 {"recall", r.events.recall()},
                 {"f1", r.events.f1()},
                 {"precision_undefined", r.events.precision_undefined()},
                 {"recall_undefined", r.events.recall_undefined()}};
  j["possession"] = {{"pred_home_share", r.pred_home_share},
                     {"gold_home_share", r.gold_home_share},
                     {"share_error", std::abs(r.pred_home_share - r.gold_home_share)}};
  ordered_json grid = ordered_json::array();
  for (std::size_t i = 0; i < r.recall.dt_grid.size(); ++i) {
    ordered_json row = ordered_json::array();
    for (std::size_t k = 0; k < r.recall.dx_grid.size(); ++k) row.push_back(r.recall.recall(i, k));
    grid.push_back(row);
  }
  j["relaxed_recall"] = {{"dt_s", r.recall.dt_grid}, {"dx_m", r.recall.dx_grid}, {"truth", r.recall.truth},
                         {"recall", grid}};
  return j.dump(2) + "\n";
}

std::string metrics_text(const EvaluationReport& r) {
  std::string out;
  char buf[160];
  auto line = [&](const char* key, double v) {
    std::snprintf(buf, sizeof buf, "%s: %.6f\n", key, v);
    out += buf;
  };
  auto count = [&](const char* key, std::size_t v) {
    std::snprintf(buf, sizeof buf, "%s: %zu\n", key, v);
    out += buf;
  };
  count("edge.steps", r.edges.steps);
  line("edge.edge_acc", r.edges.edge_acc());
  line("edge.sender_acc", r.edges.sender_acc());
  line("edge.receiver_acc", r.edges.receiver_acc());
  count("edge.violations", r.edges.violations);
  line("edge.violation_rate", r.edges.violation_rate());
  count("events.matched", r.events.matched);
  count("events.detected", r.events.detected);
  count("events.truth", r.events.truth);
  line("events.precision", r.events.precision());
  line("events.recall", r.events.recall());
  line("events.f1", r.events.f1());
  out += std::string("events.precision_undefined: ") + (r.events.precision_undefined() ? "true" : "false") + "\n";
  line("possession.pred_home_share", r.pred_home_share);
  line("possession.gold_home_share", r.gold_home_share);
  line("possession.share_error", std::abs(r.pred_home_share - r.gold_home_share));
  return out;
}

std::string recall_csv(const RecallGrid& grid) {
  std::string out = "dt_s,dx_m,matched,truth,recall\n";
  char buf[128];
  for (std::size_t i = 0; i < grid.dt_grid.size(); ++i)
    for (std::size_t k = 0; k < grid.dx_grid.size(); ++k) {
      std::snprintf(buf, sizeof buf, "%g,%g,%zu,%zu,%.6f\n", grid.dt_grid[i], grid.dx_grid[k], grid.matched[i][k],
                    grid.truth, grid.recall(i, k));
      out += buf;
    }
  return out;
}

// ---- run directory --------------------------------------------------------

namespace {

void write_text(const fs::path& path, const std::string& text) {
  fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) throw DataError("cannot write " + path.string());
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void require(const fs::path& path, const char* producer) {
  if (!fs::exists(path))
    throw DataError("missing artifact " + path.string() + " (run '" + producer + "' first)");
}

void echo_config(const RunConfig& config, const fs::path& run) {
  write_text(run / "config.json", config_to_json(config));
}

std::string match_of(const std::string& episode_id) {
  const auto cut = episode_id.rfind('_');
  return cut == std::string::npos ? episode_id : episode_id.substr(0, cut);
}

ordered_json split_summary(const RunConfig& config, const PreparedSplit& split, bool windows) {
  std::set<std::string> matches;
  std::size_t events = 0, steps = 0, illegal = 0;
  for (const auto& p : split.episodes) {
    matches.insert(match_of(p.episode.id));
    events += p.gold_events.size();
    steps += static_cast<std::size_t>(p.episode.n_frames);
    illegal += p.gold.illegal_steps.size();
  }
  ordered_json j;
  j["matches"] = matches.size();
  j["episodes"] = split.episodes.size();
  j["events"] = events;
  j["frames"] = split.native_frames;
  j["steps"] = steps;
  if (windows)
    j["windows"] = split_windows(config, split);
  else
    j["windows"] = nullptr;
  j["touches"] = split.touches;
  j["inserted_touches"] = split.inserted;
  j["dropped_candidates"] = split.dropped;
  j["illegal_gold_steps"] = illegal;
  return j;
}

std::map<std::string, const Roster*> roster_index(const PreparedSplit& split) {
  std::map<std::string, const Roster*> out;
  for (const auto& p : split.episodes) out[p.episode.id] = &p.episode.roster;
  return out;
}

std::vector<PossessionPath> read_predictions(const fs::path& run, const PreparedSplit& split) {
  const auto file = run / "decodes" / "paths.csv";
  require(file, "decode");
  const auto paths = read_paths_csv(file.string(), roster_index(split));
  std::vector<PossessionPath> out;
  for (const auto& p : split.episodes) {
    const auto it = paths.find(p.episode.id);
    if (it == paths.end()) throw DataError(file.string() + ": no path for episode '" + p.episode.id + "'");
    out.push_back(it->second);
  }
  return out;
}

ordered_json network_json(const PassNetwork& net, Team team, const char* source) {
  ordered_json j;
  j["team"] = std::string(to_string(team));
  j["source"] = source;
  j["nodes"] = ordered_json::array();
  for (const auto& n : net.nodes)
    j["nodes"].push_back({{"id", n.id},
                          {"x_m", n.mean_position.x},
                          {"y_m", n.mean_position.y},
                          {"events", n.events},
                          {"passes", n.out_degree}});
  j["edges"] = ordered_json::array();
  for (const auto& [key, w] : net.edges) j["edges"].push_back({{"from", key.first}, {"to", key.second}, {"weight", w}});
  return j;
}

std::string heatmap_csv(const HeatGrid& g) {
  std::string out = "ix,iy,x_m,y_m,density\n";
  char buf[128];
  for (int iy = 0; iy < g.ny; ++iy)
    for (int ix = 0; ix < g.nx; ++ix) {
      const Vec2 c = g.cell_center(ix, iy);
      std::snprintf(buf, sizeof buf, "%d,%d,%.2f,%.2f,%.8e\n", ix, iy, c.x, c.y, g.at(ix, iy));
      out += buf;
    }
  return out;
}

}  // namespace

void command_synth(const RunConfig& config, const std::string& out_dir) {
  const fs::path out(out_dir);
  for (const char* split : {"train", "test"}) {
    const bool train = std::string(split) == "train";
    const int first = train ? 0 : config.synth.train_matches;
    const int count = train ? config.synth.train_matches : config.synth.test_matches;
    std::vector<Episode> episodes;
    std::vector<PathRecord> gold;
    std::vector<SynthMatch> matches;
    for (int m = first; m < first + count; ++m) matches.push_back(generate_match(config.synth.config, m));
    for (auto& m : matches)
      for (std::size_t e = 0; e < m.episodes.size(); ++e) episodes.push_back(m.episodes[e]);
    for (auto& m : matches)
      for (std::size_t e = 0; e < m.episodes.size(); ++e)
        gold.push_back({m.episodes[e].id, &m.episodes[e].roster, m.gold[e].path});
    fs::create_directories(out / split);
    write_tracking_csv((out / split / "tracking.csv").string(), episodes);
    write_touches_csv((out / split / "touches.csv").string(), episodes);
    write_paths_csv((out / split / "gold.csv").string(), gold);
  }
}

void command_prepare(const RunConfig& config, const std::string& run_dir) {
  const fs::path run(run_dir);
  const auto train = load_split(config, config.data.train_dir);
  const auto test = load_split(config, config.data.test_dir);
  echo_config(config, run);
  ordered_json manifest;
  manifest["splits"]["train"] = split_summary(config, train, true);
  manifest["splits"]["test"] = split_summary(config, test, false);
  manifest["warnings"] = train.warnings.size() + test.warnings.size();
  write_text(run / "manifest.json", manifest.dump(2) + "\n");
  std::string warnings;
  for (const auto* s : {&train, &test})
    for (const auto& w : s->warnings) warnings += w + "\n";
  write_text(run / "prepared" / "warnings.txt", warnings);
  fs::create_directories(run / "events");
  for (const auto& [name, split] : {std::pair{"train", &train}, std::pair{"test", &test}}) {
    std::vector<PathRecord> paths;
    std::vector<EventSet> events;
    for (const auto& p : split->episodes) {
      paths.push_back({p.episode.id, &p.episode.roster, p.gold.path});
      events.push_back({p.episode.id, &p.episode.roster, p.gold_events});
    }
    write_paths_csv((run / "prepared" / (std::string(name) + "_gold.csv")).string(), paths);
    write_events_csv((run / "events" / (std::string(name) + "_gold.csv")).string(), events);
  }
}

void command_train(const RunConfig& config, const std::string& run_dir) {
  const fs::path run(run_dir);
  require(run / "manifest.json", "prepare");
  echo_config(config, run);
  const auto split = load_split(config, config.data.train_dir);
  const auto trained = train_model(config, split);
  fs::create_directories(run / "checkpoints");
  save_model((run / "checkpoints" / "model.json").string(), trained.model);
  std::string log = "epoch,loss,crf,coarse,emit,illegal_gold\n";
  char buf[160];
  for (const auto& e : trained.epochs) {
    std::snprintf(buf, sizeof buf, "%d,%.8f,%.8f,%.8f,%.8f,%zu\n", e.epoch, e.mean_loss, e.mean_crf, e.mean_coarse,
                  e.mean_emit, e.illegal_gold);
    log += buf;
  }
  write_text(run / "checkpoints" / "train_log.csv", log);
}

void command_decode(const RunConfig& config, const std::string& run_dir) {
  const fs::path run(run_dir);
  const auto checkpoint = run / "checkpoints" / "model.json";
  require(checkpoint, "train");
  echo_config(config, run);
  const auto model = load_model(checkpoint.string());
  const auto split = load_split(config, config.data.test_dir);
  std::vector<PathRecord> paths;
  std::vector<EventSet> events;
  fs::remove_all(run / "decodes" / "scores");
  for (const auto& p : split.episodes) {
    auto decoded = decode_episode(config, model, p.episode);
    if (config.decode.write_scores) {
      const RuleSet& rules = rules_for(p.episode.roster);
      for (std::size_t k = 0; k < decoded.tables.size(); ++k) {
        const std::string name = decoded.tables.size() == 1 ? p.episode.id : p.episode.id + "_w" + std::to_string(k);
        fs::create_directories(run / "decodes" / "scores");
        write_score_file((run / "decodes" / "scores" / (name + ".pcrf")).string(), decoded.tables[k], rules);
      }
    }
    paths.push_back({p.episode.id, &p.episode.roster, std::move(decoded.path)});
    events.push_back({p.episode.id, &p.episode.roster, std::move(decoded.events)});
  }
  fs::create_directories(run / "decodes");
  fs::create_directories(run / "events");
  write_paths_csv((run / "decodes" / "paths.csv").string(), paths);
  write_events_csv((run / "events" / "pred.csv").string(), events);
}

void command_evaluate(const RunConfig& config, const std::string& run_dir) {
  const fs::path run(run_dir);
  const auto split = load_split(config, config.data.test_dir);
  const auto predictions = read_predictions(run, split);
  echo_config(config, run);
  const auto report = evaluate_split(config, split, predictions);
  write_text(run / "metrics" / "metrics.json", metrics_json(report));
  write_text(run / "metrics" / "metrics.txt", metrics_text(report));
  write_text(run / "metrics" / "relaxed_recall.csv", recall_csv(report.recall));
}

void command_report(const RunConfig& config, const std::string& run_dir) {
  const fs::path run(run_dir);
  const auto split = load_split(config, config.data.test_dir);
  const auto predictions = read_predictions(run, split);
  echo_config(config, run);
  const fs::path dir = run / "analytics";
  fs::remove_all(dir);
  std::vector<std::string> files;
  auto emit = [&](const std::string& name, const std::string& text) {
    write_text(dir / name, text);
    files.push_back(name);
  };

  // Possession.
  std::vector<PathSegment> pred_segments, gold_segments;
  std::vector<std::vector<EventRecord>> pred_events;
  for (std::size_t k = 0; k < split.episodes.size(); ++k) {
    const auto& p = split.episodes[k];
    pred_segments.push_back({predictions[k], &p.episode.roster, p.episode.start_time_s, p.episode.rate_hz});
    gold_segments.push_back({p.gold.path, &p.episode.roster, p.episode.start_time_s, p.episode.rate_hz});
    pred_events.push_back(
        extract_events(predictions[k], episode_window(p.episode, config.data.pitch), rules_for(p.episode.roster)));
  }
  const auto pred_pos = possession_stats(pred_segments, config.analytics.possession);
  const auto gold_pos = possession_stats(gold_segments, config.analytics.possession);
  {
    std::string csv = "bin_start_s,pred_home_steps,pred_away_steps,pred_home_share,gold_home_steps,gold_away_steps,gold_home_share\n";
    const std::size_t bins = std::max(pred_pos.timeline.size(), gold_pos.timeline.size());
    const double bin_s = config.analytics.possession.bin_minutes * 60.0;
    char buf[200];
    for (std::size_t b = 0; b < bins; ++b) {
      const PossessionBin pb = b < pred_pos.timeline.size() ? pred_pos.timeline[b] : PossessionBin{};
      const PossessionBin gb = b < gold_pos.timeline.size() ? gold_pos.timeline[b] : PossessionBin{};
      std::snprintf(buf, sizeof buf, "%g,%zu,%zu,%.6f,%zu,%zu,%.6f\n", static_cast<double>(b) * bin_s, pb.home, pb.away,
                    pb.share(), gb.home, gb.away, gb.share());
      csv += buf;
    }
    emit("possession_timeline.csv", csv);
  }

  ordered_json summary;
  summary["possession"] = {{"pred_home_share", pred_pos.share()},
                           {"gold_home_share", gold_pos.share()},
                           {"share_error", std::abs(pred_pos.share() - gold_pos.share())},
                           {"pred_excluded_steps", pred_pos.excluded},
                           {"gold_excluded_steps", gold_pos.excluded}};

  for (Team team : {Team::home, Team::away}) {
    const std::string t(to_string(team));
    // Heatmap of predicted on-ball events by this team.
    std::vector<Vec2> points;
    for (std::size_t k = 0; k < split.episodes.size(); ++k)
      for (const auto& e : pred_events[k])
        if (e.kind != EventKind::out_of_play && split.episodes[k].episode.roster.team_of(e.actor) == team)
          points.push_back(e.location);
    if (!points.empty()) {
      const auto grid = kde_heatmap(points, config.data.pitch, config.analytics.kde);
      emit("heatmap_" + t + ".csv", heatmap_csv(grid));
    }
    summary["heatmap_events"][t] = points.size();

    PassNetworkBuilder pred_net(team, config.analytics.substitutions), gold_net(team, config.analytics.substitutions);
    for (std::size_t k = 0; k < split.episodes.size(); ++k) {
      pred_net.add_episode(pred_events[k], split.episodes[k].episode.roster);
      gold_net.add_episode(split.episodes[k].gold_events, split.episodes[k].episode.roster);
    }
    const auto pn = pred_net.build(), gn = gold_net.build();
    emit("pass_network_" + t + ".json", network_json(pn, team, "predicted").dump(2) + "\n");
    emit("pass_network_" + t + "_gold.json", network_json(gn, team, "gold").dump(2) + "\n");
    try {
      const auto s = network_similarity(pn, gn);
      summary["network_similarity"][t] = {
          {"degree_mae", s.degree_mae}, {"weight_mae", s.weight_mae}, {"jsd", s.jsd}, {"spectral", s.spectral}};
    } catch (const DataError&) {
      summary["network_similarity"][t] = nullptr;  // no completed passes on one side
    }
  }

  const auto report = evaluate_split(config, split, predictions);
  emit("relaxed_recall.csv", recall_csv(report.recall));
  emit("summary.json", summary.dump(2) + "\n");
  ordered_json bundle;
  bundle["files"] = files;
  write_text(dir / "bundle.json", bundle.dump(2) + "\n");
}

void command_pipeline(const RunConfig& config, const std::string& run_dir) {
  command_prepare(config, run_dir);
  command_train(config, run_dir);
  command_decode(config, run_dir);
  command_evaluate(config, run_dir);
  command_report(config, run_dir);
}

std::vector<Baseline> baselines() {
  return {
      {"non_crf", TransitionScoring::none, false, false, Decoder::argmax},
      {"non_crf_gcd", TransitionScoring::none, false, false, Decoder::gcd},
      {"non_crf_vcd", TransitionScoring::none, false, false, Decoder::vcd},
      {"static_dense_crf", TransitionScoring::static_table, false, true, Decoder::viterbi},
      {"static_masked_crf", TransitionScoring::static_table, true, true, Decoder::viterbi},
      {"dynamic_dense_crf", TransitionScoring::dynamic, false, true, Decoder::viterbi},
      {"dynamic_masked_crf", TransitionScoring::dynamic, true, true, Decoder::viterbi},
  };
}

RunConfig apply_baseline(RunConfig config, const Baseline& b) {
  config.model.transition = b.transition;
  config.model.masked = b.masked;
  config.model.use_crf_loss = b.use_crf_loss;
  config.decode.decoder = b.decoder;
  config.validate();
  return config;
}

void command_matrix(const RunConfig& config, const std::string& run_dir) {
  const fs::path run(run_dir);
  echo_config(config, run);
  ordered_json rows = ordered_json::array();
  std::string table = "baseline             edge_acc  viol_rate  precision  recall    f1\n";
  std::map<std::string, fs::path> trained;  // model settings -> checkpoint
  for (const auto& b : baselines()) {
    const auto cfg = apply_baseline(config, b);
    const fs::path dir = run / b.name;
    command_prepare(cfg, dir.string());
    const std::string key = std::string(to_string(b.transition)) + (b.masked ? "/masked" : "/dense") +
                            (b.use_crf_loss ? "/crf" : "/ce");
    const auto it = trained.find(key);
    if (it == trained.end()) {
      command_train(cfg, dir.string());
      trained[key] = dir / "checkpoints";
    } else {
      fs::create_directories(dir / "checkpoints");
      for (const char* f : {"model.json", "train_log.csv"})
        fs::copy_file(it->second / f, dir / "checkpoints" / f, fs::copy_options::overwrite_existing);
    }
    command_decode(cfg, dir.string());
    command_evaluate(cfg, dir.string());
    const auto m = ordered_json::parse(read_text(dir / "metrics" / "metrics.json"));
    rows.push_back({{"name", b.name},
                    {"transition", std::string(to_string(b.transition))},
                    {"masked", b.masked},
                    {"crf_loss", b.use_crf_loss},
                    {"decoder", std::string(to_string(b.decoder))},
                    {"metrics", m}});
    char buf[200];
    std::snprintf(buf, sizeof buf, "%-20s %8.4f  %9.4f  %9.4f  %6.4f  %6.4f\n", b.name.c_str(),
                  m["edge"]["edge_acc"].get<double>(), m["edge"]["violation_rate"].get<double>(),
                  m["events"]["precision"].get<double>(), m["events"]["recall"].get<double>(),
                  m["events"]["f1"].get<double>());
    table += buf;
  }
  write_text(run / "matrix.json", rows.dump(2) + "\n");
  write_text(run / "matrix.txt", table);
}

void command_plot(const std::string& heatmap_csv_path, const std::string& ppm_path, int scale) {
  if (scale < 1) throw ConfigError("plot scale must be positive");
  std::ifstream in(heatmap_csv_path);
  if (!in) throw DataError("cannot read " + heatmap_csv_path);
  std::string line;
  std::getline(in, line);
  if (line.rfind("ix,iy,x_m,y_m,density", 0) != 0) throw DataError(heatmap_csv_path + ":1: not a heatmap CSV");
  struct Cell {
    int ix, iy;
    double v;
  };
  std::vector<Cell> cells;
  int nx = 0, ny = 0;
  double vmax = 0.0;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    Cell c{};
    double x = 0.0, y = 0.0;
    if (std::sscanf(line.c_str(), "%d,%d,%lf,%lf,%lf", &c.ix, &c.iy, &x, &y, &c.v) != 5 || c.ix < 0 || c.iy < 0 ||
        !(c.v >= 0.0))
      throw DataError(heatmap_csv_path + ":" + std::to_string(line_no) + ": malformed row");
    nx = std::max(nx, c.ix + 1);
    ny = std::max(ny, c.iy + 1);
    vmax = std::max(vmax, c.v);
    cells.push_back(c);
  }
  if (cells.empty()) throw DataError(heatmap_csv_path + ": no cells");
  const int w = nx * scale, h = ny * scale;
  std::vector<unsigned char> rgb(static_cast<std::size_t>(w) * static_cast<std::size_t>(h) * 3, 0);
  auto put = [&](int px, int py, unsigned char r, unsigned char g, unsigned char b) {
    const auto k = (static_cast<std::size_t>(py) * static_cast<std::size_t>(w) + static_cast<std::size_t>(px)) * 3;
    rgb[k] = r;
    rgb[k + 1] = g;
    rgb[k + 2] = b;
  };
  for (const auto& c : cells) {
    // Dark green -> red -> yellow -> white.
    const double s = vmax > 0.0 ? c.v / vmax : 0.0;
    const double r = std::clamp(3.0 * s, 0.0, 1.0), g = std::clamp(3.0 * s - 1.0, 0.0, 1.0),
                 b = std::clamp(3.0 * s - 2.0, 0.0, 1.0);
    const auto R = static_cast<unsigned char>(20 + 235 * r), G = static_cast<unsigned char>(60 + 195 * g),
               B = static_cast<unsigned char>(20 + 235 * b);
    for (int dy = 0; dy < scale; ++dy)
      for (int dx = 0; dx < scale; ++dx) put(c.ix * scale + dx, (ny - 1 - c.iy) * scale + dy, R, G, B);
  }
  for (int x = 0; x < w; ++x) {
    put(x, 0, 255, 255, 255);
    put(x, h - 1, 255, 255, 255);
  }
  for (int y = 0; y < h; ++y) {
    put(0, y, 255, 255, 255);
    put(w - 1, y, 255, 255, 255);
    put(w / 2, y, 255, 255, 255);
  }
  std::string out = "P6\n" + std::to_string(w) + " " + std::to_string(h) + "\n255\n";
  out.append(reinterpret_cast<const char*>(rgb.data()), rgb.size());
  write_text(fs::path(ppm_path), out);
}

}  // namespace pcrf
