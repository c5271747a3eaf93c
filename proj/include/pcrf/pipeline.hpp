#pragma once

// End-to-end pipeline behind the CLI: run configuration, dataset
// preparation, training, decoding, evaluation and the analytics report.
//
// The in-memory stages (prepare_split, train_model, decode_episode,
// evaluate_split) are what the run-directory commands compose; they are
// exposed so callers can skip the CSV round trip.

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "pcrf/analytics.hpp"
#include "pcrf/evaluation.hpp"
#include "pcrf/labeling.hpp"
#include "pcrf/scorer.hpp"
#include "pcrf/synth.hpp"

namespace pcrf {

enum class Decoder { argmax, greedy, gcd, vcd, viterbi };

std::string_view to_string(Decoder d);
std::optional<Decoder> decoder_from_string(std::string_view name);

struct RunConfig {
  std::uint64_t seed = 0;
  int jobs = 0;  // 0: OpenMP default
  std::string run_dir = "run";

  struct Data {
    std::string train_dir = "data/train";
    std::string test_dir = "data/test";
    double tracking_hz = 25.0;
    double decode_hz = 5.0;
    bool interpolate = false;  // allow non-integer resampling ratios
    int window = 50;
    int stride = 5;
    Pitch pitch;
    bool insert_missed_touches = true;
    double rdp_epsilon_m = 0.8;
    InsertionParams insertion;
  } data;

  struct Model {
    TransitionScoring transition = TransitionScoring::dynamic;
    bool masked = true;
    double mask_value = kDefaultMaskValue;
    double lambda1 = 1.0;
    double lambda2 = 1.0;
    bool use_crf_loss = true;
  } model;

  struct Train {
    double learning_rate = 1e-3;
    int batch_size = 32;
    int epochs = 20;
  } train;

  struct Decode {
    Decoder decoder = Decoder::viterbi;
    bool per_window = false;  // decode disjoint windows instead of whole episodes
    bool write_scores = true;
  } decode;

  struct Evaluation {
    MatchParams match;
    std::vector<double> recall_dt_s{0.0, 0.2, 0.5, 1.0, 2.0, 3.0};
    std::vector<double> recall_dx_m{0.0, 1.0, 2.0, 5.0, 10.0, 20.0};
  } evaluation;

  struct Analytics {
    PossessionOptions possession;
    KdeOptions kde;
    std::map<std::string, std::string> substitutions;
  } analytics;

  struct Synth {
    std::string out_dir = "data";
    int train_matches = 4;
    int test_matches = 1;
    SynthConfig config;
  } synth;

  /// Throws ConfigError on inconsistent values.
  void validate() const;
};

/// Parses a JSON configuration. Missing keys keep their defaults; unknown
/// keys are rejected. Relative paths resolve against `base_dir`.
RunConfig config_from_json(const std::string& text, const std::string& base_dir = ".");
RunConfig load_config(const std::string& path);
/// Every field, defaults included (paths as resolved).
std::string config_to_json(const RunConfig& config);

struct PreparedEpisode {
  Episode episode;  // on the decode grid, touches after insertion
  GoldPath gold;
  std::vector<EventRecord> gold_events;
};

struct PreparedSplit {
  std::vector<PreparedEpisode> episodes;
  std::size_t native_frames = 0;
  std::size_t touches = 0;
  std::size_t inserted = 0;
  std::size_t dropped = 0;
  std::vector<std::string> warnings;
};

/// Touch insertion (at the native rate, when enabled and a ball channel is
/// present), resampling to the decode rate, gold paths and gold events.
PreparedSplit prepare_split(const RunConfig& config, std::vector<Episode> native_episodes);
/// Reads <dir>/tracking.csv and <dir>/touches.csv, then prepare_split.
PreparedSplit load_split(const RunConfig& config, const std::string& dir);

std::size_t split_windows(const RunConfig& config, const PreparedSplit& split);

struct TrainedModel {
  ScorerModel model;
  std::vector<EpochStats> epochs;
};

TrainedModel train_model(const RunConfig& config, const PreparedSplit& split,
                         const std::function<void(const EpochStats&)>& on_epoch = {});

/// The table a decoder works on: gcd and vcd drop the transition scores
/// and force masking; the others use the model's table as is.
ScoreTable decoder_table(ScoreTable table, Decoder decoder);
/// argmax: per-step emission argmax; greedy: constrained greedy on the
/// table; gcd: constrained greedy on emissions; vcd: masked Viterbi on
/// emissions; viterbi: Viterbi on the table.
PossessionPath run_decoder(const ScoreTable& table, const RuleSet& rules, Decoder decoder);

struct DecodedEpisode {
  PossessionPath path;
  std::vector<ScoreTable> tables;  // one per decoded segment
  std::vector<EventRecord> events;
};

DecodedEpisode decode_episode(const RunConfig& config, const ScorerModel& model, const Episode& episode);

struct EvaluationReport {
  EdgeMetrics edges;
  EventMatchReport events;
  RecallGrid recall;
  double pred_home_share = 0.0;
  double gold_home_share = 0.0;
};

EvaluationReport evaluate_split(const RunConfig& config, const PreparedSplit& split,
                                const std::vector<PossessionPath>& predictions);

std::string metrics_json(const EvaluationReport& report);
std::string metrics_text(const EvaluationReport& report);
std::string recall_csv(const RecallGrid& grid);

// ---- run-directory commands -----------------------------------------------
//
// <run>/config.json, manifest.json, checkpoints/, decodes/, events/,
// metrics/, analytics/. Every command echoes the configuration and fails
// with DataError naming any missing upstream artifact.

void command_synth(const RunConfig& config, const std::string& out_dir);
void command_prepare(const RunConfig& config, const std::string& run_dir);
void command_train(const RunConfig& config, const std::string& run_dir);
void command_decode(const RunConfig& config, const std::string& run_dir);
void command_evaluate(const RunConfig& config, const std::string& run_dir);
void command_report(const RunConfig& config, const std::string& run_dir);
void command_pipeline(const RunConfig& config, const std::string& run_dir);

struct Baseline {
  std::string name;
  TransitionScoring transition;
  bool masked;
  bool use_crf_loss;
  Decoder decoder;
};

/// The seven non-ball baselines: Non-CRF (argmax, GCD, VCD), Static
/// Dense/Masked CRF, Dynamic Dense/Masked CRF.
std::vector<Baseline> baselines();
RunConfig apply_baseline(RunConfig config, const Baseline& baseline);
/// Runs every baseline in <run>/<name>/ and writes <run>/matrix.json and
/// matrix.txt.
void command_matrix(const RunConfig& config, const std::string& run_dir);

/// Renders a heatmap CSV (ix,iy,x_m,y_m,density) as a binary PPM.
void command_plot(const std::string& heatmap_csv, const std::string& ppm_path, int scale = 4);

}  // namespace pcrf
