#pragma once

// Linear feature scorer producing ScoreTables, its training loop, and model
// checkpoints.
//
//   emission    f_t(e)      = <w_emit,  phi^(e, t)>
//   dynamic     psi_t(e',e) = <w_trans, phi2^(e', e, t)>   (allowed pairs)
//   static      psi(e',e)   = static_trans[e' * |E| + e]
//   aux heads   z^s_{v,t}   = <w_sender, n^(v, t)>, z^r likewise
//
// where ^ marks z-scored features (training-set statistics kept in the
// model). Because phi2 concatenates the two incident edge vectors, a dynamic
// score splits into a_{t-1}(e') + b_t(e) + c 1[e' == e]; the scorer and its
// gradients use that split instead of materialising phi2.

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "pcrf/features.hpp"
#include "pcrf/lattice.hpp"
#include "pcrf/rules.hpp"
#include "pcrf/score_table.hpp"
#include "pcrf/tracking.hpp"

namespace pcrf {

enum class TransitionScoring : std::uint8_t { none, dynamic, static_table };

std::string_view to_string(TransitionScoring mode);
std::optional<TransitionScoring> transition_scoring_from_string(std::string_view name);

struct Standardizer {
  std::vector<double> mean;
  std::vector<double> scale;  // standard deviation, 1 where it vanishes

  bool fitted() const { return !mean.empty(); }
  double apply(std::size_t k, double value) const {
    return fitted() ? (value - mean[k]) / scale[k] : value;
  }
};

struct ScorerModel {
  TransitionScoring transition = TransitionScoring::dynamic;
  bool masked = true;
  double mask_value = kDefaultMaskValue;
  double lambda1 = 1.0;
  double lambda2 = 1.0;
  bool use_crf_loss = true;

  std::vector<double> w_emit = std::vector<double>(kEdgeFeatures, 0.0);
  std::vector<double> w_trans = std::vector<double>(kTransitionFeatures, 0.0);
  std::vector<double> w_sender = std::vector<double>(kNodeFeatures, 0.0);
  std::vector<double> w_receiver = std::vector<double>(kNodeFeatures, 0.0);
  /// Static mode only: |E| x |E| for the roster (static_players, static_out).
  std::vector<double> static_trans;
  int static_players = 0;
  int static_out = 0;

  Standardizer edge_norm;  // kEdgeFeatures entries
  Standardizer node_norm;  // kNodeFeatures entries

  /// Zero-initialised model; static mode sizes static_trans for `rules`.
  static ScorerModel zeros(TransitionScoring transition, bool masked, const RuleSet& rules);

  TransitionMode table_mode() const;
  /// Throws ConfigError on wrong dimensions, non-finite weights or
  /// negative loss weights.
  void validate() const;
};

/// Standardised copy of the features for `model`.
FeatureTables standardize(const ScorerModel& model, FeatureTables features);

/// Scores computed from already standardised features.
ScoreTable score_features(const ScorerModel& model, const FeatureTables& features,
                          const RuleSet& rules);

/// Feature extraction + standardisation + scoring. Throws ConfigError when
/// the model does not fit the window (dimension or static roster mismatch).
ScoreTable score_window(const ScorerModel& model, const TrackingWindow& window,
                        const RuleSet& rules);

/// Fits model.edge_norm / model.node_norm on the given windows.
void fit_standardizer(ScorerModel& model, std::span<const TrackingWindow> windows, int jobs = 0);

struct LossBreakdown {
  double total = 0.0;
  double crf = 0.0;     // log Z - S(gold), 0 when the CRF term is off
  double coarse = 0.0;  // sender + receiver cross-entropy summed over steps
  double emit = 0.0;    // emission cross-entropy summed over steps
  bool gold_illegal = false;
};

/// Same layout as the model's parameter vectors.
struct ModelGradient {
  std::vector<double> w_emit, w_trans, w_sender, w_receiver, static_trans;

  static ModelGradient zeros_like(const ScorerModel& model);
  void add(const ModelGradient& other, double weight = 1.0);
};

/// total = [use_crf_loss] crf + lambda1 coarse + lambda2 emit for one
/// window. When `grad` is non-null the parameter gradient is added to it.
LossBreakdown window_loss(const ScorerModel& model, const TrackingWindow& window,
                          std::span<const EdgeId> gold, const RuleSet& rules,
                          ModelGradient* grad = nullptr);

struct EpochStats {
  int epoch = 0;  // 1-based
  double mean_loss = 0.0;
  double mean_crf = 0.0;
  double mean_coarse = 0.0;
  double mean_emit = 0.0;
  std::size_t illegal_gold = 0;
};

struct TrainConfig {
  double learning_rate = 1e-3;
  int batch_size = 32;
  int epochs = 20;
  std::uint64_t seed = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  int jobs = 0;  // 0: OpenMP default
  std::function<void(const EpochStats&)> on_epoch;
};

/// Minimises the mean per-window loss with Adam over shuffled mini-batches.
/// Fits the standardiser first when the model has none. Per-window
/// gradients are reduced in window order, so the result depends only on the
/// seed. Throws DataError on empty or misaligned data and std::runtime_error
/// when the loss stops being finite.
std::vector<EpochStats> train(ScorerModel& model, std::span<const TrackingWindow> windows,
                              std::span<const PossessionPath> gold, const TrainConfig& config);

/// Self-describing JSON checkpoint.
std::string model_to_json(const ScorerModel& model);
ScorerModel model_from_json(std::string_view text);
void save_model(const std::string& path, const ScorerModel& model);
ScorerModel load_model(const std::string& path);

}  // namespace pcrf
