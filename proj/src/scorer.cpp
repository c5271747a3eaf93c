#include "pcrf/scorer.hpp"

#include <omp.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "logsumexp.hpp"
#include "pcrf/error.hpp"

namespace pcrf {

using json = nlohmann::json;

std::string_view to_string(TransitionScoring mode) {
  switch (mode) {
    case TransitionScoring::none: return "none";
    case TransitionScoring::dynamic: return "dynamic";
    case TransitionScoring::static_table: return "static";
  }
  return "?";
}

std::optional<TransitionScoring> transition_scoring_from_string(std::string_view name) {
  if (name == "none") return TransitionScoring::none;
  if (name == "dynamic") return TransitionScoring::dynamic;
  if (name == "static") return TransitionScoring::static_table;
  return std::nullopt;
}

ScorerModel ScorerModel::zeros(TransitionScoring transition, bool masked, const RuleSet& rules) {
  ScorerModel m;
  m.transition = transition;
  m.masked = masked;
  if (transition == TransitionScoring::static_table) {
    m.static_players = rules.n_players();
    m.static_out = rules.n_out();
    m.static_trans.assign(static_cast<std::size_t>(rules.n_edges()) * static_cast<std::size_t>(rules.n_edges()),
                          0.0);
  }
  return m;
}

TransitionMode ScorerModel::table_mode() const {
  switch (transition) {
    case TransitionScoring::none: return TransitionMode::none;
    case TransitionScoring::dynamic: return TransitionMode::dynamic_sparse;
    case TransitionScoring::static_table: return TransitionMode::static_dense;
  }
  return TransitionMode::none;
}

namespace {

bool all_finite(const std::vector<double>& v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

double dot(std::span<const double> w, std::span<const double> x) {
  double s = 0.0;
  for (std::size_t k = 0; k < w.size(); ++k) s += w[k] * x[k];
  return s;
}

void axpy(double a, std::span<const double> x, std::span<double> y) {
  for (std::size_t k = 0; k < x.size(); ++k) y[k] += a * x[k];
}

std::size_t static_size(int n_players, int n_out) {
  const auto n = static_cast<std::size_t>(n_players + n_out);
  return n * n * n * n;
}

}  // namespace

void ScorerModel::validate() const {
  auto need = [](bool ok, const std::string& what) {
    if (!ok) throw ConfigError("scorer model: " + what);
  };
  need(w_emit.size() == kEdgeFeatures, "w_emit has the wrong length");
  need(w_trans.size() == kTransitionFeatures, "w_trans has the wrong length");
  need(w_sender.size() == kNodeFeatures, "w_sender has the wrong length");
  need(w_receiver.size() == kNodeFeatures, "w_receiver has the wrong length");
  need(all_finite(w_emit) && all_finite(w_trans) && all_finite(w_sender) && all_finite(w_receiver) &&
           all_finite(static_trans),
       "non-finite weight");
  need(lambda1 >= 0.0 && lambda2 >= 0.0, "loss weights must be non-negative");
  need(std::isfinite(mask_value), "mask_value must be finite");
  if (transition == TransitionScoring::static_table)
    need(static_players >= 1 && static_trans.size() == static_size(static_players, static_out),
         "static transition table does not match its roster");
  auto check_norm = [&](const Standardizer& s, std::size_t n, const char* name) {
    if (!s.fitted()) return;
    need(s.mean.size() == n && s.scale.size() == n, std::string(name) + " has the wrong length");
    need(std::all_of(s.scale.begin(), s.scale.end(), [](double x) { return x > 0.0 && std::isfinite(x); }),
         std::string(name) + " has a non-positive scale");
  };
  check_norm(edge_norm, kEdgeFeatures, "edge_norm");
  check_norm(node_norm, kNodeFeatures, "node_norm");
}

FeatureTables standardize(const ScorerModel& model, FeatureTables f) {
  if (model.edge_norm.fitted())
    for (std::size_t i = 0; i < f.edge.size(); i += kEdgeFeatures)
      for (std::size_t k = 0; k < kEdgeFeatures; ++k) f.edge[i + k] = model.edge_norm.apply(k, f.edge[i + k]);
  if (model.node_norm.fitted())
    for (std::size_t i = 0; i < f.node.size(); i += kNodeFeatures)
      for (std::size_t k = 0; k < kNodeFeatures; ++k) f.node[i + k] = model.node_norm.apply(k, f.node[i + k]);
  return f;
}

namespace {

void check_fits(const ScorerModel& model, const RuleSet& rules) {
  model.validate();
  if (model.transition == TransitionScoring::static_table &&
      (model.static_players != rules.n_players() || model.static_out != rules.n_out()))
    throw ConfigError("static transition table was trained for " + std::to_string(model.static_players) +
                      "+" + std::to_string(model.static_out) + " nodes, window has " +
                      std::to_string(rules.n_players()) + "+" + std::to_string(rules.n_out()));
}

/// a_t(e) and b_t(e): the prev / next halves of the dynamic transition score.
void transition_halves(const ScorerModel& model, const FeatureTables& f, std::vector<double>& a,
                       std::vector<double>& b) {
  const std::span<const double> wa(model.w_trans.data(), kEdgeFeatures);
  const std::span<const double> wb(model.w_trans.data() + kEdgeFeatures, kEdgeFeatures);
  const std::size_t cells = static_cast<std::size_t>(f.steps) * static_cast<std::size_t>(f.n_edges);
  a.resize(cells);
  b.resize(cells);
  for (int t = 0; t < f.steps; ++t)
    for (EdgeId e = 0; e < f.n_edges; ++e) {
      const std::size_t k = static_cast<std::size_t>(t) * static_cast<std::size_t>(f.n_edges) +
                            static_cast<std::size_t>(e);
      a[k] = dot(wa, f.edge_row(t, e));
      b[k] = dot(wb, f.edge_row(t, e));
    }
}

}  // namespace

ScoreTable score_features(const ScorerModel& model, const FeatureTables& f, const RuleSet& rules) {
  check_fits(model, rules);
  if (f.n_edges != rules.n_edges()) throw ConfigError("score_features: feature table does not match rules");
  ScoreTable s = ScoreTable::zeros(rules, f.steps, model.table_mode(), model.masked);
  s.mask_value = model.mask_value;
  for (int t = 0; t < f.steps; ++t)
    for (EdgeId e = 0; e < f.n_edges; ++e) s.emit(t, e) = dot(model.w_emit, f.edge_row(t, e));

  if (model.transition == TransitionScoring::dynamic && f.steps > 1) {
    std::vector<double> a, b;
    transition_halves(model, f, a, b);
    const double c = model.w_trans[2 * kEdgeFeatures];
    const auto allowed = rules.allowed_list();
    const std::size_t n_edges = static_cast<std::size_t>(f.n_edges);
    for (int t = 1; t < f.steps; ++t) {
      double* row = s.transition.data() + static_cast<std::size_t>(t - 1) * allowed.size();
      const double* a_prev = a.data() + static_cast<std::size_t>(t - 1) * n_edges;
      const double* b_next = b.data() + static_cast<std::size_t>(t) * n_edges;
      for (std::size_t k = 0; k < allowed.size(); ++k) {
        const auto [p, n] = allowed[k];
        row[k] = a_prev[p] + b_next[n] + (p == n ? c : 0.0);
      }
    }
  } else if (model.transition == TransitionScoring::static_table) {
    s.transition = model.static_trans;
  }
  return s;
}

ScoreTable score_window(const ScorerModel& model, const TrackingWindow& window, const RuleSet& rules) {
  check_fits(model, rules);
  return score_features(model, standardize(model, extract_features(window, rules)), rules);
}

void fit_standardizer(ScorerModel& model, std::span<const TrackingWindow> windows, int jobs) {
  if (windows.empty()) throw DataError("fit_standardizer: no windows");
  constexpr int kStats = kEdgeFeatures + kNodeFeatures;
  struct Partial {
    std::array<long double, kStats> sum{}, sumsq{};
    long double n_edge = 0, n_node = 0;
  };
  std::vector<Partial> partial(windows.size());
  const int n_threads = jobs > 0 ? jobs : omp_get_max_threads();
  const auto n_windows = static_cast<std::ptrdiff_t>(windows.size());
#pragma omp parallel for schedule(dynamic) num_threads(n_threads)
  for (std::ptrdiff_t i = 0; i < n_windows; ++i) {
    const auto& w = windows[static_cast<std::size_t>(i)];
    const FeatureTables f = extract_features(w, shared_rule_set(w.roster.n_players(), w.roster.n_out));
    Partial& p = partial[static_cast<std::size_t>(i)];
    for (std::size_t j = 0; j < f.edge.size(); j += kEdgeFeatures)
      for (int k = 0; k < kEdgeFeatures; ++k) {
        const long double x = f.edge[j + static_cast<std::size_t>(k)];
        p.sum[k] += x;
        p.sumsq[k] += x * x;
      }
    for (std::size_t j = 0; j < f.node.size(); j += kNodeFeatures)
      for (int k = 0; k < kNodeFeatures; ++k) {
        const long double x = f.node[j + static_cast<std::size_t>(k)];
        p.sum[kEdgeFeatures + k] += x;
        p.sumsq[kEdgeFeatures + k] += x * x;
      }
    p.n_edge = static_cast<long double>(f.edge.size() / kEdgeFeatures);
    p.n_node = static_cast<long double>(f.node.size() / kNodeFeatures);
  }
  Partial total;
  for (const auto& p : partial) {
    for (int k = 0; k < kStats; ++k) {
      total.sum[k] += p.sum[k];
      total.sumsq[k] += p.sumsq[k];
    }
    total.n_edge += p.n_edge;
    total.n_node += p.n_node;
  }
  auto finish = [&](int offset, int count, long double n, Standardizer& out) {
    out.mean.assign(static_cast<std::size_t>(count), 0.0);
    out.scale.assign(static_cast<std::size_t>(count), 1.0);
    for (int k = 0; k < count; ++k) {
      const long double mean = total.sum[offset + k] / n;
      const long double var = std::max<long double>(0, total.sumsq[offset + k] / n - mean * mean);
      out.mean[static_cast<std::size_t>(k)] = static_cast<double>(mean);
      const double sd = static_cast<double>(std::sqrt(var));
      out.scale[static_cast<std::size_t>(k)] = sd > 1e-9 ? sd : 1.0;
    }
  };
  finish(0, kEdgeFeatures, total.n_edge, model.edge_norm);
  finish(kEdgeFeatures, kNodeFeatures, total.n_node, model.node_norm);
}

ModelGradient ModelGradient::zeros_like(const ScorerModel& model) {
  ModelGradient g;
  g.w_emit.assign(model.w_emit.size(), 0.0);
  g.w_trans.assign(model.w_trans.size(), 0.0);
  g.w_sender.assign(model.w_sender.size(), 0.0);
  g.w_receiver.assign(model.w_receiver.size(), 0.0);
  g.static_trans.assign(model.static_trans.size(), 0.0);
  return g;
}

void ModelGradient::add(const ModelGradient& o, double weight) {
  axpy(weight, o.w_emit, w_emit);
  axpy(weight, o.w_trans, w_trans);
  axpy(weight, o.w_sender, w_sender);
  axpy(weight, o.w_receiver, w_receiver);
  axpy(weight, o.static_trans, static_trans);
}

namespace {

/// Cross-entropy of softmax(logits) against `gold`; adds weight * (p - 1[gold])
/// to dlogits when non-null.
double softmax_ce(std::span<const double> logits, int gold, double weight, double* dlogits) {
  detail::LogSumExp lse;
  for (double x : logits) lse.add(x);
  const double log_z = lse.value();
  if (dlogits != nullptr)
    for (std::size_t k = 0; k < logits.size(); ++k)
      dlogits[k] += weight * (std::exp(logits[k] - log_z) - (static_cast<int>(k) == gold ? 1.0 : 0.0));
  return log_z - logits[static_cast<std::size_t>(gold)];
}

}  // namespace

LossBreakdown window_loss(const ScorerModel& model, const TrackingWindow& window,
                          std::span<const EdgeId> gold, const RuleSet& rules, ModelGradient* grad) {
  if (gold.size() != static_cast<std::size_t>(window.steps))
    throw DataError("window_loss: gold path length " + std::to_string(gold.size()) + " != window steps " +
                    std::to_string(window.steps));
  for (EdgeId e : gold)
    if (!rules.valid_edge(e)) throw DataError("window_loss: gold path holds an invalid edge id");

  const FeatureTables f = standardize(model, extract_features(window, rules));
  const ScoreTable table = score_features(model, f, rules);
  const int steps = f.steps;
  const std::size_t n_edges = static_cast<std::size_t>(f.n_edges);
  const int n_nodes = f.n_nodes;

  LossBreakdown loss;
  std::vector<double> g_emit;     // d loss / d f_t(e)
  std::vector<double> g_trans;    // d loss / d stored transition score
  if (grad != nullptr) g_emit.assign(table.emission.size(), 0.0);

  if (model.use_crf_loss) {
    NllResult r = nll_and_gradients(table, rules, gold);
    loss.crf = r.nll;
    loss.gold_illegal = r.gold_illegal;
    if (grad != nullptr) {
      g_emit = std::move(r.grad.emission);
      g_trans = std::move(r.grad.transition);
    }
  }

  for (int t = 0; t < steps; ++t) {
    double* d = (grad != nullptr && model.lambda2 != 0.0)
                    ? g_emit.data() + static_cast<std::size_t>(t) * n_edges
                    : nullptr;
    loss.emit += softmax_ce(table.emission_row(t), gold[static_cast<std::size_t>(t)], model.lambda2, d);
  }

  std::vector<double> zs(static_cast<std::size_t>(n_nodes)), zr(zs.size()), dzs(zs.size()), dzr(zs.size());
  for (int t = 0; t < steps; ++t) {
    const Edge g = rules.decode(gold[static_cast<std::size_t>(t)]);
    for (NodeId v = 0; v < n_nodes; ++v) {
      zs[static_cast<std::size_t>(v)] = dot(model.w_sender, f.node_row(t, v));
      zr[static_cast<std::size_t>(v)] = dot(model.w_receiver, f.node_row(t, v));
    }
    std::fill(dzs.begin(), dzs.end(), 0.0);
    std::fill(dzr.begin(), dzr.end(), 0.0);
    loss.coarse += softmax_ce(zs, g.sender, model.lambda1, dzs.data());
    loss.coarse += softmax_ce(zr, g.receiver, model.lambda1, dzr.data());
    if (grad != nullptr && model.lambda1 != 0.0)
      for (NodeId v = 0; v < n_nodes; ++v) {
        axpy(dzs[static_cast<std::size_t>(v)], f.node_row(t, v), grad->w_sender);
        axpy(dzr[static_cast<std::size_t>(v)], f.node_row(t, v), grad->w_receiver);
      }
  }

  loss.total = (model.use_crf_loss ? loss.crf : 0.0) + model.lambda1 * loss.coarse + model.lambda2 * loss.emit;
  if (grad == nullptr) return loss;

  for (int t = 0; t < steps; ++t)
    for (std::size_t e = 0; e < n_edges; ++e) {
      const double d = g_emit[static_cast<std::size_t>(t) * n_edges + e];
      if (d != 0.0) axpy(d, f.edge_row(t, static_cast<EdgeId>(e)), grad->w_emit);
    }

  if (model.use_crf_loss && model.transition == TransitionScoring::dynamic && steps > 1) {
    // Collapse per-pair gradients onto the prev and next halves.
    std::vector<double> g_prev(static_cast<std::size_t>(steps) * n_edges, 0.0), g_next(g_prev.size(), 0.0);
    double g_identity = 0.0;
    const auto allowed = rules.allowed_list();
    for (int t = 1; t < steps; ++t) {
      const double* row = g_trans.data() + static_cast<std::size_t>(t - 1) * allowed.size();
      double* gp = g_prev.data() + static_cast<std::size_t>(t - 1) * n_edges;
      double* gn = g_next.data() + static_cast<std::size_t>(t) * n_edges;
      for (std::size_t k = 0; k < allowed.size(); ++k) {
        const auto [p, n] = allowed[k];
        gp[p] += row[k];
        gn[n] += row[k];
        if (p == n) g_identity += row[k];
      }
    }
    std::span<double> wa(grad->w_trans.data(), kEdgeFeatures);
    std::span<double> wb(grad->w_trans.data() + kEdgeFeatures, kEdgeFeatures);
    for (int t = 0; t < steps; ++t)
      for (std::size_t e = 0; e < n_edges; ++e) {
        const std::size_t k = static_cast<std::size_t>(t) * n_edges + e;
        const auto row = f.edge_row(t, static_cast<EdgeId>(e));
        if (g_prev[k] != 0.0) axpy(g_prev[k], row, wa);
        if (g_next[k] != 0.0) axpy(g_next[k], row, wb);
      }
    grad->w_trans[2 * kEdgeFeatures] += g_identity;
  } else if (model.use_crf_loss && model.transition == TransitionScoring::static_table) {
    axpy(1.0, g_trans, grad->static_trans);
  }
  return loss;
}

namespace {

struct AdamState {
  std::vector<double> m, v;
};

void adam_step(std::vector<double>& w, const std::vector<double>& g, AdamState& s, const TrainConfig& c,
               long step) {
  if (s.m.empty()) {
    s.m.assign(w.size(), 0.0);
    s.v.assign(w.size(), 0.0);
  }
  const double bc1 = 1.0 - std::pow(c.beta1, static_cast<double>(step));
  const double bc2 = 1.0 - std::pow(c.beta2, static_cast<double>(step));
  for (std::size_t k = 0; k < w.size(); ++k) {
    s.m[k] = c.beta1 * s.m[k] + (1.0 - c.beta1) * g[k];
    s.v[k] = c.beta2 * s.v[k] + (1.0 - c.beta2) * g[k] * g[k];
    w[k] -= c.learning_rate * (s.m[k] / bc1) / (std::sqrt(s.v[k] / bc2) + c.epsilon);
  }
}

}  // namespace

std::vector<EpochStats> train(ScorerModel& model, std::span<const TrackingWindow> windows,
                              std::span<const PossessionPath> gold, const TrainConfig& config) {
  if (windows.empty()) throw DataError("train: empty dataset");
  if (windows.size() != gold.size()) throw DataError("train: windows and gold paths differ in count");
  if (config.batch_size < 1 || config.epochs < 0 || !(config.learning_rate > 0.0))
    throw ConfigError("train: batch_size >= 1, epochs >= 0 and learning_rate > 0 required");
  for (std::size_t i = 0; i < windows.size(); ++i)
    if (gold[i].size() != static_cast<std::size_t>(windows[i].steps))
      throw DataError("train: gold path " + std::to_string(i) + " does not match its window length");
  model.validate();
  if (!model.edge_norm.fitted()) fit_standardizer(model, windows, config.jobs);

  const int n_threads = config.jobs > 0 ? config.jobs : omp_get_max_threads();
  std::mt19937_64 rng(config.seed);
  std::vector<std::size_t> order(windows.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  AdamState s_emit, s_trans, s_sender, s_receiver, s_static;
  long step = 0;
  std::vector<EpochStats> history;

  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng() % i]);
    EpochStats stats;
    stats.epoch = epoch;
    for (std::size_t b0 = 0; b0 < order.size(); b0 += static_cast<std::size_t>(config.batch_size)) {
      const std::size_t b1 = std::min(order.size(), b0 + static_cast<std::size_t>(config.batch_size));
      ModelGradient batch = ModelGradient::zeros_like(model);
      // Chunks of n_threads windows run concurrently; their gradients are
      // summed in batch order.
      for (std::size_t c0 = b0; c0 < b1; c0 += static_cast<std::size_t>(n_threads)) {
        const std::size_t c1 = std::min(b1, c0 + static_cast<std::size_t>(n_threads));
        std::vector<ModelGradient> grads(c1 - c0, ModelGradient::zeros_like(model));
        std::vector<LossBreakdown> losses(c1 - c0);
        std::vector<std::string> errors(c1 - c0);
        const auto n = static_cast<std::ptrdiff_t>(c1 - c0);
#pragma omp parallel for schedule(static, 1) num_threads(n_threads)
        for (std::ptrdiff_t j = 0; j < n; ++j) {
          const std::size_t w = order[c0 + static_cast<std::size_t>(j)];
          try {
            const RuleSet& rules =
                shared_rule_set(windows[w].roster.n_players(), windows[w].roster.n_out);
            losses[static_cast<std::size_t>(j)] =
                window_loss(model, windows[w], gold[w], rules, &grads[static_cast<std::size_t>(j)]);
          } catch (const std::exception& ex) {
            errors[static_cast<std::size_t>(j)] = ex.what();
          }
        }
        for (std::size_t j = 0; j < grads.size(); ++j) {
          if (!errors[j].empty()) throw DataError("train: " + errors[j]);
          const LossBreakdown& l = losses[j];
          if (!std::isfinite(l.total)) {
            const auto& w = windows[order[c0 + j]];
            throw std::runtime_error("train: loss diverged (epoch " + std::to_string(epoch) + ", episode '" +
                                     w.episode_id + "' window " + std::to_string(w.window_id) +
                                     ", crf=" + std::to_string(l.crf) + " coarse=" + std::to_string(l.coarse) +
                                     " emit=" + std::to_string(l.emit) + ")");
          }
          stats.mean_loss += l.total;
          stats.mean_crf += l.crf;
          stats.mean_coarse += l.coarse;
          stats.mean_emit += l.emit;
          stats.illegal_gold += l.gold_illegal ? 1 : 0;
          batch.add(grads[j]);
        }
      }
      const double inv = 1.0 / static_cast<double>(b1 - b0);
      for (auto* v : {&batch.w_emit, &batch.w_trans, &batch.w_sender, &batch.w_receiver, &batch.static_trans})
        for (double& x : *v) x *= inv;
      ++step;
      adam_step(model.w_emit, batch.w_emit, s_emit, config, step);
      if (model.transition == TransitionScoring::dynamic) adam_step(model.w_trans, batch.w_trans, s_trans, config, step);
      if (model.transition == TransitionScoring::static_table)
        adam_step(model.static_trans, batch.static_trans, s_static, config, step);
      adam_step(model.w_sender, batch.w_sender, s_sender, config, step);
      adam_step(model.w_receiver, batch.w_receiver, s_receiver, config, step);
      if (!all_finite(model.w_emit) || !all_finite(model.w_trans) || !all_finite(model.static_trans))
        throw std::runtime_error("train: parameters became non-finite in epoch " + std::to_string(epoch));
    }
    const double n = static_cast<double>(windows.size());
    stats.mean_loss /= n;
    stats.mean_crf /= n;
    stats.mean_coarse /= n;
    stats.mean_emit /= n;
    history.push_back(stats);
    if (config.on_epoch) config.on_epoch(stats);
  }
  return history;
}

namespace {

json norm_json(const Standardizer& s) { return {{"mean", s.mean}, {"scale", s.scale}}; }

Standardizer norm_from(const json& j) {
  Standardizer s;
  if (j.is_null()) return s;
  s.mean = j.at("mean").get<std::vector<double>>();
  s.scale = j.at("scale").get<std::vector<double>>();
  return s;
}

}  // namespace

std::string model_to_json(const ScorerModel& m) {
  json j;
  j["format"] = "pcrf-scorer";
  j["version"] = 1;
  j["transition"] = std::string(to_string(m.transition));
  j["masked"] = m.masked;
  j["mask_value"] = m.mask_value;
  j["lambda1"] = m.lambda1;
  j["lambda2"] = m.lambda2;
  j["use_crf_loss"] = m.use_crf_loss;
  j["edge_features"] = edge_feature_names();
  j["node_features"] = std::vector<std::string>(kNodeFeatureNames.begin(), kNodeFeatureNames.end());
  j["transition_features"] = transition_feature_names();
  j["w_emit"] = m.w_emit;
  j["w_trans"] = m.w_trans;
  j["w_sender"] = m.w_sender;
  j["w_receiver"] = m.w_receiver;
  if (m.transition == TransitionScoring::static_table)
    j["static_trans"] = {{"n_players", m.static_players}, {"n_out", m.static_out}, {"values", m.static_trans}};
  j["edge_norm"] = m.edge_norm.fitted() ? norm_json(m.edge_norm) : json(nullptr);
  j["node_norm"] = m.node_norm.fitted() ? norm_json(m.node_norm) : json(nullptr);
  return j.dump(1) + "\n";
}

ScorerModel model_from_json(std::string_view text) {
  ScorerModel m;
  try {
    const json j = json::parse(text);
    if (j.at("format") != "pcrf-scorer" || j.at("version") != 1)
      throw ConfigError("checkpoint: unknown format or version");
    if (j.at("edge_features").get<std::vector<std::string>>() != edge_feature_names())
      throw ConfigError("checkpoint: edge feature list differs from this build");
    const auto mode = transition_scoring_from_string(j.at("transition").get<std::string>());
    if (!mode) throw ConfigError("checkpoint: unknown transition mode");
    m.transition = *mode;
    m.masked = j.at("masked").get<bool>();
    m.mask_value = j.at("mask_value").get<double>();
    m.lambda1 = j.at("lambda1").get<double>();
    m.lambda2 = j.at("lambda2").get<double>();
    m.use_crf_loss = j.at("use_crf_loss").get<bool>();
    m.w_emit = j.at("w_emit").get<std::vector<double>>();
    m.w_trans = j.at("w_trans").get<std::vector<double>>();
    m.w_sender = j.at("w_sender").get<std::vector<double>>();
    m.w_receiver = j.at("w_receiver").get<std::vector<double>>();
    if (j.contains("static_trans")) {
      const auto& st = j.at("static_trans");
      m.static_players = st.at("n_players").get<int>();
      m.static_out = st.at("n_out").get<int>();
      m.static_trans = st.at("values").get<std::vector<double>>();
    }
    m.edge_norm = norm_from(j.at("edge_norm"));
    m.node_norm = norm_from(j.at("node_norm"));
  } catch (const json::exception& ex) {
    throw ConfigError(std::string("checkpoint: ") + ex.what());
  }
  m.validate();
  return m;
}

void save_model(const std::string& path, const ScorerModel& model) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write checkpoint '" + path + "'");
  out << model_to_json(model);
}

ScorerModel load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read checkpoint '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return model_from_json(ss.str());
}

}  // namespace pcrf
