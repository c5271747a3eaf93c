#pragma once

// Downstream analyses of possession paths and events: possession shares and
// timelines, KDE heatmaps, pass networks and their similarity.

#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "pcrf/events.hpp"
#include "pcrf/rules.hpp"
#include "pcrf/tracking.hpp"

namespace pcrf {

// ---- possession -----------------------------------------------------------

struct PossessionOptions {
  double bin_minutes = 5.0;
  /// Leave ball-in-flight steps (sender != receiver) out entirely instead of
  /// crediting them to the sender's team.
  bool exclude_flights = false;
};

/// A possession path placed on the match clock.
struct PathSegment {
  std::span<const EdgeId> path;
  const Roster* roster = nullptr;
  double start_time_s = 0.0;
  double rate_hz = 5.0;
};

struct PossessionBin {
  double start_s = 0.0;
  std::size_t home = 0;
  std::size_t away = 0;
  double share() const { return home + away == 0 ? 0.0 : static_cast<double>(home) / (home + away); }
};

struct PossessionStats {
  std::size_t home = 0;
  std::size_t away = 0;
  std::size_t excluded = 0;  // out of play, or flights when excluded
  std::vector<PossessionBin> timeline;  // contiguous bins from 0 s

  /// Home share of attributed steps; 0 when nothing is attributed.
  double share() const { return home + away == 0 ? 0.0 : static_cast<double>(home) / (home + away); }
};

/// Each step is credited to the team of its edge's sender; steps whose
/// sender is an outside node are excluded.
PossessionStats possession_stats(std::span<const PathSegment> segments, const PossessionOptions& options = {});

// ---- heatmaps -------------------------------------------------------------

struct KdeOptions {
  double bandwidth_m = 4.0;
  double cell_m = 1.0;
  /// Bandwidth from Scott's rule (n^(-1/6) times the pooled coordinate
  /// standard deviation) instead of bandwidth_m.
  bool scott = false;
};

struct HeatGrid {
  int nx = 0;
  int ny = 0;
  double cell_m = 1.0;
  double bandwidth_m = 0.0;
  std::vector<double> density;  // ny x nx, row iy covers y in [iy, iy+1) cells

  double at(int ix, int iy) const {
    return density[static_cast<std::size_t>(iy) * static_cast<std::size_t>(nx) + static_cast<std::size_t>(ix)];
  }
  Vec2 cell_center(int ix, int iy) const { return {(ix + 0.5) * cell_m, (iy + 0.5) * cell_m}; }
  /// Sum of density times cell area.
  double mass() const;
  std::pair<int, int> argmax() const;
};

/// Isotropic Gaussian KDE evaluated at cell centres, normalised to unit
/// mass over the pitch grid. Throws DataError for an empty point set.
HeatGrid kde_heatmap(std::span<const Vec2> points, const Pitch& pitch, const KdeOptions& options = {});

// ---- pass networks --------------------------------------------------------

struct PassNetworkNode {
  std::string id;
  Vec2 mean_position;
  std::size_t events = 0;  // events the node acted in
  double out_degree = 0.0;  // completed passes made
};

struct PassNetwork {
  std::vector<PassNetworkNode> nodes;  // sorted by id
  std::map<std::pair<std::string, std::string>, double> edges;  // (passer, receiver) -> completed passes

  double total_weight() const;
};

/// Collects events of one team across episodes. A kick counts as a
/// completed pass when the next event of the same episode is by the kick's
/// target and the target is a team-mate. Player ids pass through
/// `substitutions` (id -> merged id) first.
class PassNetworkBuilder {
 public:
  PassNetworkBuilder(Team team, std::map<std::string, std::string> substitutions = {});

  void add_episode(std::span<const EventRecord> events, const Roster& roster);
  PassNetwork build() const;

 private:
  std::string merged(const std::string& id) const;

  Team team_;
  std::map<std::string, std::string> substitutions_;
  struct Accum {
    double sx = 0.0, sy = 0.0;
    std::size_t events = 0;
  };
  std::map<std::string, Accum> nodes_;
  std::map<std::pair<std::string, std::string>, double> edges_;
};

struct NetworkSimilarity {
  double degree_mae = 0.0;
  double weight_mae = 0.0;
  double jsd = 0.0;
  double spectral = 0.0;
};

/// Compares two networks over the union of their node and edge sets (absent
/// entries count as zero):
///  - degree_mae: mean |out-degree difference| over nodes (weighted);
///  - weight_mae: mean |weight difference| over edges present in either;
///  - jsd: Jensen-Shannon divergence (base 2) of the edge-weight
///    distributions over ordered node pairs;
///  - spectral: L2 distance of the sorted eigenvalues of the normalised
///    Laplacians of W + W^T, divided by the node count (isolated nodes get a
///    zero diagonal).
/// Throws DataError when either network has no edges.
NetworkSimilarity network_similarity(const PassNetwork& a, const PassNetwork& b);

/// Symmetric-normalised Laplacian of W + W^T over `ids` (exposed for tests).
std::vector<double> laplacian_spectrum(const PassNetwork& net, const std::vector<std::string>& ids);

}  // namespace pcrf
