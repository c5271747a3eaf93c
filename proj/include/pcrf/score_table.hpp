#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "pcrf/rules.hpp"

namespace pcrf {

/// One edge per time step.
using PossessionPath = std::vector<EdgeId>;

enum class TransitionMode : std::uint8_t {
  none = 0,            // psi == 0 on allowed pairs
  dynamic_sparse = 1,  // (T-1) x |A|, rows in allowed_list order
  static_dense = 2,    // |E| x |E|, shared across time
};

inline constexpr double kDefaultMaskValue = -1.0e4;

/// Log-domain emission and transition scores of one sequence.
///
/// Stored scores are always finite. When `masked` is set, every pair outside
/// the allowed set scores `mask_value` at lookup; otherwise such pairs score
/// the stored static entry (static mode) or 0 (dynamic and none modes, which
/// store allowed pairs only).
struct ScoreTable {
  int steps = 0;
  int n_edges = 0;
  TransitionMode mode = TransitionMode::none;
  bool masked = true;
  double mask_value = kDefaultMaskValue;
  std::vector<double> emission;    // steps x n_edges, t major
  std::vector<double> transition;  // layout per mode, see above

  static ScoreTable zeros(const RuleSet& rules, int steps, TransitionMode mode, bool masked);

  double& emit(int t, EdgeId e) {
    return emission[static_cast<std::size_t>(t) * static_cast<std::size_t>(n_edges) +
                    static_cast<std::size_t>(e)];
  }
  double emit(int t, EdgeId e) const {
    return emission[static_cast<std::size_t>(t) * static_cast<std::size_t>(n_edges) +
                    static_cast<std::size_t>(e)];
  }
  std::span<const double> emission_row(int t) const {
    return {emission.data() + static_cast<std::size_t>(t) * static_cast<std::size_t>(n_edges),
            static_cast<std::size_t>(n_edges)};
  }

  /// Transition score into step t (1 <= t < steps) for an allowed pair
  /// given by its slot. Fast path used inside the lattice kernels.
  double allowed_score(int t, EdgeId prev, EdgeId next, std::size_t slot,
                       std::size_t n_allowed) const {
    switch (mode) {
      case TransitionMode::dynamic_sparse:
        return transition[static_cast<std::size_t>(t - 1) * n_allowed + slot];
      case TransitionMode::static_dense:
        return transition[static_cast<std::size_t>(prev) * static_cast<std::size_t>(n_edges) +
                          static_cast<std::size_t>(next)];
      case TransitionMode::none: break;
    }
    return 0.0;
  }

  /// Score of a pair outside the allowed set.
  double disallowed_score(EdgeId prev, EdgeId next) const {
    if (masked) return mask_value;
    if (mode == TransitionMode::static_dense)
      return transition[static_cast<std::size_t>(prev) * static_cast<std::size_t>(n_edges) +
                        static_cast<std::size_t>(next)];
    return 0.0;
  }

  /// General lookup psi_t(prev, next), 1 <= t < steps.
  double transition_score(const RuleSet& rules, int t, EdgeId prev, EdgeId next) const;

  /// Throws std::invalid_argument when shapes disagree with `rules` or a
  /// stored score is not finite.
  void validate(const RuleSet& rules) const;
};

/// Expected element count of `transition` for a table shape.
std::size_t transition_size(const RuleSet& rules, int steps, TransitionMode mode);

}  // namespace pcrf
