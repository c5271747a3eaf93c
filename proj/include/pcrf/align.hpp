#pragma once

// Global (Needleman-Wunsch) alignment of two sequences with a linear gap
// score. Used for touch insertion and for event matching.

#include <cstddef>
#include <functional>
#include <optional>
#include <vector>

namespace pcrf {

struct AlignedPair {
  int a = -1;  // index into sequence a, -1 for a gap in a
  int b = -1;  // index into sequence b, -1 for a gap in b
  double score = 0.0;
};

struct Alignment {
  double score = 0.0;
  std::vector<AlignedPair> pairs;  // in sequence order

  /// Pairs with both sides present.
  std::vector<AlignedPair> matches() const;
};

/// Score of pairing a[i] with b[j]; nullopt forbids the pairing.
using PairScore = std::function<std::optional<double>(std::size_t i, std::size_t j)>;

/// Maximises the sum of pair scores plus `gap` per unpaired element (gap is
/// normally negative). Ties resolve, walking back from the end, to a pairing
/// first, then an unpaired b element (gap in a), then an unpaired a element
/// (gap in b).
Alignment needleman_wunsch(std::size_t n_a, std::size_t n_b, const PairScore& score, double gap);

}  // namespace pcrf
