#include "pcrf/align.hpp"

#include <algorithm>
#include <limits>

namespace pcrf {

std::vector<AlignedPair> Alignment::matches() const {
  std::vector<AlignedPair> out;
  for (const auto& p : pairs)
    if (p.a >= 0 && p.b >= 0) out.push_back(p);
  return out;
}

Alignment needleman_wunsch(std::size_t n_a, std::size_t n_b, const PairScore& score, double gap) {
  constexpr double kNone = -std::numeric_limits<double>::infinity();
  const std::size_t w = n_b + 1;
  std::vector<double> dp((n_a + 1) * w, kNone);
  std::vector<double> pair_score((n_a + 1) * w, kNone);
  auto at = [&](std::size_t i, std::size_t j) -> double& { return dp[i * w + j]; };
  at(0, 0) = 0.0;
  for (std::size_t i = 1; i <= n_a; ++i) at(i, 0) = at(i - 1, 0) + gap;
  for (std::size_t j = 1; j <= n_b; ++j) at(0, j) = at(0, j - 1) + gap;
  for (std::size_t i = 1; i <= n_a; ++i)
    for (std::size_t j = 1; j <= n_b; ++j) {
      double best = std::max(at(i, j - 1), at(i - 1, j)) + gap;
      if (const auto s = score(i - 1, j - 1)) {
        pair_score[i * w + j] = *s;
        best = std::max(best, at(i - 1, j - 1) + *s);
      }
      at(i, j) = best;
    }

  Alignment out;
  out.score = at(n_a, n_b);
  std::size_t i = n_a, j = n_b;
  while (i > 0 || j > 0) {
    const double here = at(i, j);
    if (i > 0 && j > 0 && pair_score[i * w + j] != kNone && at(i - 1, j - 1) + pair_score[i * w + j] == here) {
      out.pairs.push_back({static_cast<int>(i - 1), static_cast<int>(j - 1), pair_score[i * w + j]});
      --i;
      --j;
    } else if (j > 0 && at(i, j - 1) + gap == here) {
      out.pairs.push_back({-1, static_cast<int>(j - 1), gap});
      --j;
    } else {
      out.pairs.push_back({static_cast<int>(i - 1), -1, gap});
      --i;
    }
  }
  std::reverse(out.pairs.begin(), out.pairs.end());
  return out;
}

}  // namespace pcrf
