#pragma once

// Binary exchange format for ScoreTables ("PCRF" files).
//
// All integers and floats are little-endian.
//
//   offset  size  field
//   0       4     magic "PCRF"
//   4       4     u32 version (1)
//   8       4     u32 n_players
//   12      4     u32 n_out
//   16      4     u32 T (steps)
//   20      4     u32 allowed_list checksum (RuleSet::checksum)
//   24      1     u8 transition mode (0 none, 1 dynamic sparse, 2 static dense)
//   25      1     u8 masked flag
//   26      ...   f32 emission, T x |E|, t major
//                 f32 transitions: (T-1) x |A| in allowed_list order
//                 (dynamic), |E| x |E| (static), nothing (none)
//
// The mask value is not stored; readers apply their own (default -1e4).
// Scores are stored as float32, so a write/read round trip reproduces the
// payload bytes exactly and the double values up to float rounding.

#include <cstdint>
#include <string>
#include <vector>

#include "pcrf/rules.hpp"
#include "pcrf/score_table.hpp"

namespace pcrf {

inline constexpr std::uint32_t kScoreFileVersion = 1;
inline constexpr std::size_t kScoreFileHeaderSize = 26;

std::vector<std::uint8_t> encode_score_file(const ScoreTable& table, const RuleSet& rules);

/// Throws DataError on a bad magic/version, a checksum or roster mismatch
/// with `rules`, a truncated payload, trailing bytes, or non-finite values.
ScoreTable decode_score_file(const std::vector<std::uint8_t>& bytes, const RuleSet& rules,
                             double mask_value = kDefaultMaskValue);

void write_score_file(const std::string& path, const ScoreTable& table, const RuleSet& rules);
ScoreTable read_score_file(const std::string& path, const RuleSet& rules,
                           double mask_value = kDefaultMaskValue);

}  // namespace pcrf
