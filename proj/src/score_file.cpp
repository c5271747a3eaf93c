#include "pcrf/score_file.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>

#include "pcrf/error.hpp"

namespace pcrf {

namespace {

static_assert(std::endian::native == std::endian::little, "score files assume a little-endian host");
static_assert(sizeof(float) == 4);

constexpr char kMagic[4] = {'P', 'C', 'R', 'F'};

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int k = 0; k < 4; ++k) out.push_back(static_cast<std::uint8_t>(v >> (8 * k)));
}

void put_f32(std::vector<std::uint8_t>& out, double v) {
  const auto bits = std::bit_cast<std::uint32_t>(static_cast<float>(v));
  put_u32(out, bits);
}

std::uint32_t get_u32(const std::uint8_t* p) {
  return static_cast<std::uint32_t>(p[0]) | static_cast<std::uint32_t>(p[1]) << 8 |
         static_cast<std::uint32_t>(p[2]) << 16 | static_cast<std::uint32_t>(p[3]) << 24;
}

}  // namespace

std::vector<std::uint8_t> encode_score_file(const ScoreTable& table, const RuleSet& rules) {
  table.validate(rules);
  for (double v : table.emission)
    if (!std::isfinite(static_cast<float>(v))) throw DataError("score file: emission overflows float32");
  for (double v : table.transition)
    if (!std::isfinite(static_cast<float>(v))) throw DataError("score file: transition overflows float32");
  std::vector<std::uint8_t> out;
  out.reserve(kScoreFileHeaderSize + 4 * (table.emission.size() + table.transition.size()));
  out.insert(out.end(), std::begin(kMagic), std::end(kMagic));
  put_u32(out, kScoreFileVersion);
  put_u32(out, static_cast<std::uint32_t>(rules.n_players()));
  put_u32(out, static_cast<std::uint32_t>(rules.n_out()));
  put_u32(out, static_cast<std::uint32_t>(table.steps));
  put_u32(out, rules.checksum());
  out.push_back(static_cast<std::uint8_t>(table.mode));
  out.push_back(table.masked ? 1 : 0);
  for (double v : table.emission) put_f32(out, v);
  for (double v : table.transition) put_f32(out, v);
  return out;
}

ScoreTable decode_score_file(const std::vector<std::uint8_t>& bytes, const RuleSet& rules, double mask_value) {
  if (bytes.size() < kScoreFileHeaderSize) throw DataError("score file: truncated header");
  if (std::memcmp(bytes.data(), kMagic, 4) != 0) throw DataError("score file: bad magic");
  const std::uint8_t* p = bytes.data();
  if (get_u32(p + 4) != kScoreFileVersion)
    throw DataError("score file: unsupported version " + std::to_string(get_u32(p + 4)));
  const std::uint32_t n_players = get_u32(p + 8), n_out = get_u32(p + 12), steps = get_u32(p + 16);
  const std::uint32_t checksum = get_u32(p + 20);
  if (n_players != static_cast<std::uint32_t>(rules.n_players()) ||
      n_out != static_cast<std::uint32_t>(rules.n_out()))
    throw DataError("score file: roster " + std::to_string(n_players) + "+" + std::to_string(n_out) +
                    " does not match rules " + std::to_string(rules.n_players()) + "+" +
                    std::to_string(rules.n_out()));
  if (checksum != rules.checksum())
    throw DataError("score file: allowed-transition checksum mismatch (file " + std::to_string(checksum) +
                    ", rules " + std::to_string(rules.checksum()) + ")");
  if (steps < 1) throw DataError("score file: zero steps");
  if (p[24] > 2) throw DataError("score file: unknown transition mode " + std::to_string(p[24]));
  if (p[25] > 1) throw DataError("score file: bad masked flag");

  ScoreTable t;
  t.steps = static_cast<int>(steps);
  t.n_edges = rules.n_edges();
  t.mode = static_cast<TransitionMode>(p[24]);
  t.masked = p[25] == 1;
  t.mask_value = mask_value;
  const std::size_t n_emit = static_cast<std::size_t>(steps) * static_cast<std::size_t>(t.n_edges);
  const std::size_t n_trans = transition_size(rules, t.steps, t.mode);
  const std::size_t expected = kScoreFileHeaderSize + 4 * (n_emit + n_trans);
  if (bytes.size() < expected)
    throw DataError("score file: truncated payload (" + std::to_string(bytes.size()) + " of " +
                    std::to_string(expected) + " bytes)");
  if (bytes.size() > expected) throw DataError("score file: trailing bytes after payload");
  auto read = [&](std::size_t offset, std::size_t count, std::vector<double>& out) {
    out.resize(count);
    for (std::size_t k = 0; k < count; ++k) {
      const float v = std::bit_cast<float>(get_u32(p + offset + 4 * k));
      if (!std::isfinite(v)) throw DataError("score file: non-finite score");
      out[k] = v;
    }
  };
  read(kScoreFileHeaderSize, n_emit, t.emission);
  read(kScoreFileHeaderSize + 4 * n_emit, n_trans, t.transition);
  return t;
}

void write_score_file(const std::string& path, const ScoreTable& table, const RuleSet& rules) {
  const auto bytes = encode_score_file(table, rules);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write score file '" + path + "'");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw DataError("failed writing score file '" + path + "'");
}

ScoreTable read_score_file(const std::string& path, const RuleSet& rules, double mask_value) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read score file '" + path + "'");
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return decode_score_file(bytes, rules, mask_value);
}

}  // namespace pcrf
