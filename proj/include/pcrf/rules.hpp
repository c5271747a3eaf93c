#pragma once

// Possession-state graph: node layout, edge codec and the hard transition
// system over consecutive edges.
//
// Nodes are laid out as [home players | away players | outside nodes], the
// outside nodes in the fixed order left, right, top, bottom. An edge (s, r)
// is the possession state "s holds the ball" when s == r and "the ball is
// travelling from s to r" otherwise.

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

namespace pcrf {

using NodeId = int;
using EdgeId = int;

enum class OutsideSide : std::uint8_t { left = 0, right = 1, top = 2, bottom = 3 };

std::string_view to_string(OutsideSide side);
std::optional<OutsideSide> outside_side_from_string(std::string_view name);

struct Edge {
  NodeId sender = 0;
  NodeId receiver = 0;

  bool is_self_loop() const { return sender == receiver; }
  friend bool operator==(const Edge&, const Edge&) = default;
};

/// Which subset of the allowed set a transition belongs to.
enum class TransitionKind : std::uint8_t {
  identity,   // (u,v) -> (u,v)
  kick,       // (u,u) -> (u,v), u a player, v != u
  reception,  // (u,v) -> (v,w), u,v players, u != v
  out,        // (u,o) -> (o,o), u a player, o outside
  illegal,
};

struct AllowedPair {
  EdgeId prev = 0;
  EdgeId next = 0;
  friend auto operator<=>(const AllowedPair&, const AllowedPair&) = default;
};

struct KindCounts {
  std::size_t identity = 0;
  std::size_t kick = 0;
  std::size_t reception = 0;
  std::size_t out = 0;
  std::size_t total() const { return identity + kick + reception + out; }
};

/// Immutable transition system for a fixed roster size.
///
/// Besides the membership test, the set is materialised as
///  - `allowed_list()`: every allowed (prev, next) pair sorted by (prev, next);
///    the position of a pair in this list is its *slot*, which indexes the
///    sparse dynamic transition-score layout;
///  - predecessor lists P(e) in CSR form, each sorted by ascending prev, with
///    the slot of every (prev, e) pair alongside;
///  - successor lists in CSR form, sorted by ascending next.
class RuleSet {
 public:
  /// Throws std::invalid_argument when n_players == 0 or n_out < 0.
  RuleSet(int n_players, int n_out);

  int n_players() const { return n_players_; }
  int n_out() const { return n_out_; }
  int n_nodes() const { return n_players_ + n_out_; }
  int n_edges() const { return n_nodes() * n_nodes(); }
  std::size_t n_allowed() const { return allowed_.size(); }

  bool is_player(NodeId v) const { return v >= 0 && v < n_players_; }
  bool is_outside(NodeId v) const { return v >= n_players_ && v < n_nodes(); }
  bool valid_node(NodeId v) const { return v >= 0 && v < n_nodes(); }
  bool valid_edge(EdgeId e) const { return e >= 0 && e < n_edges(); }

  /// Outside node for a boundary side; throws when the side is not present.
  NodeId outside_node(OutsideSide side) const;

  /// id = sender * n_nodes + receiver. Throws std::out_of_range on bad nodes.
  EdgeId encode(NodeId sender, NodeId receiver) const;
  /// Exact inverse of encode. Throws std::out_of_range on bad ids.
  Edge decode(EdgeId e) const;

  /// Classification by set definition; total over valid edges.
  TransitionKind kind(EdgeId prev, EdgeId next) const;
  bool is_allowed(EdgeId prev, EdgeId next) const {
    return kind(prev, next) != TransitionKind::illegal;
  }

  std::span<const AllowedPair> allowed_list() const { return allowed_; }

  /// Slot of (prev, next) in allowed_list, or nullopt when not allowed.
  std::optional<std::size_t> slot(EdgeId prev, EdgeId next) const;

  std::span<const EdgeId> predecessors(EdgeId e) const;
  /// Slots aligned with predecessors(e).
  std::span<const std::uint32_t> predecessor_slots(EdgeId e) const;
  std::span<const EdgeId> successors(EdgeId e) const;
  /// Slots aligned with successors(e); contiguous since allowed_list is
  /// sorted by prev.
  std::span<const std::uint32_t> successor_slots(EdgeId e) const;

  const KindCounts& counts() const { return counts_; }

  /// FNV-1a (32 bit) over allowed_list serialised as little-endian u32
  /// pairs. Identifies the rule layout inside score files.
  std::uint32_t checksum() const { return checksum_; }

  friend bool operator==(const RuleSet& a, const RuleSet& b) {
    return a.n_players_ == b.n_players_ && a.n_out_ == b.n_out_;
  }

 private:
  int n_players_;
  int n_out_;
  std::vector<AllowedPair> allowed_;
  std::vector<std::uint32_t> pred_offsets_;
  std::vector<EdgeId> pred_edges_;
  std::vector<std::uint32_t> pred_slots_;
  std::vector<std::uint32_t> succ_offsets_;
  std::vector<EdgeId> succ_edges_;
  std::vector<std::uint32_t> succ_slots_;
  KindCounts counts_;
  std::uint32_t checksum_ = 0;
};

/// Fraction of consecutive pairs in `path` that are not allowed; 0 for
/// paths shorter than two steps.
double violation_rate(const RuleSet& rules, std::span<const EdgeId> path);
std::size_t count_violations(const RuleSet& rules, std::span<const EdgeId> path);

/// Process-wide cache of rule sets keyed by (n_players, n_out); the
/// returned reference stays valid for the life of the program.
const RuleSet& shared_rule_set(int n_players, int n_out);

}  // namespace pcrf
