#include "pcrf/rules.hpp"

#include <algorithm>
#include <map>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <string>

namespace pcrf {

std::string_view to_string(OutsideSide side) {
  switch (side) {
    case OutsideSide::left: return "left";
    case OutsideSide::right: return "right";
    case OutsideSide::top: return "top";
    case OutsideSide::bottom: return "bottom";
  }
  return "?";
}

std::optional<OutsideSide> outside_side_from_string(std::string_view name) {
  if (name == "left") return OutsideSide::left;
  if (name == "right") return OutsideSide::right;
  if (name == "top") return OutsideSide::top;
  if (name == "bottom") return OutsideSide::bottom;
  return std::nullopt;
}

namespace {

std::uint32_t fnv1a_step(std::uint32_t h, std::uint32_t word) {
  for (int b = 0; b < 4; ++b) {
    h ^= (word >> (8 * b)) & 0xffu;
    h *= 16777619u;
  }
  return h;
}

}  // namespace

RuleSet::RuleSet(int n_players, int n_out) : n_players_(n_players), n_out_(n_out) {
  if (n_players < 1)
    throw std::invalid_argument("RuleSet: at least one player node is required");
  if (n_out < 0) throw std::invalid_argument("RuleSet: negative outside-node count");

  const int n_e = n_edges();

  // Enumerate successors per prev edge constructively; each list comes out
  // sorted by next id, so the concatenation is sorted by (prev, next).
  succ_offsets_.assign(static_cast<std::size_t>(n_e) + 1, 0);
  std::vector<EdgeId> next_ids;
  for (EdgeId prev = 0; prev < n_e; ++prev) {
    const Edge p = decode(prev);
    next_ids.clear();
    next_ids.push_back(prev);  // identity
    if (p.is_self_loop() && is_player(p.sender)) {
      for (NodeId v = 0; v < n_nodes(); ++v)
        if (v != p.sender) next_ids.push_back(encode(p.sender, v));
    } else if (!p.is_self_loop() && is_player(p.sender) && is_player(p.receiver)) {
      for (NodeId w = 0; w < n_nodes(); ++w) next_ids.push_back(encode(p.receiver, w));
    } else if (!p.is_self_loop() && is_player(p.sender) && is_outside(p.receiver)) {
      next_ids.push_back(encode(p.receiver, p.receiver));
    }
    std::sort(next_ids.begin(), next_ids.end());
    for (EdgeId next : next_ids) {
      switch (kind(prev, next)) {
        case TransitionKind::identity: ++counts_.identity; break;
        case TransitionKind::kick: ++counts_.kick; break;
        case TransitionKind::reception: ++counts_.reception; break;
        case TransitionKind::out: ++counts_.out; break;
        case TransitionKind::illegal:
          throw std::logic_error("RuleSet: constructed transition is not allowed");
      }
      allowed_.push_back({prev, next});
      succ_edges_.push_back(next);
    }
    succ_offsets_[static_cast<std::size_t>(prev) + 1] =
        static_cast<std::uint32_t>(allowed_.size());
  }
  succ_slots_.resize(allowed_.size());
  for (std::size_t i = 0; i < allowed_.size(); ++i) succ_slots_[i] = static_cast<std::uint32_t>(i);

  // Predecessor CSR: counting sort by next; stable in slot order, hence
  // ascending prev within each list.
  pred_offsets_.assign(static_cast<std::size_t>(n_e) + 1, 0);
  for (const auto& pair : allowed_) ++pred_offsets_[static_cast<std::size_t>(pair.next) + 1];
  for (int e = 0; e < n_e; ++e) pred_offsets_[e + 1] += pred_offsets_[e];
  pred_edges_.resize(allowed_.size());
  pred_slots_.resize(allowed_.size());
  std::vector<std::uint32_t> cursor(pred_offsets_.begin(), pred_offsets_.end() - 1);
  for (std::size_t s = 0; s < allowed_.size(); ++s) {
    const auto pos = cursor[static_cast<std::size_t>(allowed_[s].next)]++;
    pred_edges_[pos] = allowed_[s].prev;
    pred_slots_[pos] = static_cast<std::uint32_t>(s);
  }

  std::uint32_t h = 2166136261u;
  for (const auto& pair : allowed_) {
    h = fnv1a_step(h, static_cast<std::uint32_t>(pair.prev));
    h = fnv1a_step(h, static_cast<std::uint32_t>(pair.next));
  }
  checksum_ = h;
}

NodeId RuleSet::outside_node(OutsideSide side) const {
  const int idx = static_cast<int>(side);
  if (idx >= n_out_)
    throw std::out_of_range("RuleSet: outside side '" + std::string(to_string(side)) +
                            "' not present");
  return n_players_ + idx;
}

EdgeId RuleSet::encode(NodeId sender, NodeId receiver) const {
  if (!valid_node(sender) || !valid_node(receiver))
    throw std::out_of_range("RuleSet::encode: node index out of range");
  return sender * n_nodes() + receiver;
}

Edge RuleSet::decode(EdgeId e) const {
  if (!valid_edge(e)) throw std::out_of_range("RuleSet::decode: edge id out of range");
  return {e / n_nodes(), e % n_nodes()};
}

TransitionKind RuleSet::kind(EdgeId prev, EdgeId next) const {
  if (prev == next) return TransitionKind::identity;
  const Edge p = decode(prev);
  const Edge n = decode(next);
  if (p.is_self_loop()) {
    if (is_player(p.sender) && n.sender == p.sender) return TransitionKind::kick;
    return TransitionKind::illegal;
  }
  if (is_player(p.sender) && is_player(p.receiver)) {
    return n.sender == p.receiver ? TransitionKind::reception : TransitionKind::illegal;
  }
  if (is_player(p.sender) && is_outside(p.receiver) && n.sender == p.receiver &&
      n.receiver == p.receiver)
    return TransitionKind::out;
  return TransitionKind::illegal;
}

std::optional<std::size_t> RuleSet::slot(EdgeId prev, EdgeId next) const {
  if (!valid_edge(prev) || !valid_edge(next)) return std::nullopt;
  const auto succ = successors(prev);
  const auto it = std::lower_bound(succ.begin(), succ.end(), next);
  if (it == succ.end() || *it != next) return std::nullopt;
  return succ_offsets_[static_cast<std::size_t>(prev)] +
         static_cast<std::size_t>(it - succ.begin());
}

std::span<const EdgeId> RuleSet::predecessors(EdgeId e) const {
  const auto b = pred_offsets_[static_cast<std::size_t>(e)];
  const auto end = pred_offsets_[static_cast<std::size_t>(e) + 1];
  return {pred_edges_.data() + b, end - b};
}

std::span<const std::uint32_t> RuleSet::predecessor_slots(EdgeId e) const {
  const auto b = pred_offsets_[static_cast<std::size_t>(e)];
  const auto end = pred_offsets_[static_cast<std::size_t>(e) + 1];
  return {pred_slots_.data() + b, end - b};
}

std::span<const EdgeId> RuleSet::successors(EdgeId e) const {
  const auto b = succ_offsets_[static_cast<std::size_t>(e)];
  const auto end = succ_offsets_[static_cast<std::size_t>(e) + 1];
  return {succ_edges_.data() + b, end - b};
}

std::span<const std::uint32_t> RuleSet::successor_slots(EdgeId e) const {
  const auto b = succ_offsets_[static_cast<std::size_t>(e)];
  const auto end = succ_offsets_[static_cast<std::size_t>(e) + 1];
  return {succ_slots_.data() + b, end - b};
}

std::size_t count_violations(const RuleSet& rules, std::span<const EdgeId> path) {
  std::size_t n = 0;
  for (std::size_t t = 1; t < path.size(); ++t)
    if (!rules.is_allowed(path[t - 1], path[t])) ++n;
  return n;
}

double violation_rate(const RuleSet& rules, std::span<const EdgeId> path) {
  if (path.size() < 2) return 0.0;
  return static_cast<double>(count_violations(rules, path)) /
         static_cast<double>(path.size() - 1);
}

const RuleSet& shared_rule_set(int n_players, int n_out) {
  static std::mutex mutex;
  static std::map<std::pair<int, int>, std::unique_ptr<RuleSet>> cache;
  const std::lock_guard lock(mutex);
  auto& slot = cache[{n_players, n_out}];
  if (!slot) slot = std::make_unique<RuleSet>(n_players, n_out);
  return *slot;
}

}  // namespace pcrf
