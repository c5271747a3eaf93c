#include "pcrf/analytics.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <set>

#include "pcrf/error.hpp"

namespace pcrf {

PossessionStats possession_stats(std::span<const PathSegment> segments, const PossessionOptions& options) {
  if (!(options.bin_minutes > 0.0)) throw ConfigError("possession_stats: bin_minutes must be positive");
  const double bin_s = options.bin_minutes * 60.0;
  PossessionStats out;
  for (const auto& seg : segments) {
    if (seg.roster == nullptr) throw std::invalid_argument("possession_stats: segment without roster");
    const int n = seg.roster->n_nodes();
    for (std::size_t t = 0; t < seg.path.size(); ++t) {
      const EdgeId e = seg.path[t];
      const NodeId sender = e / n, receiver = e % n;
      const Team team = seg.roster->team_of(sender);
      if (team == Team::outside || (options.exclude_flights && sender != receiver)) {
        ++out.excluded;
        continue;
      }
      const double time = seg.start_time_s + static_cast<double>(t) / seg.rate_hz;
      const auto bin = static_cast<std::size_t>(std::max(0.0, std::floor(time / bin_s)));
      while (out.timeline.size() <= bin)
        out.timeline.push_back({static_cast<double>(out.timeline.size()) * bin_s, 0, 0});
      if (team == Team::home) {
        ++out.home;
        ++out.timeline[bin].home;
      } else {
        ++out.away;
        ++out.timeline[bin].away;
      }
    }
  }
  return out;
}

double HeatGrid::mass() const {
  double s = 0.0;
  for (double v : density) s += v;
  return s * cell_m * cell_m;
}

std::pair<int, int> HeatGrid::argmax() const {
  const auto it = std::max_element(density.begin(), density.end());
  const auto k = static_cast<int>(it - density.begin());
  return {k % nx, k / nx};
}

HeatGrid kde_heatmap(std::span<const Vec2> points, const Pitch& pitch, const KdeOptions& options) {
  if (points.empty()) throw DataError("kde_heatmap: no events");
  if (!(options.cell_m > 0.0)) throw ConfigError("kde_heatmap: cell size must be positive");
  HeatGrid g;
  g.cell_m = options.cell_m;
  g.nx = static_cast<int>(std::ceil(pitch.length / options.cell_m - 1e-9));
  g.ny = static_cast<int>(std::ceil(pitch.width / options.cell_m - 1e-9));
  double h = options.bandwidth_m;
  if (options.scott) {
    double mx = 0.0, my = 0.0;
    for (const auto& p : points) {
      mx += p.x;
      my += p.y;
    }
    const double n = static_cast<double>(points.size());
    mx /= n;
    my /= n;
    double var = 0.0;
    for (const auto& p : points) var += (p.x - mx) * (p.x - mx) + (p.y - my) * (p.y - my);
    const double sd = std::sqrt(var / (2.0 * n));
    if (sd > 0.0) h = sd * std::pow(n, -1.0 / 6.0);
  }
  if (!(h > 0.0)) throw ConfigError("kde_heatmap: bandwidth must be positive");
  g.bandwidth_m = h;
  g.density.assign(static_cast<std::size_t>(g.nx) * static_cast<std::size_t>(g.ny), 0.0);
  const double inv2h2 = 1.0 / (2.0 * h * h);
#pragma omp parallel for schedule(static)
  for (int iy = 0; iy < g.ny; ++iy)
    for (int ix = 0; ix < g.nx; ++ix) {
      const Vec2 c = g.cell_center(ix, iy);
      double s = 0.0;
      for (const auto& p : points) {
        const Vec2 d = c - p;
        s += std::exp(-d.dot(d) * inv2h2);
      }
      g.density[static_cast<std::size_t>(iy) * static_cast<std::size_t>(g.nx) + static_cast<std::size_t>(ix)] = s;
    }
  double total = 0.0;
  for (double v : g.density) total += v;
  if (!(total > 0.0)) throw DataError("kde_heatmap: all events are far outside the pitch");
  const double scale = 1.0 / (total * g.cell_m * g.cell_m);
  for (double& v : g.density) v *= scale;
  return g;
}

double PassNetwork::total_weight() const {
  double s = 0.0;
  for (const auto& [_, w] : edges) s += w;
  return s;
}

PassNetworkBuilder::PassNetworkBuilder(Team team, std::map<std::string, std::string> substitutions)
    : team_(team), substitutions_(std::move(substitutions)) {}

std::string PassNetworkBuilder::merged(const std::string& id) const {
  const auto it = substitutions_.find(id);
  return it == substitutions_.end() ? id : it->second;
}

void PassNetworkBuilder::add_episode(std::span<const EventRecord> events, const Roster& roster) {
  for (std::size_t k = 0; k < events.size(); ++k) {
    const auto& ev = events[k];
    if (ev.kind == EventKind::out_of_play || roster.team_of(ev.actor) != team_) continue;
    Accum& a = nodes_[merged(roster.node_name(ev.actor))];
    a.sx += ev.location.x;
    a.sy += ev.location.y;
    ++a.events;
    if (ev.kind != EventKind::kick || k + 1 == events.size()) continue;
    const auto& next = events[k + 1];
    const bool completed = next.kind != EventKind::out_of_play && next.actor == ev.target &&
                           roster.team_of(ev.target) == team_;
    if (completed) edges_[{merged(roster.node_name(ev.actor)), merged(roster.node_name(ev.target))}] += 1.0;
  }
}

PassNetwork PassNetworkBuilder::build() const {
  PassNetwork net;
  net.edges = edges_;
  for (const auto& [id, a] : nodes_) {
    PassNetworkNode n;
    n.id = id;
    n.events = a.events;
    n.mean_position = {a.sx / static_cast<double>(a.events), a.sy / static_cast<double>(a.events)};
    net.nodes.push_back(n);
  }
  for (const auto& [key, w] : net.edges)
    for (auto& n : net.nodes)
      if (n.id == key.first) n.out_degree += w;
  return net;
}

namespace {

std::vector<std::string> union_ids(const PassNetwork& a, const PassNetwork& b) {
  std::set<std::string> ids;
  for (const auto* net : {&a, &b}) {
    for (const auto& n : net->nodes) ids.insert(n.id);
    for (const auto& [key, _] : net->edges) {
      ids.insert(key.first);
      ids.insert(key.second);
    }
  }
  return {ids.begin(), ids.end()};
}

double weight_of(const PassNetwork& net, const std::pair<std::string, std::string>& key) {
  const auto it = net.edges.find(key);
  return it == net.edges.end() ? 0.0 : it->second;
}

}  // namespace

std::vector<double> laplacian_spectrum(const PassNetwork& net, const std::vector<std::string>& ids) {
  const auto n = static_cast<Eigen::Index>(ids.size());
  Eigen::MatrixXd s = Eigen::MatrixXd::Zero(n, n);
  auto index = [&](const std::string& id) {
    return static_cast<Eigen::Index>(std::lower_bound(ids.begin(), ids.end(), id) - ids.begin());
  };
  for (const auto& [key, w] : net.edges) {
    const auto i = index(key.first), j = index(key.second);
    s(i, j) += w;
    s(j, i) += w;
  }
  const Eigen::VectorXd deg = s.rowwise().sum();
  Eigen::MatrixXd lap = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) {
      if (deg(i) <= 0.0 || deg(j) <= 0.0) continue;
      lap(i, j) = (i == j ? 1.0 : 0.0) - s(i, j) / std::sqrt(deg(i) * deg(j));
    }
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(lap, Eigen::EigenvaluesOnly);
  std::vector<double> ev(solver.eigenvalues().data(), solver.eigenvalues().data() + n);
  std::sort(ev.begin(), ev.end());
  return ev;
}

NetworkSimilarity network_similarity(const PassNetwork& a, const PassNetwork& b) {
  if (a.edges.empty() || b.edges.empty() || !(a.total_weight() > 0.0) || !(b.total_weight() > 0.0))
    throw DataError("network_similarity: empty pass network");
  const auto ids = union_ids(a, b);
  NetworkSimilarity out;

  std::map<std::string, double> deg_a, deg_b;
  for (const auto& [key, w] : a.edges) deg_a[key.first] += w;
  for (const auto& [key, w] : b.edges) deg_b[key.first] += w;
  for (const auto& id : ids) out.degree_mae += std::abs(deg_a[id] - deg_b[id]);
  out.degree_mae /= static_cast<double>(ids.size());

  std::set<std::pair<std::string, std::string>> keys;
  for (const auto& [key, _] : a.edges) keys.insert(key);
  for (const auto& [key, _] : b.edges) keys.insert(key);
  const double ta = a.total_weight(), tb = b.total_weight();
  for (const auto& key : keys) {
    const double wa = weight_of(a, key), wb = weight_of(b, key);
    out.weight_mae += std::abs(wa - wb);
    const double p = wa / ta, q = wb / tb, m = 0.5 * (p + q);
    if (p > 0.0) out.jsd += 0.5 * p * std::log2(p / m);
    if (q > 0.0) out.jsd += 0.5 * q * std::log2(q / m);
  }
  out.weight_mae /= static_cast<double>(keys.size());
  out.jsd = std::clamp(out.jsd, 0.0, 1.0);

  const auto la = laplacian_spectrum(a, ids), lb = laplacian_spectrum(b, ids);
  double d2 = 0.0;
  for (std::size_t k = 0; k < la.size(); ++k) d2 += (la[k] - lb[k]) * (la[k] - lb[k]);
  out.spectral = std::sqrt(d2) / static_cast<double>(ids.size());
  return out;
}

}  // namespace pcrf
