#include "pcrf/analytics.hpp"

#include <gtest/gtest.h>

#include <cmath>

#include "pcrf/error.hpp"
#include "pcrf/score_table.hpp"

namespace pcrf {
namespace {

Roster roster(int n_home, int n_away) {
  Roster r;
  r.n_home = n_home;
  r.n_away = n_away;
  for (int p = 0; p < n_home + n_away; ++p) r.player_ids.push_back("p" + std::to_string(p));
  return r;
}

TEST(Possession, AllHome) {
  const Roster r = roster(2, 2);
  const RuleSet rules(4, 4);
  const PossessionPath path(20, rules.encode(1, 1));
  const PathSegment seg{path, &r, 0.0, 5.0};
  const auto s = possession_stats(std::span(&seg, 1));
  EXPECT_EQ(s.share(), 1.0);
}

TEST(Possession, AlternatingHalves) {
  const Roster r = roster(1, 1);
  const RuleSet rules(2, 4);
  PossessionPath path;
  for (int k = 0; k < 40; ++k) path.push_back((k / 5) % 2 ? rules.encode(1, 1) : rules.encode(0, 0));
  const PathSegment seg{path, &r, 0.0, 5.0};
  EXPECT_DOUBLE_EQ(possession_stats(std::span(&seg, 1)).share(), 0.5);
}

TEST(Possession, FlightsAndOutOfPlay) {
  const Roster r = roster(1, 1);
  const RuleSet rules(2, 4);
  const NodeId o = rules.outside_node(OutsideSide::left);
  const PossessionPath path{rules.encode(0, 0), rules.encode(0, 1), rules.encode(1, 1), rules.encode(1, o),
                            rules.encode(o, o)};
  const PathSegment seg{path, &r, 0.0, 5.0};
  const auto s = possession_stats(std::span(&seg, 1));
  EXPECT_EQ(s.home, 2u);  // (0,0) and the flight (0,1)
  EXPECT_EQ(s.away, 2u);
  EXPECT_EQ(s.excluded, 1u);
  const auto x = possession_stats(std::span(&seg, 1), {5.0, true});
  EXPECT_EQ(x.home, 1u);
  EXPECT_EQ(x.away, 1u);
  EXPECT_EQ(x.excluded, 3u);
}

TEST(Possession, TimelineBins) {
  const Roster r = roster(1, 1);
  const RuleSet rules(2, 4);
  const PossessionPath home(10, rules.encode(0, 0)), away(10, rules.encode(1, 1));
  const PathSegment segs[] = {{home, &r, 10.0, 5.0}, {away, &r, 400.0, 5.0}};
  const auto s = possession_stats(segs, {5.0, false});
  ASSERT_EQ(s.timeline.size(), 2u);
  EXPECT_EQ(s.timeline[0].share(), 1.0);
  EXPECT_EQ(s.timeline[1].share(), 0.0);
  EXPECT_EQ(s.timeline[1].start_s, 300.0);
  EXPECT_DOUBLE_EQ(s.share(), 0.5);
}

TEST(Kde, SinglePointPeaksAtItsCell) {
  const Vec2 p{52.5, 34.0};
  const auto g = kde_heatmap(std::span(&p, 1), Pitch{});
  EXPECT_EQ(g.nx, 105);
  EXPECT_EQ(g.ny, 68);
  const auto [ix, iy] = g.argmax();
  EXPECT_EQ(ix, 52);
  EXPECT_TRUE(iy == 33 || iy == 34);
  EXPECT_NEAR(g.mass(), 1.0, 1e-6);
}

TEST(Kde, SymmetricClustersHaveEqualMass) {
  std::vector<Vec2> pts;
  for (int k = 0; k < 5; ++k) {
    pts.push_back({20.0 + k, 30.0});
    pts.push_back({85.0 - k, 30.0});
  }
  const auto g = kde_heatmap(pts, Pitch{});
  double left = 0.0, right = 0.0;
  for (int iy = 0; iy < g.ny; ++iy)
    for (int ix = 0; ix < g.nx; ++ix) {
      if (ix < 52) left += g.at(ix, iy);
      if (ix > 52) right += g.at(ix, iy);
    }
  EXPECT_NEAR(left, right, 1e-6);
  EXPECT_GT(g.at(22, 30), 10 * g.at(52, 30));
}

TEST(Kde, MassAndErrors) {
  const std::vector<Vec2> pts{{0, 0}, {105, 68}, {10, 60}, {100, 2}};
  EXPECT_NEAR(kde_heatmap(pts, Pitch{}).mass(), 1.0, 1e-6);
  const auto scott = kde_heatmap(pts, Pitch{}, {4.0, 1.0, true});
  EXPECT_NEAR(scott.mass(), 1.0, 1e-6);
  EXPECT_NE(scott.bandwidth_m, 4.0);
  EXPECT_THROW(kde_heatmap(std::span<const Vec2>{}, Pitch{}), DataError);
}

EventRecord kick(NodeId a, NodeId b) {
  EventRecord e;
  e.kind = EventKind::kick;
  e.actor = a;
  e.target = b;
  e.location = {10.0 * a, 5.0};
  return e;
}

EventRecord control(NodeId a) {
  EventRecord e;
  e.kind = EventKind::control;
  e.actor = a;
  e.location = {10.0 * a, 5.0};
  return e;
}

TEST(PassNetwork, CountsCompletedPasses) {
  const Roster r = roster(2, 1);
  // u->v, v->u, u->v, all received.
  const std::vector<EventRecord> events{kick(0, 1), control(1), kick(1, 0), control(0), kick(0, 1), control(1)};
  PassNetworkBuilder b(Team::home);
  b.add_episode(events, r);
  const auto net = b.build();
  EXPECT_EQ(net.edges.at({"p0", "p1"}), 2.0);
  EXPECT_EQ(net.edges.at({"p1", "p0"}), 1.0);
  ASSERT_EQ(net.nodes.size(), 2u);
  EXPECT_EQ(net.nodes[0].id, "p0");
  EXPECT_EQ(net.nodes[0].out_degree, 2.0);
  EXPECT_EQ(net.nodes[0].mean_position, (Vec2{0.0, 5.0}));
}

TEST(PassNetwork, InterceptionIsNotAPass) {
  const Roster r = roster(2, 1);
  const std::vector<EventRecord> events{kick(0, 1), control(2)};
  PassNetworkBuilder b(Team::home);
  b.add_episode(events, r);
  EXPECT_TRUE(b.build().edges.empty());
}

TEST(PassNetwork, SubstitutesMerge) {
  const Roster r = roster(3, 0);  // p2 came on for p1
  PassNetworkBuilder b(Team::home, {{"p2", "p1"}});
  b.add_episode(std::vector<EventRecord>{kick(0, 1), control(1)}, r);
  b.add_episode(std::vector<EventRecord>{kick(0, 2), control(2), kick(2, 0), control(0)}, r);
  const auto net = b.build();
  EXPECT_EQ(net.edges.at({"p0", "p1"}), 2.0);
  EXPECT_EQ(net.edges.at({"p1", "p0"}), 1.0);
  EXPECT_EQ(net.nodes.size(), 2u);
}

PassNetwork net(std::map<std::pair<std::string, std::string>, double> edges) {
  PassNetwork n;
  n.edges = std::move(edges);
  return n;
}

TEST(Similarity, IdenticalNetworksAreZero) {
  const auto a = net({{{"a", "b"}, 3}, {{"b", "c"}, 1}, {{"c", "a"}, 2}, {{"a", "c"}, 5}});
  const auto s = network_similarity(a, a);
  EXPECT_EQ(s.degree_mae, 0.0);
  EXPECT_EQ(s.weight_mae, 0.0);
  EXPECT_EQ(s.jsd, 0.0);
  EXPECT_EQ(s.spectral, 0.0);
}

TEST(Similarity, SingleEdgeWeights) {
  const auto s = network_similarity(net({{{"a", "b"}, 5}}), net({{{"a", "b"}, 3}}));
  EXPECT_EQ(s.weight_mae, 2.0);
  EXPECT_EQ(s.degree_mae, 1.0);  // a: |5-3|, b: 0
  EXPECT_EQ(s.jsd, 0.0);
}

TEST(Similarity, DisjointEdgesHaveUnitJsd) {
  const auto s = network_similarity(net({{{"a", "b"}, 1}}), net({{{"b", "a"}, 1}}));
  EXPECT_NEAR(s.jsd, 1.0, 1e-12);
  EXPECT_EQ(s.spectral, 0.0);  // same symmetrised graph
  EXPECT_THROW(network_similarity(net({}), net({{{"a", "b"}, 1}})), DataError);
}

TEST(Similarity, SpectrumOfPathGraph) {
  // Path a-b-c with unit weights: normalised Laplacian eigenvalues 0, 1, 2.
  const auto n = net({{{"a", "b"}, 1}, {{"b", "c"}, 1}});
  const auto ev = laplacian_spectrum(n, {"a", "b", "c", "d"});
  ASSERT_EQ(ev.size(), 4u);
  EXPECT_NEAR(ev[0], 0.0, 1e-12);
  EXPECT_NEAR(ev[1], 0.0, 1e-12);  // isolated d
  EXPECT_NEAR(ev[2], 1.0, 1e-12);
  EXPECT_NEAR(ev[3], 2.0, 1e-12);
}

TEST(Similarity, NonNegativeAndBounded) {
  const auto a = net({{{"a", "b"}, 3}, {{"b", "c"}, 1}});
  const auto b = net({{{"a", "c"}, 2}, {{"c", "b"}, 7}, {{"b", "a"}, 1}});
  const auto s = network_similarity(a, b);
  EXPECT_GT(s.degree_mae, 0.0);
  EXPECT_GT(s.weight_mae, 0.0);
  EXPECT_GT(s.jsd, 0.0);
  EXPECT_LE(s.jsd, 1.0);
  EXPECT_GE(s.spectral, 0.0);
}

}  // namespace
}  // namespace pcrf
