#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include "support.hpp"
#include "tndp/error.hpp"

using namespace tndp;
using namespace tndp::test;

TEST(Geo, HaversineKnownDistance) {
  // One degree of latitude on the mean sphere.
  EXPECT_NEAR(haversine_m({0, 0}, {1, 0}), kEarthRadiusM * std::acos(-1.0) / 180.0, 1e-6);
  EXPECT_DOUBLE_EQ(haversine_m({38.7, -9.2}, {38.7, -9.2}), 0.0);
  EXPECT_NEAR(haversine_m({38.7, -9.2}, {38.71, -9.19}), haversine_m({38.71, -9.19}, {38.7, -9.2}), 1e-9);
}

TEST(Geo, PlanarRoundTrip) {
  const LatLon o{38.7, -9.2};
  const LatLon p{38.73, -9.17};
  const auto xy = to_planar(o, p);
  const auto back = from_planar(o, xy);
  EXPECT_NEAR(back.lat, p.lat, 1e-12);
  EXPECT_NEAR(back.lon, p.lon, 1e-12);
  EXPECT_NEAR(std::hypot(xy.x, xy.y), haversine_m(o, p), 5.0);
}

TEST(Geo, TravelTime) {
  EXPECT_DOUBLE_EQ(travel_time_s(1000.0, 60.0), 60.0);
  EXPECT_DOUBLE_EQ(travel_time_s(300.0, 5.0), 216.0);
}

TEST(RoadGraph, RejectsBrokenInput) {
  std::vector<RoadNode> nodes{{NodeId{0}, {0, 0}, true}, {NodeId{1}, {0, 0.001}, true}};
  EXPECT_THROW(RoadGraph(nodes, {{NodeId{0}, NodeId{2}, 10, 1}}), DataError);
  EXPECT_THROW(RoadGraph(nodes, {{NodeId{0}, NodeId{1}, 0, 1}}), DataError);
  EXPECT_THROW(RoadGraph(nodes, {{NodeId{0}, NodeId{1}, 10, -1}}), DataError);
  std::vector<RoadNode> sparse{{NodeId{0}, {0, 0}, true}, {NodeId{2}, {0, 0}, true}};
  EXPECT_THROW(RoadGraph(sparse, {}), DataError);
}

TEST(RoadGraph, AdjacencyAndDegree) {
  GraphSpec g;
  for (int i = 0; i < 3; ++i) g.add(at_m(100.0 * i, 0));
  g.edge(0, 1, 100, 10);
  g.edge(0, 2, 200, 20);
  g.edge(1, 2, 100, 10);
  const auto road = g.build();
  EXPECT_EQ(road.out_edges(NodeId{0}).size(), 2u);
  EXPECT_EQ(road.out_edges(NodeId{2}).size(), 0u);
  EXPECT_EQ(road.in_degree(NodeId{2}), 2u);
  EXPECT_EQ(road.in_degree(NodeId{0}), 0u);
}

namespace {

// Diamond where the short way is slow: A-B-D is 400 m / 100 s, A-C-D 600 m / 60 s.
GraphSpec diamond() {
  GraphSpec g;
  const int a = g.add(at_m(0, 0));
  const int b = g.add(at_m(200, 100), false);
  const int c = g.add(at_m(200, -100), false);
  const int d = g.add(at_m(400, 0));
  g.both(a, b, 200, 50);
  g.both(b, d, 200, 50);
  g.both(a, c, 300, 30);
  g.both(c, d, 300, 30);
  g.both(b, c, 200, 5);
  return g;
}

// Every simple path by DFS; returns (time, length) of the fastest, ties by length.
std::pair<double, double> brute_fastest(const GraphSpec& g, int s, int t) {
  std::pair<double, double> best{1e300, 1e300};
  std::vector<bool> seen(g.nodes.size(), false);
  std::function<void(int, double, double)> go = [&](int v, double time, double len) {
    if (v == t) {
      best = std::min(best, {time, len});
      return;
    }
    for (auto [u, w, l, tt] : g.edges) {
      if (u != v || seen[static_cast<std::size_t>(w)]) continue;
      seen[static_cast<std::size_t>(w)] = true;
      go(w, time + tt, len + l);
      seen[static_cast<std::size_t>(w)] = false;
    }
  };
  seen[static_cast<std::size_t>(s)] = true;
  go(s, 0, 0);
  return best;
}

}  // namespace

TEST(ShortestPath, MatchesBruteForceOnDiamond) {
  const auto g = diamond();
  const auto road = g.build();
  for (int s = 0; s < 4; ++s) {
    for (int t = 0; t < 4; ++t) {
      if (s == t) continue;
      const auto p = shortest_time_path(road, NodeId{s}, NodeId{t});
      ASSERT_TRUE(p);
      const auto [bt, bl] = brute_fastest(g, s, t);
      EXPECT_DOUBLE_EQ(p->time_s, bt) << s << "->" << t;
      EXPECT_DOUBLE_EQ(p->length_m, bl) << s << "->" << t;
      EXPECT_EQ(p->nodes.front(), NodeId{s});
      EXPECT_EQ(p->nodes.back(), NodeId{t});
    }
  }
}

TEST(ShortestPath, UnreachableIsEmpty) {
  GraphSpec g;
  g.add(at_m(0, 0));
  g.add(at_m(100, 0));
  g.edge(0, 1, 100, 10);
  const auto road = g.build();
  EXPECT_FALSE(shortest_time_path(road, NodeId{1}, NodeId{0}));
  ShortestPathTree tree(road, NodeId{0});
  EXPECT_TRUE(tree.reachable(NodeId{1}));
}

TEST(RouteLength, SingleLeg) {
  GraphSpec g;
  g.add(at_m(0, 0));
  g.add(at_m(500, 0));
  g.both(0, 1, 500, 90);
  const auto road = g.build();
  const auto r = measure_route(road, RouteId{0}, RouteKind::kOriginal, {NodeId{0}, NodeId{1}});
  EXPECT_DOUBLE_EQ(r.length_m, 500.0);
  EXPECT_DOUBLE_EQ(route_length(r, road), 500.0);
  const auto back = measure_route(road, RouteId{0}, RouteKind::kOriginal, {NodeId{0}, NodeId{1}, NodeId{0}});
  EXPECT_DOUBLE_EQ(back.length_m, 1000.0);
  ASSERT_EQ(back.leg_times_s.size(), 2u);
  EXPECT_DOUBLE_EQ(back.leg_times_s[1], 90.0);
}

TEST(RouteLength, DiamondFollowsTimeOptimalPath) {
  const auto g = diamond();
  const auto road = g.build();
  const auto r = measure_route(road, RouteId{0}, RouteKind::kOriginal, {NodeId{0}, NodeId{3}});
  EXPECT_DOUBLE_EQ(r.length_m, brute_fastest(g, 0, 3).second);
  EXPECT_DOUBLE_EQ(r.length_m, 600.0);  // not the 400 m length-optimal way
}

TEST(RouteLength, UnreachablePairIsReported) {
  GraphSpec g;
  g.add(at_m(0, 0));
  g.add(at_m(100, 0));
  g.add(at_m(200, 0));
  g.edge(0, 1, 100, 10);
  const auto road = g.build();
  try {
    measure_route(road, RouteId{0}, RouteKind::kOriginal, {NodeId{0}, NodeId{1}, NodeId{2}});
    FAIL() << "expected UnreachableError";
  } catch (const UnreachableError& e) {
    EXPECT_EQ(e.pair(), std::make_pair(NodeId{1}, NodeId{2}));
  }
}

TEST(RouteLength, RejectsNonStopsAndRepeats) {
  const auto road = diamond().build();
  EXPECT_THROW(measure_route(road, RouteId{0}, RouteKind::kOriginal, {NodeId{0}, NodeId{1}}), DataError);
  EXPECT_THROW(measure_route(road, RouteId{0}, RouteKind::kOriginal, {NodeId{0}, NodeId{0}}), DataError);
}

TEST(RoutePool, FixedAndMutableIds) {
  const auto m = Mandl::load();
  auto routes = m.routes;
  routes[2].kind = RouteKind::kTramFixed;
  RoutePool pool(routes);
  EXPECT_EQ(pool.mutable_ids(), (std::vector<RouteId>{RouteId{0}, RouteId{1}, RouteId{3}}));
  EXPECT_EQ(pool.fixed_ids(), (std::vector<RouteId>{RouteId{2}}));
}

TEST(RoutePool, BuildFiltersLengthAndDuplicates) {
  const auto m = Mandl::load();
  auto routes = m.routes;
  routes.push_back(routes[0]);
  NetworkBounds b;
  b.min_route_len_m = 0;
  b.max_route_len_m = 5000;  // lengths are 4440, 6640, 5480, 3990
  PoolBuildReport rep;
  const auto pool = build_pool(routes, b, {}, &rep);
  EXPECT_EQ(rep.dropped_length, 2u);
  EXPECT_EQ(rep.dropped_duplicate, 1u);
  ASSERT_EQ(pool.size(), 2u);
  EXPECT_DOUBLE_EQ(pool.routes()[0].length_m, 4440.0);
  EXPECT_DOUBLE_EQ(pool.routes()[1].length_m, 3990.0);
  for (std::size_t i = 0; i < pool.size(); ++i) EXPECT_EQ(pool.routes()[i].id, RouteId{static_cast<int>(i)});
}

TEST(CheckNetwork, FlagsViolations) {
  const auto m = Mandl::load();
  NetworkBounds b;
  b.min_routes = 2;
  b.max_routes = 3;
  EXPECT_FALSE(check_network(BusNetwork::from({RouteId{0}, RouteId{1}}), m.pool, b));
  EXPECT_TRUE(check_network(BusNetwork::from({RouteId{0}}), m.pool, b));
  EXPECT_TRUE(check_network(m.all(), m.pool, b));
  EXPECT_TRUE(check_network(BusNetwork{{RouteId{0}, RouteId{0}}}, m.pool, b));
  EXPECT_TRUE(check_network(BusNetwork::from({RouteId{0}, RouteId{9}}), m.pool, b));
}

TEST(WalkNetwork, LinksWithinThreshold) {
  const auto m = Mandl::load();
  ASSERT_EQ(m.walk.edges.size(), 4u);
  for (const auto& e : m.walk.edges) EXPECT_LE(e.length_m, kMaxWalkM);
  EXPECT_NO_THROW(m.walk.validate());
  WalkNetwork bad = m.walk;
  bad.edges[0].length_m = 400;
  EXPECT_THROW(bad.validate(), DataError);
}

namespace {

std::string place_key(Place p) {
  return (p.kind == Place::Kind::kStop ? "stop:" : "station:") + std::to_string(p.id);
}

std::multiset<std::string> edge_multiset(const CompleteNetwork& net) {
  std::multiset<std::string> out;
  for (const auto& e : net.edges()) {
    out.insert(place_key(net.places().place(e.from)) + "," + place_key(net.places().place(e.to)) + "," +
               to_string(e.carrier, net.lines()));
  }
  return out;
}

}  // namespace

TEST(CompleteNetwork, MandlMatchesHandAssembly) {
  const auto m = Mandl::load();
  const auto net = assemble_complete(m.all(), m.metro, m.walk, m.pool);
  std::ifstream in(fixture("mandl15/complete_edges.csv"));
  std::string line;
  std::getline(in, line);
  std::multiset<std::string> expected;
  while (std::getline(in, line))
    if (!line.empty()) expected.insert(line);
  EXPECT_EQ(edge_multiset(net), expected);
  EXPECT_EQ(net.edges().size(), 21u);
}

TEST(CompleteNetwork, EdgeCounting) {
  GraphSpec g;
  for (int i = 0; i < 3; ++i) g.add(at_m(1000.0 * i, 0));
  g.both(0, 1, 1000, 180);
  g.both(1, 2, 1000, 180);
  const auto road = g.build();
  RoutePool pool({measure_route(road, RouteId{0}, RouteKind::kOriginal, {NodeId{0}, NodeId{1}, NodeId{2}})});
  MetroNetwork metro;
  metro.stations = {{StationId{0}, at_m(0, 100), "a"}, {StationId{1}, at_m(3000, 1000), "b"}};
  metro.edges = {{StationId{0}, StationId{1}, "m", 3200}, {StationId{1}, StationId{0}, "m", 3200}};
  const auto walk = WalkNetwork::build(road, metro);
  ASSERT_EQ(walk.edges.size(), 2u);
  EXPECT_EQ(assemble_complete(BusNetwork::from({RouteId{0}}), metro, walk, pool).edges().size(), 6u);

  RoutePool two({measure_route(road, RouteId{0}, RouteKind::kOriginal, {NodeId{0}, NodeId{1}}),
                 measure_route(road, RouteId{1}, RouteKind::kOriginal, {NodeId{1}, NodeId{2}})});
  EXPECT_EQ(assemble_complete(BusNetwork::from({RouteId{0}, RouteId{1}}), {}, {}, two).edges().size(), 2u);
}

TEST(CompleteNetwork, EdgeTimes) {
  const auto m = Mandl::load();
  const auto net = assemble_complete(m.all(), m.metro, m.walk, m.pool);
  for (const auto& e : net.edges()) {
    if (e.carrier.kind == CarrierKind::kMetro) EXPECT_DOUBLE_EQ(e.time_s, 144.0);  // 2400 m at 60 km/h
    if (e.carrier.kind == CarrierKind::kWalk) EXPECT_GT(e.time_s, 0.0);
  }
  // Bus legs take the road time of their time-optimal path: route 0 leg 0->4 is one 1700 m edge.
  EXPECT_DOUBLE_EQ(net.edges()[0].time_s, 306.0);
}

TEST(CompleteNetwork, UnknownRouteNamesTheId) {
  const auto m = Mandl::load();
  try {
    assemble_complete(BusNetwork::from({RouteId{0}, RouteId{42}}), m.metro, m.walk, m.pool);
    FAIL() << "expected UnknownRouteError";
  } catch (const UnknownRouteError& e) {
    EXPECT_EQ(e.route(), RouteId{42});
    EXPECT_NE(std::string(e.what()).find("42"), std::string::npos);
  }
}

TEST(CompleteNetwork, FixedRoutesAlwaysPresent) {
  const auto m = Mandl::load();
  auto routes = m.routes;
  routes[3].kind = RouteKind::kTramFixed;
  RoutePool pool(routes);
  const auto net = assemble_complete(BusNetwork{}, {}, {}, pool);
  EXPECT_EQ(net.edges().size(), 3u);
}
