#include <gtest/gtest.h>

#include <fstream>

#include "support.hpp"
#include "tndp/error.hpp"
#include "tndp/io.hpp"
#include "tndp/routegen.hpp"

using namespace tndp;
using namespace tndp::test;

TEST(Cluster, ShortEdgeIntoSingleEntryStopMerges) {
  GraphSpec g;
  g.add(at_m(0, 0));
  g.add(at_m(50, 0));
  g.edge(0, 1, 50, 9);
  const auto res = cluster_stops(g.build());
  EXPECT_EQ(res.map(NodeId{0}), NodeId{1});
  EXPECT_EQ(res.map(NodeId{1}), NodeId{1});
  EXPECT_EQ(res.road.stops(), std::vector<StopId>{NodeId{1}});
  EXPECT_EQ(res.map.members(NodeId{1}), (std::vector<StopId>{NodeId{0}, NodeId{1}}));
}

TEST(Cluster, LongEdgeDoesNotMerge) {
  GraphSpec g;
  g.add(at_m(0, 0));
  g.add(at_m(150, 0));
  g.edge(0, 1, 150, 27);
  const auto res = cluster_stops(g.build());
  EXPECT_EQ(res.map(NodeId{0}), NodeId{0});
  EXPECT_EQ(res.road.stops().size(), 2u);
  EXPECT_TRUE(res.map.merges.empty());
}

TEST(Cluster, ChainMergesTransitively) {
  GraphSpec g;
  for (int i = 0; i < 3; ++i) g.add(at_m(60.0 * i, 0));
  g.edge(0, 1, 60, 10);
  g.edge(1, 2, 60, 10);
  const auto res = cluster_stops(g.build());
  for (int i = 0; i < 3; ++i) EXPECT_EQ(res.map(NodeId{i}), NodeId{2});
  EXPECT_EQ(res.road.stops().size(), 1u);
}

TEST(Cluster, SecondEntryBlocksMerge) {
  GraphSpec g;
  for (int i = 0; i < 3; ++i) g.add(at_m(60.0 * i, 0));
  g.edge(0, 1, 60, 10);
  g.edge(2, 1, 60, 10);  // deg_in(1) = 2
  const auto res = cluster_stops(g.build());
  EXPECT_TRUE(res.map.merges.empty());
}

TEST(Cluster, KeepsTopologyAndIsIdempotent) {
  const auto m = Mandl::load();
  GraphSpec g;
  for (int i = 0; i < 4; ++i) g.add(at_m(80.0 * i, 0), i != 2);
  g.edge(0, 1, 80, 10);
  g.edge(1, 2, 80, 10);
  g.edge(2, 3, 80, 10);
  const auto road = g.build();
  const auto once = cluster_stops(road);
  EXPECT_EQ(once.road.node_count(), road.node_count());
  EXPECT_EQ(once.road.edge_count(), road.edge_count());
  EXPECT_EQ(once.map(NodeId{0}), NodeId{1});
  EXPECT_EQ(once.map(NodeId{3}), NodeId{3});  // joined through a junction, not an edge
  const auto twice = cluster_stops(once.road);
  EXPECT_TRUE(twice.map.merges.empty());
  EXPECT_EQ(twice.road.stops(), once.road.stops());
  // The Mandl lattice has no short edges at all.
  EXPECT_TRUE(cluster_stops(m.road).map.merges.empty());
}

TEST(Cluster, RemapCollapsesRepeats) {
  ClusterMap map;
  map.representative = {{NodeId{0}, NodeId{1}}, {NodeId{1}, NodeId{1}}, {NodeId{2}, NodeId{2}}};
  EXPECT_EQ(remap_stops({NodeId{0}, NodeId{1}, NodeId{2}}, map), (std::vector<StopId>{NodeId{1}, NodeId{2}}));
}

TEST(Cluster, RejectsBadThreshold) {
  GraphSpec g;
  g.add(at_m(0, 0));
  EXPECT_THROW(cluster_stops(g.build(), 0.0), ConfigError);
}

TEST(ZoneGrid, SingleStopOccupiesOneCell) {
  GraphSpec g;
  g.add(at_m(0, 0));
  const auto road = g.build();
  for (int n : {1, 3, 30}) {
    const auto grid = build_grid(road, n, n);
    EXPECT_TRUE(grid.zone_of(road.node(NodeId{0}).pos).valid());
  }
}

TEST(ZoneGrid, CornersOfTwoByTwo) {
  GraphSpec g;
  g.add(at_m(0, 0));
  g.add(at_m(1000, 0));
  g.add(at_m(0, 1000));
  g.add(at_m(1000, 1000));
  const auto road = g.build();
  const auto grid = build_grid(road, 2, 2);
  std::set<ZoneId> zones;
  for (const auto& n : road.nodes()) zones.insert(grid.zone_of(n.pos));
  EXPECT_EQ(zones.size(), 4u);
  EXPECT_EQ(grid.zone_of(road.node(NodeId{0}).pos), ZoneId{0});
  EXPECT_EQ(grid.zone_of(road.node(NodeId{3}).pos), ZoneId{3});
}

TEST(ZoneGrid, MandlFourByFourMatchesHandAssignment) {
  const auto m = Mandl::load();
  const auto grid = build_grid(m.road, m.metro, 4, 4);
  std::ifstream in(fixture("mandl15/zones_4x4.csv"));
  std::string line;
  std::getline(in, line);
  int checked = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto colon = line.find(':');
    const auto comma = line.find(',');
    const std::string kind = line.substr(0, colon);
    const int id = std::stoi(line.substr(colon + 1, comma - colon - 1));
    const int zone = std::stoi(line.substr(comma + 1));
    const LatLon pos = kind == "stop" ? m.road.node(NodeId{id}).pos : m.metro.stations[static_cast<std::size_t>(id)].pos;
    EXPECT_EQ(grid.zone_of(pos), ZoneId{zone}) << line;
    ++checked;
  }
  EXPECT_EQ(checked, 17);
}

TEST(ZoneGrid, CentroidIsCellCentre) {
  ZoneGrid grid({38.70, 38.74, -9.20, -9.16}, 4, 4);
  const auto c = grid.centroid(ZoneId{5});
  EXPECT_NEAR(c.lat, 38.715, 1e-12);
  EXPECT_NEAR(c.lon, -9.185, 1e-12);
  EXPECT_EQ(grid.zone_of(c), ZoneId{5});
  EXPECT_THROW(ZoneGrid({0, 1, 0, 1}, 0, 3), ConfigError);
}

TEST(Demand, TotalsAndActivity) {
  DemandMatrix d;
  d.add(ZoneId{0}, ZoneId{1}, 10);
  d.add(ZoneId{1}, ZoneId{0}, 5);
  d.add(ZoneId{1}, ZoneId{1}, 7);
  d.add(ZoneId{0}, ZoneId{1}, 2);
  EXPECT_DOUBLE_EQ(d.at(ZoneId{0}, ZoneId{1}), 12);
  EXPECT_DOUBLE_EQ(d.total(), 24);
  EXPECT_DOUBLE_EQ(d.total_between_zones(), 17);
  const auto act = d.zone_activity();
  EXPECT_DOUBLE_EQ(act.at(ZoneId{0}), 17);
  EXPECT_DOUBLE_EQ(act.at(ZoneId{1}), 31);
}

TEST(Synth, SameSeedSameFiles) {
  TempDir a("synth-a"), b("synth-b");
  for (const auto* dir : {&a, &b}) {
    const auto city = synth_city(1, 200, 60);
    io::write_road(city.road, *dir / "n.csv", *dir / "e.csv");
    io::write_demand(city.demand, *dir / "d.csv");
    io::write_json(*dir / "r.json", io::routes_to_json(city.routes));
    io::write_json(*dir / "m.json", io::to_json(city.metro));
  }
  for (const char* f : {"n.csv", "e.csv", "d.csv", "r.json", "m.json"})
    EXPECT_EQ(io::read_text(a / f), io::read_text(b / f)) << f;
}

TEST(Synth, RejectsNoStops) {
  EXPECT_THROW(synth_city(1, 200, 0), ConfigError);
  EXPECT_THROW(synth_city(1, 50, 60), ConfigError);
}

TEST(Synth, GoldenTotalDemand) {
  // Recorded from the first audited run; any change to the generator shows up here.
  const auto city = synth_city(7, 200, 60);
  EXPECT_EQ(city.road.stops().size(), 60u);
  EXPECT_NEAR(city.demand.total(), 99999.64, 1e-6);
}

TEST(Synth, CityIsUsable) {
  const auto city = synth_city(3, 200, 60);
  for (const auto& s : city.road.stops())
    for (const auto& t : city.road.stops()) ASSERT_TRUE(ShortestPathTree(city.road, s).reachable(t));
  EXPECT_NO_THROW(city.metro.validate());
  bool has_fixed = false;
  for (const auto& r : city.routes) has_fixed = has_fixed || r.fixed();
  EXPECT_TRUE(has_fixed);
}

// ---------------------------------------------------------------- routegen

TEST(HubConnectors, FollowStopsOnShortestPath) {
  GraphSpec g;
  const int a = g.add(at_m(0, 0));
  const int c = g.add(at_m(600, 0));
  const int b = g.add(at_m(1200, 0));
  const int j = g.add(at_m(600, 400), false);
  g.both(a, c, 600, 100);
  g.both(c, b, 600, 100);
  g.both(a, j, 800, 300);
  g.both(j, b, 800, 300);
  const auto road = g.build();
  std::vector<double> busy{10, 1, 5, 0};  // A busiest, then B
  NetworkBounds bounds;
  bounds.min_route_len_m = 0;
  const auto routes = gen_hub_connectors(road, busy, 2, 100, bounds);
  ASSERT_EQ(routes.size(), 1u);
  EXPECT_EQ(routes[0].stops, (std::vector<StopId>{NodeId{a}, NodeId{c}, NodeId{b}}));
  EXPECT_EQ(routes[0].kind, RouteKind::kHubConnector);
}

TEST(HubConnectors, PairCountingAndFilters) {
  const auto m = Mandl::load();
  std::vector<double> busy(m.road.node_count());
  for (std::size_t i = 0; i < busy.size(); ++i) busy[i] = static_cast<double>(i);
  NetworkBounds loose;
  loose.min_route_len_m = 0;
  EXPECT_LE(gen_hub_connectors(m.road, busy, 2, 100, loose).size(), 1u);
  HubConnectorReport rep;
  const auto five = gen_hub_connectors(m.road, busy, 5, 100, loose, &rep);
  EXPECT_EQ(rep.pairs_considered, 10u);
  EXPECT_LE(five.size(), 10u);
  const auto capped = gen_hub_connectors(m.road, busy, 5, 3, loose, &rep);
  EXPECT_EQ(rep.pairs_considered, 3u);
  EXPECT_THROW(gen_hub_connectors(m.road, busy, 1, 10, loose), ConfigError);
  for (const auto& r : five) EXPECT_EQ(std::set<StopId>(r.stops.begin(), r.stops.end()).size(), r.stops.size());
}

TEST(HubConnectors, ShortPairDiscarded) {
  GraphSpec g;
  g.add(at_m(0, 0));
  g.add(at_m(200, 0));
  g.both(0, 1, 200, 36);
  NetworkBounds bounds;
  bounds.min_route_len_m = 1000;
  HubConnectorReport rep;
  EXPECT_TRUE(gen_hub_connectors(g.build(), {2, 1}, 2, 10, bounds, &rep).empty());
  EXPECT_EQ(rep.out_of_bounds, 1u);
}

TEST(HubConnectors, UnreachablePairCounted) {
  GraphSpec g;
  g.add(at_m(0, 0));
  g.add(at_m(2000, 0));
  NetworkBounds bounds;
  bounds.min_route_len_m = 0;
  HubConnectorReport rep;
  EXPECT_TRUE(gen_hub_connectors(g.build(), {2, 1}, 2, 10, bounds, &rep).empty());
  EXPECT_EQ(rep.unreachable, 1u);
}

TEST(Traversal, EmptyAndDeterministic) {
  const auto city = synth_city(1, 200, 60);
  EXPECT_TRUE(gen_traversal(city.road, 0, 3000, 1).empty());
  const auto a = gen_traversal(city.road, 10, 3000, 5);
  const auto b = gen_traversal(city.road, 10, 3000, 5);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a[i].stops, b[i].stops);
  EXPECT_THROW(gen_traversal(city.road, -1, 3000, 1), ConfigError);
}

TEST(Traversal, RoutesSpanTheCity) {
  const auto city = synth_city(1, 200, 60);
  const auto stops = city.road.stops();
  BoundingBox box{90, -90, 180, -180};
  for (auto s : stops) box.expand(city.road.node(s).pos);
  TraversalReport rep;
  const auto routes = gen_traversal(city.road, 10, 3000, 1, 1e12, &rep);
  EXPECT_EQ(rep.produced, routes.size());
  EXPECT_EQ(rep.requested, 10u);
  EXPECT_EQ(rep.shortfall, 10u - routes.size());
  ASSERT_FALSE(routes.empty());
  for (const auto& r : routes) {
    EXPECT_GE(r.length_m, 3000.0);
    EXPECT_EQ(std::set<StopId>(r.stops.begin(), r.stops.end()).size(), r.stops.size());
    // Span: diagonal of the box around the route's own stops.
    BoundingBox extent{90, -90, 180, -180};
    for (auto s : r.stops) extent.expand(city.road.node(s).pos);
    EXPECT_GE(extent.diagonal_m(), 0.6 * box.diagonal_m()) << "route " << r.id;
  }
}

TEST(Traversal, ShortfallReported) {
  GraphSpec g;
  g.add(at_m(0, 0));
  g.add(at_m(500, 0));
  g.both(0, 1, 500, 90);
  TraversalReport rep;
  EXPECT_TRUE(gen_traversal(g.build(), 5, 3000, 1, 1e12, &rep).empty());
  EXPECT_EQ(rep.shortfall, 5u);
}

TEST(RoutePool, MixesKindsAndRespectsBounds) {
  const auto city = synth_city(2, 200, 60);
  NetworkBounds bounds;
  bounds.min_route_len_m = 1000;
  bounds.max_route_len_m = 20000;
  PoolOptions opt;
  opt.top_k = 10;
  opt.traversal = 10;
  PoolReport rep;
  const auto pool = make_route_pool(city.road, city.grid, city.demand, city.routes, bounds, opt, &rep);
  std::set<RouteKind> kinds;
  for (const auto& r : pool.routes()) {
    kinds.insert(r.kind);
    if (!r.fixed()) EXPECT_TRUE(bounds.route_len_ok(r.length_m));
  }
  EXPECT_TRUE(kinds.contains(RouteKind::kHubConnector));
  EXPECT_TRUE(kinds.contains(RouteKind::kTraversal));
  EXPECT_TRUE(kinds.contains(RouteKind::kTramFixed));
  EXPECT_EQ(pool.stop_busyness().size(), city.road.node_count());
  const auto again = make_route_pool(city.road, city.grid, city.demand, city.routes, bounds, opt);
  ASSERT_EQ(again.size(), pool.size());
  for (std::size_t i = 0; i < pool.size(); ++i) EXPECT_EQ(again.routes()[i].stops, pool.routes()[i].stops);
}
