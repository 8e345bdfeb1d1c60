#include <gtest/gtest.h>

#include "support.hpp"
#include "tndp/error.hpp"

using namespace tndp;
using namespace tndp::test;

namespace {

struct Fixture {
  RoadGraph road;
  RoutePool pool;
  MetroNetwork metro;
  WalkNetwork walk;
  ZoneGrid grid;
  DemandMatrix demand;

  EvalContext context(EvalParams p = {}) const {
    return EvalContext::build(road, pool, metro, walk, grid, demand, p);
  }
  BusNetwork all() const { return BusNetwork::from(pool.mutable_ids()); }
};

Route route(const RoadGraph& road, int id, std::vector<int> stops) {
  std::vector<StopId> s;
  for (int x : stops) s.push_back(NodeId{x});
  return measure_route(road, RouteId{id}, RouteKind::kOriginal, s);
}

// A and B in the outer zones of a 1x3 grid; the direct route goes A-D-E-B
// (900 s on board), the alternative is A-C then C-B on two routes (700 s).
Fixture five_node() {
  GraphSpec g;
  const int a = g.add(at_m(0, 0));
  const int b = g.add(at_m(4000, 0));
  const int c = g.add(at_m(2000, 1000));
  const int d = g.add(at_m(2000, -1000));
  const int e = g.add(at_m(3000, -500), false);
  g.both(a, c, 2200, 350);
  g.both(c, b, 2200, 350);
  g.both(a, d, 2200, 450);
  g.both(d, e, 1100, 225);
  g.both(e, b, 1100, 225);
  Fixture f;
  f.road = g.build();
  f.pool = RoutePool({route(f.road, 0, {a, d, b}), route(f.road, 1, {a, c}), route(f.road, 2, {c, b})});
  f.grid = build_grid(f.road, 1, 3);
  f.demand.add(ZoneId{0}, ZoneId{2}, 1.0);
  return f;
}

}  // namespace

TEST(TripPlanner, DirectSingleRoute) {
  GraphSpec g;
  g.add(at_m(0, 0));
  g.add(at_m(3000, 0));
  g.both(0, 1, 3000, 600);
  Fixture f;
  f.road = g.build();
  f.pool = RoutePool({route(f.road, 0, {0, 1})});
  f.grid = build_grid(f.road, 1, 2);
  f.demand.add(ZoneId{0}, ZoneId{1}, 5.0);
  const auto ctx = f.context();
  const auto ev = evaluate_detailed(f.all(), ctx);
  ASSERT_EQ(ev.trips.size(), 1u);
  ASSERT_TRUE(ev.trips[0].trip);
  const Trip& t = *ev.trips[0].trip;
  ASSERT_EQ(t.stages.size(), 1u);
  EXPECT_EQ(t.stages[0].kind, StageKind::kBus);
  EXPECT_DOUBLE_EQ(t.t_inv, 600.0);
  EXPECT_EQ(t.transfers(), 0);
  EXPECT_DOUBLE_EQ(ev.objectives.ivt(), 3000.0);
  EXPECT_DOUBLE_EQ(ev.objectives.ud(), 0.0);
  EXPECT_DOUBLE_EQ(ev.objectives.ant(), 0.0);
  EXPECT_DOUBLE_EQ(ev.objectives.tl(), 3000.0);
  // Zone centroids sit 750 m from each stop.
  EXPECT_NEAR(t.access_s, travel_time_s(haversine_m(f.grid.centroid(ZoneId{0}), f.road.node(NodeId{0}).pos), 5.0),
              1e-9);
  EXPECT_DOUBLE_EQ(t.t_wal, t.access_s + t.egress_s);
  EXPECT_DOUBLE_EQ(t.generalized_cost, t.t_inv + t.t_wal);
}

TEST(TripPlanner, PenaltyDecidesBetweenDirectAndTransfer) {
  const auto f = five_node();
  const auto places = PlaceIndex::build(f.pool, f.metro, f.walk);
  const auto access = ZoneAccess::build(places, f.road, f.metro, f.grid);
  const auto net = assemble_complete(f.all(), f.metro, f.walk, f.pool, places);

  const auto high = plan_trip(net, access, ZoneId{0}, ZoneId{2}, 300.0, 3);
  ASSERT_TRUE(high);
  EXPECT_EQ(high->stages.size(), 1u);
  EXPECT_DOUBLE_EQ(high->t_inv, 900.0);

  const auto low = plan_trip(net, access, ZoneId{0}, ZoneId{2}, 100.0, 3);
  ASSERT_TRUE(low);
  EXPECT_EQ(low->stages.size(), 2u);
  EXPECT_DOUBLE_EQ(low->t_inv, 700.0);
  EXPECT_EQ(low->transfers(), 1);
  EXPECT_DOUBLE_EQ(low->generalized_cost, low->t_wal + 800.0);

  for (double penalty : {100.0, 300.0}) {
    const auto want = oracle_trip_cost(net, access, ZoneId{0}, ZoneId{2}, penalty, 3);
    ASSERT_TRUE(want);
    EXPECT_NEAR(plan_trip(net, access, ZoneId{0}, ZoneId{2}, penalty, 3)->generalized_cost, *want, 1e-9);
  }
}

TEST(TripPlanner, TransferBudget) {
  const auto f = five_node();
  const auto places = PlaceIndex::build(f.pool, f.metro, f.walk);
  const auto access = ZoneAccess::build(places, f.road, f.metro, f.grid);
  const auto transfer_only = assemble_complete(BusNetwork::from({RouteId{1}, RouteId{2}}), f.metro, f.walk, f.pool, places);
  EXPECT_TRUE(plan_trip(transfer_only, access, ZoneId{0}, ZoneId{2}, 300.0, 1));
  EXPECT_FALSE(plan_trip(transfer_only, access, ZoneId{0}, ZoneId{2}, 300.0, 0));
  EXPECT_THROW(plan_trip(transfer_only, access, ZoneId{0}, ZoneId{0}, 300.0, 1), std::invalid_argument);
  EXPECT_THROW(TripPlanner(transfer_only, access, 300.0, -1), ConfigError);
}

TEST(Objectives, UncoveredDemandShare) {
  GraphSpec g;
  g.add(at_m(0, 0));
  g.add(at_m(2000, 0));
  g.add(at_m(0, 2000));
  g.add(at_m(2000, 2000));
  g.both(0, 1, 2000, 360);
  g.both(2, 3, 2000, 360);
  Fixture f;
  f.road = g.build();
  f.pool = RoutePool({route(f.road, 0, {0, 1})});
  f.grid = build_grid(f.road, 2, 2);
  f.demand.add(ZoneId{0}, ZoneId{1}, 10.0);
  f.demand.add(ZoneId{2}, ZoneId{3}, 30.0);
  const auto v = evaluate(f.all(), f.context());
  EXPECT_DOUBLE_EQ(v.ud(), 0.75);
  EXPECT_DOUBLE_EQ(v.ivt(), 3600.0);
  EXPECT_DOUBLE_EQ(v.ant(), 0.0);
}

TEST(Objectives, TransfersAcrossWalk) {
  GraphSpec g;
  const int a = g.add(at_m(0, 0));
  const int b = g.add(at_m(1900, 0));
  const int c = g.add(at_m(2100, 0));
  const int d = g.add(at_m(4000, 0));
  g.both(a, b, 2000, 360);
  g.both(c, d, 2000, 360);
  Fixture f;
  f.road = g.build();
  f.pool = RoutePool({route(f.road, 0, {a, b}), route(f.road, 1, {c, d})});
  f.walk = WalkNetwork::build(f.road, f.metro);
  ASSERT_EQ(f.walk.edges.size(), 2u);
  f.grid = build_grid(f.road, 1, 3);
  f.demand.add(ZoneId{0}, ZoneId{2}, 1.0);
  const auto ev = evaluate_detailed(f.all(), f.context());
  ASSERT_TRUE(ev.trips[0].trip);
  const Trip& t = *ev.trips[0].trip;
  ASSERT_EQ(t.stages.size(), 3u);
  EXPECT_EQ(t.stages[0].kind, StageKind::kBus);
  EXPECT_EQ(t.stages[1].kind, StageKind::kWalk);
  EXPECT_EQ(t.stages[2].kind, StageKind::kBus);
  EXPECT_EQ(t.walk_stages(), 1u);
  EXPECT_DOUBLE_EQ(ev.objectives.ant(), 1.0);
  EXPECT_DOUBLE_EQ(t.t_inv, 720.0);
  EXPECT_NEAR(t.t_wal, t.access_s + t.egress_s + travel_time_s(f.walk.edges[0].length_m, 5.0), 1e-9);

  EvalParams strict;
  strict.max_transfers = 0;
  EXPECT_DOUBLE_EQ(evaluate(f.all(), f.context(strict)).ud(), 1.0);
}

TEST(Objectives, FullDirectCoverage) {
  GraphSpec g;
  g.add(at_m(0, 0));
  g.add(at_m(2000, 0));
  g.add(at_m(0, 2000));
  g.add(at_m(2000, 2000));
  g.both(0, 1, 2000, 360);
  g.both(2, 3, 2000, 360);
  Fixture f;
  f.road = g.build();
  f.pool = RoutePool({route(f.road, 0, {0, 1}), route(f.road, 1, {3, 2})});
  f.grid = build_grid(f.road, 2, 2);
  f.demand.add(ZoneId{0}, ZoneId{1}, 10.0);
  f.demand.add(ZoneId{3}, ZoneId{2}, 30.0);
  const auto v = evaluate(f.all(), f.context());
  EXPECT_DOUBLE_EQ(v.ud(), 0.0);
  EXPECT_DOUBLE_EQ(v.ant(), 0.0);
  EXPECT_DOUBLE_EQ(v.ivt(), 40.0 * 360.0);
  // Empty network: nothing served.
  const auto none = evaluate(BusNetwork{}, f.context());
  EXPECT_DOUBLE_EQ(none.ud(), 1.0);
  EXPECT_DOUBLE_EQ(none.ivt(), 0.0);
  EXPECT_DOUBLE_EQ(none.ant(), 0.0);
  EXPECT_DOUBLE_EQ(none.tl(), 0.0);
}

TEST(Objectives, WalkingBeatsTransitMeansUnserved) {
  // Stops 150 m apart in neighbouring zones, linked by a road loop bus.
  GraphSpec g;
  const int a = g.add(at_m(0, 0));
  const int b = g.add(at_m(150, 0));
  const int far = g.add(at_m(75, 1500), false);
  g.both(a, far, 1600, 290);
  g.both(far, b, 1600, 290);
  Fixture f;
  f.road = g.build();
  f.pool = RoutePool({route(f.road, 0, {a, b})});
  f.walk = WalkNetwork::build(f.road, f.metro);
  f.grid = build_grid(f.road, 1, 2);
  f.demand.add(ZoneId{0}, ZoneId{1}, 1.0);
  EXPECT_DOUBLE_EQ(evaluate(f.all(), f.context()).ud(), 1.0);
  f.walk = {};
  EXPECT_DOUBLE_EQ(evaluate(f.all(), f.context()).ud(), 0.0);
}

TEST(Objectives, TotalLengthAndFixedRoutes) {
  const auto m = Mandl::load();
  auto routes = m.routes;
  routes[3].kind = RouteKind::kTramFixed;
  Fixture f{m.road, RoutePool(routes), m.metro, m.walk, build_grid(m.road, m.metro, 4, 4), {}};
  f.demand.add(ZoneId{0}, ZoneId{15}, 1.0);
  const BusNetwork two = BusNetwork::from({RouteId{0}, RouteId{1}});
  EXPECT_DOUBLE_EQ(evaluate(two, f.context()).tl(), 4440.0 + 6640.0 + 3990.0);
  EvalParams p;
  p.tl_include_fixed = false;
  EXPECT_DOUBLE_EQ(evaluate(two, f.context(p)).tl(), 4440.0 + 6640.0);
}

TEST(Objectives, ZeroDemandIsAnError) {
  const auto m = Mandl::load();
  Fixture f{m.road, m.pool, m.metro, m.walk, build_grid(m.road, m.metro, 4, 4), {}};
  f.demand.add(ZoneId{3}, ZoneId{3}, 10.0);
  EXPECT_THROW(evaluate(f.all(), f.context()), DataError);
}

TEST(Objectives, UnknownRouteIsReported) {
  const auto m = Mandl::load();
  Fixture f{m.road, m.pool, m.metro, m.walk, build_grid(m.road, m.metro, 4, 4), {}};
  f.demand.add(ZoneId{0}, ZoneId{15}, 1.0);
  EXPECT_THROW(evaluate(BusNetwork::from({RouteId{7}}), f.context()), UnknownRouteError);
}

TEST(Objectives, MandlMetroShortcut) {
  // Zone 5 holds stop 7 and station 0, zone 11 holds stop 12 and station 1;
  // the metro ride beats every bus path.
  const auto m = Mandl::load();
  Fixture f{m.road, m.pool, m.metro, m.walk, build_grid(m.road, m.metro, 4, 4), {}};
  f.demand.add(ZoneId{5}, ZoneId{11}, 2.0);
  const auto ev = evaluate_detailed(f.all(), f.context());
  ASSERT_TRUE(ev.trips[0].trip);
  const Trip& t = *ev.trips[0].trip;
  ASSERT_EQ(t.stages.size(), 1u);
  EXPECT_EQ(t.stages[0].kind, StageKind::kMetro);
  EXPECT_DOUBLE_EQ(t.t_inv, 144.0);
  EXPECT_DOUBLE_EQ(ev.objectives.ivt(), 288.0);
}

// Property: on random small cities the planner's generalized cost equals the
// exhaustive oracle for every OD pair, and coverage agrees.
TEST(TripPlanner, MatchesExhaustiveOracleOnRandomCities) {
  for (std::uint64_t seed = 100; seed < 106; ++seed) {
    const auto c = random_city(seed, 12, 5, 3);
    const auto places = PlaceIndex::build(c.pool, c.metro, c.walk);
    const auto access = ZoneAccess::build(places, c.road, c.metro, c.grid);
    const auto net = assemble_complete(BusNetwork::from(c.pool.mutable_ids()), c.metro, c.walk, c.pool, places);
    for (int mt : {0, 1, 3}) {
      TripPlanner planner(net, access, 300.0, mt);
      for (std::size_t s = 0; s < c.grid.zone_count(); ++s) {
        planner.search_from(ZoneId{static_cast<int>(s)});
        for (std::size_t t = 0; t < c.grid.zone_count(); ++t) {
          if (s == t) continue;
          const auto got = planner.trip_to(ZoneId{static_cast<int>(t)});
          const auto want = oracle_trip_cost(net, access, ZoneId{static_cast<int>(s)}, ZoneId{static_cast<int>(t)}, 300.0, mt);
          ASSERT_EQ(got.has_value(), want.has_value()) << "seed " << seed << " " << s << "->" << t;
          if (got) {
            EXPECT_NEAR(got->generalized_cost, *want, 1e-6) << "seed " << seed << " " << s << "->" << t;
            EXPECT_LE(got->transfers() - static_cast<int>(0), mt + static_cast<int>(got->walk_stages()));
            EXPECT_NEAR(got->generalized_cost,
                        got->t_inv + got->t_wal + 300.0 * static_cast<double>(got->stages.size() - 1), 1e-6);
          }
        }
      }
    }
  }
}
