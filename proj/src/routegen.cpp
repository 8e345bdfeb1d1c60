#include "tndp/routegen.hpp"

#include <algorithm>
#include <map>
#include <random>
#include <set>
#include <tuple>

#include "tndp/error.hpp"

namespace tndp {

std::vector<double> stop_busyness(const RoadGraph& road, const ZoneGrid& grid, const DemandMatrix& demand) {
  const auto activity = demand.zone_activity();
  std::vector<double> out(road.node_count(), 0.0);
  for (StopId s : road.stops()) {
    auto it = activity.find(grid.zone_of(road.node(s).pos));
    if (it != activity.end()) out[s.index()] = it->second;
  }
  return out;
}

std::vector<StopId> stops_on_path(const RoadGraph& road, const RoadPath& path) {
  std::vector<StopId> out;
  for (NodeId n : path.nodes)
    if (road.is_stop(n)) out.push_back(n);
  return out;
}

namespace {

bool simple(const std::vector<StopId>& stops) {
  std::set<StopId> seen(stops.begin(), stops.end());
  return seen.size() == stops.size();
}

}  // namespace

std::vector<Route> gen_hub_connectors(const RoadGraph& road, const std::vector<double>& busyness,
                                      int top_k, int max_pairs, const NetworkBounds& bounds,
                                      HubConnectorReport* report) {
  if (top_k < 2) throw ConfigError("hub connectors need top_k >= 2");
  std::vector<StopId> ranked = road.stops();
  auto busy = [&](StopId s) { return s.index() < busyness.size() ? busyness[s.index()] : 0.0; };
  std::stable_sort(ranked.begin(), ranked.end(), [&](StopId a, StopId b) { return busy(a) > busy(b); });
  if (ranked.size() > static_cast<std::size_t>(top_k)) ranked.resize(static_cast<std::size_t>(top_k));

  // (combined busyness desc, rank of first, rank of second)
  std::vector<std::tuple<double, std::size_t, std::size_t>> pairs;
  for (std::size_t i = 0; i < ranked.size(); ++i)
    for (std::size_t j = i + 1; j < ranked.size(); ++j) pairs.emplace_back(-(busy(ranked[i]) + busy(ranked[j])), i, j);
  std::sort(pairs.begin(), pairs.end());
  if (max_pairs >= 0 && pairs.size() > static_cast<std::size_t>(max_pairs)) pairs.resize(static_cast<std::size_t>(max_pairs));

  HubConnectorReport rep;
  rep.pairs_considered = pairs.size();
  std::map<std::size_t, ShortestPathTree> trees;
  std::vector<Route> out;
  for (const auto& [neg, i, j] : pairs) {
    auto it = trees.find(i);
    if (it == trees.end()) it = trees.emplace(i, ShortestPathTree(road, ranked[i])).first;
    const auto path = it->second.path_to(ranked[j]);
    if (!path) {
      ++rep.unreachable;
      continue;
    }
    auto stops = stops_on_path(road, *path);
    if (stops.size() < 2 || !simple(stops)) continue;
    Route r = measure_route(road, RouteId{static_cast<std::int32_t>(out.size())}, RouteKind::kHubConnector,
                            std::move(stops));
    if (!bounds.route_len_ok(r.length_m)) {
      ++rep.out_of_bounds;
      continue;
    }
    out.push_back(std::move(r));
  }
  if (report) *report = rep;
  return out;
}

std::vector<Route> gen_hub_connectors(const RoadGraph& road, const ZoneGrid& grid,
                                      const DemandMatrix& demand, int top_k, int max_pairs,
                                      const NetworkBounds& bounds, HubConnectorReport* report) {
  return gen_hub_connectors(road, stop_busyness(road, grid, demand), top_k, max_pairs, bounds, report);
}

std::vector<Route> gen_traversal(const RoadGraph& road, int n, double min_len_m, std::uint64_t seed,
                                 double max_len_m, TraversalReport* report, double min_span) {
  if (n < 0) throw ConfigError("traversal route count must be non-negative");
  if (!(min_span >= 0.0 && min_span <= 1.0)) throw ConfigError("traversal span fraction must lie in [0, 1]");
  TraversalReport rep;
  rep.requested = static_cast<std::size_t>(n);
  std::vector<Route> out;
  const auto stops = road.stops();
  if (n == 0 || stops.size() < 2) {
    rep.shortfall = rep.requested;
    if (report) *report = rep;
    return out;
  }

  BoundingBox box{road.node(stops[0]).pos.lat, road.node(stops[0]).pos.lat, road.node(stops[0]).pos.lon,
                  road.node(stops[0]).pos.lon};
  for (StopId s : stops) box.expand(road.node(s).pos);
  // Outer thirds along latitude (axis 0) and longitude (axis 1).
  std::vector<StopId> low[2], high[2];
  for (StopId s : stops) {
    const LatLon p = road.node(s).pos;
    const double f0 = box.max_lat > box.min_lat ? (p.lat - box.min_lat) / (box.max_lat - box.min_lat) : 0.5;
    const double f1 = box.max_lon > box.min_lon ? (p.lon - box.min_lon) / (box.max_lon - box.min_lon) : 0.5;
    if (f0 <= 1.0 / 3.0) low[0].push_back(s);
    if (f0 >= 2.0 / 3.0) high[0].push_back(s);
    if (f1 <= 1.0 / 3.0) low[1].push_back(s);
    if (f1 >= 2.0 / 3.0) high[1].push_back(s);
  }

  std::mt19937_64 rng(seed);
  std::set<std::vector<StopId>> seen;
  const int max_tries = 50 * n;
  for (int tries = 0; tries < max_tries && out.size() < static_cast<std::size_t>(n); ++tries) {
    const int axis = static_cast<int>(rng() % 2);
    if (low[axis].empty() || high[axis].empty()) continue;
    StopId a = low[axis][rng() % low[axis].size()];
    StopId b = high[axis][rng() % high[axis].size()];
    if (rng() % 2) std::swap(a, b);
    const auto path = shortest_time_path(road, a, b);
    if (!path) continue;
    auto route_stops = stops_on_path(road, *path);
    if (route_stops.size() < 2 || !simple(route_stops) || seen.contains(route_stops)) continue;
    Route r = measure_route(road, RouteId{static_cast<std::int32_t>(out.size())}, RouteKind::kTraversal,
                            route_stops);
    if (r.length_m < min_len_m || r.length_m > max_len_m) continue;
    const LatLon first = road.node(r.stops.front()).pos;
    BoundingBox extent{first.lat, first.lat, first.lon, first.lon};
    for (StopId s : r.stops) extent.expand(road.node(s).pos);
    if (extent.diagonal_m() < min_span * box.diagonal_m()) continue;
    seen.insert(std::move(route_stops));
    out.push_back(std::move(r));
  }
  rep.produced = out.size();
  rep.shortfall = rep.requested - rep.produced;
  if (report) *report = rep;
  return out;
}

RoutePool make_route_pool(const RoadGraph& road, const ZoneGrid& grid, const DemandMatrix& demand,
                          std::vector<Route> originals, const NetworkBounds& bounds,
                          const PoolOptions& options, PoolReport* report) {
  PoolReport rep;
  auto busy = stop_busyness(road, grid, demand);
  auto hubs = options.top_k >= 2
                  ? gen_hub_connectors(road, busy, options.top_k, options.max_pairs, bounds, &rep.hubs)
                  : std::vector<Route>{};
  auto trav = gen_traversal(road, options.traversal, std::max(options.traversal_min_len_m, bounds.min_route_len_m),
                            options.seed, bounds.max_route_len_m, &rep.traversal, options.traversal_min_span);
  std::vector<Route> all = std::move(originals);
  for (auto& r : hubs) all.push_back(std::move(r));
  for (auto& r : trav) all.push_back(std::move(r));
  RoutePool pool = build_pool(std::move(all), bounds, std::move(busy), &rep.build);
  if (report) *report = rep;
  return pool;
}

}  // namespace tndp
