#include <algorithm>
#include <cmath>
#include <numeric>
#include <queue>
#include <random>
#include <string>

#include "tndp/error.hpp"
#include "tndp/preprocessing.hpp"

namespace tndp {

namespace {

constexpr LatLon kOrigin{38.70, -9.20};
constexpr int kMaxAttempts = 16;
constexpr int kStreetNeighbours = 4;

bool connected(const RoadGraph& road) {
  if (road.node_count() == 0) return true;
  std::vector<bool> seen(road.node_count(), false);
  std::queue<NodeId> q;
  q.push(NodeId{0});
  seen[0] = true;
  std::size_t count = 1;
  while (!q.empty()) {
    const NodeId u = q.front();
    q.pop();
    for (std::size_t k : road.out_edges(u)) {
      const NodeId v = road.edges()[k].v;
      if (!seen[v.index()]) {
        seen[v.index()] = true;
        ++count;
        q.push(v);
      }
    }
  }
  return count == road.node_count();
}

RoadGraph make_streets(const SynthOptions& o, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> coord(0.0, o.side_m);
  std::vector<PlanarXY> xy(static_cast<std::size_t>(o.n_junctions));
  for (auto& p : xy) p = {coord(rng), coord(rng)};

  std::vector<RoadNode> nodes;
  for (std::size_t i = 0; i < xy.size(); ++i) {
    nodes.push_back({NodeId{static_cast<std::int32_t>(i)}, from_planar(kOrigin, xy[i]), false});
  }
  std::vector<std::size_t> order(xy.size());
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  for (int k = 0; k < o.n_stops; ++k) nodes[order[static_cast<std::size_t>(k)]].is_stop = true;

  // Undirected street set from k nearest neighbours, emitted in both directions.
  std::vector<std::pair<std::size_t, std::size_t>> streets;
  for (std::size_t i = 0; i < xy.size(); ++i) {
    std::vector<std::pair<double, std::size_t>> near;
    for (std::size_t j = 0; j < xy.size(); ++j) {
      if (j == i) continue;
      near.emplace_back(std::hypot(xy[i].x - xy[j].x, xy[i].y - xy[j].y), j);
    }
    const auto k = std::min<std::size_t>(kStreetNeighbours, near.size());
    std::partial_sort(near.begin(), near.begin() + static_cast<std::ptrdiff_t>(k), near.end());
    for (std::size_t n = 0; n < k; ++n) streets.emplace_back(std::min(i, near[n].second), std::max(i, near[n].second));
  }
  std::sort(streets.begin(), streets.end());
  streets.erase(std::unique(streets.begin(), streets.end()), streets.end());

  std::vector<RoadEdge> edges;
  for (auto [a, b] : streets) {
    const double len = std::max(1.0, haversine_m(nodes[a].pos, nodes[b].pos));
    const double t = travel_time_s(len, o.bus_speed_kmh);
    edges.push_back({NodeId{static_cast<std::int32_t>(a)}, NodeId{static_cast<std::int32_t>(b)}, len, t});
    edges.push_back({NodeId{static_cast<std::int32_t>(b)}, NodeId{static_cast<std::int32_t>(a)}, len, t});
  }
  return RoadGraph(std::move(nodes), std::move(edges));
}

MetroNetwork make_metro(const SynthOptions& o, std::mt19937_64& rng) {
  static const char* kLines[] = {"blue", "orange", "green", "red", "yellow", "purple"};
  std::uniform_real_distribution<double> jitter(-0.03 * o.side_m, 0.03 * o.side_m);
  MetroNetwork m;
  const int n = std::max(2, o.metro_stations_per_line);
  for (int line = 0; line < o.metro_lines; ++line) {
    // Lines run corner to corner, alternating diagonals, shifted inward.
    const double inset = 0.15 * o.side_m + 0.05 * o.side_m * (line / 2);
    PlanarXY a{inset, inset};
    PlanarXY b{o.side_m - inset, o.side_m - inset};
    if (line % 2 == 1) std::swap(a.y, b.y);
    std::int32_t prev = -1;
    for (int s = 0; s < n; ++s) {
      const double f = static_cast<double>(s) / (n - 1);
      PlanarXY p{a.x + f * (b.x - a.x) + jitter(rng), a.y + f * (b.y - a.y) + jitter(rng)};
      const StationId id{static_cast<std::int32_t>(m.stations.size())};
      const std::string label = kLines[line % 6];
      m.stations.push_back({id, from_planar(kOrigin, p), label + "-" + std::to_string(s)});
      if (prev >= 0) {
        const StationId u{prev};
        const double len = haversine_m(m.stations[u.index()].pos, m.stations[id.index()].pos);
        m.edges.push_back({u, id, label, len});
        m.edges.push_back({id, u, label, len});
      }
      prev = id.v;
    }
  }
  return m;
}

DemandMatrix make_demand(const SynthOptions& o, const RoadGraph& road, const MetroNetwork& metro,
                         const ZoneGrid& grid, std::mt19937_64& rng) {
  std::lognormal_distribution<double> pop(0.0, 0.6);
  std::map<ZoneId, double> zone_pop;
  for (StopId s : road.stops()) zone_pop[grid.zone_of(road.node(s).pos)] += 1000.0 * pop(rng);
  for (const auto& st : metro.stations) zone_pop[grid.zone_of(st.pos)] += 2000.0 * pop(rng);

  std::vector<std::pair<DemandMatrix::Pair, double>> raw;
  double sum = 0.0;
  for (const auto& [s, ps] : zone_pop) {
    for (const auto& [t, pt] : zone_pop) {
      if (s == t) continue;
      const double d = std::max(500.0, haversine_m(grid.centroid(s), grid.centroid(t)));
      const double g = ps * pt / d;
      raw.push_back({{s, t}, g});
      sum += g;
    }
  }
  DemandMatrix demand;
  for (const auto& [k, g] : raw) {
    const double q = std::round(g / sum * o.total_trips * 100.0) / 100.0;
    if (q > 0.0) demand.add(k.first, k.second, q);
  }
  return demand;
}

std::vector<StopId> stops_along(const RoadGraph& road, const RoadPath& path) {
  std::vector<StopId> out;
  for (NodeId n : path.nodes)
    if (road.is_stop(n)) out.push_back(n);
  return out;
}

std::vector<Route> make_lines(const SynthOptions& o, const RoadGraph& road, std::mt19937_64& rng) {
  const auto stops = road.stops();
  std::vector<Route> routes;
  if (stops.size() < 2) return routes;
  std::uniform_int_distribution<std::size_t> pick(0, stops.size() - 1);
  const int total = o.bus_lines + o.tram_lines;
  for (int line = 0, tries = 0; line < total && tries < 100 * total; ++tries) {
    const StopId a = stops[pick(rng)];
    const StopId b = stops[pick(rng)];
    if (a == b || haversine_m(road.node(a).pos, road.node(b).pos) < 0.4 * o.side_m) continue;
    const auto fwd = shortest_time_path(road, a, b);
    const auto back = shortest_time_path(road, b, a);
    if (!fwd || !back) continue;
    auto s1 = stops_along(road, *fwd);
    auto s2 = stops_along(road, *back);
    if (s1.size() < 3 || s2.size() < 3) continue;
    const RouteKind kind = line < o.bus_lines ? RouteKind::kOriginal : RouteKind::kTramFixed;
    for (auto* s : {&s1, &s2}) {
      routes.push_back(measure_route(road, RouteId{static_cast<std::int32_t>(routes.size())}, kind, *s));
    }
    ++line;
  }
  return routes;
}

}  // namespace

SyntheticCity synth_city(const SynthOptions& o) {
  if (o.n_stops < 1) throw ConfigError("synthetic city needs at least one stop");
  if (o.n_stops > o.n_junctions) throw ConfigError("synthetic city cannot have more stops than junctions");
  if (o.grid < 1) throw ConfigError("synthetic city grid must be at least 1");

  for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
    std::mt19937_64 rng(o.seed * 0x9E3779B97F4A7C15ULL + static_cast<std::uint64_t>(attempt));
    RoadGraph road = make_streets(o, rng);
    if (!connected(road)) continue;
    SyntheticCity city;
    city.metro = make_metro(o, rng);
    city.grid = build_grid(road, city.metro, o.grid, o.grid);
    city.demand = make_demand(o, road, city.metro, city.grid, rng);
    city.routes = make_lines(o, road, rng);
    city.road = std::move(road);
    return city;
  }
  throw DataError("synthetic city generation did not produce a connected road graph after " +
                  std::to_string(kMaxAttempts) + " attempts");
}

SyntheticCity synth_city(std::uint64_t seed, int n_junctions, int n_stops, int grid) {
  SynthOptions o;
  o.seed = seed;
  o.n_junctions = n_junctions;
  o.n_stops = n_stops;
  o.grid = grid;
  return synth_city(o);
}

}  // namespace tndp
