#pragma once

// Test-only generators and oracles. The oracles deliberately share no code
// with the library beyond plain data types.

#include <algorithm>
#include <array>
#include <cmath>
#include <filesystem>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include <unistd.h>

#include "tndp/evaluation.hpp"
#include "tndp/io.hpp"
#include "tndp/objectives.hpp"
#include "tndp/preprocessing.hpp"
#include "tndp/road_graph.hpp"
#include "tndp/transit_graph.hpp"

namespace tndp::test {

namespace fs = std::filesystem;

inline fs::path fixture(const std::string& rel) { return fs::path(TNDP_FIXTURE_DIR) / rel; }

class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static int counter = 0;
    path_ = fs::temp_directory_path() / ("tndp-" + tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  const fs::path& path() const { return path_; }
  fs::path operator/(const std::string& s) const { return path_ / s; }

 private:
  fs::path path_;
};

// Small planar helper: positions in meters east/north of a fixed origin.
inline LatLon at_m(double east, double north) {
  constexpr double kLat0 = 38.7;
  constexpr double kLon0 = -9.2;
  constexpr double kR = 6371008.8;
  const double pi = std::acos(-1.0);
  return {kLat0 + north / kR * 180.0 / pi, kLon0 + east / (kR * std::cos(kLat0 * pi / 180.0)) * 180.0 / pi};
}

struct GraphSpec {
  std::vector<std::pair<LatLon, bool>> nodes;  // position, is_stop
  std::vector<std::tuple<int, int, double, double>> edges;  // u, v, length, time

  int add(LatLon p, bool stop = true) {
    nodes.emplace_back(p, stop);
    return static_cast<int>(nodes.size()) - 1;
  }
  void edge(int u, int v, double len, double time) { edges.emplace_back(u, v, len, time); }
  void both(int u, int v, double len, double time) {
    edge(u, v, len, time);
    edge(v, u, len, time);
  }
  RoadGraph build() const {
    std::vector<RoadNode> n;
    for (std::size_t i = 0; i < nodes.size(); ++i) n.push_back({NodeId{static_cast<int>(i)}, nodes[i].first, nodes[i].second});
    std::vector<RoadEdge> e;
    for (auto [u, v, l, t] : edges) e.push_back({NodeId{u}, NodeId{v}, l, t});
    return RoadGraph(std::move(n), std::move(e));
  }
};

// 15-stop lattice city with four bus routes, a two-station metro line and
// walking links 7<->S0 and 12<->S1.
struct Mandl {
  RoadGraph road;
  MetroNetwork metro;
  std::vector<Route> routes;
  RoutePool pool;
  WalkNetwork walk;

  static Mandl load() {
    Mandl m;
    m.road = io::read_road(fixture("mandl15/nodes.csv"), fixture("mandl15/edges.csv"));
    m.metro = io::metro_from_json(io::read_json(fixture("mandl15/metro.json")));
    m.routes = io::routes_from_json(io::read_json(fixture("mandl15/routes.json")), m.road);
    m.pool = RoutePool(m.routes);
    m.walk = WalkNetwork::build(m.road, m.metro);
    return m;
  }
  BusNetwork all() const { return BusNetwork::from(pool.mutable_ids()); }
};

// Seeded small multimodal city: stops on a jittered plane joined by k-nearest
// streets, random bus routes, one metro line whose stations sit next to stops.
struct RandomCity {
  RoadGraph road;
  RoutePool pool;
  MetroNetwork metro;
  WalkNetwork walk;
  ZoneGrid grid;
  DemandMatrix demand;
};

inline RandomCity random_city(std::uint64_t seed, int n_stops, int n_routes = 5, int grid = 4) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> coord(0.0, 4000.0);
  GraphSpec g;
  std::vector<std::pair<double, double>> xy;
  for (int i = 0; i < n_stops; ++i) {
    xy.emplace_back(coord(rng), coord(rng));
    g.add(at_m(xy.back().first, xy.back().second));
  }
  std::set<std::pair<int, int>> linked;
  auto link = [&](int a, int b) {
    if (a == b || linked.contains({std::min(a, b), std::max(a, b)})) return;
    linked.insert({std::min(a, b), std::max(a, b)});
    const double len = std::round(haversine_m(g.nodes[static_cast<std::size_t>(a)].first,
                                              g.nodes[static_cast<std::size_t>(b)].first) * 1.2) + 1.0;
    g.both(a, b, len, travel_time_s(len, 20.0));
  };
  for (int i = 0; i < n_stops; ++i) {
    std::vector<std::pair<double, int>> near;
    for (int j = 0; j < n_stops; ++j)
      if (j != i) near.emplace_back(std::hypot(xy[i].first - xy[j].first, xy[i].second - xy[j].second), j);
    std::sort(near.begin(), near.end());
    for (std::size_t k = 0; k < std::min<std::size_t>(2, near.size()); ++k) link(i, near[k].second);
    if (i > 0) link(i - 1, i);  // keeps the graph connected
  }
  RandomCity c;
  c.road = g.build();

  std::vector<Route> routes;
  std::uniform_int_distribution<int> pick(0, n_stops - 1);
  std::uniform_int_distribution<int> len(2, 5);
  while (static_cast<int>(routes.size()) < n_routes) {
    std::vector<StopId> stops;
    std::set<int> used;
    const int want = len(rng);
    while (static_cast<int>(stops.size()) < want) {
      const int s = pick(rng);
      if (used.insert(s).second) stops.push_back(NodeId{s});
    }
    routes.push_back(measure_route(c.road, RouteId{static_cast<int>(routes.size())}, RouteKind::kOriginal, stops));
  }
  c.pool = RoutePool(std::move(routes));

  std::uniform_real_distribution<double> jitter(-150.0, 150.0);
  const int a = pick(rng);
  int b = pick(rng);
  while (b == a) b = pick(rng);
  for (int s : {a, b}) {
    const std::int32_t id = static_cast<std::int32_t>(c.metro.stations.size());
    c.metro.stations.push_back({StationId{id}, at_m(xy[static_cast<std::size_t>(s)].first + jitter(rng),
                                                    xy[static_cast<std::size_t>(s)].second + jitter(rng)),
                                "s" + std::to_string(id)});
  }
  const double mlen = haversine_m(c.metro.stations[0].pos, c.metro.stations[1].pos) + 1.0;
  c.metro.edges = {{StationId{0}, StationId{1}, "m", mlen}, {StationId{1}, StationId{0}, "m", mlen}};
  c.walk = WalkNetwork::build(c.road, c.metro);
  c.grid = build_grid(c.road, c.metro, grid, grid);

  std::uniform_real_distribution<double> q(0.0, 50.0);
  std::set<ZoneId> zones;
  for (const auto& n : c.road.nodes()) zones.insert(c.grid.zone_of(n.pos));
  for (const auto& st : c.metro.stations) zones.insert(c.grid.zone_of(st.pos));
  for (ZoneId s : zones)
    for (ZoneId t : zones)
      if (s != t) c.demand.add(s, t, std::round(q(rng)) + 1.0);
  return c;
}

// ---------------------------------------------------------------- pareto oracles

template <class Vec>
bool brute_dominates(const Vec& a, const Vec& b) {
  bool le = true, lt = false;
  for (std::size_t k = 0; k < a.size(); ++k) {
    le = le && a[k] <= b[k];
    lt = lt || a[k] < b[k];
  }
  return le && lt;
}

// Peel non-dominated layers one at a time, O(M N^2) per layer.
template <class Vec>
std::vector<std::vector<std::size_t>> brute_fronts(const std::vector<Vec>& pts) {
  std::vector<std::vector<std::size_t>> fronts;
  std::vector<bool> taken(pts.size(), false);
  std::size_t left = pts.size();
  while (left > 0) {
    std::vector<std::size_t> f;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      if (taken[i]) continue;
      bool dominated = false;
      for (std::size_t j = 0; j < pts.size() && !dominated; ++j)
        dominated = !taken[j] && j != i && brute_dominates(pts[j], pts[i]);
      if (!dominated) f.push_back(i);
    }
    for (auto i : f) taken[i] = true;
    left -= f.size();
    fronts.push_back(f);
  }
  return fronts;
}

// Crowding distance written straight from the textbook definition.
template <class Vec>
std::vector<double> oracle_crowding(const std::vector<Vec>& front) {
  const std::size_t n = front.size();
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> d(n, 0.0);
  if (n <= 2) return std::vector<double>(n, inf);
  const std::size_t m = front[0].size();
  for (std::size_t k = 0; k < m; ++k) {
    std::vector<std::size_t> idx(n);
    for (std::size_t i = 0; i < n; ++i) idx[i] = i;
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return front[a][k] < front[b][k]; });
    const double lo = front[idx.front()][k];
    const double hi = front[idx.back()][k];
    if (hi == lo) continue;
    d[idx.front()] = inf;
    d[idx.back()] = inf;
    for (std::size_t r = 1; r + 1 < n; ++r) d[idx[r]] += (front[idx[r + 1]][k] - front[idx[r - 1]][k]) / (hi - lo);
  }
  return d;
}

// Exact hypervolume (minimization) by recursive slicing on the last objective.
inline double hypervolume(std::vector<std::vector<double>> pts, const std::vector<double>& ref) {
  const std::size_t d = ref.size();
  std::erase_if(pts, [&](const std::vector<double>& p) {
    for (std::size_t k = 0; k < d; ++k)
      if (!(p[k] < ref[k])) return true;
    return false;
  });
  if (pts.empty()) return 0.0;
  if (d == 1) {
    double best = ref[0];
    for (const auto& p : pts) best = std::min(best, p[0]);
    return ref[0] - best;
  }
  std::sort(pts.begin(), pts.end(), [&](const auto& a, const auto& b) { return a[d - 1] < b[d - 1]; });
  double vol = 0.0;
  std::vector<std::vector<double>> slab;
  const std::vector<double> sub_ref(ref.begin(), ref.end() - 1);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    slab.emplace_back(pts[i].begin(), pts[i].end() - 1);
    const double top = i + 1 < pts.size() ? pts[i + 1][d - 1] : ref[d - 1];
    const double h = top - pts[i][d - 1];
    if (h > 0.0) vol += h * hypervolume(slab, sub_ref);
  }
  return vol;
}

// ---------------------------------------------------------------- routing oracle

// Minimum generalized cost between two zone centroids, found by depth-first
// enumeration of vertex-simple paths in the complete network. Branches are cut
// only when their running cost can no longer improve either minimum tracked
// (edge times are positive) or when they exceed the boarding budget. Stage
// bookkeeping follows the textbook trip definition: a stage is a maximal run of
// one vehicle carrier, every walk edge is a stage. The pair is served when the
// cheapest path with a vehicle stage costs no more than the cheapest walk.
inline std::optional<double> oracle_trip_cost(const CompleteNetwork& net, const ZoneAccess& access, ZoneId s, ZoneId t,
                                              double penalty, int max_transfers) {
  const double inf = std::numeric_limits<double>::infinity();
  double best = inf;
  double walk = inf;
  std::vector<std::vector<std::size_t>> out(net.vertex_count());
  for (std::size_t k = 0; k < net.edges().size(); ++k) out[static_cast<std::size_t>(net.edges()[k].from)].push_back(k);
  std::map<std::int32_t, double> egress;
  for (const auto& l : access.of(t)) {
    auto it = egress.find(l.vertex);
    if (it == egress.end() || l.time_s < it->second) egress[l.vertex] = l.time_s;
  }
  std::vector<bool> on_path(net.vertex_count(), false);

  struct Frame {
    std::int32_t v;
    double cost;
    int stages;
    int boardings;
    std::optional<Carrier> last;  // nullopt: no stage yet
  };
  std::function<void(const Frame&)> dfs = [&](const Frame& f) {
    if (f.cost >= best && (f.boardings > 0 || f.cost >= walk)) return;
    if (auto it = egress.find(f.v); it != egress.end()) {
      double& slot = f.boardings >= 1 ? best : walk;
      if (f.stages > 0 || f.boardings >= 1) slot = std::min(slot, f.cost + it->second);
    }
    for (auto k : out[static_cast<std::size_t>(f.v)]) {
      const auto& e = net.edges()[k];
      if (on_path[static_cast<std::size_t>(e.to)]) continue;
      Frame g{e.to, f.cost + e.time_s, f.stages, f.boardings, e.carrier};
      const bool continues = f.last && e.carrier.vehicle() && *f.last == e.carrier;
      if (!continues) {
        if (g.stages > 0) g.cost += penalty;
        ++g.stages;
        if (e.carrier.vehicle()) ++g.boardings;
      }
      if (g.boardings > max_transfers + 1) continue;
      on_path[static_cast<std::size_t>(e.to)] = true;
      dfs(g);
      on_path[static_cast<std::size_t>(e.to)] = false;
    }
  };
  for (const auto& l : access.of(s)) {
    on_path[static_cast<std::size_t>(l.vertex)] = true;
    dfs({l.vertex, l.time_s, 0, 0, std::nullopt});
    on_path[static_cast<std::size_t>(l.vertex)] = false;
  }
  if (best == inf || walk < best) return std::nullopt;
  return best;
}

}  // namespace tndp::test
