#include "tndp/transit_graph.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "tndp/error.hpp"

namespace tndp {

std::string to_string(RouteKind kind) {
  switch (kind) {
    case RouteKind::kOriginal: return "original";
    case RouteKind::kHubConnector: return "hub_connector";
    case RouteKind::kTraversal: return "traversal";
    case RouteKind::kTramFixed: return "tram_fixed";
  }
  return "original";
}

RouteKind route_kind_from_string(const std::string& s) {
  if (s == "original") return RouteKind::kOriginal;
  if (s == "hub_connector") return RouteKind::kHubConnector;
  if (s == "traversal") return RouteKind::kTraversal;
  if (s == "tram_fixed") return RouteKind::kTramFixed;
  throw DataError("unknown route kind '" + s + "'");
}

Route measure_route(const RoadGraph& road, RouteId id, RouteKind kind, std::vector<StopId> stops) {
  if (stops.size() < 2) {
    throw DataError("route " + std::to_string(id.v) + " needs at least two stops");
  }
  Route r{id, kind, std::move(stops), 0.0, {}};
  for (StopId s : r.stops) {
    if (!road.is_stop(s)) {
      throw DataError("route " + std::to_string(id.v) + " references node " + std::to_string(s.v) +
                      " which is not a stop");
    }
  }
  r.leg_times_s.reserve(r.stops.size() - 1);
  for (std::size_t i = 0; i + 1 < r.stops.size(); ++i) {
    if (r.stops[i] == r.stops[i + 1]) {
      throw DataError("route " + std::to_string(id.v) + " repeats stop " +
                      std::to_string(r.stops[i].v) + " consecutively");
    }
    auto path = shortest_time_path(road, r.stops[i], r.stops[i + 1]);
    if (!path) throw UnreachableError(r.stops[i], r.stops[i + 1]);
    r.length_m += path->length_m;
    r.leg_times_s.push_back(path->time_s);
  }
  return r;
}

double route_length(const Route& route, const RoadGraph& road) {
  return measure_route(road, route.id, route.kind, route.stops).length_m;
}

RoutePool::RoutePool(std::vector<Route> routes, std::vector<double> stop_busyness)
    : routes_(std::move(routes)), stop_busyness_(std::move(stop_busyness)) {
  for (std::size_t i = 0; i < routes_.size(); ++i) {
    auto& r = routes_[i];
    r.id = RouteId{static_cast<std::int32_t>(i)};
    if (r.stops.size() < 2 || r.leg_times_s.size() + 1 != r.stops.size()) {
      throw DataError("route " + std::to_string(i) + " has inconsistent stops/leg times");
    }
    (r.fixed() ? fixed_ids_ : mutable_ids_).push_back(r.id);
  }
}

const Route& RoutePool::route(RouteId id) const {
  if (!contains(id)) throw UnknownRouteError(id);
  return routes_[id.index()];
}

RoutePool build_pool(std::vector<Route> routes, const NetworkBounds& bounds,
                     std::vector<double> stop_busyness, PoolBuildReport* report) {
  PoolBuildReport rep;
  std::set<std::vector<StopId>> seen;
  std::vector<Route> kept;
  for (auto& r : routes) {
    if (!r.fixed() && !bounds.route_len_ok(r.length_m)) {
      ++rep.dropped_length;
      continue;
    }
    if (!seen.insert(r.stops).second) {
      ++rep.dropped_duplicate;
      continue;
    }
    kept.push_back(std::move(r));
  }
  if (report) *report = rep;
  return RoutePool(std::move(kept), std::move(stop_busyness));
}

BusNetwork BusNetwork::from(std::vector<RouteId> ids) {
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  return BusNetwork{std::move(ids)};
}

bool BusNetwork::contains(RouteId id) const {
  return std::binary_search(routes.begin(), routes.end(), id);
}

std::optional<std::string> check_network(const BusNetwork& net, const RoutePool& pool,
                                         const NetworkBounds& bounds) {
  if (net.size() < bounds.min_routes || net.size() > bounds.max_routes) {
    return "route count " + std::to_string(net.size()) + " outside [" +
           std::to_string(bounds.min_routes) + ", " + std::to_string(bounds.max_routes) + "]";
  }
  for (std::size_t i = 0; i < net.routes.size(); ++i) {
    const RouteId id = net.routes[i];
    if (i > 0 && !(net.routes[i - 1] < id)) return "route ids not strictly ascending at " + std::to_string(id.v);
    if (!pool.contains(id)) return "unknown route id " + std::to_string(id.v);
    const auto& r = pool.route(id);
    if (r.fixed()) return "fixed route " + std::to_string(id.v) + " selected explicitly";
    if (!bounds.route_len_ok(r.length_m)) return "route " + std::to_string(id.v) + " length out of bounds";
  }
  return std::nullopt;
}

void MetroNetwork::validate() const {
  for (std::size_t i = 0; i < stations.size(); ++i) {
    if (stations[i].id.v != static_cast<std::int32_t>(i)) throw DataError("metro station ids must be dense");
  }
  for (const auto& e : edges) {
    if (!e.u.valid() || !e.v.valid() || e.u.index() >= stations.size() || e.v.index() >= stations.size()) {
      throw DataError("metro edge references a missing station");
    }
    if (!(e.length_m > 0.0)) throw DataError("metro edge length must be positive");
  }
}

std::vector<std::string> MetroNetwork::lines() const {
  std::set<std::string> s;
  for (const auto& e : edges) s.insert(e.line);
  return {s.begin(), s.end()};
}

WalkNetwork WalkNetwork::build(const RoadGraph& road, const MetroNetwork& metro, double max_walk_m) {
  std::vector<std::pair<Place, LatLon>> pts;
  for (StopId s : road.stops()) pts.emplace_back(Place::stop(s), road.node(s).pos);
  for (const auto& st : metro.stations) pts.emplace_back(Place::station(st.id), st.pos);
  WalkNetwork w;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    for (std::size_t j = i + 1; j < pts.size(); ++j) {
      const double d = haversine_m(pts[i].second, pts[j].second);
      if (d <= max_walk_m) {
        // Co-located places still get a (1 m) walking connection.
        const double len = std::max(d, 1.0);
        w.edges.push_back({pts[i].first, pts[j].first, len});
        w.edges.push_back({pts[j].first, pts[i].first, len});
      }
    }
  }
  return w;
}

void WalkNetwork::validate(double max_walk_m) const {
  std::map<std::pair<Place, Place>, double> seen;
  for (const auto& e : edges) {
    if (e.length_m > max_walk_m) throw DataError("walking edge longer than the walking limit");
    if (!(e.length_m > 0.0)) throw DataError("walking edge length must be positive");
    seen[{e.from, e.to}] = e.length_m;
  }
  for (const auto& [k, len] : seen) {
    if (!seen.contains({k.second, k.first})) throw DataError("walking network must be symmetric");
  }
}

PlaceIndex PlaceIndex::build(const RoutePool& pool, const MetroNetwork& metro, const WalkNetwork& walk) {
  std::set<std::int32_t> stop_ids;
  for (const auto& r : pool.routes())
    for (StopId s : r.stops) stop_ids.insert(s.v);
  for (const auto& e : walk.edges) {
    for (const Place& p : {e.from, e.to})
      if (p.kind == Place::Kind::kStop) stop_ids.insert(p.id);
  }
  PlaceIndex idx;
  const std::int32_t max_stop = stop_ids.empty() ? -1 : *stop_ids.rbegin();
  idx.stop_vertex_.assign(static_cast<std::size_t>(max_stop + 1), -1);
  for (std::int32_t s : stop_ids) {
    idx.stop_vertex_[static_cast<std::size_t>(s)] = static_cast<std::int32_t>(idx.places_.size());
    idx.places_.push_back(Place{Place::Kind::kStop, s});
  }
  idx.station_base_ = static_cast<std::int32_t>(idx.places_.size());
  idx.station_count_ = metro.stations.size();
  for (const auto& st : metro.stations) idx.places_.push_back(Place::station(st.id));
  return idx;
}

std::int32_t PlaceIndex::vertex_of(Place p) const {
  if (p.id < 0) return -1;
  const auto i = static_cast<std::size_t>(p.id);
  if (p.kind == Place::Kind::kStop) return i < stop_vertex_.size() ? stop_vertex_[i] : -1;
  return i < station_count_ ? station_base_ + p.id : -1;
}

std::string to_string(const Carrier& c, const std::vector<std::string>& lines) {
  switch (c.kind) {
    case CarrierKind::kBus: return "route:" + std::to_string(c.id);
    case CarrierKind::kMetro:
      if (c.id >= 0 && static_cast<std::size_t>(c.id) < lines.size()) return "metro:" + lines[static_cast<std::size_t>(c.id)];
      return "metro:" + std::to_string(c.id);
    case CarrierKind::kWalk: return "walk";
  }
  return "walk";
}

CompleteNetwork::CompleteNetwork(PlaceIndex places, std::vector<CompleteEdge> edges,
                                 std::vector<std::string> lines)
    : places_(std::move(places)), edges_(std::move(edges)), lines_(std::move(lines)) {
  const auto n = places_.size();
  out_offsets_.assign(n + 1, 0);
  for (const auto& e : edges_) ++out_offsets_[static_cast<std::size_t>(e.from) + 1];
  for (std::size_t i = 0; i < n; ++i) out_offsets_[i + 1] += out_offsets_[i];
  out_index_.resize(edges_.size());
  std::vector<std::size_t> fill(out_offsets_.begin(), out_offsets_.end() - 1);
  for (std::size_t k = 0; k < edges_.size(); ++k) out_index_[fill[static_cast<std::size_t>(edges_[k].from)]++] = k;
}

std::span<const std::size_t> CompleteNetwork::out_edges(std::int32_t vertex) const {
  const auto v = static_cast<std::size_t>(vertex);
  return {out_index_.data() + out_offsets_[v], out_offsets_[v + 1] - out_offsets_[v]};
}

CompleteNetwork assemble_complete(const BusNetwork& bus, const MetroNetwork& metro,
                                  const WalkNetwork& walk, const RoutePool& pool) {
  return assemble_complete(bus, metro, walk, pool, PlaceIndex::build(pool, metro, walk));
}

CompleteNetwork assemble_complete(const BusNetwork& bus, const MetroNetwork& metro,
                                  const WalkNetwork& walk, const RoutePool& pool,
                                  const PlaceIndex& places) {
  std::vector<RouteId> ids = pool.fixed_ids();
  for (RouteId id : bus.routes) {
    if (!pool.contains(id)) throw UnknownRouteError(id);
    ids.push_back(id);
  }
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());

  std::vector<CompleteEdge> edges;
  for (RouteId id : ids) {
    const auto& r = pool.route(id);
    for (std::size_t i = 0; i + 1 < r.stops.size(); ++i) {
      edges.push_back({places.vertex_of(Place::stop(r.stops[i])),
                       places.vertex_of(Place::stop(r.stops[i + 1])),
                       Carrier{CarrierKind::kBus, id.v}, r.leg_times_s[i]});
    }
  }
  auto lines = metro.lines();
  for (const auto& e : metro.edges) {
    const auto line = static_cast<std::int32_t>(
        std::lower_bound(lines.begin(), lines.end(), e.line) - lines.begin());
    edges.push_back({places.vertex_of(Place::station(e.u)), places.vertex_of(Place::station(e.v)),
                     Carrier{CarrierKind::kMetro, line}, e.time_s()});
  }
  for (const auto& e : walk.edges) {
    edges.push_back({places.vertex_of(e.from), places.vertex_of(e.to), Carrier{}, e.time_s()});
  }
  for (const auto& e : edges) {
    if (e.from < 0 || e.to < 0) throw DataError("complete network edge references an unindexed stop or station");
  }
  return CompleteNetwork(places, std::move(edges), std::move(lines));
}

}  // namespace tndp
