#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "tndp/geo.hpp"
#include "tndp/ids.hpp"
#include "tndp/road_graph.hpp"

namespace tndp {

inline constexpr double kMetroSpeedKmh = 60.0;
inline constexpr double kWalkSpeedKmh = 5.0;
inline constexpr double kMaxWalkM = 300.0;

enum class RouteKind { kOriginal, kHubConnector, kTraversal, kTramFixed };

std::string to_string(RouteKind kind);
RouteKind route_kind_from_string(const std::string& s);

// A bus (or tram) route: an ordered sequence of stops served in that order.
struct Route {
  RouteId id;
  RouteKind kind{RouteKind::kOriginal};
  std::vector<StopId> stops;
  // Sum of optimal road-path lengths between consecutive stops.
  double length_m{0.0};
  std::vector<double> leg_times_s;

  bool fixed() const { return kind == RouteKind::kTramFixed; }
};

// Measures `stops` on the road graph: per-leg time-optimal path length and time.
// Throws UnreachableError naming the first unreachable consecutive pair, and
// DataError when a stop is not a stop node or consecutive stops repeat.
Route measure_route(const RoadGraph& road, RouteId id, RouteKind kind, std::vector<StopId> stops);

double route_length(const Route& route, const RoadGraph& road);

// Bounds of the constrained design problem.
struct NetworkBounds {
  std::size_t min_routes{200};
  std::size_t max_routes{400};
  double min_route_len_m{0.0};
  double max_route_len_m{1e12};

  bool route_len_ok(double length_m) const {
    return length_m >= min_route_len_m && length_m <= max_route_len_m;
  }
};

// Indexed set of candidate routes. routes()[i].id == RouteId{i}.
class RoutePool {
 public:
  RoutePool() = default;
  // Routes are re-numbered densely in the given order. Throws DataError on
  // duplicate ids in input or when a non-fixed route violates length bounds.
  explicit RoutePool(std::vector<Route> routes, std::vector<double> stop_busyness = {});

  std::size_t size() const { return routes_.size(); }
  const std::vector<Route>& routes() const { return routes_; }
  const Route& route(RouteId id) const;
  bool contains(RouteId id) const { return id.valid() && id.index() < routes_.size(); }
  // Routes available to the optimizer (everything except fixed tram routes).
  const std::vector<RouteId>& mutable_ids() const { return mutable_ids_; }
  const std::vector<RouteId>& fixed_ids() const { return fixed_ids_; }
  const std::vector<double>& stop_busyness() const { return stop_busyness_; }

 private:
  std::vector<Route> routes_;
  std::vector<RouteId> mutable_ids_;
  std::vector<RouteId> fixed_ids_;
  std::vector<double> stop_busyness_;
};

// Keeps fixed routes and those non-fixed routes within length bounds; drops
// routes whose stop sequence duplicates an earlier one. Re-numbers densely.
struct PoolBuildReport {
  std::size_t dropped_length{0};
  std::size_t dropped_duplicate{0};
};
RoutePool build_pool(std::vector<Route> routes, const NetworkBounds& bounds,
                     std::vector<double> stop_busyness = {}, PoolBuildReport* report = nullptr);

// A candidate solution: the non-fixed routes it selects. Fixed routes are
// implied. Kept sorted and unique.
struct BusNetwork {
  std::vector<RouteId> routes;

  static BusNetwork from(std::vector<RouteId> ids);
  bool contains(RouteId id) const;
  std::size_t size() const { return routes.size(); }
  friend bool operator==(const BusNetwork&, const BusNetwork&) = default;
  friend auto operator<=>(const BusNetwork&, const BusNetwork&) = default;
};

// Checks route count bounds, duplicate ids, pool membership, non-fixedness and
// per-route length bounds. Returns a description of the first violation.
std::optional<std::string> check_network(const BusNetwork& net, const RoutePool& pool,
                                         const NetworkBounds& bounds);

struct Station {
  StationId id;
  LatLon pos;
  std::string name;
};

struct MetroEdge {
  StationId u;
  StationId v;
  std::string line;
  double length_m{0.0};

  double time_s() const { return travel_time_s(length_m, kMetroSpeedKmh); }
};

struct MetroNetwork {
  std::vector<Station> stations;
  std::vector<MetroEdge> edges;

  void validate() const;
  std::vector<std::string> lines() const;
};

// Endpoint of a walking edge: a bus stop or a metro station.
struct Place {
  enum class Kind { kStop, kStation };
  Kind kind{Kind::kStop};
  std::int32_t id{-1};

  static Place stop(StopId s) { return {Kind::kStop, s.v}; }
  static Place station(StationId s) { return {Kind::kStation, s.v}; }
  friend auto operator<=>(const Place&, const Place&) = default;
};

struct WalkEdge {
  Place from;
  Place to;
  double length_m{0.0};

  double time_s() const { return travel_time_s(length_m, kWalkSpeedKmh); }
};

struct WalkNetwork {
  std::vector<WalkEdge> edges;

  // Straight-line walks between every pair of stops/stations at most
  // `max_walk_m` apart, in both directions.
  static WalkNetwork build(const RoadGraph& road, const MetroNetwork& metro,
                           double max_walk_m = kMaxWalkM);
  void validate(double max_walk_m = kMaxWalkM) const;
};

// Stops and stations that can appear in any complete network, densely indexed.
// Stops come first in NodeId order, then all stations.
class PlaceIndex {
 public:
  static PlaceIndex build(const RoutePool& pool, const MetroNetwork& metro, const WalkNetwork& walk);

  std::size_t size() const { return places_.size(); }
  const std::vector<Place>& places() const { return places_; }
  std::int32_t vertex_of(Place p) const;
  Place place(std::int32_t vertex) const { return places_[static_cast<std::size_t>(vertex)]; }

 private:
  std::vector<Place> places_;
  std::vector<std::int32_t> stop_vertex_;
  std::int32_t station_base_{0};
  std::size_t station_count_{0};
};

enum class CarrierKind { kBus, kMetro, kWalk };

struct Carrier {
  CarrierKind kind{CarrierKind::kWalk};
  // Route id for buses, line index (into MetroNetwork::lines()) for metro, -1 for walks.
  std::int32_t id{-1};

  bool vehicle() const { return kind != CarrierKind::kWalk; }
  friend auto operator<=>(const Carrier&, const Carrier&) = default;
};

std::string to_string(const Carrier& c, const std::vector<std::string>& lines = {});

struct CompleteEdge {
  std::int32_t from{-1};
  std::int32_t to{-1};
  Carrier carrier;
  double time_s{0.0};
};

// Time-weighted multimodal multigraph for one candidate network.
class CompleteNetwork {
 public:
  CompleteNetwork(PlaceIndex places, std::vector<CompleteEdge> edges, std::vector<std::string> lines);

  const PlaceIndex& places() const { return places_; }
  std::size_t vertex_count() const { return places_.size(); }
  const std::vector<CompleteEdge>& edges() const { return edges_; }
  std::span<const std::size_t> out_edges(std::int32_t vertex) const;
  const std::vector<std::string>& lines() const { return lines_; }

 private:
  PlaceIndex places_;
  std::vector<CompleteEdge> edges_;
  std::vector<std::string> lines_;
  std::vector<std::size_t> out_offsets_;
  std::vector<std::size_t> out_index_;
};

// Bus edges of every selected and fixed route (ascending route id), then metro
// edges as listed (each is directed), then walking edges. Throws
// UnknownRouteError when `bus` references a route not in `pool`.
CompleteNetwork assemble_complete(const BusNetwork& bus, const MetroNetwork& metro,
                                  const WalkNetwork& walk, const RoutePool& pool);
CompleteNetwork assemble_complete(const BusNetwork& bus, const MetroNetwork& metro,
                                  const WalkNetwork& walk, const RoutePool& pool,
                                  const PlaceIndex& places);

}  // namespace tndp
