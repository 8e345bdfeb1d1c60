#pragma once

#include <cstdint>
#include <map>
#include <utility>
#include <vector>

#include "tndp/geo.hpp"
#include "tndp/ids.hpp"
#include "tndp/road_graph.hpp"
#include "tndp/transit_graph.hpp"

namespace tndp {

inline constexpr double kClusterThresholdM = 100.0;
inline constexpr int kGridSize = 30;

// Raw stop -> cluster representative. Representatives map to themselves.
struct ClusterMap {
  std::map<StopId, StopId> representative;
  // Merges in the order they were applied: (u, v) means edge u->v joined u's
  // cluster into v's.
  std::vector<std::pair<StopId, StopId>> merges;

  StopId operator()(StopId raw) const;
  std::vector<StopId> members(StopId rep) const;
};

struct ClusterResult {
  RoadGraph road;
  ClusterMap map;
};

// Joins stops u and v when the road edge (u, v) exists, is shorter than
// `threshold_m` and v has in-degree one; applied transitively, cheapest edges
// first. The downstream stop of each merge represents the cluster. Merged stops
// stay in the graph as plain junctions so node ids and road geometry are kept.
ClusterResult cluster_stops(const RoadGraph& road, double threshold_m = kClusterThresholdM);

// Rewrites a route onto cluster representatives, collapsing consecutive repeats.
std::vector<StopId> remap_stops(const std::vector<StopId>& stops, const ClusterMap& map);

struct BoundingBox {
  double min_lat{0.0};
  double max_lat{0.0};
  double min_lon{0.0};
  double max_lon{0.0};

  void expand(LatLon p);
  double diagonal_m() const { return haversine_m({min_lat, min_lon}, {max_lat, max_lon}); }
};

// Uniform rows x cols partition of a bounding box into origin/destination zones.
class ZoneGrid {
 public:
  ZoneGrid() = default;
  ZoneGrid(BoundingBox box, int rows, int cols);

  const BoundingBox& box() const { return box_; }
  int rows() const { return rows_; }
  int cols() const { return cols_; }
  std::size_t zone_count() const { return static_cast<std::size_t>(rows_) * static_cast<std::size_t>(cols_); }
  // Row-major: zone = row * cols + col, row 0 at min latitude. Points on the
  // max edge fall in the last row/column; points outside are clamped.
  ZoneId zone_of(LatLon p) const;
  LatLon centroid(ZoneId z) const;

 private:
  BoundingBox box_;
  int rows_{1};
  int cols_{1};
};

// Bounding box over all stops of `road` and all stations of `metro`.
// Throws ConfigError when rows/cols < 1, DataError when there is no stop.
ZoneGrid build_grid(const RoadGraph& road, const MetroNetwork& metro, int rows = kGridSize,
                    int cols = kGridSize);
ZoneGrid build_grid(const RoadGraph& road, int rows = kGridSize, int cols = kGridSize);

// Passengers per day between zones.
class DemandMatrix {
 public:
  using Pair = std::pair<ZoneId, ZoneId>;

  void add(ZoneId origin, ZoneId dest, double passengers);
  double at(ZoneId origin, ZoneId dest) const;
  const std::map<Pair, double>& entries() const { return entries_; }
  double total() const;
  // Total over pairs with distinct zones: the set the objectives range over.
  double total_between_zones() const;
  // Demand originating plus terminating in each zone.
  std::map<ZoneId, double> zone_activity() const;
  bool empty() const { return entries_.empty(); }

 private:
  std::map<Pair, double> entries_;
};

struct SyntheticCity {
  RoadGraph road;
  MetroNetwork metro;
  DemandMatrix demand;
  ZoneGrid grid;
  // Baseline bus routes (both directions of each line) plus fixed tram routes.
  std::vector<Route> routes;
};

struct SynthOptions {
  std::uint64_t seed{1};
  int n_junctions{200};
  int n_stops{60};
  int grid{kGridSize};
  double side_m{8000.0};
  double bus_speed_kmh{20.0};
  int bus_lines{8};
  int tram_lines{1};
  int metro_lines{2};
  int metro_stations_per_line{5};
  double total_trips{100000.0};
};

// Deterministic desk-scale city: connected road graph (k-nearest-neighbour
// streets), a metro, gravity demand, and a baseline bus network.
// Throws ConfigError on n_stops < 1 or n_stops > n_junctions and DataError
// when no connected graph is produced within a bounded number of attempts.
SyntheticCity synth_city(const SynthOptions& options);
SyntheticCity synth_city(std::uint64_t seed, int n_junctions, int n_stops, int grid = kGridSize);

}  // namespace tndp
