#pragma once

#include <cstdint>
#include <vector>

#include "tndp/preprocessing.hpp"
#include "tndp/road_graph.hpp"
#include "tndp/transit_graph.hpp"

namespace tndp {

// Per road node: total demand originating or terminating in the node's zone
// (zero for non-stops). Indexed by NodeId.
std::vector<double> stop_busyness(const RoadGraph& road, const ZoneGrid& grid, const DemandMatrix& demand);

// Stop nodes along a road path, in order.
std::vector<StopId> stops_on_path(const RoadGraph& road, const RoadPath& path);

struct HubConnectorReport {
  std::size_t pairs_considered{0};
  std::size_t unreachable{0};
  std::size_t out_of_bounds{0};
};

// One route per selected pair of the `top_k` busiest stops, following the
// time-optimal road path from the busier to the less busy stop. Pairs are
// ranked by combined busyness and truncated to `max_pairs`.
std::vector<Route> gen_hub_connectors(const RoadGraph& road, const std::vector<double>& busyness,
                                      int top_k, int max_pairs, const NetworkBounds& bounds,
                                      HubConnectorReport* report = nullptr);
std::vector<Route> gen_hub_connectors(const RoadGraph& road, const ZoneGrid& grid,
                                      const DemandMatrix& demand, int top_k, int max_pairs,
                                      const NetworkBounds& bounds, HubConnectorReport* report = nullptr);

struct TraversalReport {
  std::size_t requested{0};
  std::size_t produced{0};
  // requested - produced when the city cannot supply enough feasible routes.
  std::size_t shortfall{0};
};

inline constexpr double kTraversalMinSpan = 0.6;

// Long routes between stops lying in opposite outer thirds of the stop bounding
// box (along a randomly chosen axis), each at least `min_len_m` long and within
// `max_len_m`, and whose own stops spread over a box with a diagonal of at
// least `min_span` times the city's. Deterministic per seed.
std::vector<Route> gen_traversal(const RoadGraph& road, int n, double min_len_m, std::uint64_t seed,
                                 double max_len_m = 1e12, TraversalReport* report = nullptr,
                                 double min_span = kTraversalMinSpan);

struct PoolOptions {
  int top_k{40};
  int max_pairs{400};
  int traversal{50};
  double traversal_min_len_m{3000.0};
  double traversal_min_span{kTraversalMinSpan};
  std::uint64_t seed{1};
};

struct PoolReport {
  HubConnectorReport hubs;
  TraversalReport traversal;
  PoolBuildReport build;
};

// Original routes (as given, fixed ones included) followed by hub connectors
// and traversal routes; filtered to `bounds`, ids re-numbered.
RoutePool make_route_pool(const RoadGraph& road, const ZoneGrid& grid, const DemandMatrix& demand,
                          std::vector<Route> originals, const NetworkBounds& bounds,
                          const PoolOptions& options, PoolReport* report = nullptr);

}  // namespace tndp
