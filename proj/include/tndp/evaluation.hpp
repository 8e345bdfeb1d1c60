#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "tndp/objectives.hpp"
#include "tndp/preprocessing.hpp"
#include "tndp/transit_graph.hpp"

namespace tndp {

inline constexpr double kTransferPenaltyS = 300.0;
inline constexpr int kMaxTransfers = 3;

struct EvalParams {
  double transfer_penalty_s{kTransferPenaltyS};
  int max_transfers{kMaxTransfers};
  // Count fixed tram routes in TL (constant offset for every candidate).
  bool tl_include_fixed{true};
};

enum class StageKind { kBus, kMetro, kWalk };

struct Triplet {
  std::int32_t from{-1};  // complete-network vertex
  std::int32_t to{-1};
  Carrier carrier;
};

// Maximal run of a trip on one carrier; a walking stage is a single edge.
struct Stage {
  StageKind kind{StageKind::kWalk};
  std::vector<Triplet> triplets;
  double duration_s{0.0};
};

struct Trip {
  ZoneId origin;
  ZoneId destination;
  std::vector<Stage> stages;
  double t_inv{0.0};
  // Walking edges plus zone access and egress legs.
  double t_wal{0.0};
  double t_wai{0.0};
  double access_s{0.0};
  double egress_s{0.0};
  // Travel time plus the transfer penalty per stage change; what routing minimizes.
  double generalized_cost{0.0};

  double travel_time() const { return t_inv + t_wai + t_wal; }
  std::size_t walk_stages() const;
  // |T| - |T_walk| - 1
  int transfers() const;
};

// Each zone's virtual centroid reaches the stops and stations inside the cell
// at walking speed.
struct ZoneAccess {
  struct Link {
    std::int32_t vertex{-1};
    double time_s{0.0};
  };
  std::vector<std::vector<Link>> links;  // indexed by ZoneId

  static ZoneAccess build(const PlaceIndex& places, const RoadGraph& road, const MetroNetwork& metro,
                          const ZoneGrid& grid);
  const std::vector<Link>& of(ZoneId z) const;
};

// One-to-all trip planning from a zone centroid over a complete network.
// Labels are (vertex, arriving carrier, vehicle boardings); a transfer penalty
// is added whenever the carrier changes after the first stage, and at most
// max_transfers + 1 vehicle stages are allowed. A pair counts as served only
// when its best trip with a vehicle stage is no dearer than walking all the way.
class TripPlanner {
 public:
  TripPlanner(const CompleteNetwork& net, const ZoneAccess& access, double penalty_s, int max_transfers);

  void search_from(ZoneId origin);
  // Cheapest covered trip to `dest` from the last searched origin.
  std::optional<Trip> trip_to(ZoneId dest) const;

 private:
  struct Target {
    std::int32_t state{-1};
    double cost{0.0};
    double egress{0.0};
  };
  std::optional<Target> best_target(ZoneId dest) const;
  std::int32_t state_id(std::int32_t vertex, std::int32_t slot, int boardings) const;

  const CompleteNetwork* net_;
  const ZoneAccess* access_;
  double penalty_s_;
  int max_boardings_;
  ZoneId origin_;

  // slot 0: arrived from the zone centroid; slot 1: arrived on foot; 2..: per incoming vehicle carrier.
  std::vector<std::int32_t> slot_base_;
  std::vector<Carrier> slot_carrier_;
  std::vector<std::int32_t> edge_target_slot_;

  std::vector<double> cost_;
  std::vector<std::int32_t> pred_state_;
  std::vector<std::int32_t> pred_edge_;
  std::vector<std::int32_t> touched_;
};

// Minimum generalized-cost trip between two zone centroids, or nullopt when the
// zones are not connected within max_transfers.
std::optional<Trip> plan_trip(const CompleteNetwork& net, const ZoneAccess& access, ZoneId s, ZoneId t,
                              double penalty_s, int max_transfers);

// Immutable inputs shared by every evaluation.
struct EvalContext {
  RoutePool pool;
  MetroNetwork metro;
  WalkNetwork walk;
  ZoneGrid grid;
  DemandMatrix demand;
  EvalParams params;
  PlaceIndex places;
  ZoneAccess access;
  double fixed_length_m{0.0};

  static EvalContext build(const RoadGraph& road, RoutePool pool, MetroNetwork metro, WalkNetwork walk,
                           ZoneGrid grid, DemandMatrix demand, EvalParams params = {});
};

struct TripResult {
  ZoneId origin;
  ZoneId destination;
  double passengers{0.0};
  std::optional<Trip> trip;
};

struct Evaluation {
  ObjectiveVector objectives;
  std::vector<TripResult> trips;  // one per OD pair with distinct zones, in demand order
};

// Throws DataError when the demand between distinct zones is zero.
ObjectiveVector evaluate(const BusNetwork& bus, const EvalContext& ctx);
Evaluation evaluate_detailed(const BusNetwork& bus, const EvalContext& ctx);

}  // namespace tndp
