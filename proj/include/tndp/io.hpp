#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "tndp/evaluation.hpp"
#include "tndp/moea.hpp"
#include "tndp/preprocessing.hpp"
#include "tndp/road_graph.hpp"
#include "tndp/transit_graph.hpp"
#include "tndp/weightfit.hpp"

namespace tndp::io {

namespace fs = std::filesystem;
using nlohmann::json;

// Throws DataError when the file cannot be read.
std::string read_text(const fs::path& path);
// Writes through a temporary file and a rename, creating parent directories.
void write_text(const fs::path& path, const std::string& content);
json read_json(const fs::path& path);
void write_json(const fs::path& path, const json& j);

// Shortest decimal text that parses back to the same double.
std::string format_double(double x);

// nodes.csv (id,lat,lon,is_stop) and edges.csv (u,v,length_m,time_s).
RoadGraph read_road(const fs::path& nodes_csv, const fs::path& edges_csv);
void write_road(const RoadGraph& road, const fs::path& nodes_csv, const fs::path& edges_csv);

// demand.csv (origin_zone,dest_zone,passengers). With zone_count > 0 every zone
// id must be below it.
DemandMatrix read_demand(const fs::path& path, std::size_t zone_count = 0);
void write_demand(const DemandMatrix& demand, const fs::path& path);

json to_json(const MetroNetwork& metro);
MetroNetwork metro_from_json(const json& j);
json to_json(const WalkNetwork& walk);
WalkNetwork walk_from_json(const json& j);

json to_json(const Route& route);
json to_json(const ZoneGrid& grid);
ZoneGrid grid_from_json(const json& j);
json to_json(const ClusterMap& map);
ClusterMap cluster_map_from_json(const json& j);
json to_json(const ObjectiveVector& v);
ObjectiveVector objectives_from_json(const json& j);
json to_json(const BusNetwork& net);
BusNetwork network_from_json(const json& j);
json to_json(const WeightVector& w);
WeightVector weights_from_json(const json& j);

// Route list {"routes": [{id, kind, stops, length_m?}]}. Lengths and leg times
// are recomputed on `road`; a stored length_m that differs by more than 1e-6
// relative is a DataError.
std::vector<Route> routes_from_json(const json& j, const RoadGraph& road);
json routes_to_json(const std::vector<Route>& routes);

// routes.json of a pool: route list plus per-node stop busyness.
json pool_to_json(const RoutePool& pool);
RoutePool pool_from_json(const json& j, const RoadGraph& road);

struct ParetoEntry {
  std::string id;  // "n<k>", k = position in crowding order
  BusNetwork genome;
  ObjectiveVector objectives;
  double crowding{0.0};
};

std::vector<ParetoEntry> pareto_entries(const ParetoArchive& archive);
json pareto_to_json(const std::vector<ParetoEntry>& entries);
std::vector<ParetoEntry> pareto_from_json(const json& j);

// Stage endpoints are written as "stop:<node>" / "station:<id>".
json trip_to_json(const TripResult& r, const PlaceIndex& places, const std::vector<std::string>& lines);

json rating_to_json(const RatingRecord& r);
RatingRecord rating_from_json(const json& j);
// One JSON object per line; blank lines are skipped. Missing file reads as empty.
std::vector<RatingRecord> read_ratings(const fs::path& path);
void append_rating(const fs::path& path, const RatingRecord& r);

}  // namespace tndp::io
