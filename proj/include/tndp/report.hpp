#pragma once

#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "tndp/evaluation.hpp"
#include "tndp/road_graph.hpp"
#include "tndp/weightfit.hpp"

namespace tndp {

struct HistogramBin {
  // Bin bounds; the end nearer zero is exclusive. Integer bins have lo == hi.
  double lo{0.0};
  double hi{0.0};
  std::size_t pairs{0};
  double passengers{0.0};
};

struct ReportOptions {
  // Travel-time differences of at most this many minutes are left out.
  double threshold_min{2.5};
  double bin_width_min{2.5};
};

struct ObjectiveDelta {
  double original{0.0};
  double optimized{0.0};
  double absolute{0.0};
  // Relative to the original; nullopt when the original is zero.
  std::optional<double> percent;
};

struct NetworkComparison {
  std::array<ObjectiveDelta, kObjectiveCount> objectives{};
  // Optimized minus original travel time in minutes, OD pairs covered by both.
  std::vector<HistogramBin> travel_time;
  // Optimized minus original transfers; the zero bin is left out.
  std::vector<HistogramBin> transfers;
  std::size_t pairs_compared{0};
  std::size_t pairs_suppressed{0};  // |dt| within the threshold
  std::size_t lost_coverage{0};
  std::size_t gained_coverage{0};
  double lost_passengers{0.0};
  double gained_passengers{0.0};
};

// Both evaluations must come from the same context (identical OD order).
NetworkComparison compare_networks(const Evaluation& original, const Evaluation& optimized,
                                   const ReportOptions& options = {});

nlohmann::json to_json(const NetworkComparison& c);

// Routes as LineStrings following their road paths; `properties` is attached
// to the collection.
nlohmann::json network_geojson(const BusNetwork& net, const RoutePool& pool, const RoadGraph& road,
                               bool include_fixed = true, const nlohmann::json& properties = nlohmann::json::object());

}  // namespace tndp
