#include "tndp/report.hpp"

#include <cmath>
#include <map>

#include "tndp/error.hpp"

namespace tndp {

namespace {

// Bin index for a difference beyond the threshold; negative differences get
// negative indices, so bins are (t + k w, t + (k+1) w] and mirrored.
long bin_of(double d, double threshold, double width) {
  const double beyond = std::abs(d) - threshold;
  const long k = static_cast<long>(std::ceil(beyond / width)) - 1;
  return d > 0 ? k : -k - 1;
}

std::vector<HistogramBin> bins_from(const std::map<long, HistogramBin>& m) {
  std::vector<HistogramBin> out;
  for (const auto& [k, b] : m) out.push_back(b);
  return out;
}

}  // namespace

NetworkComparison compare_networks(const Evaluation& original, const Evaluation& optimized,
                                   const ReportOptions& options) {
  if (original.trips.size() != optimized.trips.size()) {
    throw DataError("cannot compare evaluations over different demand");
  }
  if (!(options.bin_width_min > 0.0) || !(options.threshold_min >= 0.0)) {
    throw ConfigError("report bins need a positive width and a non-negative threshold");
  }
  NetworkComparison c;
  for (std::size_t k = 0; k < kObjectiveCount; ++k) {
    auto& d = c.objectives[k];
    d.original = original.objectives[k];
    d.optimized = optimized.objectives[k];
    d.absolute = d.optimized - d.original;
    if (d.original != 0.0) d.percent = 100.0 * d.absolute / d.original;
  }

  std::map<long, HistogramBin> tt;
  std::map<long, HistogramBin> tr;
  for (std::size_t i = 0; i < original.trips.size(); ++i) {
    const auto& a = original.trips[i];
    const auto& b = optimized.trips[i];
    if (a.origin != b.origin || a.destination != b.destination) {
      throw DataError("cannot compare evaluations with different OD order");
    }
    if (a.trip && !b.trip) {
      ++c.lost_coverage;
      c.lost_passengers += a.passengers;
    } else if (!a.trip && b.trip) {
      ++c.gained_coverage;
      c.gained_passengers += b.passengers;
    }
    if (!a.trip || !b.trip) continue;
    ++c.pairs_compared;

    const double dt = (b.trip->travel_time() - a.trip->travel_time()) / 60.0;
    if (std::abs(dt) <= options.threshold_min) {
      ++c.pairs_suppressed;
    } else {
      const long k = bin_of(dt, options.threshold_min, options.bin_width_min);
      auto& bin = tt[k];
      if (bin.pairs == 0) {
        const double edge = options.threshold_min + options.bin_width_min * static_cast<double>(k >= 0 ? k : -k - 1);
        bin.lo = k >= 0 ? edge : -(edge + options.bin_width_min);
        bin.hi = k >= 0 ? edge + options.bin_width_min : -edge;
      }
      ++bin.pairs;
      bin.passengers += a.passengers;
    }

    const int dx = b.trip->transfers() - a.trip->transfers();
    if (dx != 0) {
      auto& bin = tr[dx];
      bin.lo = bin.hi = dx;
      ++bin.pairs;
      bin.passengers += a.passengers;
    }
  }
  c.travel_time = bins_from(tt);
  c.transfers = bins_from(tr);
  return c;
}

nlohmann::json to_json(const NetworkComparison& c) {
  using nlohmann::json;
  json obj = json::object();
  for (std::size_t k = 0; k < kObjectiveCount; ++k) {
    const auto& d = c.objectives[k];
    obj[std::string(kObjectiveNames[k])] = {{"original", d.original},
                                            {"optimized", d.optimized},
                                            {"absolute", d.absolute},
                                            {"percent", d.percent ? json(*d.percent) : json(nullptr)}};
  }
  const auto bins = [](const std::vector<HistogramBin>& v) {
    json arr = json::array();
    for (const auto& b : v) arr.push_back({{"lo", b.lo}, {"hi", b.hi}, {"pairs", b.pairs}, {"passengers", b.passengers}});
    return arr;
  };
  return {{"objectives", obj},
          {"travel_time_min", bins(c.travel_time)},
          {"transfers", bins(c.transfers)},
          {"pairs_compared", c.pairs_compared},
          {"pairs_suppressed", c.pairs_suppressed},
          {"lost_coverage", {{"pairs", c.lost_coverage}, {"passengers", c.lost_passengers}}},
          {"gained_coverage", {{"pairs", c.gained_coverage}, {"passengers", c.gained_passengers}}}};
}

nlohmann::json network_geojson(const BusNetwork& net, const RoutePool& pool, const RoadGraph& road,
                               bool include_fixed, const nlohmann::json& properties) {
  using nlohmann::json;
  std::vector<RouteId> ids = net.routes;
  if (include_fixed) ids.insert(ids.end(), pool.fixed_ids().begin(), pool.fixed_ids().end());
  std::sort(ids.begin(), ids.end());
  json features = json::array();
  for (RouteId id : ids) {
    const auto& r = pool.route(id);
    json coords = json::array();
    const auto push = [&](NodeId n) {
      const auto& p = road.node(n).pos;
      coords.push_back({p.lon, p.lat});
    };
    push(r.stops.front());
    for (std::size_t i = 0; i + 1 < r.stops.size(); ++i) {
      const auto path = shortest_time_path(road, r.stops[i], r.stops[i + 1]);
      if (!path) throw UnreachableError(r.stops[i], r.stops[i + 1]);
      for (std::size_t k = 1; k < path->nodes.size(); ++k) push(path->nodes[k]);
    }
    json stops = json::array();
    for (StopId s : r.stops) stops.push_back(s.v);
    features.push_back({{"type", "Feature"},
                        {"geometry", {{"type", "LineString"}, {"coordinates", coords}}},
                        {"properties", {{"route_id", id.v}, {"kind", to_string(r.kind)}, {"length_m", r.length_m},
                                        {"stops", stops}}}});
  }
  return {{"type", "FeatureCollection"}, {"properties", properties}, {"features", features}};
}

}  // namespace tndp
