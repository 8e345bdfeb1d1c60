#include "tndp/preprocessing.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <tuple>

#include "tndp/error.hpp"

namespace tndp {

StopId ClusterMap::operator()(StopId raw) const {
  auto it = representative.find(raw);
  return it == representative.end() ? raw : it->second;
}

std::vector<StopId> ClusterMap::members(StopId rep) const {
  std::vector<StopId> out;
  for (const auto& [raw, r] : representative)
    if (r == rep) out.push_back(raw);
  return out;
}

namespace {

std::int32_t find_root(std::vector<std::int32_t>& parent, std::int32_t x) {
  std::int32_t root = x;
  while (parent[static_cast<std::size_t>(root)] != root) root = parent[static_cast<std::size_t>(root)];
  while (parent[static_cast<std::size_t>(x)] != root) {
    const auto next = parent[static_cast<std::size_t>(x)];
    parent[static_cast<std::size_t>(x)] = root;
    x = next;
  }
  return root;
}

}  // namespace

ClusterResult cluster_stops(const RoadGraph& road, double threshold_m) {
  if (!(threshold_m > 0.0)) throw ConfigError("cluster threshold must be positive");

  std::vector<std::tuple<double, std::int32_t, std::int32_t>> candidates;
  for (const auto& e : road.edges()) {
    if (e.u != e.v && road.is_stop(e.u) && road.is_stop(e.v) && e.length_m < threshold_m &&
        road.in_degree(e.v) == 1) {
      candidates.emplace_back(e.length_m, e.u.v, e.v.v);
    }
  }
  std::sort(candidates.begin(), candidates.end());

  std::vector<std::int32_t> parent(road.node_count());
  std::iota(parent.begin(), parent.end(), 0);
  ClusterMap map;
  for (const auto& [len, u, v] : candidates) {
    const auto ru = find_root(parent, u);
    const auto rv = find_root(parent, v);
    if (ru == rv) continue;
    // The downstream cluster absorbs the upstream one.
    parent[static_cast<std::size_t>(ru)] = rv;
    map.merges.emplace_back(StopId{u}, StopId{v});
  }

  std::vector<bool> is_stop(road.node_count(), false);
  for (StopId s : road.stops()) {
    const StopId rep{find_root(parent, s.v)};
    map.representative[s] = rep;
    is_stop[rep.index()] = true;
  }
  return {road.with_stop_flags(is_stop), std::move(map)};
}

std::vector<StopId> remap_stops(const std::vector<StopId>& stops, const ClusterMap& map) {
  std::vector<StopId> out;
  out.reserve(stops.size());
  for (StopId s : stops) {
    const StopId r = map(s);
    if (out.empty() || out.back() != r) out.push_back(r);
  }
  return out;
}

void BoundingBox::expand(LatLon p) {
  min_lat = std::min(min_lat, p.lat);
  max_lat = std::max(max_lat, p.lat);
  min_lon = std::min(min_lon, p.lon);
  max_lon = std::max(max_lon, p.lon);
}

ZoneGrid::ZoneGrid(BoundingBox box, int rows, int cols) : box_{box}, rows_{rows}, cols_{cols} {
  if (rows < 1 || cols < 1) throw ConfigError("zone grid needs at least one row and one column");
}

namespace {
int cell(double x, double lo, double hi, int n) {
  if (!(hi > lo)) return 0;
  const int i = static_cast<int>(std::floor((x - lo) / (hi - lo) * n));
  return std::clamp(i, 0, n - 1);
}
}  // namespace

ZoneId ZoneGrid::zone_of(LatLon p) const {
  const int r = cell(p.lat, box_.min_lat, box_.max_lat, rows_);
  const int c = cell(p.lon, box_.min_lon, box_.max_lon, cols_);
  return ZoneId{r * cols_ + c};
}

LatLon ZoneGrid::centroid(ZoneId z) const {
  const int r = z.v / cols_;
  const int c = z.v % cols_;
  const double dlat = (box_.max_lat - box_.min_lat) / rows_;
  const double dlon = (box_.max_lon - box_.min_lon) / cols_;
  return {box_.min_lat + (r + 0.5) * dlat, box_.min_lon + (c + 0.5) * dlon};
}

ZoneGrid build_grid(const RoadGraph& road, const MetroNetwork& metro, int rows, int cols) {
  if (rows < 1 || cols < 1) throw ConfigError("zone grid needs at least one row and one column");
  const auto stops = road.stops();
  if (stops.empty()) throw DataError("cannot build a zone grid without stops");
  const LatLon first = road.node(stops.front()).pos;
  BoundingBox box{first.lat, first.lat, first.lon, first.lon};
  for (StopId s : stops) box.expand(road.node(s).pos);
  for (const auto& st : metro.stations) box.expand(st.pos);
  return ZoneGrid(box, rows, cols);
}

ZoneGrid build_grid(const RoadGraph& road, int rows, int cols) {
  return build_grid(road, MetroNetwork{}, rows, cols);
}

void DemandMatrix::add(ZoneId origin, ZoneId dest, double passengers) {
  if (!(passengers >= 0.0) || !std::isfinite(passengers)) {
    throw DataError("demand between zones " + std::to_string(origin.v) + " and " +
                    std::to_string(dest.v) + " must be non-negative");
  }
  if (!origin.valid() || !dest.valid()) throw DataError("demand references a negative zone id");
  entries_[{origin, dest}] += passengers;
}

double DemandMatrix::at(ZoneId origin, ZoneId dest) const {
  auto it = entries_.find({origin, dest});
  return it == entries_.end() ? 0.0 : it->second;
}

double DemandMatrix::total() const {
  double t = 0.0;
  for (const auto& [k, q] : entries_) t += q;
  return t;
}

double DemandMatrix::total_between_zones() const {
  double t = 0.0;
  for (const auto& [k, q] : entries_)
    if (k.first != k.second) t += q;
  return t;
}

std::map<ZoneId, double> DemandMatrix::zone_activity() const {
  std::map<ZoneId, double> out;
  for (const auto& [k, q] : entries_) {
    out[k.first] += q;
    out[k.second] += q;
  }
  return out;
}

}  // namespace tndp
