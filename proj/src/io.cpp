#include "tndp/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "tndp/error.hpp"

namespace tndp::io {

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError("cannot write '" + path.string() + "'");
    out << content;
    if (!out.flush()) throw ConfigError("cannot write '" + path.string() + "'");
  }
  fs::rename(tmp, path);
}

json read_json(const fs::path& path) {
  const std::string text = read_text(path);
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw DataError("malformed JSON in '" + path.string() + "': " + e.what());
  }
}

void write_json(const fs::path& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

std::string format_double(double x) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, end);
}

namespace {

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::size_t> line_no;
};

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cell);
      cell.clear();
    } else if (c != '\r') {
      cell += c;
    }
  }
  out.push_back(cell);
  for (auto& s : out) {
    const auto b = s.find_first_not_of(" \t");
    const auto e = s.find_last_not_of(" \t");
    s = b == std::string::npos ? "" : s.substr(b, e - b + 1);
  }
  return out;
}

CsvTable read_csv(const fs::path& path, const std::vector<std::string>& expected) {
  std::istringstream in(read_text(path));
  CsvTable t;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    auto cells = split_csv(line);
    if (t.header.empty()) {
      t.header = cells;
      if (t.header != expected) {
        std::string want;
        for (const auto& h : expected) want += (want.empty() ? "" : ",") + h;
        throw DataError("'" + path.string() + "' must have header " + want);
      }
      continue;
    }
    if (cells.size() != expected.size()) {
      throw DataError("'" + path.string() + "' line " + std::to_string(n) + ": expected " +
                      std::to_string(expected.size()) + " fields");
    }
    t.rows.push_back(std::move(cells));
    t.line_no.push_back(n);
  }
  if (t.header.empty()) throw DataError("'" + path.string() + "' is empty");
  return t;
}

template <class T>
T parse_num(const std::string& s, const fs::path& path, std::size_t line) {
  T v{};
  auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || end != s.data() + s.size()) {
    throw DataError("'" + path.string() + "' line " + std::to_string(line) + ": bad number '" + s + "'");
  }
  return v;
}

bool parse_bool(const std::string& s, const fs::path& path, std::size_t line) {
  if (s == "1" || s == "true") return true;
  if (s == "0" || s == "false") return false;
  throw DataError("'" + path.string() + "' line " + std::to_string(line) + ": bad flag '" + s + "'");
}

template <class Fn>
auto parse_field(const char* what, Fn&& fn) {
  try {
    return fn();
  } catch (const json::exception& e) {
    throw DataError(std::string("malformed ") + what + ": " + e.what());
  }
}

std::string place_key(Place p) {
  return (p.kind == Place::Kind::kStop ? "stop:" : "station:") + std::to_string(p.id);
}

json place_to_json(Place p) {
  return {{"kind", p.kind == Place::Kind::kStop ? "stop" : "station"}, {"id", p.id}};
}

Place place_from_json(const json& j) {
  const auto kind = j.at("kind").get<std::string>();
  if (kind != "stop" && kind != "station") throw DataError("unknown place kind '" + kind + "'");
  return {kind == "stop" ? Place::Kind::kStop : Place::Kind::kStation, j.at("id").get<std::int32_t>()};
}

json finite_or_null(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

}  // namespace

RoadGraph read_road(const fs::path& nodes_csv, const fs::path& edges_csv) {
  const auto nt = read_csv(nodes_csv, {"id", "lat", "lon", "is_stop"});
  std::vector<RoadNode> nodes;
  for (std::size_t i = 0; i < nt.rows.size(); ++i) {
    const auto& r = nt.rows[i];
    const auto ln = nt.line_no[i];
    nodes.push_back({NodeId{parse_num<std::int32_t>(r[0], nodes_csv, ln)},
                     {parse_num<double>(r[1], nodes_csv, ln), parse_num<double>(r[2], nodes_csv, ln)},
                     parse_bool(r[3], nodes_csv, ln)});
  }
  std::sort(nodes.begin(), nodes.end(), [](const RoadNode& a, const RoadNode& b) { return a.id < b.id; });
  const auto et = read_csv(edges_csv, {"u", "v", "length_m", "time_s"});
  std::vector<RoadEdge> edges;
  for (std::size_t i = 0; i < et.rows.size(); ++i) {
    const auto& r = et.rows[i];
    const auto ln = et.line_no[i];
    edges.push_back({NodeId{parse_num<std::int32_t>(r[0], edges_csv, ln)},
                     NodeId{parse_num<std::int32_t>(r[1], edges_csv, ln)}, parse_num<double>(r[2], edges_csv, ln),
                     parse_num<double>(r[3], edges_csv, ln)});
  }
  return RoadGraph(std::move(nodes), std::move(edges));
}

void write_road(const RoadGraph& road, const fs::path& nodes_csv, const fs::path& edges_csv) {
  std::string n = "id,lat,lon,is_stop\n";
  for (const auto& node : road.nodes()) {
    n += std::to_string(node.id.v) + "," + format_double(node.pos.lat) + "," + format_double(node.pos.lon) + "," +
         (node.is_stop ? "1" : "0") + "\n";
  }
  write_text(nodes_csv, n);
  std::string e = "u,v,length_m,time_s\n";
  for (const auto& edge : road.edges()) {
    e += std::to_string(edge.u.v) + "," + std::to_string(edge.v.v) + "," + format_double(edge.length_m) + "," +
         format_double(edge.time_s) + "\n";
  }
  write_text(edges_csv, e);
}

DemandMatrix read_demand(const fs::path& path, std::size_t zone_count) {
  const auto t = read_csv(path, {"origin_zone", "dest_zone", "passengers"});
  DemandMatrix d;
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    const auto& r = t.rows[i];
    const auto ln = t.line_no[i];
    const ZoneId o{parse_num<std::int32_t>(r[0], path, ln)};
    const ZoneId z{parse_num<std::int32_t>(r[1], path, ln)};
    if (zone_count > 0 && (o.index() >= zone_count || z.index() >= zone_count)) {
      throw DataError("'" + path.string() + "' line " + std::to_string(ln) + ": zone outside the " +
                      std::to_string(zone_count) + "-zone grid");
    }
    d.add(o, z, parse_num<double>(r[2], path, ln));
  }
  return d;
}

void write_demand(const DemandMatrix& demand, const fs::path& path) {
  std::string s = "origin_zone,dest_zone,passengers\n";
  for (const auto& [k, q] : demand.entries()) {
    s += std::to_string(k.first.v) + "," + std::to_string(k.second.v) + "," + format_double(q) + "\n";
  }
  write_text(path, s);
}

json to_json(const MetroNetwork& metro) {
  json st = json::array();
  for (const auto& s : metro.stations) {
    st.push_back({{"id", s.id.v}, {"lat", s.pos.lat}, {"lon", s.pos.lon}, {"name", s.name}});
  }
  json ed = json::array();
  for (const auto& e : metro.edges) {
    ed.push_back({{"u", e.u.v}, {"v", e.v.v}, {"line", e.line}, {"length_m", e.length_m}});
  }
  return {{"stations", st}, {"edges", ed}};
}

MetroNetwork metro_from_json(const json& j) {
  return parse_field("metro network", [&] {
    MetroNetwork m;
    for (const auto& s : j.at("stations")) {
      m.stations.push_back({StationId{s.at("id").get<std::int32_t>()},
                            {s.at("lat").get<double>(), s.at("lon").get<double>()},
                            s.value("name", std::string{})});
    }
    for (const auto& e : j.at("edges")) {
      m.edges.push_back({StationId{e.at("u").get<std::int32_t>()}, StationId{e.at("v").get<std::int32_t>()},
                         e.at("line").get<std::string>(), e.at("length_m").get<double>()});
    }
    m.validate();
    return m;
  });
}

json to_json(const WalkNetwork& walk) {
  json ed = json::array();
  for (const auto& e : walk.edges) {
    ed.push_back({{"from", place_to_json(e.from)}, {"to", place_to_json(e.to)}, {"length_m", e.length_m}});
  }
  return {{"edges", ed}};
}

WalkNetwork walk_from_json(const json& j) {
  return parse_field("walking network", [&] {
    WalkNetwork w;
    for (const auto& e : j.at("edges")) {
      w.edges.push_back({place_from_json(e.at("from")), place_from_json(e.at("to")), e.at("length_m").get<double>()});
    }
    return w;
  });
}

json to_json(const Route& r) {
  json stops = json::array();
  for (StopId s : r.stops) stops.push_back(s.v);
  return {{"id", r.id.v}, {"kind", to_string(r.kind)}, {"stops", stops}, {"length_m", r.length_m},
          {"leg_times_s", r.leg_times_s}};
}

json routes_to_json(const std::vector<Route>& routes) {
  json arr = json::array();
  for (const auto& r : routes) arr.push_back(to_json(r));
  return {{"routes", arr}};
}

std::vector<Route> routes_from_json(const json& j, const RoadGraph& road) {
  return parse_field("route list", [&] {
    std::vector<Route> out;
    std::int32_t next = 0;
    for (const auto& jr : j.at("routes")) {
      std::vector<StopId> stops;
      for (const auto& s : jr.at("stops")) stops.push_back(StopId{s.get<std::int32_t>()});
      const RouteId id{jr.contains("id") ? jr.at("id").get<std::int32_t>() : next};
      ++next;
      auto r = measure_route(road, id, route_kind_from_string(jr.value("kind", std::string{"original"})),
                             std::move(stops));
      if (jr.contains("length_m") && !jr.at("length_m").is_null()) {
        const double stored = jr.at("length_m").get<double>();
        if (std::abs(stored - r.length_m) > 1e-6 * std::max(1.0, std::abs(r.length_m))) {
          throw DataError("route " + std::to_string(id.v) + " stores length " + format_double(stored) +
                          " m but its road paths measure " + format_double(r.length_m) + " m");
        }
      }
      out.push_back(std::move(r));
    }
    return out;
  });
}

json pool_to_json(const RoutePool& pool) {
  json j = routes_to_json(pool.routes());
  j["stop_busyness"] = pool.stop_busyness();
  return j;
}

RoutePool pool_from_json(const json& j, const RoadGraph& road) {
  auto routes = routes_from_json(j, road);
  for (std::size_t i = 0; i < routes.size(); ++i) {
    if (routes[i].id.v != static_cast<std::int32_t>(i)) throw DataError("route pool ids must be dense and ordered");
  }
  std::vector<double> busy = parse_field("route pool", [&] {
    return j.value("stop_busyness", std::vector<double>{});
  });
  return RoutePool(std::move(routes), std::move(busy));
}

json to_json(const ZoneGrid& g) {
  const auto& b = g.box();
  return {{"rows", g.rows()},       {"cols", g.cols()},       {"min_lat", b.min_lat},
          {"max_lat", b.max_lat},   {"min_lon", b.min_lon},   {"max_lon", b.max_lon}};
}

ZoneGrid grid_from_json(const json& j) {
  return parse_field("zone grid", [&] {
    BoundingBox b{j.at("min_lat").get<double>(), j.at("max_lat").get<double>(), j.at("min_lon").get<double>(),
                  j.at("max_lon").get<double>()};
    return ZoneGrid(b, j.at("rows").get<int>(), j.at("cols").get<int>());
  });
}

json to_json(const ClusterMap& map) {
  json rep = json::array();
  for (const auto& [raw, r] : map.representative) rep.push_back({raw.v, r.v});
  json merges = json::array();
  for (const auto& [u, v] : map.merges) merges.push_back({u.v, v.v});
  return {{"representative", rep}, {"merges", merges}};
}

ClusterMap cluster_map_from_json(const json& j) {
  return parse_field("cluster map", [&] {
    ClusterMap m;
    for (const auto& p : j.at("representative")) {
      m.representative[StopId{p.at(0).get<std::int32_t>()}] = StopId{p.at(1).get<std::int32_t>()};
    }
    for (const auto& p : j.at("merges")) {
      m.merges.emplace_back(StopId{p.at(0).get<std::int32_t>()}, StopId{p.at(1).get<std::int32_t>()});
    }
    return m;
  });
}

json to_json(const ObjectiveVector& v) {
  json j = json::object();
  for (std::size_t k = 0; k < kObjectiveCount; ++k) j[std::string(kObjectiveNames[k])] = v[k];
  return j;
}

ObjectiveVector objectives_from_json(const json& j) {
  return parse_field("objective vector", [&] {
    ObjectiveVector v;
    for (std::size_t k = 0; k < kObjectiveCount; ++k) v[k] = j.at(std::string(kObjectiveNames[k])).get<double>();
    return v;
  });
}

json to_json(const BusNetwork& net) {
  json ids = json::array();
  for (RouteId r : net.routes) ids.push_back(r.v);
  return {{"routes", ids}};
}

BusNetwork network_from_json(const json& j) {
  return parse_field("bus network", [&] {
    std::vector<RouteId> ids;
    for (const auto& r : j.at("routes")) ids.push_back(RouteId{r.get<std::int32_t>()});
    const auto n = ids.size();
    auto net = BusNetwork::from(std::move(ids));
    if (net.size() != n) throw DataError("bus network lists a route twice");
    return net;
  });
}

json to_json(const WeightVector& w) {
  json j = json::object();
  for (std::size_t i = 0; i < WeightVector::size(); ++i) j["w" + std::to_string(i)] = w[i];
  return j;
}

WeightVector weights_from_json(const json& j) {
  return parse_field("weights", [&] {
    WeightVector w;
    for (std::size_t i = 0; i < WeightVector::size(); ++i) w[i] = j.at("w" + std::to_string(i)).get<double>();
    return w;
  });
}

std::vector<ParetoEntry> pareto_entries(const ParetoArchive& archive) {
  std::vector<ParetoEntry> out;
  for (const auto& m : archive.crowding_order()) {
    out.push_back({"n" + std::to_string(out.size()), m.genome, m.objectives, m.crowding});
  }
  return out;
}

json pareto_to_json(const std::vector<ParetoEntry>& entries) {
  json arr = json::array();
  for (const auto& e : entries) {
    json m = to_json(e.genome);
    m["id"] = e.id;
    m["route_count"] = e.genome.size();
    m["objectives"] = to_json(e.objectives);
    m["crowding"] = finite_or_null(e.crowding);
    arr.push_back(std::move(m));
  }
  return {{"members", arr}};
}

std::vector<ParetoEntry> pareto_from_json(const json& j) {
  return parse_field("pareto archive", [&] {
    std::vector<ParetoEntry> out;
    for (const auto& m : j.at("members")) {
      const auto& c = m.at("crowding");
      out.push_back({m.at("id").get<std::string>(), network_from_json(m), objectives_from_json(m.at("objectives")),
                     c.is_null() ? std::numeric_limits<double>::infinity() : c.get<double>()});
    }
    return out;
  });
}

json trip_to_json(const TripResult& r, const PlaceIndex& places, const std::vector<std::string>& lines) {
  json j{{"origin", r.origin.v}, {"destination", r.destination.v}, {"passengers", r.passengers},
         {"covered", r.trip.has_value()}};
  if (!r.trip) return j;
  const Trip& t = *r.trip;
  json stages = json::array();
  for (const auto& s : t.stages) {
    json tri = json::array();
    for (const auto& x : s.triplets) {
      tri.push_back({place_key(places.place(x.from)), place_key(places.place(x.to)), to_string(x.carrier, lines)});
    }
    stages.push_back({{"mode", s.kind == StageKind::kBus ? "bus" : s.kind == StageKind::kMetro ? "metro" : "walk"},
                      {"duration_s", s.duration_s},
                      {"triplets", tri}});
  }
  j["t_inv"] = t.t_inv;
  j["t_wal"] = t.t_wal;
  j["t_wai"] = t.t_wai;
  j["travel_time_s"] = t.travel_time();
  j["transfers"] = t.transfers();
  j["generalized_cost"] = t.generalized_cost;
  j["stages"] = stages;
  return j;
}

json rating_to_json(const RatingRecord& r) {
  return {{"network_id", r.network_id}, {"rater_id", r.rater_id}, {"rating", r.rating}};
}

RatingRecord rating_from_json(const json& j) {
  return parse_field("rating", [&] {
    return RatingRecord{j.at("network_id").get<std::string>(), j.at("rater_id").get<std::string>(),
                        j.at("rating").get<double>()};
  });
}

std::vector<RatingRecord> read_ratings(const fs::path& path) {
  std::vector<RatingRecord> out;
  if (!fs::exists(path)) return out;
  std::istringstream in(read_text(path));
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(rating_from_json(json::parse(line)));
    } catch (const json::exception& e) {
      throw DataError("'" + path.string() + "' line " + std::to_string(n) + ": " + e.what());
    }
  }
  return out;
}

void append_rating(const fs::path& path, const RatingRecord& r) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::app);
  if (!out) throw ConfigError("cannot append to '" + path.string() + "'");
  out << rating_to_json(r).dump() << '\n';
  out.flush();
}

}  // namespace tndp::io
