#include "tndp/server.hpp"

#include <mutex>

#include "httplib.h"
#include "tndp/error.hpp"
#include "tndp/moea.hpp"
#include "tndp/report.hpp"

namespace tndp {

using nlohmann::json;

struct ApiServer::Impl {
  ServerData data;
  ObjectiveBounds bounds;
  httplib::Server http;
  std::mutex ratings_mu;

  const io::ParetoEntry* find(const std::string& id) const {
    for (const auto& e : data.archive)
      if (e.id == id) return &e;
    return nullptr;
  }

  // Objective bars on a shared archive-wide [0, 1] scale.
  json bars(const ObjectiveVector& v) const {
    json j = json::object();
    for (std::size_t k = 0; k < kObjectiveCount; ++k) {
      const double span = bounds.max[k] - bounds.min[k];
      j[std::string(kObjectiveNames[k])] = span > 0.0 ? (v[k] - bounds.min[k]) / span : 0.0;
    }
    return j;
  }

  json card(const io::ParetoEntry& e) const {
    return {{"id", e.id},
            {"route_count", e.genome.size()},
            {"objectives", io::to_json(e.objectives)},
            {"normalized", bars(e.objectives)},
            {"crowding", std::isfinite(e.crowding) ? json(e.crowding) : json(nullptr)}};
  }
};

namespace {

void send(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void fail(httplib::Response& res, int status, const std::string& msg) { send(res, status, {{"error", msg}}); }

}  // namespace

ApiServer::ApiServer(ServerData data) : impl_(std::make_unique<Impl>()) {
  impl_->data = std::move(data);
  if (!impl_->data.archive.empty()) {
    std::vector<ObjectiveVector> objs;
    for (const auto& e : impl_->data.archive) objs.push_back(e.objectives);
    impl_->bounds = ObjectiveBounds::of(objs);
  }
  Impl& s = *impl_;
  auto& http = s.http;

  http.Get("/api/sample", [&s](const httplib::Request& req, httplib::Response& res) {
    std::size_t n = s.data.default_sample;
    if (req.has_param("n")) {
      const auto p = req.get_param_value("n");
      try {
        std::size_t used = 0;
        const long v = std::stol(p, &used);
        if (used != p.size() || v < 1) throw std::invalid_argument(p);
        n = static_cast<std::size_t>(v);
      } catch (const std::exception&) {
        return fail(res, 400, "n must be a positive integer");
      }
    }
    json arr = json::array();
    for (auto i : sample_indices(s.data.archive.size(), n)) arr.push_back(s.card(s.data.archive[i]));
    send(res, 200, {{"archive_size", s.data.archive.size()}, {"networks", arr}});
  });

  http.Get(R"(/api/network/([^/]+)/geojson)", [&s](const httplib::Request& req, httplib::Response& res) {
    const auto* e = s.find(req.matches[1]);
    if (!e) return fail(res, 404, "unknown network '" + std::string(req.matches[1]) + "'");
    json props = s.card(*e);
    if (s.data.baseline_objectives) {
      json delta = json::object();
      for (std::size_t k = 0; k < kObjectiveCount; ++k) {
        delta[std::string(kObjectiveNames[k])] = e->objectives[k] - (*s.data.baseline_objectives)[k];
      }
      props["delta_vs_baseline"] = delta;
    }
    send(res, 200, network_geojson(e->genome, s.data.pool, s.data.road, true, props));
  });

  http.Get("/api/baseline/geojson", [&s](const httplib::Request&, httplib::Response& res) {
    json props{{"id", "baseline"}, {"route_count", s.data.baseline.size()}};
    if (s.data.baseline_objectives) {
      props["objectives"] = io::to_json(*s.data.baseline_objectives);
      props["normalized"] = s.bars(*s.data.baseline_objectives);
    }
    send(res, 200, network_geojson(s.data.baseline, s.data.pool, s.data.road, true, props));
  });

  http.Post("/api/ratings", [&s](const httplib::Request& req, httplib::Response& res) {
    RatingRecord r;
    try {
      const json body = json::parse(req.body);
      r = io::rating_from_json(body);
    } catch (const std::exception&) {
      return fail(res, 400, "body must be {\"network_id\", \"rater_id\", \"rating\"}");
    }
    if (r.rater_id.empty()) return fail(res, 400, "rater_id must not be empty");
    if (!s.find(r.network_id)) return fail(res, 404, "unknown network '" + r.network_id + "'");
    if (!std::isfinite(r.rating) || !s.data.scale.contains(r.rating)) {
      return fail(res, 422, "rating must lie in [" + io::format_double(s.data.scale.min) + ", " +
                                io::format_double(s.data.scale.max) + "]");
    }
    std::lock_guard lock(s.ratings_mu);
    try {
      io::append_rating(s.data.ratings_path, r);
    } catch (const Error& e) {
      return fail(res, 500, e.what());
    }
    send(res, 201, io::rating_to_json(r));
  });

  http.Get("/api/ratings", [&s](const httplib::Request&, httplib::Response& res) {
    std::vector<RatingRecord> records;
    {
      std::lock_guard lock(s.ratings_mu);
      try {
        records = io::read_ratings(s.data.ratings_path);
      } catch (const Error& e) {
        return fail(res, 500, e.what());
      }
    }
    const auto agg = aggregate_ratings(records);
    json arr = json::array();
    // Archive order, so the table reads like the sample.
    for (const auto& e : s.data.archive) {
      if (auto it = agg.find(e.id); it != agg.end()) {
        arr.push_back({{"network_id", e.id}, {"mean", it->second.mean}, {"count", it->second.count}});
      }
    }
    send(res, 200, {{"scale", {{"min", s.data.scale.min}, {"max", s.data.scale.max}}}, {"ratings", arr}});
  });

  if (s.data.static_dir) {
    if (!http.set_mount_point("/", s.data.static_dir->string())) {
      throw ConfigError("static directory '" + s.data.static_dir->string() + "' does not exist");
    }
  }
}

ApiServer::~ApiServer() { stop(); }

int ApiServer::bind(const std::string& host, int port) {
  const int bound = port == 0 ? impl_->http.bind_to_any_port(host) : (impl_->http.bind_to_port(host, port) ? port : -1);
  if (bound < 0) throw ConfigError("cannot bind " + host + ":" + std::to_string(port));
  return bound;
}

void ApiServer::listen() { impl_->http.listen_after_bind(); }

void ApiServer::stop() { impl_->http.stop(); }

void ApiServer::wait_until_ready() const { impl_->http.wait_until_ready(); }

}  // namespace tndp
