#include "tndp/pipeline.hpp"

#include <openssl/evp.h>

#include <chrono>
#include <cmath>
#include <ctime>
#include <iomanip>
#include <ostream>
#include <random>
#include <set>
#include <sstream>

#include "tndp/report.hpp"

namespace tndp {

using nlohmann::json;

std::string sha256_hex(const std::string& bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("SHA-256 failed");
  }
  std::ostringstream ss;
  for (unsigned int i = 0; i < len; ++i) ss << std::hex << std::setw(2) << std::setfill('0') << int(digest[i]);
  return ss.str();
}

namespace {

// Reads one config section, rejecting keys it was not asked about.
class Section {
 public:
  Section(const json& root, std::string name) : name_{std::move(name)} {
    if (root.contains(name_)) {
      if (!root.at(name_).is_object()) throw ConfigError("config section '" + name_ + "' must be an object");
      j_ = root.at(name_);
    }
  }

  template <class T>
  void get(const std::string& key, T& out) {
    seen_.insert(key);
    if (!j_.contains(key) || j_.at(key).is_null()) return;
    try {
      out = j_.at(key).get<T>();
    } catch (const json::exception&) {
      throw ConfigError("config key '" + name_ + "." + key + "' has the wrong type");
    }
  }

  void path(const std::string& key, std::optional<fs::path>& out, const fs::path& base) {
    std::string s;
    get(key, s);
    if (!s.empty()) out = fs::path(s).is_absolute() ? fs::path(s) : base / s;
  }

  bool has(const std::string& key) const { return j_.contains(key) && !j_.at(key).is_null(); }

  void finish() const {
    for (const auto& [k, v] : j_.items()) {
      if (!seen_.contains(k)) throw ConfigError("unknown config key '" + name_ + "." + k + "'");
    }
  }

 private:
  std::string name_;
  json j_ = json::object();
  std::set<std::string> seen_;
};

void require(bool ok, const std::string& what) {
  if (!ok) throw ConfigError(what);
}

json path_or_null(const std::optional<fs::path>& p) { return p ? json(p->string()) : json(nullptr); }

}  // namespace

PipelineConfig PipelineConfig::from_json(const json& j, const fs::path& base_dir) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  static const std::set<std::string> kSections{"data",       "preprocessing", "transit_graph", "routegen", "evaluation",
                                               "moea",       "classic_ga",    "weightfit",     "report"};
  for (const auto& [k, v] : j.items()) {
    if (!kSections.contains(k)) throw ConfigError("unknown config section '" + k + "'");
  }
  PipelineConfig c;

  Section data(j, "data");
  data.path("nodes", c.data.nodes, base_dir);
  data.path("edges", c.data.edges, base_dir);
  data.path("metro", c.data.metro, base_dir);
  data.path("walk", c.data.walk, base_dir);
  data.path("demand", c.data.demand, base_dir);
  data.path("routes", c.data.routes, base_dir);
  data.finish();

  Section pre(j, "preprocessing");
  pre.get("cluster_threshold_m", c.cluster_threshold_m);
  pre.get("grid", c.grid);
  pre.finish();
  require(c.cluster_threshold_m > 0.0, "preprocessing.cluster_threshold_m must be positive");
  require(c.grid >= 1, "preprocessing.grid must be at least 1");

  Section tg(j, "transit_graph");
  tg.get("max_walk_m", c.max_walk_m);
  tg.finish();
  require(c.max_walk_m >= 0.0, "transit_graph.max_walk_m must be non-negative");

  Section rg(j, "routegen");
  rg.get("top_k", c.routegen.top_k);
  rg.get("max_pairs", c.routegen.max_pairs);
  rg.get("traversal", c.routegen.traversal);
  rg.get("traversal_min_len_m", c.routegen.traversal_min_len_m);
  rg.get("traversal_min_span", c.routegen.traversal_min_span);
  rg.get("seed", c.routegen.seed);
  rg.finish();
  require(c.routegen.top_k >= 2, "routegen.top_k must be at least 2");
  require(c.routegen.max_pairs >= 0 && c.routegen.traversal >= 0, "routegen counts must be non-negative");
  require(c.routegen.traversal_min_span >= 0.0 && c.routegen.traversal_min_span <= 1.0,
          "routegen.traversal_min_span must lie in [0, 1]");

  Section ev(j, "evaluation");
  ev.get("transfer_penalty_s", c.evaluation.transfer_penalty_s);
  ev.get("max_transfers", c.evaluation.max_transfers);
  ev.get("tl_include_fixed", c.evaluation.tl_include_fixed);
  ev.finish();
  require(c.evaluation.transfer_penalty_s >= 0.0, "evaluation.transfer_penalty_s must be non-negative");
  require(c.evaluation.max_transfers >= 0, "evaluation.max_transfers must be non-negative");

  Section mo(j, "moea");
  mo.get("population", c.moea.population_size);
  mo.get("iterations", c.moea.iterations);
  mo.get("mutation", c.moea.mutation_prob);
  mo.get("crossover", c.moea.crossover_prob);
  mo.get("min_routes", c.moea.bounds.min_routes);
  mo.get("max_routes", c.moea.bounds.max_routes);
  mo.get("min_route_len_m", c.moea.bounds.min_route_len_m);
  mo.get("max_route_len_m", c.moea.bounds.max_route_len_m);
  mo.get("seed", c.moea.seed);
  mo.get("archive_capacity", c.moea.archive_capacity);
  mo.finish();

  c.classic = c.moea;
  c.classic.seed = c.moea.seed + 1;
  Section so(j, "classic_ga");
  so.get("population", c.classic.population_size);
  so.get("iterations", c.classic.iterations);
  so.get("mutation", c.classic.mutation_prob);
  so.get("crossover", c.classic.crossover_prob);
  so.get("seed", c.classic.seed);
  so.finish();

  for (const GAConfig* g : {&c.moea, &c.classic}) {
    require(g->population_size >= 2, "population must be at least 2");
    require(g->mutation_prob >= 0.0 && g->mutation_prob <= 1.0, "mutation probability must lie in [0, 1]");
    require(g->crossover_prob >= 0.0 && g->crossover_prob <= 1.0, "crossover probability must lie in [0, 1]");
  }
  require(c.moea.bounds.min_routes >= 1 && c.moea.bounds.min_routes <= c.moea.bounds.max_routes,
          "moea route-count bounds must satisfy 1 <= min_routes <= max_routes");
  require(c.moea.bounds.min_route_len_m <= c.moea.bounds.max_route_len_m,
          "moea route-length bounds must satisfy min <= max");

  Section wf(j, "weightfit");
  wf.get("sample", c.rating.sample);
  wf.get("min_rating", c.rating.scale.min);
  wf.get("max_rating", c.rating.scale.max);
  wf.path("ratings", c.rating.ratings, base_dir);
  wf.get("scripted_raters", c.rating.scripted_raters);
  wf.get("rater_seed", c.rating.rater_seed);
  wf.finish();
  require(c.rating.scale.min < c.rating.scale.max, "weightfit rating scale must satisfy min < max");
  require(c.rating.sample >= 1, "weightfit.sample must be at least 1");

  Section rp(j, "report");
  rp.get("threshold_min", c.report.threshold_min);
  rp.get("bin_width_min", c.report.bin_width_min);
  rp.finish();
  require(c.report.threshold_min >= 0.0 && c.report.bin_width_min > 0.0,
          "report needs threshold_min >= 0 and bin_width_min > 0");
  return c;
}

PipelineConfig PipelineConfig::load(const fs::path& path) {
  json j;
  try {
    j = json::parse(io::read_text(path));
  } catch (const json::exception& e) {
    throw ConfigError("malformed config '" + path.string() + "': " + e.what());
  } catch (const DataError& e) {
    throw ConfigError(e.what());
  }
  return from_json(j, path.parent_path());
}

json PipelineConfig::to_json() const {
  return {
      {"data",
       {{"nodes", path_or_null(data.nodes)},
        {"edges", path_or_null(data.edges)},
        {"metro", path_or_null(data.metro)},
        {"walk", path_or_null(data.walk)},
        {"demand", path_or_null(data.demand)},
        {"routes", path_or_null(data.routes)}}},
      {"preprocessing", {{"cluster_threshold_m", cluster_threshold_m}, {"grid", grid}}},
      {"transit_graph", {{"max_walk_m", max_walk_m}}},
      {"routegen",
       {{"top_k", routegen.top_k},
        {"max_pairs", routegen.max_pairs},
        {"traversal", routegen.traversal},
        {"traversal_min_len_m", routegen.traversal_min_len_m},
        {"traversal_min_span", routegen.traversal_min_span},
        {"seed", routegen.seed}}},
      {"evaluation",
       {{"transfer_penalty_s", evaluation.transfer_penalty_s},
        {"max_transfers", evaluation.max_transfers},
        {"tl_include_fixed", evaluation.tl_include_fixed}}},
      {"moea",
       {{"population", moea.population_size},
        {"iterations", moea.iterations},
        {"mutation", moea.mutation_prob},
        {"crossover", moea.crossover_prob},
        {"min_routes", moea.bounds.min_routes},
        {"max_routes", moea.bounds.max_routes},
        {"min_route_len_m", moea.bounds.min_route_len_m},
        {"max_route_len_m", moea.bounds.max_route_len_m},
        {"seed", moea.seed},
        {"archive_capacity", moea.archive_capacity}}},
      {"classic_ga",
       {{"population", classic.population_size},
        {"iterations", classic.iterations},
        {"mutation", classic.mutation_prob},
        {"crossover", classic.crossover_prob},
        {"seed", classic.seed}}},
      {"weightfit",
       {{"sample", rating.sample},
        {"min_rating", rating.scale.min},
        {"max_rating", rating.scale.max},
        {"ratings", path_or_null(rating.ratings)},
        {"scripted_raters", rating.scripted_raters},
        {"rater_seed", rating.rater_seed}}},
      {"report", {{"threshold_min", report.threshold_min}, {"bin_width_min", report.bin_width_min}}},
  };
}

nlohmann::json write_synth_dataset(const SyntheticCity& city, const fs::path& dir, const nlohmann::json& overrides) {
  fs::create_directories(dir);
  io::write_road(city.road, dir / "nodes.csv", dir / "edges.csv");
  io::write_demand(city.demand, dir / "demand.csv");
  io::write_json(dir / "metro.json", io::to_json(city.metro));
  io::write_json(dir / "routes.json", io::routes_to_json(city.routes));
  nlohmann::json cfg{{"data",
                      {{"nodes", "nodes.csv"},
                       {"edges", "edges.csv"},
                       {"metro", "metro.json"},
                       {"demand", "demand.csv"},
                       {"routes", "routes.json"}}}};
  cfg.merge_patch(overrides);
  io::write_json(dir / "config.json", cfg);
  return cfg;
}

std::vector<RatingRecord> scripted_ratings(const std::vector<io::ParetoEntry>& archive,
                                           const std::vector<std::string>& network_ids, const RatingScale& scale,
                                           std::size_t raters, std::uint64_t seed) {
  std::vector<ObjectiveVector> objs;
  for (const auto& e : archive) objs.push_back(e.objectives);
  const auto bounds = ObjectiveBounds::of(objs);
  // Coverage matters most, then transfers, length and riding time.
  constexpr std::array<double, kObjectiveCount> kPreference{0.2, 0.4, 0.15, 0.25};

  std::vector<RatingRecord> out;
  for (std::size_t r = 0; r < raters; ++r) {
    Rng rng(seed * 1000003ULL + r);
    std::array<double, kObjectiveCount> pref{};
    double total = 0.0;
    for (std::size_t k = 0; k < kObjectiveCount; ++k) {
      pref[k] = kPreference[k] * std::uniform_real_distribution<double>(0.8, 1.2)(rng);
      total += pref[k];
    }
    std::normal_distribution<double> noise(0.0, 0.4);
    for (const auto& id : network_ids) {
      const auto it = std::find_if(archive.begin(), archive.end(), [&](const io::ParetoEntry& e) { return e.id == id; });
      if (it == archive.end()) throw DataError("network '" + id + "' is not in the archive");
      double badness = 0.0;
      for (std::size_t k = 0; k < kObjectiveCount; ++k) {
        const double span = bounds.max[k] - bounds.min[k];
        if (span > 0.0) badness += pref[k] * (it->objectives[k] - bounds.min[k]) / span;
      }
      const double score = scale.max - (scale.max - scale.min) * badness / total + noise(rng);
      out.push_back({id, "scripted-" + std::to_string(r + 1),
                     std::clamp(std::round(score), std::ceil(scale.min), std::floor(scale.max))});
    }
  }
  return out;
}

Pipeline::Pipeline(PipelineConfig config, fs::path out_dir, std::ostream* log)
    : config_(std::move(config)), out_(std::move(out_dir)), log_{log} {
  json cfg = config_.to_json();
  cfg.erase("data");
  json inputs = json::object();
  const auto& d = config_.data;
  const std::vector<std::pair<const char*, const std::optional<fs::path>*>> files{
      {"nodes", &d.nodes}, {"edges", &d.edges}, {"metro", &d.metro}, {"walk", &d.walk},
      {"demand", &d.demand}, {"routes", &d.routes}};
  for (const auto& [name, p] : files) {
    if (*p && fs::exists(**p)) inputs[name] = sha256_hex(io::read_text(**p));
    else inputs[name] = *p ? json("missing") : json(nullptr);
  }
  // Ratings are inputs too, but they are read (and hashed) by the rate stage.
  cfg["weightfit"].erase("ratings");
  const json identity{{"config", cfg}, {"inputs", inputs}};
  hash_ = sha256_hex(identity.dump());

  const fs::path mpath = out_ / "manifest.json";
  if (fs::exists(mpath)) {
    try {
      json old = io::read_json(mpath);
      if (old.value("manifest_hash", "") == hash_) manifest_ = old;
    } catch (const Error&) {
    }
  }
  if (manifest_.is_null()) {
    manifest_ = {{"manifest_hash", hash_}, {"config", config_.to_json()}, {"inputs", inputs}, {"stages", json::object()}};
  }
}

void Pipeline::note(const std::string& msg) const {
  if (log_) *log_ << msg << std::endl;
}

void Pipeline::record_stage(const std::string& name) {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::ostringstream ts;
  ts << std::put_time(std::gmtime(&now), "%Y-%m-%dT%H:%M:%SZ");
  manifest_["stages"][name] = {{"completed_at", ts.str()}};
  io::write_json(out_ / "manifest.json", manifest_);
}

template <class Fn>
void Pipeline::stage(const std::string& name, const std::string& artifact, bool force, Fn&& fn) {
  if (!force && fs::exists(out_ / artifact)) {
    try {
      if (io::read_json(out_ / artifact).value("manifest_hash", "") == hash_) {
        note("[" + name + "] up to date");
        return;
      }
    } catch (const Error&) {
    }
  }
  note("[" + name + "] running");
  try {
    fn();
  } catch (const StageError&) {
    throw;
  } catch (const Error& e) {
    throw StageError(name, e);
  }
  record_stage(name);
}

json Pipeline::load_artifact(const std::string& name, const std::string& stage) const {
  const fs::path p = out_ / name;
  if (!fs::exists(p)) throw MissingArtifactError(stage, p.string());
  json j = io::read_json(p);
  const auto h = j.is_object() ? j.value("manifest_hash", std::string{}) : std::string{};
  if (h != hash_) {
    throw DataError("artifact '" + p.string() + "' comes from a different run (manifest " + (h.empty() ? "none" : h) +
                    ", expected " + hash_ + "); rerun stage '" + stage + "'");
  }
  return j;
}

void Pipeline::save_artifact(const std::string& name, json j) const {
  j["manifest_hash"] = hash_;
  io::write_json(out_ / name, j);
}

RoadGraph Pipeline::load_road() const {
  load_artifact("preprocess.json", "preprocess");
  const fs::path n = out_ / "road_nodes.csv";
  const fs::path e = out_ / "road_edges.csv";
  if (!fs::exists(n)) throw MissingArtifactError("preprocess", n.string());
  if (!fs::exists(e)) throw MissingArtifactError("preprocess", e.string());
  return io::read_road(n, e);
}

RoutePool Pipeline::load_pool(const RoadGraph& road) const {
  return io::pool_from_json(load_artifact("routes.json", "genroutes"), road);
}

EvalContext Pipeline::load_context(const RoadGraph& road) const {
  auto pool = load_pool(road);
  auto grid = io::grid_from_json(load_artifact("grid.json", "preprocess"));
  auto metro = io::metro_from_json(load_artifact("metro.json", "preprocess"));
  auto walk = io::walk_from_json(load_artifact("walk.json", "preprocess"));
  const fs::path dpath = out_ / "demand.csv";
  if (!fs::exists(dpath)) throw MissingArtifactError("preprocess", dpath.string());
  auto demand = io::read_demand(dpath, grid.zone_count());
  return EvalContext::build(road, std::move(pool), std::move(metro), std::move(walk), std::move(grid),
                            std::move(demand), config_.evaluation);
}

BusNetwork Pipeline::baseline(const RoutePool& pool) const {
  std::vector<RouteId> ids;
  for (const auto& r : pool.routes())
    if (r.kind == RouteKind::kOriginal) ids.push_back(r.id);
  return BusNetwork::from(std::move(ids));
}

std::vector<io::ParetoEntry> Pipeline::load_pareto() const {
  return io::pareto_from_json(load_artifact("pareto.json", "optimize-mo"));
}

void Pipeline::preprocess(bool force) {
  stage("preprocess", "preprocess.json", force, [&] {
    const auto& d = config_.data;
    if (!d.nodes) throw ConfigError("config is missing data.nodes");
    if (!d.edges) throw ConfigError("config is missing data.edges");
    if (!d.demand) throw ConfigError("config is missing data.demand");
    for (const auto* p : {&d.nodes, &d.edges, &d.demand, &d.metro, &d.routes, &d.walk}) {
      if (*p && !fs::exists(**p)) throw ConfigError("input file '" + (*p)->string() + "' does not exist");
    }

    const RoadGraph raw = io::read_road(*d.nodes, *d.edges);
    MetroNetwork metro = d.metro ? io::metro_from_json(io::read_json(*d.metro)) : MetroNetwork{};
    const ZoneGrid grid = build_grid(raw, metro, config_.grid, config_.grid);
    const DemandMatrix demand = io::read_demand(*d.demand, grid.zone_count());
    if (!(demand.total_between_zones() > 0.0)) throw DataError("demand between distinct zones is zero");

    auto clustered = cluster_stops(raw, config_.cluster_threshold_m);

    WalkNetwork walk;
    if (d.walk) {
      walk = io::walk_from_json(io::read_json(*d.walk));
      walk.validate(config_.max_walk_m);
      for (const auto& e : walk.edges) {
        for (const Place& p : {e.from, e.to}) {
          const bool ok = p.kind == Place::Kind::kStop ? clustered.road.is_stop(NodeId{p.id})
                                                       : p.id >= 0 && static_cast<std::size_t>(p.id) < metro.stations.size();
          if (!ok) throw DataError("walking edge references a missing stop or station (" + std::to_string(p.id) + ")");
        }
      }
    } else {
      walk = WalkNetwork::build(clustered.road, metro, config_.max_walk_m);
    }

    std::vector<Route> baseline;
    std::size_t dropped = 0;
    if (d.routes) {
      for (auto& r : io::routes_from_json(io::read_json(*d.routes), raw)) {
        auto stops = remap_stops(r.stops, clustered.map);
        if (stops.size() < 2) {
          ++dropped;
          continue;
        }
        baseline.push_back(measure_route(clustered.road, r.id, r.kind, std::move(stops)));
      }
    }

    io::write_road(clustered.road, out_ / "road_nodes.csv", out_ / "road_edges.csv");
    io::write_demand(demand, out_ / "demand.csv");
    save_artifact("grid.json", io::to_json(grid));
    save_artifact("cluster_map.json", io::to_json(clustered.map));
    save_artifact("metro.json", io::to_json(metro));
    save_artifact("walk.json", io::to_json(walk));
    save_artifact("baseline_routes.json", io::routes_to_json(baseline));
    save_artifact("preprocess.json", {{"raw_stops", raw.stops().size()},
                                      {"clustered_stops", clustered.road.stops().size()},
                                      {"merges", clustered.map.merges.size()},
                                      {"walk_edges", walk.edges.size()},
                                      {"zones", grid.zone_count()},
                                      {"od_pairs", demand.entries().size()},
                                      {"baseline_routes", baseline.size()},
                                      {"baseline_routes_dropped", dropped}});
  });
}

void Pipeline::genroutes(bool force) {
  stage("genroutes", "routes.json", force, [&] {
    const RoadGraph road = load_road();
    const auto grid = io::grid_from_json(load_artifact("grid.json", "preprocess"));
    const auto demand = io::read_demand(out_ / "demand.csv", grid.zone_count());
    auto originals = io::routes_from_json(load_artifact("baseline_routes.json", "preprocess"), road);
    PoolReport rep;
    const RoutePool pool =
        make_route_pool(road, grid, demand, std::move(originals), config_.moea.bounds, config_.routegen, &rep);
    json j = io::pool_to_json(pool);
    j["report"] = {{"hub_pairs_considered", rep.hubs.pairs_considered},
                   {"hub_unreachable", rep.hubs.unreachable},
                   {"hub_out_of_bounds", rep.hubs.out_of_bounds},
                   {"traversal_requested", rep.traversal.requested},
                   {"traversal_produced", rep.traversal.produced},
                   {"traversal_shortfall", rep.traversal.shortfall},
                   {"dropped_length", rep.build.dropped_length},
                   {"dropped_duplicate", rep.build.dropped_duplicate},
                   {"selectable", pool.mutable_ids().size()},
                   {"fixed", pool.fixed_ids().size()}};
    if (rep.traversal.shortfall > 0) {
      note("[genroutes] only " + std::to_string(rep.traversal.produced) + " of " +
           std::to_string(rep.traversal.requested) + " traversal routes could be generated");
    }
    save_artifact("routes.json", std::move(j));
  });
}

namespace {

json history_json(const std::vector<SoGeneration>& h) {
  json arr = json::array();
  for (const auto& g : h) {
    arr.push_back({{"generation", g.generation}, {"best", g.best}, {"mean", g.mean},
                   {"constraint_violations", g.constraint_violations}});
  }
  return arr;
}

std::string mo_history_csv(const std::vector<GenerationStats>& h) {
  std::string s = "generation,evaluations,archive_size,first_front_size,min_tl,min_ud,min_ivt,min_ant,constraint_violations\n";
  for (const auto& g : h) {
    s += std::to_string(g.generation) + "," + std::to_string(g.evaluations) + "," + std::to_string(g.archive_size) +
         "," + std::to_string(g.first_front_size);
    for (std::size_t k = 0; k < kObjectiveCount; ++k) s += "," + io::format_double(g.population_min[k]);
    s += "," + std::to_string(g.constraint_violations) + "\n";
  }
  return s;
}

}  // namespace

void Pipeline::optimize_mo(bool force) {
  stage("optimize-mo", "pareto.json", force, [&] {
    const RoadGraph road = load_road();
    const EvalContext ctx = load_context(road);
    const auto res = run_nsga2(config_.moea, ctx);
    io::write_text(out_ / "history.csv", mo_history_csv(res.history));
    save_artifact("mo_stats.json", {{"evaluations", res.evaluations},
                                    {"generations", res.history.size()},
                                    {"constraint_violations", res.constraint_violations}});
    json j = io::pareto_to_json(io::pareto_entries(res.archive));
    j["seed"] = config_.moea.seed;
    save_artifact("pareto.json", std::move(j));
  });
}

void Pipeline::sample(bool force) {
  stage("sample", "sample.json", force, [&] {
    const auto entries = load_pareto();
    json arr = json::array();
    for (auto i : sample_indices(entries.size(), config_.rating.sample)) {
      arr.push_back({{"id", entries[i].id},
                     {"route_count", entries[i].genome.size()},
                     {"objectives", io::to_json(entries[i].objectives)}});
    }
    save_artifact("sample.json", {{"networks", arr}});
  });
}

void Pipeline::rate(bool force) {
  stage("rate", "ratings_summary.json", force, [&] {
    const auto entries = load_pareto();
    const json sample = load_artifact("sample.json", "sample");
    std::vector<std::string> ids;
    for (const auto& n : sample.at("networks")) ids.push_back(n.at("id").get<std::string>());

    std::vector<RatingRecord> records;
    std::string source;
    if (config_.rating.ratings) {
      if (!fs::exists(*config_.rating.ratings)) {
        throw ConfigError("ratings file '" + config_.rating.ratings->string() +
                          "' does not exist; collect ratings with 'serve' first");
      }
      records = io::read_ratings(*config_.rating.ratings);
      source = "file:" + sha256_hex(io::read_text(*config_.rating.ratings));
    } else {
      records = scripted_ratings(entries, ids, config_.rating.scale, config_.rating.scripted_raters,
                                 config_.rating.rater_seed);
      source = "scripted";
    }
    std::string jsonl;
    for (const auto& r : records) {
      if (!config_.rating.scale.contains(r.rating)) {
        throw DataError("rating " + io::format_double(r.rating) + " for '" + r.network_id + "' is outside the scale");
      }
      if (std::none_of(entries.begin(), entries.end(), [&](const io::ParetoEntry& e) { return e.id == r.network_id; })) {
        throw DataError("rating references unknown network '" + r.network_id + "'");
      }
      jsonl += io::rating_to_json(r).dump() + "\n";
    }
    io::write_text(out_ / "ratings.jsonl", jsonl);
    json agg = json::object();
    for (const auto& [id, s] : aggregate_ratings(records)) agg[id] = {{"mean", s.mean}, {"count", s.count}};
    save_artifact("ratings_summary.json", {{"source", source}, {"records", records.size()}, {"ratings", agg}});
  });
}

json weights_json(const std::vector<io::ParetoEntry>& entries, const std::vector<RatingRecord>& records,
                  const RatingScale& scale) {
  std::vector<FitSample> samples;
  json rows = json::array();
  std::vector<std::pair<std::string, RatingSummary>> used;
  for (const auto& [id, s] : aggregate_ratings(records)) {
    const auto it = std::find_if(entries.begin(), entries.end(), [&](const io::ParetoEntry& e) { return e.id == id; });
    if (it == entries.end()) throw DataError("rating references unknown network '" + id + "'");
    if (!scale.contains(s.mean)) throw DataError("mean rating of '" + id + "' is outside the scale");
    samples.push_back({it->objectives, s.mean});
    used.emplace_back(id, s);
  }
  const auto fit = fit_weights(samples, scale.max);
  for (std::size_t i = 0; i < samples.size(); ++i) {
    rows.push_back({{"network_id", used[i].first},
                    {"avg_rating", used[i].second.mean},
                    {"raters", used[i].second.count},
                    {"target", rating_target(used[i].second.mean, scale.max)},
                    {"residual", fit.residuals[i]}});
  }
  json j = io::to_json(fit.weights);
  j["max_rating"] = scale.max;
  j["residual_norm"] = fit.residual_norm;
  j["samples"] = rows;
  return j;
}

void Pipeline::fit_weights(bool force) {
  stage("fit-weights", "weights.json", force, [&] {
    load_artifact("ratings_summary.json", "rate");
    const auto entries = load_pareto();
    const auto records = io::read_ratings(out_ / "ratings.jsonl");
    save_artifact("weights.json", weights_json(entries, records, config_.rating.scale));
  });
}

void Pipeline::optimize_so(bool weighted, bool uniform, bool force) {
  const auto run_one = [&](const std::string& name, const std::string& artifact, auto make_scalarizer) {
    stage(name, artifact, force, [&] {
      const RoadGraph road = load_road();
      const EvalContext ctx = load_context(road);
      auto [scalarizer, desc] = make_scalarizer();
      const auto res = run_classic_ga(config_.classic, scalarizer, ctx);
      save_artifact(artifact, {{"scalarizer", desc},
                               {"seed", config_.classic.seed},
                               {"best",
                                {{"routes", io::to_json(res.best)["routes"]},
                                 {"route_count", res.best.size()},
                                 {"objectives", io::to_json(res.best_objectives)},
                                 {"fitness", res.best_fitness}}},
                               {"evaluations", res.evaluations},
                               {"constraint_violations", res.constraint_violations},
                               {"history", history_json(res.history)}});
    });
  };
  if (weighted) {
    run_one("optimize-so-weighted", "so_weighted.json", [&] {
      const WeightVector w = io::weights_from_json(load_artifact("weights.json", "fit-weights"));
      return std::pair{Scalarizer([w](const ObjectiveVector& v) { return scalarize_weighted(v, w); }),
                       json{{"kind", "weighted"}, {"weights", io::to_json(w)}}};
    });
  }
  if (uniform) {
    run_one("optimize-so-uniform", "so_uniform.json", [&] {
      std::vector<ObjectiveVector> objs;
      for (const auto& e : load_pareto()) objs.push_back(e.objectives);
      const auto b = ObjectiveBounds::of(objs);
      return std::pair{Scalarizer([b](const ObjectiveVector& v) { return scalarize_uniform(v, b); }),
                       json{{"kind", "uniform"}, {"min", b.min}, {"max", b.max}}};
    });
  }
}

namespace {

std::optional<double> reduction_pct(double base, double x) {
  if (base == 0.0) return std::nullopt;
  return 100.0 * (base - x) / std::abs(base);
}

json opt_json(const std::optional<double>& x) { return x ? json(*x) : json(nullptr); }

}  // namespace

void Pipeline::report(bool force) {
  // A current hash is not enough: the set of SO results it summarizes may have changed.
  if (!force && fs::exists(out_ / "report.json")) {
    try {
      const json old = io::read_json(out_ / "report.json");
      for (const char* name : {"weighted", "uniform"}) {
        const bool has = old.contains("scalarized") && old["scalarized"].contains(name);
        if (has != fs::exists(out_ / ("so_" + std::string(name) + ".json"))) force = true;
      }
    } catch (const Error&) {
    }
  }
  stage("report", "report.json", force, [&] {
    const RoadGraph road = load_road();
    const EvalContext ctx = load_context(road);
    const auto entries = load_pareto();
    const json mo_stats = load_artifact("mo_stats.json", "optimize-mo");

    std::vector<std::pair<std::string, json>> so;
    for (const auto& [name, file, stage_name] :
         {std::tuple{"weighted", "so_weighted.json", "optimize-so"}, std::tuple{"uniform", "so_uniform.json", "optimize-so"}}) {
      if (fs::exists(out_ / file)) so.emplace_back(name, load_artifact(file, stage_name));
    }
    if (so.empty()) throw MissingArtifactError("optimize-so", (out_ / "so_weighted.json").string());

    const BusNetwork base = baseline(ctx.pool);
    const Evaluation base_eval = evaluate_detailed(base, ctx);

    json networks = json::object();
    networks["baseline"] = {{"route_count", base.size()}, {"objectives", io::to_json(base_eval.objectives)}};
    json scalarized = json::object();
    json comparisons = json::object();
    json violations{{"optimize-mo", mo_stats.at("constraint_violations")}};

    io::write_json(out_ / "baseline.geojson",
                   network_geojson(base, ctx.pool, road, true,
                                   {{"network", "baseline"}, {"objectives", io::to_json(base_eval.objectives)}}));

    for (const auto& [name, art] : so) {
      const BusNetwork best = io::network_from_json(art.at("best"));
      const Evaluation eval = evaluate_detailed(best, ctx);

      Scalarizer f;
      if (name == "weighted") {
        const WeightVector w = io::weights_from_json(art.at("scalarizer").at("weights"));
        f = [w](const ObjectiveVector& v) { return scalarize_weighted(v, w); };
      } else {
        ObjectiveBounds b;
        b.min = art.at("scalarizer").at("min").get<std::array<double, kObjectiveCount>>();
        b.max = art.at("scalarizer").at("max").get<std::array<double, kObjectiveCount>>();
        f = [b](const ObjectiveVector& v) { return scalarize_uniform(v, b); };
      }
      std::size_t best_i = 0;
      for (std::size_t i = 1; i < entries.size(); ++i)
        if (f(entries[i].objectives) < f(entries[best_i].objectives)) best_i = i;

      const double fb = f(base_eval.objectives);
      const double fp = f(entries[best_i].objectives);
      const double fs_ = f(eval.objectives);
      scalarized[name] = {{"baseline", fb},
                          {"pareto_best", fp},
                          {"pareto_best_id", entries[best_i].id},
                          {"optimized", fs_},
                          {"pareto_best_reduction_pct", opt_json(reduction_pct(fb, fp))},
                          {"optimized_reduction_pct", opt_json(reduction_pct(fb, fs_))},
                          {"optimized_not_worse_than_pareto_best", fs_ <= fp}};
      networks["so_" + name] = {{"route_count", best.size()}, {"objectives", io::to_json(eval.objectives)}};
      comparisons["so_" + name] = to_json(compare_networks(base_eval, eval, config_.report));
      violations["optimize-so-" + name] = art.at("constraint_violations");
      io::write_json(out_ / ("so_" + name + ".geojson"),
                     network_geojson(best, ctx.pool, road, true,
                                     {{"network", "so_" + name}, {"objectives", io::to_json(eval.objectives)}}));
    }

    save_artifact("report.json", {{"networks", networks},
                                  {"scalarized", scalarized},
                                  {"comparisons", comparisons},
                                  {"constraint_violations", violations},
                                  {"pareto_size", entries.size()}});
  });
}

void Pipeline::run(const RunOptions& options) {
  if (options.skip_rating && !options.uniform_only) {
    throw ConfigError("--skip-rating leaves only the uniform scalarizer; pass --uniform as well");
  }
  const bool f = options.force;
  preprocess(f);
  genroutes(f);
  optimize_mo(f);
  sample(f);
  if (!options.skip_rating && !options.uniform_only) {
    rate(f);
    fit_weights(f);
  }
  if (options.uniform_only) {
    // A report from an earlier full run would mix in a stale weighted result.
    fs::remove(out_ / "so_weighted.json");
    fs::remove(out_ / "so_weighted.geojson");
  }
  optimize_so(!options.uniform_only, true, f);
  report(f);
}

}  // namespace tndp
