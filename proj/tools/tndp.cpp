#include <csignal>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "tndp/error.hpp"
#include "tndp/io.hpp"
#include "tndp/pipeline.hpp"
#include "tndp/preprocessing.hpp"
#include "tndp/server.hpp"

using namespace tndp;
using nlohmann::json;

namespace {

// Config file plus command-line overrides, applied before validation so the
// manifest sees the effective values.
struct ConfigArgs {
  std::string config;
  std::string workdir = "out";
  json overrides = json::object();

  template <class T>
  void set(const std::string& section, const std::string& key, const std::optional<T>& v) {
    if (v) overrides[section][key] = *v;
  }

  PipelineConfig load() const {
    json j;
    fs::path base;
    if (!config.empty()) {
      try {
        j = json::parse(io::read_text(config));
      } catch (const json::exception& e) {
        throw ConfigError("malformed config '" + config + "': " + e.what());
      } catch (const DataError& e) {
        throw ConfigError(e.what());
      }
      base = fs::path(config).parent_path();
    } else {
      j = json::object();
    }
    j.merge_patch(overrides);
    return PipelineConfig::from_json(j, base);
  }
};

void add_config_args(CLI::App* cmd, ConfigArgs& a) {
  cmd->add_option("-c,--config", a.config, "Pipeline config (JSON)");
  cmd->add_option("-w,--workdir", a.workdir, "Directory holding pipeline artifacts")->capture_default_str();
}

ApiServer* g_server = nullptr;

void on_signal(int) {
  if (g_server) g_server->stop();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Transit network design: multi-objective search, rating-driven weights, weighted search"};
  app.require_subcommand(1);
  app.fallthrough();
  bool force = false;
  app.add_flag("--force", force, "Rerun stages even when their artifacts are current");
  bool tl_exclude_fixed = false;
  app.add_flag("--tl-exclude-fixed", tl_exclude_fixed, "Leave fixed tram routes out of TL");
  bool quiet = false;
  app.add_flag("-q,--quiet", quiet, "No progress output");

  // synth
  auto* synth = app.add_subcommand("synth", "Write a synthetic city dataset and a matching config");
  SynthOptions so;
  std::string synth_out = "city";
  std::size_t s_pop = 40, s_iters = 100, s_min = 10, s_max = 30;
  synth->add_option("--seed", so.seed)->capture_default_str();
  synth->add_option("--junctions", so.n_junctions)->capture_default_str();
  synth->add_option("--stops", so.n_stops)->capture_default_str();
  synth->add_option("--grid", so.grid)->capture_default_str();
  synth->add_option("--side-m", so.side_m)->capture_default_str();
  synth->add_option("--bus-lines", so.bus_lines)->capture_default_str();
  synth->add_option("--tram-lines", so.tram_lines)->capture_default_str();
  synth->add_option("--metro-lines", so.metro_lines)->capture_default_str();
  synth->add_option("--pop", s_pop, "Population written to the config")->capture_default_str();
  synth->add_option("--iters", s_iters, "Iterations written to the config")->capture_default_str();
  synth->add_option("--min-routes", s_min)->capture_default_str();
  synth->add_option("--max-routes", s_max)->capture_default_str();
  synth->add_option("-o,--out", synth_out, "Output directory")->capture_default_str();

  ConfigArgs ca;
  std::optional<double> threshold;
  std::optional<int> grid;
  auto* pre = app.add_subcommand("preprocess", "Cluster stops, build the zone grid and walking network");
  add_config_args(pre, ca);
  pre->add_option("--threshold-m", threshold, "Cluster threshold in meters");
  pre->add_option("--grid", grid, "Zone grid size");

  std::optional<int> top_k, traversal;
  std::optional<std::uint64_t> route_seed;
  auto* gen = app.add_subcommand("genroutes", "Build the route pool: originals, hub connectors, traversal routes");
  add_config_args(gen, ca);
  gen->add_option("--top-k", top_k);
  gen->add_option("--traversal", traversal);
  gen->add_option("--seed", route_seed);

  std::string net_path, eval_out = "objectives.json", trips_out;
  auto* ev = app.add_subcommand("evaluate", "Evaluate one bus network");
  add_config_args(ev, ca);
  ev->add_option("--network", net_path, "net.json with {\"routes\": [...]}, or 'baseline'")->required();
  ev->add_option("--out", eval_out)->capture_default_str();
  ev->add_option("--trips", trips_out, "Per-OD trip dump (JSON lines)");

  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> pop, iters, min_routes, max_routes;
  std::optional<double> mut, cx;
  auto* mo = app.add_subcommand("optimize-mo", "NSGA-II over the route pool; writes pareto.json");
  add_config_args(mo, ca);
  mo->add_option("--seed", seed);
  mo->add_option("--pop", pop);
  mo->add_option("--iters", iters);
  mo->add_option("--mut", mut);
  mo->add_option("--cx", cx);
  mo->add_option("--min-routes", min_routes);
  mo->add_option("--max-routes", max_routes);

  std::optional<std::size_t> sample_n;
  auto* smp = app.add_subcommand("sample", "Pick archive networks for rating by crowding order");
  add_config_args(smp, ca);
  smp->add_option("-n", sample_n);

  std::optional<std::string> ratings_in;
  auto* rate = app.add_subcommand("rate", "Collect ratings from a file (or the scripted raters)");
  add_config_args(rate, ca);
  rate->add_option("--ratings", ratings_in, "Ratings JSON lines from a rating session");

  std::string fw_ratings, fw_pareto, fw_out = "weights.json";
  double fw_max = 10.0, fw_min = 1.0;
  auto* fw = app.add_subcommand("fit-weights", "Least-squares weights from ratings");
  add_config_args(fw, ca);
  fw->add_option("--ratings", fw_ratings, "Ratings JSON lines (standalone mode)");
  fw->add_option("--pareto", fw_pareto, "pareto.json (standalone mode)");
  fw->add_option("--max-rating", fw_max)->capture_default_str();
  fw->add_option("--min-rating", fw_min)->capture_default_str();
  fw->add_option("--out", fw_out, "Output in standalone mode")->capture_default_str();

  bool uniform = false, weighted = false;
  std::optional<std::uint64_t> so_seed;
  auto* sog = app.add_subcommand("optimize-so", "Classic GA under the fitted and/or uniform scalarizer");
  add_config_args(sog, ca);
  sog->add_flag("--uniform", uniform, "Min-max normalized uniform sum");
  sog->add_flag("--weighted", weighted, "Fitted weights (default when neither flag is given)");
  sog->add_option("--seed", so_seed);

  auto* rep = app.add_subcommand("report", "Compare optimized networks with the baseline");
  add_config_args(rep, ca);

  bool skip_rating = false, uniform_only = false;
  auto* pipe = app.add_subcommand("pipeline", "Run every stage, resuming from current artifacts");
  add_config_args(pipe, ca);
  pipe->add_flag("--skip-rating", skip_rating, "Skip rating and weight fitting (requires --uniform)");
  pipe->add_flag("--uniform", uniform_only, "Single-objective search with the uniform scalarizer only");

  std::string host = "127.0.0.1", serve_pareto, serve_ratings, static_dir;
  int port = 8080;
  auto* srv = app.add_subcommand("serve", "HTTP API for the rating session");
  add_config_args(srv, ca);
  srv->add_option("--host", host)->capture_default_str();
  srv->add_option("--port", port)->capture_default_str();
  srv->add_option("--pareto", serve_pareto, "pareto.json (defaults to the workdir's)");
  srv->add_option("--ratings", serve_ratings, "Append-only ratings store (default <workdir>/session_ratings.jsonl)");
  srv->add_option("--static", static_dir, "Directory with the built rating UI");
  srv->add_option("--scale-max", fw_max)->capture_default_str();
  srv->add_option("--scale-min", fw_min)->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : static_cast<int>(ExitCode::kConfig);
  }

  std::ostream* log = quiet ? nullptr : &std::cerr;
  ca.set("preprocessing", "cluster_threshold_m", threshold);
  ca.set("preprocessing", "grid", grid);
  ca.set("routegen", "top_k", top_k);
  ca.set("routegen", "traversal", traversal);
  ca.set("routegen", "seed", route_seed);
  ca.set("moea", "seed", seed);
  ca.set("moea", "population", pop);
  ca.set("moea", "iterations", iters);
  ca.set("moea", "mutation", mut);
  ca.set("moea", "crossover", cx);
  ca.set("moea", "min_routes", min_routes);
  ca.set("moea", "max_routes", max_routes);
  ca.set("weightfit", "sample", sample_n);
  ca.set("weightfit", "ratings", ratings_in);
  ca.set("classic_ga", "seed", so_seed);
  if (tl_exclude_fixed) ca.overrides["evaluation"]["tl_include_fixed"] = false;

  try {
    if (synth->parsed()) {
      const SyntheticCity city = synth_city(so);
      const fs::path out = synth_out;
      write_synth_dataset(city, out,
                          {{"preprocessing", {{"grid", so.grid}}},
                           {"routegen", {{"seed", so.seed}}},
                           {"moea",
                            {{"population", s_pop}, {"iterations", s_iters}, {"min_routes", s_min},
                             {"max_routes", s_max}, {"seed", so.seed}}}});
      if (log) *log << "wrote " << city.road.stops().size() << "-stop city to " << out << "\n";
      return 0;
    }

    const PipelineConfig cfg = ca.load();
    Pipeline p(cfg, ca.workdir, log);

    if (pre->parsed()) p.preprocess(force);
    if (gen->parsed()) p.genroutes(force);
    if (mo->parsed()) p.optimize_mo(force);
    if (smp->parsed()) p.sample(force);
    if (rate->parsed()) p.rate(force);
    if (sog->parsed()) p.optimize_so(weighted || !uniform, uniform, force);
    if (rep->parsed()) p.report(force);
    if (pipe->parsed()) p.run({skip_rating, uniform_only, force});

    if (ev->parsed()) {
      const RoadGraph road = p.load_road();
      const EvalContext ctx = p.load_context(road);
      const BusNetwork net = net_path == "baseline" ? p.baseline(ctx.pool) : io::network_from_json(io::read_json(net_path));
      NetworkBounds loose = cfg.moea.bounds;
      loose.min_routes = 0;
      loose.max_routes = ctx.pool.size();
      if (auto err = check_network(net, ctx.pool, loose)) throw DataError("network: " + *err);
      const Evaluation e = evaluate_detailed(net, ctx);
      json out{{"route_count", net.size()}, {"objectives", io::to_json(e.objectives)}, {"manifest_hash", p.manifest_hash()}};
      io::write_json(eval_out, out);
      if (!trips_out.empty()) {
        const auto lines = ctx.metro.lines();
        std::string s;
        for (const auto& t : e.trips) s += io::trip_to_json(t, ctx.places, lines).dump() + "\n";
        io::write_text(trips_out, s);
      }
      std::cout << out["objectives"].dump() << "\n";
    }

    if (fw->parsed()) {
      if (!fw_ratings.empty() || !fw_pareto.empty()) {
        if (fw_ratings.empty() || fw_pareto.empty()) throw ConfigError("standalone fit-weights needs --ratings and --pareto");
        const auto entries = io::pareto_from_json(io::read_json(fw_pareto));
        const auto records = io::read_ratings(fw_ratings);
        if (records.empty()) throw DataError("no ratings in '" + fw_ratings + "'");
        const json w = weights_json(entries, records, RatingScale{fw_min, fw_max});
        io::write_json(fw_out, w);
        std::cout << io::to_json(io::weights_from_json(w)).dump() << "\n";
      } else {
        p.fit_weights(force);
      }
    }

    if (srv->parsed()) {
      ServerData d;
      const RoadGraph road = p.load_road();
      const EvalContext ctx = p.load_context(road);
      d.archive = serve_pareto.empty() ? p.load_pareto() : io::pareto_from_json(io::read_json(serve_pareto));
      d.pool = ctx.pool;
      d.road = road;
      d.baseline = p.baseline(ctx.pool);
      d.baseline_objectives = evaluate(d.baseline, ctx);
      d.ratings_path = serve_ratings.empty() ? p.artifact("session_ratings.jsonl") : fs::path(serve_ratings);
      d.scale = {fw_min, fw_max};
      d.default_sample = cfg.rating.sample;
      if (!static_dir.empty()) d.static_dir = static_dir;
      ApiServer server(std::move(d));
      const int bound = server.bind(host, port);
      g_server = &server;
      std::signal(SIGINT, on_signal);
      std::signal(SIGTERM, on_signal);
      if (log) *log << "serving on http://" << host << ":" << bound << "\n";
      server.listen();
      g_server = nullptr;
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return static_cast<int>(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
