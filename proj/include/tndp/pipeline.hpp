#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "tndp/error.hpp"
#include "tndp/evaluation.hpp"
#include "tndp/io.hpp"
#include "tndp/moea.hpp"
#include "tndp/report.hpp"
#include "tndp/routegen.hpp"
#include "tndp/weightfit.hpp"

namespace tndp {

namespace fs = std::filesystem;

struct DataPaths {
  std::optional<fs::path> nodes;
  std::optional<fs::path> edges;
  std::optional<fs::path> metro;
  std::optional<fs::path> walk;  // regenerated when absent
  std::optional<fs::path> demand;
  std::optional<fs::path> routes;  // baseline bus + tram routes
};

struct RatingConfig {
  std::size_t sample{9};
  RatingScale scale{};
  // JSONL collected by `serve`; when absent the scripted raters are used.
  std::optional<fs::path> ratings;
  std::size_t scripted_raters{4};
  std::uint64_t rater_seed{1};
};

struct PipelineConfig {
  DataPaths data;
  double cluster_threshold_m{kClusterThresholdM};
  int grid{kGridSize};
  double max_walk_m{kMaxWalkM};
  PoolOptions routegen{};
  EvalParams evaluation{};
  GAConfig moea{};
  GAConfig classic{};
  RatingConfig rating{};
  ReportOptions report{};

  // Unknown keys and out-of-range values are ConfigErrors. Relative data paths
  // resolve against `base_dir`.
  static PipelineConfig from_json(const nlohmann::json& j, const fs::path& base_dir = {});
  static PipelineConfig load(const fs::path& path);
  nlohmann::json to_json() const;
};

std::string sha256_hex(const std::string& bytes);

// A failure inside a named pipeline stage; keeps the exit code of the cause.
class StageError : public Error {
 public:
  StageError(const std::string& stage, const Error& cause)
      : Error(cause.code(), "stage '" + stage + "': " + cause.what()), stage_{stage} {}
  const std::string& stage() const { return stage_; }

 private:
  std::string stage_;
};

// Ratings from simulated raters with a fixed hidden preference over the
// archive-normalized objectives; deterministic per seed.
std::vector<RatingRecord> scripted_ratings(const std::vector<io::ParetoEntry>& archive,
                                           const std::vector<std::string>& network_ids, const RatingScale& scale,
                                           std::size_t raters, std::uint64_t seed);

// weights.json body (no manifest hash): w0..w4, residuals and the rated samples.
nlohmann::json weights_json(const std::vector<io::ParetoEntry>& entries, const std::vector<RatingRecord>& records,
                            const RatingScale& scale);

// Writes a synthetic city's inputs plus a config.json referencing them into
// `dir`; `overrides` is merge-patched onto the generated config, which is returned.
nlohmann::json write_synth_dataset(const SyntheticCity& city, const fs::path& dir,
                                   const nlohmann::json& overrides = nlohmann::json::object());

struct RunOptions {
  bool skip_rating{false};
  bool uniform_only{false};
  bool force{false};
};

// Stage order: preprocess, genroutes, optimize-mo, sample, rate, fit-weights,
// optimize-so, report. Every JSON artifact carries the manifest hash; a stage is
// skipped when its artifact already exists with the current hash.
class Pipeline {
 public:
  Pipeline(PipelineConfig config, fs::path out_dir, std::ostream* log = nullptr);

  const PipelineConfig& config() const { return config_; }
  const fs::path& out_dir() const { return out_; }
  const std::string& manifest_hash() const { return hash_; }
  fs::path artifact(const std::string& name) const { return out_ / name; }

  void run(const RunOptions& options = {});

  void preprocess(bool force = false);
  void genroutes(bool force = false);
  void optimize_mo(bool force = false);
  void sample(bool force = false);
  void rate(bool force = false);
  void fit_weights(bool force = false);
  // Weighted and/or uniform classic GA runs.
  void optimize_so(bool weighted, bool uniform, bool force = false);
  void report(bool force = false);

  // Loaders for downstream consumers; a missing or foreign artifact names the
  // stage to rerun.
  RoadGraph load_road() const;
  RoutePool load_pool(const RoadGraph& road) const;
  EvalContext load_context(const RoadGraph& road) const;
  BusNetwork baseline(const RoutePool& pool) const;
  std::vector<io::ParetoEntry> load_pareto() const;

 private:
  template <class Fn>
  void stage(const std::string& name, const std::string& artifact, bool force, Fn&& fn);
  nlohmann::json load_artifact(const std::string& name, const std::string& stage) const;
  void save_artifact(const std::string& name, nlohmann::json j) const;
  void record_stage(const std::string& name);
  void note(const std::string& msg) const;

  PipelineConfig config_;
  fs::path out_;
  std::ostream* log_;
  std::string hash_;
  nlohmann::json manifest_;
};

}  // namespace tndp
