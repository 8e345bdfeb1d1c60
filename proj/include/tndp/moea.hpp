#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <vector>

#include "tndp/objectives.hpp"
#include "tndp/transit_graph.hpp"

namespace tndp {

struct EvalContext;

using Rng = std::mt19937_64;
using Evaluator = std::function<ObjectiveVector(const BusNetwork&)>;
using Scalarizer = std::function<double(const ObjectiveVector&)>;

struct GAConfig {
  std::size_t population_size{200};
  std::size_t iterations{300};
  double mutation_prob{0.1};
  double crossover_prob{0.8};
  // Route-count bounds; route-length bounds are enforced by the pool.
  NetworkBounds bounds{};
  std::uint64_t seed{1};
  // Elitist archive size limit; 0 means twice the population size.
  std::size_t archive_capacity{0};

  // Throws ConfigError on inconsistent settings and InfeasibleError when the
  // pool cannot supply min_routes selectable routes.
  void validate(const RoutePool& pool) const;
  std::size_t max_routes(const RoutePool& pool) const;
};

struct Individual {
  BusNetwork genome;
  std::optional<ObjectiveVector> objectives;
  double fitness{0.0};
  std::size_t rank{0};
  double crowding{0.0};
};

BusNetwork random_network(const RoutePool& pool, const GAConfig& cfg, Rng& rng);

// Swap / insert / delete, one of them with probability mutation_prob; actions
// that would break the route-count bounds are re-drawn.
BusNetwork mutate(const BusNetwork& g, const RoutePool& pool, const GAConfig& cfg, Rng& rng);

// Uniform route exchange: routes both parents share go to both children, the
// rest are dealt alternately in shuffled order, then counts are clamped to the
// bounds using routes from the parents' union.
std::pair<BusNetwork, BusNetwork> crossover(const BusNetwork& a, const BusNetwork& b, const GAConfig& cfg,
                                            Rng& rng);

// Drops the longest routes above max_routes, adds random pool routes below
// min_routes, removes ids that are fixed, unknown or out of length bounds.
BusNetwork repair(const BusNetwork& g, const RoutePool& pool, const GAConfig& cfg, Rng& rng);

struct ArchiveMember {
  BusNetwork genome;
  ObjectiveVector objectives;
  double crowding{0.0};
};

// Mutually non-dominated set of distinct genomes.
class ParetoArchive {
 public:
  explicit ParetoArchive(std::size_t capacity = 0) : capacity_{capacity} {}

  // Returns true when the candidate was added.
  bool offer(const BusNetwork& genome, const ObjectiveVector& objectives);
  const std::vector<ArchiveMember>& members() const { return members_; }
  std::size_t size() const { return members_.size(); }

  // Members ordered by crowding distance, descending (ties keep insertion order),
  // with crowding filled in.
  std::vector<ArchiveMember> crowding_order() const;

 private:
  void truncate();
  std::size_t capacity_;
  std::vector<ArchiveMember> members_;
};

// n evenly spread positions floor(i (N-1) / (n-1)) in a crowding-ordered list,
// always including both ends; all of it when N <= n.
std::vector<std::size_t> sample_indices(std::size_t archive_size, std::size_t n);

struct GenerationStats {
  std::size_t generation{0};
  std::size_t evaluations{0};
  std::size_t archive_size{0};
  std::size_t first_front_size{0};
  ObjectiveVector population_min;
  std::size_t constraint_violations{0};
};

struct MoeaResult {
  ParetoArchive archive;
  std::vector<Individual> population;
  std::vector<GenerationStats> history;
  std::size_t evaluations{0};
  std::size_t constraint_violations{0};
};

MoeaResult run_nsga2(const GAConfig& cfg, const RoutePool& pool, const Evaluator& evaluate);
MoeaResult run_nsga2(const GAConfig& cfg, const EvalContext& ctx);

struct SoGeneration {
  std::size_t generation{0};
  double best{0.0};  // best fitness seen so far
  double mean{0.0};  // mean fitness of the current population
  std::size_t constraint_violations{0};
};

struct SoResult {
  BusNetwork best;
  ObjectiveVector best_objectives;
  double best_fitness{0.0};
  std::vector<SoGeneration> history;
  std::size_t evaluations{0};
  std::size_t constraint_violations{0};
};

// Elitist generational GA minimizing scalarize(objectives).
SoResult run_classic_ga(const GAConfig& cfg, const Scalarizer& scalarize, const RoutePool& pool,
                        const Evaluator& evaluate);
SoResult run_classic_ga(const GAConfig& cfg, const Scalarizer& scalarize, const EvalContext& ctx);

// Memoizing wrapper so each distinct genome is evaluated once per run.
class CachedEvaluator {
 public:
  explicit CachedEvaluator(Evaluator inner) : inner_(std::move(inner)) {}
  const ObjectiveVector& operator()(const BusNetwork& g);
  std::size_t evaluations() const { return cache_.size(); }

 private:
  Evaluator inner_;
  std::map<BusNetwork, ObjectiveVector> cache_;
};

}  // namespace tndp
