#include "tndp/moea.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "tndp/error.hpp"
#include "tndp/evaluation.hpp"
#include "tndp/pareto.hpp"

namespace tndp {

namespace {

std::size_t uniform_index(Rng& rng, std::size_t n) {
  return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
}

double uniform01(Rng& rng) { return std::uniform_real_distribution<double>(0.0, 1.0)(rng); }

// Mutable pool routes not in `g`, ascending.
std::vector<RouteId> outside(const BusNetwork& g, const RoutePool& pool) {
  std::vector<RouteId> out;
  for (RouteId id : pool.mutable_ids())
    if (!g.contains(id)) out.push_back(id);
  return out;
}

}  // namespace

void GAConfig::validate(const RoutePool& pool) const {
  if (population_size < 2) throw ConfigError("population size must be at least 2");
  if (!(mutation_prob >= 0.0 && mutation_prob <= 1.0)) throw ConfigError("mutation probability must lie in [0, 1]");
  if (!(crossover_prob >= 0.0 && crossover_prob <= 1.0)) throw ConfigError("crossover probability must lie in [0, 1]");
  if (bounds.min_routes < 1 || bounds.min_routes > bounds.max_routes) {
    throw ConfigError("route-count bounds must satisfy 1 <= min <= max");
  }
  if (pool.mutable_ids().size() < bounds.min_routes) {
    throw InfeasibleError("route pool has " + std::to_string(pool.mutable_ids().size()) +
                          " selectable routes, fewer than the minimum of " + std::to_string(bounds.min_routes));
  }
}

std::size_t GAConfig::max_routes(const RoutePool& pool) const {
  return std::min(bounds.max_routes, pool.mutable_ids().size());
}

BusNetwork random_network(const RoutePool& pool, const GAConfig& cfg, Rng& rng) {
  const std::size_t hi = cfg.max_routes(pool);
  const std::size_t k = std::uniform_int_distribution<std::size_t>(cfg.bounds.min_routes, hi)(rng);
  std::vector<RouteId> ids = pool.mutable_ids();
  for (std::size_t i = 0; i < k; ++i) std::swap(ids[i], ids[i + uniform_index(rng, ids.size() - i)]);
  ids.resize(k);
  return BusNetwork::from(std::move(ids));
}

BusNetwork mutate(const BusNetwork& g, const RoutePool& pool, const GAConfig& cfg, Rng& rng) {
  if (uniform01(rng) >= cfg.mutation_prob) return g;
  enum Action { kSwap, kInsert, kDelete };
  const auto spare = outside(g, pool);
  const bool can_swap = !g.routes.empty() && !spare.empty();
  const bool can_insert = g.size() < cfg.max_routes(pool) && !spare.empty();
  const bool can_delete = g.size() > cfg.bounds.min_routes;
  if (!can_swap && !can_insert && !can_delete) return g;

  Action action;
  do {
    action = static_cast<Action>(uniform_index(rng, 3));
  } while ((action == kSwap && !can_swap) || (action == kInsert && !can_insert) ||
           (action == kDelete && !can_delete));

  std::vector<RouteId> ids = g.routes;
  switch (action) {
    case kSwap:
      ids[uniform_index(rng, ids.size())] = spare[uniform_index(rng, spare.size())];
      break;
    case kInsert:
      ids.push_back(spare[uniform_index(rng, spare.size())]);
      break;
    case kDelete:
      ids.erase(ids.begin() + static_cast<std::ptrdiff_t>(uniform_index(rng, ids.size())));
      break;
  }
  return BusNetwork::from(std::move(ids));
}

std::pair<BusNetwork, BusNetwork> crossover(const BusNetwork& a, const BusNetwork& b, const GAConfig& cfg,
                                            Rng& rng) {
  if (uniform01(rng) >= cfg.crossover_prob) return {a, b};
  std::vector<RouteId> common, differ, both;
  std::set_intersection(a.routes.begin(), a.routes.end(), b.routes.begin(), b.routes.end(),
                        std::back_inserter(common));
  std::set_symmetric_difference(a.routes.begin(), a.routes.end(), b.routes.begin(), b.routes.end(),
                                std::back_inserter(differ));
  std::set_union(a.routes.begin(), a.routes.end(), b.routes.begin(), b.routes.end(), std::back_inserter(both));
  std::shuffle(differ.begin(), differ.end(), rng);

  std::vector<RouteId> c[2] = {common, common};
  for (std::size_t i = 0; i < differ.size(); ++i) c[i % 2].push_back(differ[i]);

  const std::size_t hi = std::max(cfg.bounds.min_routes, std::min(cfg.bounds.max_routes, both.size()));
  for (auto& child : c) {
    std::sort(child.begin(), child.end());
    while (child.size() > hi) child.erase(child.begin() + static_cast<std::ptrdiff_t>(uniform_index(rng, child.size())));
    if (child.size() < cfg.bounds.min_routes) {
      std::vector<RouteId> spare;
      std::set_difference(both.begin(), both.end(), child.begin(), child.end(), std::back_inserter(spare));
      std::shuffle(spare.begin(), spare.end(), rng);
      for (std::size_t i = 0; i < spare.size() && child.size() < cfg.bounds.min_routes; ++i) child.push_back(spare[i]);
    }
  }
  return {BusNetwork::from(std::move(c[0])), BusNetwork::from(std::move(c[1]))};
}

BusNetwork repair(const BusNetwork& g, const RoutePool& pool, const GAConfig& cfg, Rng& rng) {
  std::vector<RouteId> ids;
  for (RouteId id : g.routes) {
    if (pool.contains(id) && !pool.route(id).fixed() && cfg.bounds.route_len_ok(pool.route(id).length_m)) {
      ids.push_back(id);
    }
  }
  BusNetwork net = BusNetwork::from(std::move(ids));
  const std::size_t hi = cfg.max_routes(pool);
  if (net.size() > hi) {
    std::vector<RouteId> by_len = net.routes;
    std::stable_sort(by_len.begin(), by_len.end(), [&](RouteId x, RouteId y) {
      return pool.route(x).length_m > pool.route(y).length_m;
    });
    by_len.erase(by_len.begin(), by_len.begin() + static_cast<std::ptrdiff_t>(net.size() - hi));
    net = BusNetwork::from(std::move(by_len));
  }
  while (net.size() < cfg.bounds.min_routes) {
    const auto spare = outside(net, pool);
    if (spare.empty()) break;
    auto ids2 = net.routes;
    ids2.push_back(spare[uniform_index(rng, spare.size())]);
    net = BusNetwork::from(std::move(ids2));
  }
  return net;
}

bool ParetoArchive::offer(const BusNetwork& genome, const ObjectiveVector& objectives) {
  for (const auto& m : members_) {
    if (m.genome == genome || dominates(m.objectives, objectives)) return false;
  }
  std::erase_if(members_, [&](const ArchiveMember& m) { return dominates(objectives, m.objectives); });
  members_.push_back({genome, objectives, 0.0});
  truncate();
  return true;
}

void ParetoArchive::truncate() {
  if (capacity_ == 0) return;
  while (members_.size() > capacity_) {
    std::vector<ObjectiveVector> objs;
    for (const auto& m : members_) objs.push_back(m.objectives);
    const auto d = crowding_distance(objs);
    // Drop the most crowded member; on ties, the most recent one.
    std::size_t worst = 0;
    for (std::size_t i = 1; i < d.size(); ++i)
      if (d[i] <= d[worst]) worst = i;
    members_.erase(members_.begin() + static_cast<std::ptrdiff_t>(worst));
  }
}

std::vector<ArchiveMember> ParetoArchive::crowding_order() const {
  std::vector<ObjectiveVector> objs;
  for (const auto& m : members_) objs.push_back(m.objectives);
  const auto d = crowding_distance(objs);
  std::vector<std::size_t> order(members_.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return d[a] > d[b]; });
  std::vector<ArchiveMember> out;
  for (std::size_t i : order) {
    out.push_back(members_[i]);
    out.back().crowding = d[i];
  }
  return out;
}

std::vector<std::size_t> sample_indices(std::size_t archive_size, std::size_t n) {
  std::vector<std::size_t> out;
  if (n == 0 || archive_size == 0) return out;
  if (archive_size <= n) {
    out.resize(archive_size);
    std::iota(out.begin(), out.end(), 0);
    return out;
  }
  if (n == 1) return {0};
  for (std::size_t i = 0; i < n; ++i) out.push_back(i * (archive_size - 1) / (n - 1));
  return out;
}

const ObjectiveVector& CachedEvaluator::operator()(const BusNetwork& g) {
  auto it = cache_.find(g);
  if (it == cache_.end()) it = cache_.emplace(g, inner_(g)).first;
  return it->second;
}

namespace {

std::size_t count_violations(const std::vector<Individual>& pop, const RoutePool& pool, const GAConfig& cfg) {
  NetworkBounds b = cfg.bounds;
  b.max_routes = cfg.max_routes(pool);
  std::size_t bad = 0;
  for (const auto& ind : pop)
    if (check_network(ind.genome, pool, b)) ++bad;
  return bad;
}

// Assigns non-domination rank (1-based) and crowding distance within each front.
void rank_population(std::vector<Individual>& pop) {
  std::vector<ObjectiveVector> objs;
  for (const auto& ind : pop) objs.push_back(*ind.objectives);
  const auto fronts = nondominated_sort(objs);
  for (std::size_t f = 0; f < fronts.size(); ++f) {
    std::vector<ObjectiveVector> fo;
    for (auto i : fronts[f]) fo.push_back(objs[i]);
    const auto d = crowding_distance(fo);
    for (std::size_t k = 0; k < fronts[f].size(); ++k) {
      pop[fronts[f][k]].rank = f + 1;
      pop[fronts[f][k]].crowding = d[k];
    }
  }
}

// Crowded-comparison binary tournament.
const Individual& crowded_tournament(const std::vector<Individual>& pop, Rng& rng) {
  const auto& a = pop[uniform_index(rng, pop.size())];
  const auto& b = pop[uniform_index(rng, pop.size())];
  if (a.rank != b.rank) return a.rank < b.rank ? a : b;
  return b.crowding > a.crowding ? b : a;
}

const Individual& fitness_tournament(const std::vector<Individual>& pop, Rng& rng) {
  const auto& a = pop[uniform_index(rng, pop.size())];
  const auto& b = pop[uniform_index(rng, pop.size())];
  return b.fitness < a.fitness ? b : a;
}

ObjectiveVector population_min(const std::vector<Individual>& pop) {
  ObjectiveVector m = *pop.front().objectives;
  for (const auto& ind : pop)
    for (std::size_t k = 0; k < kObjectiveCount; ++k) m[k] = std::min(m[k], (*ind.objectives)[k]);
  return m;
}

std::vector<Individual> make_offspring(const std::vector<Individual>& parents, const RoutePool& pool,
                                       const GAConfig& cfg, Rng& rng, std::size_t count, bool crowded) {
  std::vector<Individual> out;
  while (out.size() < count) {
    const auto& p1 = crowded ? crowded_tournament(parents, rng) : fitness_tournament(parents, rng);
    const auto& p2 = crowded ? crowded_tournament(parents, rng) : fitness_tournament(parents, rng);
    auto [c1, c2] = crossover(p1.genome, p2.genome, cfg, rng);
    out.push_back({mutate(c1, pool, cfg, rng), std::nullopt});
    if (out.size() < count) out.push_back({mutate(c2, pool, cfg, rng), std::nullopt});
  }
  return out;
}

}  // namespace

MoeaResult run_nsga2(const GAConfig& cfg, const RoutePool& pool, const Evaluator& evaluate) {
  cfg.validate(pool);
  Rng rng(cfg.seed);
  CachedEvaluator eval(evaluate);
  MoeaResult res{ParetoArchive(cfg.archive_capacity ? cfg.archive_capacity : 2 * cfg.population_size), {}, {}};

  const auto evaluate_all = [&](std::vector<Individual>& pop) {
    for (auto& ind : pop) {
      if (!ind.objectives) ind.objectives = eval(ind.genome);
      res.archive.offer(ind.genome, *ind.objectives);
    }
  };
  // `bad`: genomes created this generation that break the bounds.
  const auto record = [&](std::size_t gen, const std::vector<Individual>& pop, std::size_t bad) {
    GenerationStats s;
    s.generation = gen;
    s.evaluations = eval.evaluations();
    s.archive_size = res.archive.size();
    s.first_front_size = static_cast<std::size_t>(
        std::count_if(pop.begin(), pop.end(), [](const Individual& i) { return i.rank == 1; }));
    s.population_min = population_min(pop);
    s.constraint_violations = bad;
    res.constraint_violations += s.constraint_violations;
    res.history.push_back(s);
  };

  std::vector<Individual> pop;
  for (std::size_t i = 0; i < cfg.population_size; ++i) {
    pop.push_back({repair(random_network(pool, cfg, rng), pool, cfg, rng), std::nullopt});
  }
  evaluate_all(pop);
  rank_population(pop);
  record(0, pop, count_violations(pop, pool, cfg));

  for (std::size_t gen = 1; gen <= cfg.iterations; ++gen) {
    auto children = make_offspring(pop, pool, cfg, rng, cfg.population_size, true);
    evaluate_all(children);
    const std::size_t born_bad = count_violations(children, pool, cfg);

    // (mu + lambda) with duplicate genomes held back as filler.
    std::vector<Individual> merged, spare;
    std::set<BusNetwork> seen;
    for (auto* src : {&pop, &children}) {
      for (auto& ind : *src) (seen.insert(ind.genome).second ? merged : spare).push_back(std::move(ind));
    }
    std::vector<ObjectiveVector> objs;
    for (const auto& ind : merged) objs.push_back(*ind.objectives);
    const auto fronts = nondominated_sort(objs);

    std::vector<Individual> next;
    for (const auto& front : fronts) {
      if (next.size() == cfg.population_size) break;
      if (next.size() + front.size() <= cfg.population_size) {
        for (auto i : front) next.push_back(merged[i]);
        continue;
      }
      std::vector<ObjectiveVector> fo;
      for (auto i : front) fo.push_back(objs[i]);
      const auto d = crowding_distance(fo);
      std::vector<std::size_t> order(front.size());
      std::iota(order.begin(), order.end(), 0);
      std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return d[a] > d[b]; });
      for (std::size_t k = 0; next.size() < cfg.population_size; ++k) next.push_back(merged[front[order[k]]]);
    }
    for (std::size_t i = 0; next.size() < cfg.population_size && i < spare.size(); ++i) next.push_back(spare[i]);
    pop = std::move(next);
    rank_population(pop);
    record(gen, pop, born_bad);
  }

  res.population = std::move(pop);
  res.evaluations = eval.evaluations();
  return res;
}

MoeaResult run_nsga2(const GAConfig& cfg, const EvalContext& ctx) {
  return run_nsga2(cfg, ctx.pool, [&ctx](const BusNetwork& g) { return evaluate(g, ctx); });
}

SoResult run_classic_ga(const GAConfig& cfg, const Scalarizer& scalarize, const RoutePool& pool,
                        const Evaluator& evaluate) {
  cfg.validate(pool);
  Rng rng(cfg.seed);
  CachedEvaluator eval(evaluate);
  SoResult res;
  bool have_best = false;

  const auto evaluate_all = [&](std::vector<Individual>& pop) {
    for (auto& ind : pop) {
      if (!ind.objectives) ind.objectives = eval(ind.genome);
      ind.fitness = scalarize(*ind.objectives);
      if (!have_best || ind.fitness < res.best_fitness) {
        have_best = true;
        res.best = ind.genome;
        res.best_objectives = *ind.objectives;
        res.best_fitness = ind.fitness;
      }
    }
  };
  const auto record = [&](std::size_t gen, const std::vector<Individual>& pop, std::size_t bad) {
    double sum = 0.0;
    for (const auto& ind : pop) sum += ind.fitness;
    SoGeneration g{gen, res.best_fitness, sum / static_cast<double>(pop.size()), bad};
    res.constraint_violations += g.constraint_violations;
    res.history.push_back(g);
  };

  std::vector<Individual> pop;
  for (std::size_t i = 0; i < cfg.population_size; ++i) {
    pop.push_back({repair(random_network(pool, cfg, rng), pool, cfg, rng), std::nullopt});
  }
  evaluate_all(pop);
  record(0, pop, count_violations(pop, pool, cfg));

  for (std::size_t gen = 1; gen <= cfg.iterations; ++gen) {
    std::vector<Individual> next{{res.best, res.best_objectives, res.best_fitness}};
    auto children = make_offspring(pop, pool, cfg, rng, cfg.population_size - 1, false);
    evaluate_all(children);
    const std::size_t born_bad = count_violations(children, pool, cfg);
    for (auto& c : children) next.push_back(std::move(c));
    pop = std::move(next);
    record(gen, pop, born_bad);
  }
  res.evaluations = eval.evaluations();
  return res;
}

SoResult run_classic_ga(const GAConfig& cfg, const Scalarizer& scalarize, const EvalContext& ctx) {
  return run_classic_ga(cfg, scalarize, ctx.pool, [&ctx](const BusNetwork& g) { return evaluate(g, ctx); });
}

}  // namespace tndp
