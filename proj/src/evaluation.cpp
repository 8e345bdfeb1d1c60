#include "tndp/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <stdexcept>
#include <utility>

#include "tndp/error.hpp"

namespace tndp {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr std::int32_t kAccessSlot = 0;
constexpr std::int32_t kWalkSlot = 1;
}  // namespace

std::size_t Trip::walk_stages() const {
  return static_cast<std::size_t>(
      std::count_if(stages.begin(), stages.end(), [](const Stage& s) { return s.kind == StageKind::kWalk; }));
}

int Trip::transfers() const {
  return static_cast<int>(stages.size()) - static_cast<int>(walk_stages()) - 1;
}

ZoneAccess ZoneAccess::build(const PlaceIndex& places, const RoadGraph& road, const MetroNetwork& metro,
                             const ZoneGrid& grid) {
  ZoneAccess za;
  za.links.resize(grid.zone_count());
  for (std::size_t v = 0; v < places.size(); ++v) {
    const Place p = places.place(static_cast<std::int32_t>(v));
    const LatLon pos = p.kind == Place::Kind::kStop ? road.node(NodeId{p.id}).pos
                                                    : metro.stations[static_cast<std::size_t>(p.id)].pos;
    const ZoneId z = grid.zone_of(pos);
    const double t = travel_time_s(haversine_m(grid.centroid(z), pos), kWalkSpeedKmh);
    za.links[z.index()].push_back({static_cast<std::int32_t>(v), t});
  }
  return za;
}

const std::vector<ZoneAccess::Link>& ZoneAccess::of(ZoneId z) const {
  static const std::vector<Link> kNone;
  return z.valid() && z.index() < links.size() ? links[z.index()] : kNone;
}

TripPlanner::TripPlanner(const CompleteNetwork& net, const ZoneAccess& access, double penalty_s, int max_transfers)
    : net_{&net}, access_{&access}, penalty_s_{penalty_s}, max_boardings_{max_transfers + 1} {
  if (max_transfers < 0) throw ConfigError("max_transfers must be non-negative");
  const auto n = net.vertex_count();
  std::vector<std::vector<Carrier>> incoming(n);
  for (const auto& e : net.edges()) {
    if (e.carrier.vehicle()) incoming[static_cast<std::size_t>(e.to)].push_back(e.carrier);
  }
  slot_base_.assign(n + 1, 0);
  for (std::size_t v = 0; v < n; ++v) {
    auto& c = incoming[v];
    std::sort(c.begin(), c.end());
    c.erase(std::unique(c.begin(), c.end()), c.end());
    slot_base_[v + 1] = slot_base_[v] + 2 + static_cast<std::int32_t>(c.size());
    slot_carrier_.push_back(Carrier{});
    slot_carrier_.push_back(Carrier{});
    for (const auto& k : c) slot_carrier_.push_back(k);
  }
  edge_target_slot_.reserve(net.edges().size());
  for (const auto& e : net.edges()) {
    if (!e.carrier.vehicle()) {
      edge_target_slot_.push_back(kWalkSlot);
      continue;
    }
    const auto& c = incoming[static_cast<std::size_t>(e.to)];
    edge_target_slot_.push_back(2 + static_cast<std::int32_t>(std::lower_bound(c.begin(), c.end(), e.carrier) - c.begin()));
  }
  const auto states = static_cast<std::size_t>(slot_base_[n]) * static_cast<std::size_t>(max_boardings_ + 1);
  cost_.assign(states, kInf);
  pred_state_.assign(states, -1);
  pred_edge_.assign(states, -1);
}

std::int32_t TripPlanner::state_id(std::int32_t vertex, std::int32_t slot, int boardings) const {
  return (slot_base_[static_cast<std::size_t>(vertex)] + slot) * (max_boardings_ + 1) + boardings;
}

void TripPlanner::search_from(ZoneId origin) {
  for (auto s : touched_) {
    cost_[static_cast<std::size_t>(s)] = kInf;
    pred_state_[static_cast<std::size_t>(s)] = -1;
    pred_edge_[static_cast<std::size_t>(s)] = -1;
  }
  touched_.clear();
  origin_ = origin;

  using Label = std::pair<double, std::int32_t>;
  std::priority_queue<Label, std::vector<Label>, std::greater<>> heap;
  for (const auto& link : access_->of(origin)) {
    const auto s = state_id(link.vertex, kAccessSlot, 0);
    if (link.time_s < cost_[static_cast<std::size_t>(s)]) {
      if (cost_[static_cast<std::size_t>(s)] == kInf) touched_.push_back(s);
      cost_[static_cast<std::size_t>(s)] = link.time_s;
      heap.emplace(link.time_s, s);
    }
  }

  const int width = max_boardings_ + 1;
  while (!heap.empty()) {
    const auto [c, s] = heap.top();
    heap.pop();
    if (c > cost_[static_cast<std::size_t>(s)]) continue;
    const std::int32_t global_slot = s / width;
    const int boardings = s % width;
    // Owning vertex: last base <= global_slot.
    const auto it = std::upper_bound(slot_base_.begin(), slot_base_.end(), global_slot);
    const auto v = static_cast<std::int32_t>(it - slot_base_.begin()) - 1;
    const std::int32_t slot = global_slot - slot_base_[static_cast<std::size_t>(v)];
    const Carrier& arrived = slot_carrier_[static_cast<std::size_t>(global_slot)];

    for (std::size_t k : net_->out_edges(v)) {
      const auto& e = net_->edges()[k];
      int nb = boardings;
      double penalty = slot == kAccessSlot ? 0.0 : penalty_s_;
      if (e.carrier.vehicle()) {
        if (slot >= 2 && arrived == e.carrier) {
          penalty = 0.0;
        } else if (++nb > max_boardings_) {
          continue;
        }
      }
      const auto ns = state_id(e.to, edge_target_slot_[k], nb);
      const double nc = c + e.time_s + penalty;
      auto& cur = cost_[static_cast<std::size_t>(ns)];
      if (nc < cur) {
        if (cur == kInf) touched_.push_back(ns);
        cur = nc;
        pred_state_[static_cast<std::size_t>(ns)] = s;
        pred_edge_[static_cast<std::size_t>(ns)] = static_cast<std::int32_t>(k);
        heap.emplace(nc, ns);
      }
    }
  }
}

std::optional<TripPlanner::Target> TripPlanner::best_target(ZoneId dest) const {
  std::optional<Target> best;
  double walk_only = kInf;
  for (const auto& link : access_->of(dest)) {
    const auto v = static_cast<std::size_t>(link.vertex);
    for (std::int32_t slot = kWalkSlot; slot < slot_base_[v + 1] - slot_base_[v]; ++slot) {
      for (int b = 1; b <= max_boardings_; ++b) {
        const auto s = state_id(link.vertex, slot, b);
        const double c = cost_[static_cast<std::size_t>(s)] + link.time_s;
        if (c < kInf && (!best || c < best->cost)) best = Target{s, c, link.time_s};
      }
    }
    walk_only = std::min(walk_only, cost_[static_cast<std::size_t>(state_id(link.vertex, kWalkSlot, 0))] + link.time_s);
  }
  // Walking the whole way is cheaper: transit does not serve this pair. This
  // also keeps the returned trip a simple path, since any loop could be cut.
  if (best && walk_only < best->cost) return std::nullopt;
  return best;
}

std::optional<Trip> TripPlanner::trip_to(ZoneId dest) const {
  if (dest == origin_) return std::nullopt;
  const auto target = best_target(dest);
  if (!target) return std::nullopt;

  std::vector<std::int32_t> edges;
  std::int32_t s = target->state;
  while (pred_state_[static_cast<std::size_t>(s)] >= 0) {
    edges.push_back(pred_edge_[static_cast<std::size_t>(s)]);
    s = pred_state_[static_cast<std::size_t>(s)];
  }
  std::reverse(edges.begin(), edges.end());

  Trip trip;
  trip.origin = origin_;
  trip.destination = dest;
  trip.access_s = cost_[static_cast<std::size_t>(s)];
  trip.egress_s = target->egress;
  trip.t_wal = trip.access_s + trip.egress_s;
  for (auto k : edges) {
    const auto& e = net_->edges()[static_cast<std::size_t>(k)];
    const Triplet tri{e.from, e.to, e.carrier};
    const bool extends = e.carrier.vehicle() && !trip.stages.empty() &&
                         trip.stages.back().kind != StageKind::kWalk &&
                         trip.stages.back().triplets.back().carrier == e.carrier;
    if (!extends) {
      Stage st;
      st.kind = e.carrier.kind == CarrierKind::kBus     ? StageKind::kBus
                : e.carrier.kind == CarrierKind::kMetro ? StageKind::kMetro
                                                        : StageKind::kWalk;
      trip.stages.push_back(std::move(st));
    }
    trip.stages.back().triplets.push_back(tri);
    trip.stages.back().duration_s += e.time_s;
    (e.carrier.vehicle() ? trip.t_inv : trip.t_wal) += e.time_s;
  }
  trip.generalized_cost =
      trip.t_inv + trip.t_wal + penalty_s_ * static_cast<double>(trip.stages.size() - 1);
  return trip;
}

std::optional<Trip> plan_trip(const CompleteNetwork& net, const ZoneAccess& access, ZoneId s, ZoneId t,
                              double penalty_s, int max_transfers) {
  if (s == t) throw std::invalid_argument("plan_trip needs distinct origin and destination zones");
  TripPlanner planner(net, access, penalty_s, max_transfers);
  planner.search_from(s);
  return planner.trip_to(t);
}

EvalContext EvalContext::build(const RoadGraph& road, RoutePool pool, MetroNetwork metro, WalkNetwork walk,
                               ZoneGrid grid, DemandMatrix demand, EvalParams params) {
  EvalContext ctx;
  ctx.places = PlaceIndex::build(pool, metro, walk);
  ctx.access = ZoneAccess::build(ctx.places, road, metro, grid);
  for (RouteId id : pool.fixed_ids()) ctx.fixed_length_m += pool.route(id).length_m;
  ctx.pool = std::move(pool);
  ctx.metro = std::move(metro);
  ctx.walk = std::move(walk);
  ctx.grid = std::move(grid);
  ctx.demand = std::move(demand);
  ctx.params = params;
  return ctx;
}

namespace {

Evaluation run_evaluation(const BusNetwork& bus, const EvalContext& ctx, bool keep_trips) {
  const double total = ctx.demand.total_between_zones();
  if (!(total > 0.0)) throw DataError("total demand between distinct zones must be positive");

  const CompleteNetwork net = assemble_complete(bus, ctx.metro, ctx.walk, ctx.pool, ctx.places);
  TripPlanner planner(net, ctx.access, ctx.params.transfer_penalty_s, ctx.params.max_transfers);

  Evaluation out;
  double covered = 0.0;
  double ivt = 0.0;
  double transfers = 0.0;
  ZoneId searched;
  for (const auto& [pair, q] : ctx.demand.entries()) {
    const auto [s, t] = pair;
    if (s == t) continue;
    if (q <= 0.0 && !keep_trips) continue;
    if (s != searched) {
      planner.search_from(s);
      searched = s;
    }
    auto trip = planner.trip_to(t);
    if (trip) {
      covered += q;
      ivt += trip->t_inv * q;
      transfers += trip->transfers() * q;
    }
    if (keep_trips) out.trips.push_back({s, t, q, std::move(trip)});
  }

  double tl = ctx.params.tl_include_fixed ? ctx.fixed_length_m : 0.0;
  for (RouteId id : bus.routes) tl += ctx.pool.route(id).length_m;
  out.objectives.tl() = tl;
  out.objectives.ud() = std::clamp(1.0 - covered / total, 0.0, 1.0);
  out.objectives.ivt() = ivt;
  out.objectives.ant() = covered > 0.0 ? transfers / covered : 0.0;
  return out;
}

}  // namespace

ObjectiveVector evaluate(const BusNetwork& bus, const EvalContext& ctx) {
  return run_evaluation(bus, ctx, false).objectives;
}

Evaluation evaluate_detailed(const BusNetwork& bus, const EvalContext& ctx) {
  return run_evaluation(bus, ctx, true);
}

}  // namespace tndp
