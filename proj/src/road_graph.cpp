#include "tndp/road_graph.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <string>
#include <tuple>

#include "tndp/error.hpp"

namespace tndp {

RoadGraph::RoadGraph(std::vector<RoadNode> nodes, std::vector<RoadEdge> edges)
    : nodes_(std::move(nodes)), edges_(std::move(edges)) {
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    if (nodes_[i].id.v != static_cast<std::int32_t>(i)) {
      throw DataError("road node ids must be dense: expected " + std::to_string(i) + ", got " +
                      std::to_string(nodes_[i].id.v));
    }
  }
  std::vector<std::size_t> out_degree(nodes_.size(), 0);
  in_degree_.assign(nodes_.size(), 0);
  for (const auto& e : edges_) {
    if (!contains(e.u) || !contains(e.v)) {
      throw DataError("road edge " + std::to_string(e.u.v) + "->" + std::to_string(e.v.v) +
                      " references a missing node");
    }
    if (!(e.length_m > 0.0) || !std::isfinite(e.length_m) || !(e.time_s > 0.0) ||
        !std::isfinite(e.time_s)) {
      throw DataError("road edge " + std::to_string(e.u.v) + "->" + std::to_string(e.v.v) +
                      " needs positive finite length and time");
    }
    ++out_degree[e.u.index()];
    ++in_degree_[e.v.index()];
  }
  out_offsets_.assign(nodes_.size() + 1, 0);
  for (std::size_t i = 0; i < nodes_.size(); ++i) out_offsets_[i + 1] = out_offsets_[i] + out_degree[i];
  out_index_.resize(edges_.size());
  std::vector<std::size_t> fill(out_offsets_.begin(), out_offsets_.end() - 1);
  for (std::size_t k = 0; k < edges_.size(); ++k) out_index_[fill[edges_[k].u.index()]++] = k;
}

std::span<const std::size_t> RoadGraph::out_edges(NodeId id) const {
  return {out_index_.data() + out_offsets_[id.index()],
          out_offsets_[id.index() + 1] - out_offsets_[id.index()]};
}

std::vector<NodeId> RoadGraph::stops() const {
  std::vector<NodeId> out;
  for (const auto& n : nodes_)
    if (n.is_stop) out.push_back(n.id);
  return out;
}

RoadGraph RoadGraph::with_stop_flags(const std::vector<bool>& is_stop) const {
  auto nodes = nodes_;
  for (std::size_t i = 0; i < nodes.size() && i < is_stop.size(); ++i) nodes[i].is_stop = is_stop[i];
  return RoadGraph(std::move(nodes), edges_);
}

ShortestPathTree::ShortestPathTree(const RoadGraph& road, NodeId source) : source_{source} {
  const auto n = road.node_count();
  constexpr double inf = std::numeric_limits<double>::infinity();
  time_.assign(n, inf);
  length_.assign(n, inf);
  pred_.assign(n, -1);
  if (!road.contains(source)) return;

  using Label = std::tuple<double, double, std::int32_t>;
  std::priority_queue<Label, std::vector<Label>, std::greater<>> heap;
  time_[source.index()] = 0.0;
  length_[source.index()] = 0.0;
  heap.emplace(0.0, 0.0, source.v);
  while (!heap.empty()) {
    auto [t, l, u] = heap.top();
    heap.pop();
    const auto ui = static_cast<std::size_t>(u);
    if (t > time_[ui] || (t == time_[ui] && l > length_[ui])) continue;
    for (std::size_t k : road.out_edges(NodeId{u})) {
      const auto& e = road.edges()[k];
      const auto vi = e.v.index();
      const double nt = t + e.time_s;
      const double nl = l + e.length_m;
      if (nt < time_[vi] || (nt == time_[vi] && nl < length_[vi])) {
        time_[vi] = nt;
        length_[vi] = nl;
        pred_[vi] = u;
        heap.emplace(nt, nl, e.v.v);
      }
    }
  }
}

bool ShortestPathTree::reachable(NodeId target) const {
  return target.valid() && target.index() < time_.size() && std::isfinite(time_[target.index()]);
}

std::optional<RoadPath> ShortestPathTree::path_to(NodeId target) const {
  if (!reachable(target)) return std::nullopt;
  RoadPath path;
  path.time_s = time_[target.index()];
  path.length_m = length_[target.index()];
  for (std::int32_t v = target.v; v != -1; v = pred_[static_cast<std::size_t>(v)]) {
    path.nodes.push_back(NodeId{v});
    if (v == source_.v) break;
  }
  std::reverse(path.nodes.begin(), path.nodes.end());
  return path;
}

std::optional<RoadPath> shortest_time_path(const RoadGraph& road, NodeId from, NodeId to) {
  return ShortestPathTree(road, from).path_to(to);
}

}  // namespace tndp
