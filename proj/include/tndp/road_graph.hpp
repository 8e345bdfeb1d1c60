#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "tndp/geo.hpp"
#include "tndp/ids.hpp"

namespace tndp {

struct RoadNode {
  NodeId id;
  LatLon pos;
  bool is_stop{false};
};

struct RoadEdge {
  NodeId u;
  NodeId v;
  double length_m{0.0};
  double time_s{0.0};
};

// Directed road substrate. Node ids are dense: nodes()[i].id == NodeId{i}.
// Immutable after construction.
class RoadGraph {
 public:
  RoadGraph() = default;
  // Throws DataError when an invariant fails (dense ids, endpoints exist,
  // positive length and time).
  RoadGraph(std::vector<RoadNode> nodes, std::vector<RoadEdge> edges);

  std::size_t node_count() const { return nodes_.size(); }
  std::size_t edge_count() const { return edges_.size(); }
  const std::vector<RoadNode>& nodes() const { return nodes_; }
  const std::vector<RoadEdge>& edges() const { return edges_; }
  const RoadNode& node(NodeId id) const { return nodes_[id.index()]; }
  bool contains(NodeId id) const { return id.valid() && id.index() < nodes_.size(); }
  bool is_stop(NodeId id) const { return contains(id) && nodes_[id.index()].is_stop; }

  // Indices into edges() of edges leaving `id`, in input order.
  std::span<const std::size_t> out_edges(NodeId id) const;
  std::size_t in_degree(NodeId id) const { return in_degree_[id.index()]; }

  std::vector<NodeId> stops() const;

  // Same topology with a different stop marking.
  RoadGraph with_stop_flags(const std::vector<bool>& is_stop) const;

 private:
  std::vector<RoadNode> nodes_;
  std::vector<RoadEdge> edges_;
  std::vector<std::size_t> out_offsets_;
  std::vector<std::size_t> out_index_;
  std::vector<std::size_t> in_degree_;
};

struct RoadPath {
  std::vector<NodeId> nodes;
  double length_m{0.0};
  double time_s{0.0};
};

// Single-source shortest paths ordered lexicographically by (time, length),
// so every sub-path of a returned path is itself optimal.
class ShortestPathTree {
 public:
  ShortestPathTree(const RoadGraph& road, NodeId source);

  NodeId source() const { return source_; }
  bool reachable(NodeId target) const;
  double time_s(NodeId target) const { return time_[target.index()]; }
  double length_m(NodeId target) const { return length_[target.index()]; }
  std::optional<RoadPath> path_to(NodeId target) const;

 private:
  NodeId source_;
  std::vector<double> time_;
  std::vector<double> length_;
  std::vector<std::int32_t> pred_;
};

std::optional<RoadPath> shortest_time_path(const RoadGraph& road, NodeId from, NodeId to);

}  // namespace tndp
