#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <ostream>

namespace tndp {

// Dense integer identifier tagged by what it indexes.
template <class Tag>
struct StrongId {
  std::int32_t v{-1};

  constexpr StrongId() = default;
  constexpr explicit StrongId(std::int32_t value) : v{value} {}

  constexpr bool valid() const { return v >= 0; }
  constexpr std::size_t index() const { return static_cast<std::size_t>(v); }

  friend constexpr auto operator<=>(StrongId, StrongId) = default;
  friend std::ostream& operator<<(std::ostream& os, StrongId id) { return os << id.v; }
};

struct NodeTag {};
struct RouteTag {};
struct StationTag {};
struct ZoneTag {};

using NodeId = StrongId<NodeTag>;
// A stop is identified by the road node it sits on.
using StopId = NodeId;
using RouteId = StrongId<RouteTag>;
using StationId = StrongId<StationTag>;
using ZoneId = StrongId<ZoneTag>;

}  // namespace tndp

template <class Tag>
struct std::hash<tndp::StrongId<Tag>> {
  std::size_t operator()(tndp::StrongId<Tag> id) const noexcept {
    return std::hash<std::int32_t>{}(id.v);
  }
};
