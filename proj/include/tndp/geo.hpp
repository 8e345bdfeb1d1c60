#pragma once

namespace tndp {

struct LatLon {
  double lat{0.0};
  double lon{0.0};
  friend bool operator==(const LatLon&, const LatLon&) = default;
};

inline constexpr double kEarthRadiusM = 6371008.8;

// Great-circle distance in meters.
double haversine_m(LatLon a, LatLon b);

// Travel time in seconds for a distance at a speed given in km/h.
constexpr double travel_time_s(double length_m, double speed_kmh) {
  return length_m / (speed_kmh / 3.6);
}

// Local equirectangular offset of `p` from `origin`, in meters (x east, y north).
struct PlanarXY {
  double x{0.0};
  double y{0.0};
};
PlanarXY to_planar(LatLon origin, LatLon p);
LatLon from_planar(LatLon origin, PlanarXY xy);

}  // namespace tndp
