#include "tndp/geo.hpp"

#include <cmath>
#include <algorithm>
#include <numbers>

namespace tndp {

namespace {
constexpr double deg2rad(double d) { return d * std::numbers::pi / 180.0; }
constexpr double rad2deg(double r) { return r * 180.0 / std::numbers::pi; }
}  // namespace

double haversine_m(LatLon a, LatLon b) {
  const double phi1 = deg2rad(a.lat);
  const double phi2 = deg2rad(b.lat);
  const double dphi = deg2rad(b.lat - a.lat);
  const double dlambda = deg2rad(b.lon - a.lon);
  const double s = std::sin(dphi / 2) * std::sin(dphi / 2) +
                   std::cos(phi1) * std::cos(phi2) * std::sin(dlambda / 2) * std::sin(dlambda / 2);
  return 2.0 * kEarthRadiusM * std::asin(std::min(1.0, std::sqrt(s)));
}

PlanarXY to_planar(LatLon origin, LatLon p) {
  const double k = deg2rad(1.0) * kEarthRadiusM;
  return {(p.lon - origin.lon) * k * std::cos(deg2rad(origin.lat)), (p.lat - origin.lat) * k};
}

LatLon from_planar(LatLon origin, PlanarXY xy) {
  const double k = deg2rad(1.0) * kEarthRadiusM;
  return {origin.lat + xy.y / k, origin.lon + xy.x / (k * std::cos(deg2rad(origin.lat)))};
}

}  // namespace tndp
