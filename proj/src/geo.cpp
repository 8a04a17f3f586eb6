#include "caps/geo.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace caps::geo {

namespace {
constexpr double deg2rad(double d) { return d * std::numbers::pi / 180.0; }
}  // namespace

double haversine_km(LatLon a, LatLon b) {
  const double phi1 = deg2rad(a.lat);
  const double phi2 = deg2rad(b.lat);
  const double dphi = phi2 - phi1;
  const double dlambda = deg2rad(b.lon - a.lon);
  const double s1 = std::sin(dphi / 2.0);
  const double s2 = std::sin(dlambda / 2.0);
  double h = s1 * s1 + std::cos(phi1) * std::cos(phi2) * s2 * s2;
  h = std::clamp(h, 0.0, 1.0);
  return 2.0 * kEarthRadiusKm * std::asin(std::sqrt(h));
}

double walking_seconds(double distance_km) {
  return distance_km / kWalkingSpeedKmh * 3600.0;
}

}  // namespace caps::geo
