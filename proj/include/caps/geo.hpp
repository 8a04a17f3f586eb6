#pragma once

namespace caps::geo {

inline constexpr double kEarthRadiusKm = 6371.0;
inline constexpr double kWalkingSpeedKmh = 5.0;

struct LatLon {
  double lat = 0.0;  // degrees
  double lon = 0.0;  // degrees

  friend bool operator==(const LatLon&, const LatLon&) = default;
};

// Great-circle distance on a spherical earth of radius kEarthRadiusKm.
double haversine_km(LatLon a, LatLon b);

// Deterministic travel time at walking speed, in seconds.
double walking_seconds(double distance_km);

}  // namespace caps::geo
