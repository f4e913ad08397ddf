#pragma once

#include <Eigen/Core>

namespace retrofit {

namespace wgs84 {
inline constexpr double a = 6378137.0;                 // semi-major axis, m
inline constexpr double f = 1.0 / 298.257223563;       // flattening
inline constexpr double b = a * (1.0 - f);             // semi-minor axis, m
}  // namespace wgs84

/// Geodesic distance on the WGS-84 ellipsoid in kilometers (Vincenty's inverse
/// formula). Throws std::invalid_argument for out-of-range coordinates.
double geo_distance_km(double lat1, double lon1, double lat2, double lon2);

/// Earth-centered Earth-fixed position on the ellipsoid surface, in km.
Eigen::Vector3d ecef_km(double lat, double lon);

/// Straight-line distance between two surface points. Never exceeds the
/// geodesic distance, so it is a valid lower bound for pruning.
inline double chord_km(const Eigen::Vector3d& p, const Eigen::Vector3d& q) {
  return (p - q).norm();
}

}  // namespace retrofit
