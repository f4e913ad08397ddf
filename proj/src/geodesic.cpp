#include "retrofit/geodesic.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace retrofit {

namespace {

constexpr double deg = std::numbers::pi / 180.0;

void check_coordinates(double lat, double lon) {
  if (!(std::isfinite(lat) && std::isfinite(lon) && std::abs(lat) <= 90.0 &&
        std::abs(lon) <= 180.0))
    throw std::invalid_argument("invalid coordinates");
}

// Spherical fallback for nearly antipodal points where the Vincenty iteration
// does not converge.
double mean_radius_great_circle_km(double lat1, double lon1, double lat2, double lon2) {
  const double r = (2.0 * wgs84::a + wgs84::b) / 3.0 / 1000.0;
  const double dlat = (lat2 - lat1) * deg;
  const double dlon = (lon2 - lon1) * deg;
  const double h = std::pow(std::sin(dlat / 2), 2) +
                   std::cos(lat1 * deg) * std::cos(lat2 * deg) * std::pow(std::sin(dlon / 2), 2);
  return 2.0 * r * std::asin(std::min(1.0, std::sqrt(h)));
}

}  // namespace

double geo_distance_km(double lat1, double lon1, double lat2, double lon2) {
  check_coordinates(lat1, lon1);
  check_coordinates(lat2, lon2);
  if (lat1 == lat2 && lon1 == lon2) return 0.0;

  using namespace wgs84;
  const double L = (lon2 - lon1) * deg;
  const double U1 = std::atan((1 - f) * std::tan(lat1 * deg));
  const double U2 = std::atan((1 - f) * std::tan(lat2 * deg));
  const double sinU1 = std::sin(U1), cosU1 = std::cos(U1);
  const double sinU2 = std::sin(U2), cosU2 = std::cos(U2);

  double lambda = L;
  double sinSigma = 0, cosSigma = 0, sigma = 0, cos2Alpha = 0, cos2SigmaM = 0;
  bool converged = false;
  for (int iter = 0; iter < 200; ++iter) {
    const double sinLambda = std::sin(lambda), cosLambda = std::cos(lambda);
    sinSigma = std::sqrt(std::pow(cosU2 * sinLambda, 2) +
                         std::pow(cosU1 * sinU2 - sinU1 * cosU2 * cosLambda, 2));
    if (sinSigma == 0.0) return 0.0;
    cosSigma = sinU1 * sinU2 + cosU1 * cosU2 * cosLambda;
    sigma = std::atan2(sinSigma, cosSigma);
    const double sinAlpha = cosU1 * cosU2 * sinLambda / sinSigma;
    cos2Alpha = 1 - sinAlpha * sinAlpha;
    cos2SigmaM = cos2Alpha != 0.0 ? cosSigma - 2 * sinU1 * sinU2 / cos2Alpha : 0.0;
    const double C = f / 16 * cos2Alpha * (4 + f * (4 - 3 * cos2Alpha));
    const double prev = lambda;
    lambda = L + (1 - C) * f * sinAlpha *
                     (sigma + C * sinSigma *
                                  (cos2SigmaM + C * cosSigma * (-1 + 2 * cos2SigmaM * cos2SigmaM)));
    if (std::abs(lambda - prev) < 1e-12) {
      converged = true;
      break;
    }
  }
  if (!converged) return mean_radius_great_circle_km(lat1, lon1, lat2, lon2);

  const double u2 = cos2Alpha * (a * a - b * b) / (b * b);
  const double A = 1 + u2 / 16384 * (4096 + u2 * (-768 + u2 * (320 - 175 * u2)));
  const double B = u2 / 1024 * (256 + u2 * (-128 + u2 * (74 - 47 * u2)));
  const double deltaSigma =
      B * sinSigma *
      (cos2SigmaM + B / 4 *
                        (cosSigma * (-1 + 2 * cos2SigmaM * cos2SigmaM) -
                         B / 6 * cos2SigmaM * (-3 + 4 * sinSigma * sinSigma) *
                             (-3 + 4 * cos2SigmaM * cos2SigmaM)));
  return b * A * (sigma - deltaSigma) / 1000.0;
}

Eigen::Vector3d ecef_km(double lat, double lon) {
  check_coordinates(lat, lon);
  using namespace wgs84;
  const double e2 = f * (2 - f);
  const double phi = lat * deg, lam = lon * deg;
  const double n = a / std::sqrt(1 - e2 * std::sin(phi) * std::sin(phi));
  return Eigen::Vector3d{n * std::cos(phi) * std::cos(lam), n * std::cos(phi) * std::sin(lam),
                         n * (1 - e2) * std::sin(phi)} /
         1000.0;
}

}  // namespace retrofit
