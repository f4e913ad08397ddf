#include "retrofit/estimate.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace retrofit {

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("normal_quantile: p must be in (0, 1)");
  // Acklam's rational approximation, then one Halley refinement.
  static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                 -2.759285104469687e+02, 1.383577518672690e+02,
                                 -3.066479806614716e+01, 2.506628277459239e+00};
  static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                 -1.556989798598866e+02, 6.680131188771972e+01,
                                 -1.328068155288572e+01};
  static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                 -2.400758277161838e+00, -2.549732539343734e+00,
                                 4.374664141464968e+00,  2.938163982698783e+00};
  static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                                 2.445134137142996e+00, 3.754408661907416e+00};
  constexpr double lo = 0.02425;
  double x;
  if (p < lo) {
    const double q = std::sqrt(-2 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1);
  } else if (p <= 1 - lo) {
    const double q = p - 0.5, r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1);
  } else {
    const double q = std::sqrt(-2 * std::log1p(-p));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1);
  }
  const double e = normal_cdf(x) - p;
  const double u = e * std::sqrt(2 * std::numbers::pi) * std::exp(x * x / 2);
  return x - u / (1 + x * u / 2);
}

Interval confidence_and_p(double att, double se, double level) {
  if (!(se > 0.0)) throw std::invalid_argument("confidence_and_p: se must be > 0");
  if (!(level > 0.0 && level < 1.0)) throw std::invalid_argument("confidence_and_p: bad level");
  const double z = normal_quantile(0.5 + level / 2);
  const double p = std::min(1.0, 2.0 * (1.0 - normal_cdf(std::abs(att / se))));
  return {att - z * se, att + z * se, p};
}

AttEstimate make_estimate(double att, double se, Scale scale, Estimator estimator, int n_treated,
                          int n_control, double level) {
  const auto ci = confidence_and_p(att, se, level);
  return {att, se, ci.lcb, ci.ucb, ci.p_value, scale, estimator, n_treated, n_control};
}

AttEstimate to_percent(const AttEstimate& est) {
  if (est.scale != Scale::log) throw std::invalid_argument("to_percent: estimate is not on log scale");
  AttEstimate out = est;
  out.att = log_to_percent(est.att);
  out.se = log_to_percent(est.se);
  out.lcb = log_to_percent(est.lcb);
  out.ucb = log_to_percent(est.ucb);
  out.scale = Scale::percent;
  return out;
}

}  // namespace retrofit
