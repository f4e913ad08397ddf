#pragma once

#include <cmath>
#include <string>

#include "retrofit/domain.hpp"

namespace retrofit {

enum class Scale { log, percent, kwh_per_year };
enum class Estimator { naive, twfe, drdid };

template <>
struct EnumTraits<Scale> {
  static constexpr std::string_view type_name = "Scale";
  static constexpr auto names = std::to_array<std::string_view>({"log", "percent", "kwh_per_year"});
};
template <>
struct EnumTraits<Estimator> {
  static constexpr std::string_view type_name = "Estimator";
  static constexpr auto names = std::to_array<std::string_view>({"naive", "twfe", "drdid"});
};

struct AttEstimate {
  double att = 0.0;
  double se = 0.0;
  double lcb = 0.0;
  double ucb = 0.0;
  double p_value = 1.0;
  Scale scale = Scale::log;
  Estimator estimator = Estimator::drdid;
  int n_treated = 0;
  int n_control = 0;
};

double normal_cdf(double x);
/// Inverse of the standard normal CDF for p in (0, 1).
double normal_quantile(double p);

struct Interval {
  double lcb;
  double ucb;
  double p_value;
};

/// Normal-reference interval att -/+ z se and two-sided p-value. Throws
/// std::invalid_argument when se <= 0.
Interval confidence_and_p(double att, double se, double level = 0.95);

AttEstimate make_estimate(double att, double se, Scale scale, Estimator estimator, int n_treated,
                          int n_control, double level = 0.95);

/// Maps att, se and both bounds of a log-scale estimate through (e^x - 1) 100.
/// The p-value is kept from the log scale.
AttEstimate to_percent(const AttEstimate& est);

inline double log_to_percent(double x) { return std::expm1(x) * 100.0; }

}  // namespace retrofit
