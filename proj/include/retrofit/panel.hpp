#pragma once

#include <Eigen/Core>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "retrofit/domain.hpp"
#include "retrofit/estimate.hpp"
#include "retrofit/weather.hpp"

namespace retrofit {

enum class Channel { total, heating, base };

template <>
struct EnumTraits<Channel> {
  static constexpr std::string_view type_name = "Channel";
  static constexpr auto names = std::to_array<std::string_view>({"total", "heating", "base"});
};

/// Period consumption levels in kWh per month.
struct PeriodValues {
  double pre = 0.0;
  double post = 0.0;
};

double channel_value(const MonthlyCell& cell, Channel channel);

/// Averages each calendar month across years within each period, then averages
/// the populated calendar months. Both periods need all 12 calendar months.
std::variant<PeriodValues, Reason> reduce_periods(std::span<const MonthlyCell> cells,
                                                  const Date& split,
                                                  Channel channel = Channel::total);

/// ln(P) on the log scale, 12 P on the kwh_per_year scale; nullopt when the
/// log of a non-positive value is requested.
std::optional<double> make_outcome(double period_value, Scale scale);

struct TwoPeriodObservation {
  std::string unit_id;     // distinct per (home, match)
  std::string home_id;
  std::string treated_id;  // the treated home this unit belongs to
  int d = 0;
  PeriodValues values;
  double y0 = 0.0;
  double y1 = 0.0;
  HomeRecord home;
};

enum class CovariateSet { electric, surface_only };

struct Design {
  Eigen::VectorXd delta_y;
  Eigen::VectorXd y0;
  Eigen::VectorXd y1;
  Eigen::VectorXd d;
  Eigen::MatrixXd x;  // first column is the intercept
  std::vector<std::string> columns;
  std::vector<std::string> warnings;
  std::vector<int> home_cluster;   // cluster index by home_id
  std::vector<int> match_cluster;  // cluster index by treated_id (matched set)
  int n_treated = 0;
  int n_control = 0;
};

/// Encodes observations into the estimation design. Constant columns are
/// dropped with a warning. Throws EstimationError with fewer than two units in
/// a group or when the encoded covariates are collinear.
Design build_design(std::span<const TwoPeriodObservation> observations, CovariateSet set);

}  // namespace retrofit
