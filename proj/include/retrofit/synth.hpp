#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "retrofit/domain.hpp"
#include "retrofit/estimate.hpp"
#include "retrofit/prepared.hpp"

namespace retrofit {

enum class ScenarioKind { electric, gas, fuel_switch };

/// Which nuisance model the estimator's linear covariates fail to capture.
/// The hidden term is x1^2 - 1.
enum class Misspecification { none, outcome, propensity, both };

template <>
struct EnumTraits<ScenarioKind> {
  static constexpr std::string_view type_name = "ScenarioKind";
  static constexpr auto names = std::to_array<std::string_view>({"electric", "gas", "fuel_switch"});
};
template <>
struct EnumTraits<Misspecification> {
  static constexpr std::string_view type_name = "Misspecification";
  static constexpr auto names =
      std::to_array<std::string_view>({"none", "outcome", "propensity", "both"});
};

struct ScenarioSpec {
  ScenarioKind kind = ScenarioKind::electric;
  int n_treated = 500;
  int n_control_pool = 2500;
  double true_att_log = -0.105;

  // Selection: logit P(D = 1) = propensity_intercept + propensity_coefs . (x1, x2).
  double propensity_intercept = -1.6;
  std::array<double, 2> propensity_coefs{0.4, -0.3};
  // Untreated outcome change per unit of (x1, x2); nonzero breaks
  // unconditional parallel trends.
  std::array<double, 2> trend_coefs{0.03, -0.02};
  Misspecification misspecification = Misspecification::none;
  double hidden_outcome_strength = 0.08;
  double hidden_propensity_strength = 0.8;
  double noise_sd = 0.1;

  // Full-dataset generation.
  double mean_temp_c = 12.5;
  double seasonal_amplitude_c = 10.0;
  double daily_temp_sd = 1.5;
  int n_regions = 8;
  int first_year = 2019;
  int last_year = 2021;
  int weather_first_year = 2015;
  int weather_last_year = 2024;
  Date retrofit_from{std::chrono::year{2020}, std::chrono::month{3}, std::chrono::day{1}};
  Date retrofit_to{std::chrono::year{2020}, std::chrono::month{10}, std::chrono::day{31}};
  Measure measure = Measure::attic_insulation;
  double heat_pump_efficiency = 0.39;  // electricity used per kWh of gas replaced
  double gas_cooking_share = 0.3;      // treated fuel-switch homes keeping a cooking-only gas meter

  std::uint64_t seed = 1;

  /// Throws ValidationError on violated invariants.
  void validate() const;
};

/// One draw of a two-period panel with known ATT on the log scale.
struct SyntheticPanel {
  Eigen::VectorXd y0, y1, delta_y, d;
  Eigen::MatrixXd x;  // intercept, x1, x2
  double true_att = 0.0;
};

SyntheticPanel generate_panel(const ScenarioSpec& spec, std::uint64_t seed);

struct CoverageResult {
  int replications = 0;
  int failures = 0;
  double coverage = 0.0;
  double mean_bias = 0.0;
  double mean_se = 0.0;
  double sd_estimate = 0.0;
};

/// Repeats generate_panel + estimation; each replication uses an independent
/// seed derived from spec.seed.
CoverageResult coverage_experiment(const ScenarioSpec& spec, int replications,
                                   Estimator estimator = Estimator::drdid);

/// Effects built into a generated dataset.
struct GroundTruth {
  double att_log_heating = 0.0;        // log change of the heating slope
  double elec_kwh_per_year = 0.0;      // fuel switch: mean treated change in reference weather
  double gas_kwh_per_year = 0.0;
  std::vector<std::string> treated_ids;
  // Fuel switch: per treated home, change in kWh per year in reference weather.
  std::map<std::string, double> elec_effect;
  std::map<std::string, double> gas_effect;
};

struct SyntheticDataset {
  Dataset data;
  GroundTruth truth;
};

/// Homes, weather stations, daily consumption and retrofit events. Heating
/// consumption is proportional to daily HDD; the heating slope of treated homes
/// is multiplied by exp(true_att_log) after the retrofit date. Deterministic in
/// spec.seed.
SyntheticDataset generate(const ScenarioSpec& spec);

}  // namespace retrofit
