#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "retrofit/date.hpp"

namespace retrofit {

// Error categories. The CLI maps each to a distinct exit status.
struct ValidationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct EstimationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class HomeType { house, flat };
enum class AgeRange { pre1919, y1919_1945, y1946_1970, y1971_1990, y1991_2005, post2005, unknown };
enum class Heating { electric, heat_pump, gas, other };
enum class SecondaryHeating {
  none, electric, fireplace, gas, heat_pump, oil, pellet_stove, propane, wood_stove, other
};
enum class WaterHeating {
  electric, gas, heat_pump, thermodynamic, solar, oil, propane, shared, other, missing
};
enum class Energy { electricity, gas };
enum class Measure {
  attic_insulation,
  wall_insulation,
  basement_insulation,
  window_replacement,
  heat_pump_air_air,
  heat_pump_air_water,
  comprehensive,  // derived, never declared
};

// Machine-readable reason attached to every exclusion in the pipeline.
enum class Reason {
  invalid_record,
  no_consumption,
  no_station,
  missing_weather,
  no_base_months,
  coverage_pre,
  coverage_post,
  measure_overlap,
  measure_not_analyzed,
  heating_system_mismatch,
  no_heating_pre,
  no_heating_post,
  other_energy_heating,
  gas_heating_after,
  solar_panels,
  declared_retrofit,
  no_feasible_controls,
  window_coverage,
  nonpositive_outcome,
};

template <class E>
struct EnumTraits;

#define RETROFIT_ENUM_NAMES(E, ...)                                          \
  template <>                                                                \
  struct EnumTraits<E> {                                                     \
    static constexpr std::string_view type_name = #E;                        \
    static constexpr auto names = std::to_array<std::string_view>({__VA_ARGS__}); \
  };

RETROFIT_ENUM_NAMES(HomeType, "house", "flat")
RETROFIT_ENUM_NAMES(AgeRange, "pre1919", "1919_1945", "1946_1970", "1971_1990", "1991_2005",
                    "post2005", "unknown")
RETROFIT_ENUM_NAMES(Heating, "electric", "heat_pump", "gas", "other")
RETROFIT_ENUM_NAMES(SecondaryHeating, "none", "electric", "fireplace", "gas", "heat_pump", "oil",
                    "pellet_stove", "propane", "wood_stove", "other")
RETROFIT_ENUM_NAMES(WaterHeating, "electric", "gas", "heat_pump", "thermodynamic", "solar", "oil",
                    "propane", "shared", "other", "missing")
RETROFIT_ENUM_NAMES(Energy, "electricity", "gas")
RETROFIT_ENUM_NAMES(Measure, "attic_insulation", "wall_insulation", "basement_insulation",
                    "window_replacement", "heat_pump_air_air", "heat_pump_air_water",
                    "comprehensive")
RETROFIT_ENUM_NAMES(Reason, "invalid_record", "no_consumption", "no_station", "missing_weather",
                    "no_base_months", "coverage_pre", "coverage_post", "measure_overlap",
                    "measure_not_analyzed", "heating_system_mismatch", "no_heating_pre",
                    "no_heating_post", "other_energy_heating", "gas_heating_after",
                    "solar_panels", "declared_retrofit", "no_feasible_controls",
                    "window_coverage", "nonpositive_outcome")

#undef RETROFIT_ENUM_NAMES

template <class E>
std::string_view to_string(E value) {
  return EnumTraits<E>::names[static_cast<std::size_t>(value)];
}

template <class E>
std::optional<E> try_parse_enum(std::string_view text) {
  const auto& names = EnumTraits<E>::names;
  for (std::size_t i = 0; i < names.size(); ++i)
    if (names[i] == text) return static_cast<E>(i);
  return std::nullopt;
}

template <class E>
E parse_enum(std::string_view text) {
  if (auto v = try_parse_enum<E>(text)) return *v;
  throw ValidationError("unknown " + std::string(EnumTraits<E>::type_name) + " value '" +
                        std::string(text) + "'");
}

struct HomeRecord {
  std::string home_id;
  HomeType home_type = HomeType::house;
  double surface_m2 = 0.0;
  int inhabitants = 1;
  int floors = 1;
  AgeRange age_range = AgeRange::unknown;
  Heating heating = Heating::other;
  SecondaryHeating secondary_heating = SecondaryHeating::none;
  WaterHeating water_heating = WaterHeating::missing;
  bool has_pool = false;
  bool has_ev = false;
  bool has_ac = false;
  bool has_solar_panels = false;
  double latitude = 0.0;
  double longitude = 0.0;

  bool has_secondary_heating() const { return secondary_heating != SecondaryHeating::none; }
  friend bool operator==(const HomeRecord&, const HomeRecord&) = default;
};

struct RetrofitEvent {
  std::string home_id;
  Measure measure = Measure::attic_insulation;
  Date completion_date{};
  friend bool operator==(const RetrofitEvent&, const RetrofitEvent&) = default;
};

struct DailyConsumption {
  std::string home_id;
  Energy energy = Energy::electricity;
  Date date{};
  double kwh = 0.0;  // gas in kWh HHV
};

struct DailyTemperature {
  std::string station_id;
  double latitude = 0.0;
  double longitude = 0.0;
  Date date{};
  double mean_temp_c = 0.0;
};

struct FieldViolation {
  std::string field;
  std::string rule;
  friend bool operator==(const FieldViolation&, const FieldViolation&) = default;
};

/// Lists every violated invariant of `record`; empty when the record is valid.
std::vector<FieldViolation> check_home(const HomeRecord& record);

/// Returns `record` unchanged when valid, otherwise throws ValidationError
/// naming each violated field and rule.
HomeRecord validate_home(HomeRecord record);

struct EmissionFactors {
  double elec_kg_per_kwh = 0.079;
  double gas_kg_per_kwh_lhv = 0.227;
  double hhv_to_lhv = 0.9;
};

struct HeatingDetectionRule {
  int min_months = 6;
  double min_t_stat = 2.0;
  double min_heating_share = 0.15;
};

enum class Analysis { per_measure, fuel_switch };

struct AnalysisConfig {
  Energy energy = Energy::electricity;
  Analysis analysis = Analysis::per_measure;
  std::optional<Measure> measure;  // nullopt: every measure eligible for the energy
  int k = 5;
  double t_ref_c = 15.0;
  double hdd_month_threshold = 10.0;
  std::set<unsigned> base_months_elec{5, 6, 9};
  std::set<unsigned> base_months_gas{5, 6, 7, 8, 9};
  int reference_first_year = 2015;
  int reference_last_year = 2024;
  unsigned min_coverage_days_per_month = 25;
  int comprehensive_window_days = 60;
  int exclusion_window_months = 0;  // extra months dropped each side of the retrofit month
  HeatingDetectionRule heating_rule{};
  double propensity_clip = 1e-6;
  EmissionFactors emissions{};
  std::uint64_t seed = 20240101;

  const std::set<unsigned>& base_months(Energy e) const {
    return e == Energy::electricity ? base_months_elec : base_months_gas;
  }
  /// Throws ValidationError on violated invariants.
  void validate() const;
};

}  // namespace retrofit
