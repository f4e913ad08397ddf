#pragma once

#include <array>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "retrofit/domain.hpp"

namespace retrofit {

/// Month totals in kWh for one home and one energy.
using MonthlySeries = std::map<MonthKey, double>;

struct MonthlyCell {
  std::string home_id;
  Energy energy = Energy::electricity;
  MonthKey month{};
  double raw_kwh = 0.0;
  double hdd = 0.0;
  double hdd_ref = 0.0;
  double corrected_kwh = 0.0;
  double base_kwh = 0.0;
  double heating_kwh = 0.0;
};

/// Degree-days of one day: max(0, t_ref - mean_temp). Throws on non-finite input.
double daily_hdd(double mean_temp_c, double t_ref_c);

/// Sum of daily HDD over the days of `series` falling in (month, year).
/// Throws std::invalid_argument when no day falls in the month.
double monthly_hdd(std::span<const DailyTemperature> series, unsigned month, int year,
                   double t_ref_c);

/// Mean monthly HDD of `month` over the reference years whose month is fully
/// covered. Throws std::invalid_argument when no reference year qualifies.
double reference_hdd(std::span<const DailyTemperature> series, unsigned month, int first_year,
                     int last_year, double t_ref_c);

/// Mean raw consumption over the base months present in `period`, or nullopt.
std::optional<double> base_level(const MonthlySeries& period, const std::set<unsigned>& base_months);

double correct_month(double raw_kwh, double hdd, double hdd_ref, double base_kwh,
                     double threshold);

struct Decomposition {
  double heating_kwh = 0.0;
  double base_kwh = 0.0;
};
Decomposition decompose(double corrected_kwh, double base_kwh);

/// Monthly HDD and reference HDD for one weather station.
struct StationClimate {
  std::string station_id;
  double latitude = 0.0;
  double longitude = 0.0;
  std::map<MonthKey, double> hdd;                 // fully covered months only
  std::array<std::optional<double>, 12> reference{};  // indexed by month - 1

  bool covers(const MonthKey& m) const {
    return hdd.contains(m) && reference[m.month - 1].has_value();
  }
};

/// Builds climates from daily temperatures of any number of stations.
/// Output is sorted by station_id.
std::vector<StationClimate> build_station_climates(std::span<const DailyTemperature> temps,
                                                   const AnalysisConfig& config);

/// Nearest station (geodesic distance, ties by station_id) covering every
/// month in `months`; nullopt when none qualifies.
std::optional<std::size_t> assign_station(const HomeRecord& home,
                                          std::span<const StationClimate> stations,
                                          const std::set<MonthKey>& months);

/// Aggregates daily readings of one home and energy into month totals scaled to
/// the full month; months with fewer than `min_coverage_days` readings are dropped.
MonthlySeries monthly_totals(std::span<const DailyConsumption> days, unsigned min_coverage_days);

/// Months of `series` strictly before / after the month containing `split`,
/// skipping `exclusion_months` more months on each side.
MonthlySeries months_before(const MonthlySeries& series, const Date& split, int exclusion_months = 0);
MonthlySeries months_after(const MonthlySeries& series, const Date& split, int exclusion_months = 0);

/// Weather-corrects and decomposes a monthly series around a split date. Each
/// period gets its own base level. The split month is dropped.
std::variant<std::vector<MonthlyCell>, Reason> normalize_series(
    const std::string& home_id, Energy energy, const MonthlySeries& raw,
    const StationClimate& climate, const Date& split, const AnalysisConfig& config);

}  // namespace retrofit
