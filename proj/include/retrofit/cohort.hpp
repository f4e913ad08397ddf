#pragma once

#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "retrofit/domain.hpp"
#include "retrofit/prepared.hpp"
#include "retrofit/weather.hpp"

namespace retrofit {

enum class HeatingDetection { detected, not_detected, undetermined };

/// Thermosensitivity test on one period of weather-normalized cells: the OLS
/// slope of raw consumption on HDD must be positive with t > rule.min_t_stat
/// and the heating share of corrected consumption at least rule.min_heating_share.
HeatingDetection detect_heating(std::span<const MonthlyCell> cells, const HeatingDetectionRule& rule);

inline bool is_detected(HeatingDetection h) { return h == HeatingDetection::detected; }

struct Treatment {
  Measure measure;
  Date date;
};

/// Collapses the declared events of one home into a single treatment. Events
/// spanning at most `window_days` form one treatment (comprehensive when two or
/// more distinct measures, dated at the last completion); wider spreads are
/// rejected as overlapping.
std::variant<Treatment, Reason> derive_treatment(std::span<const RetrofitEvent> events,
                                                 int window_days);

/// Number of distinct calendar months populated in `series`.
int distinct_calendar_months(const MonthlySeries& series);

/// Normalized cells of one energy around a split date plus heating detection
/// on each side.
struct EnergyAssessment {
  std::vector<MonthlyCell> cells;
  std::vector<MonthlyCell> pre;
  std::vector<MonthlyCell> post;
  HeatingDetection heating_pre = HeatingDetection::undetermined;
  HeatingDetection heating_post = HeatingDetection::undetermined;
};

/// Requires 12 distinct calendar months on each side (coverage_pre /
/// coverage_post otherwise) when `require_coverage` is set.
std::variant<EnergyAssessment, Reason> assess_energy(const std::string& home_id, Energy energy,
                                                     const MonthlySeries& series,
                                                     const StationClimate& climate,
                                                     const Date& split,
                                                     const AnalysisConfig& config,
                                                     bool require_coverage = true);

/// Gas series with every post-split month observed on electricity but missing
/// on gas filled with zero.
MonthlySeries impute_gas_after(const MonthlySeries& gas, const MonthlySeries& elec,
                               const Date& split, int exclusion_months = 0);

enum class Group { treated, control_pool };

struct CohortMember {
  std::string home_id;
  Group group = Group::treated;
  std::optional<Date> retrofit_date;
  std::optional<Measure> measure;
  bool fuel_switch = false;
  std::vector<Energy> eligible_energies;
};

struct CohortExclusion {
  std::string home_id;
  Group group = Group::treated;
  Reason reason;
  std::optional<Measure> measure;
  std::optional<Date> retrofit_date;
};

struct Cohort {
  std::vector<CohortMember> members;
  std::vector<CohortExclusion> exclusions;

  std::vector<const CohortMember*> of(Group g) const;
};

Cohort select_treated(const PreparedData& data, const AnalysisConfig& config);
Cohort select_control_pool(const PreparedData& data);
Cohort select_fuel_switch_cohort(const PreparedData& data, const AnalysisConfig& config);

/// Treated cohort for config.analysis merged with the control pool.
Cohort build_cohort(const PreparedData& data, const AnalysisConfig& config);

}  // namespace retrofit
