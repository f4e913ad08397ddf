#include "retrofit/domain.hpp"

#include <cmath>

namespace retrofit {

std::vector<FieldViolation> check_home(const HomeRecord& record) {
  std::vector<FieldViolation> out;
  if (record.home_id.empty()) out.push_back({"home_id", "non-empty"});
  if (!(std::isfinite(record.surface_m2) && record.surface_m2 > 0.0))
    out.push_back({"surface_m2", "surface_m2 > 0"});
  if (record.inhabitants < 1) out.push_back({"inhabitants", "inhabitants >= 1"});
  if (record.floors < 1) out.push_back({"floors", "floors >= 1"});
  if (!(std::isfinite(record.latitude) && record.latitude >= -90.0 && record.latitude <= 90.0))
    out.push_back({"latitude", "latitude in [-90, 90]"});
  if (!(std::isfinite(record.longitude) && record.longitude >= -180.0 &&
        record.longitude <= 180.0))
    out.push_back({"longitude", "longitude in [-180, 180]"});
  return out;
}

HomeRecord validate_home(HomeRecord record) {
  const auto violations = check_home(record);
  if (violations.empty()) return record;
  std::string msg = "home '" + record.home_id + "' rejected:";
  for (const auto& v : violations) msg += " {" + v.field + ": " + v.rule + "}";
  throw ValidationError(msg);
}

void AnalysisConfig::validate() const {
  if (k < 1) throw ValidationError("config: k must be >= 1");
  if (!std::isfinite(t_ref_c)) throw ValidationError("config: t_ref_c must be finite");
  if (!(hdd_month_threshold >= 0.0))
    throw ValidationError("config: hdd_month_threshold must be >= 0");
  if (base_months_elec.empty() || base_months_gas.empty())
    throw ValidationError("config: base month sets must be non-empty");
  for (const auto* set : {&base_months_elec, &base_months_gas})
    for (unsigned m : *set)
      if (m < 1 || m > 12) throw ValidationError("config: base month out of range");
  if (reference_first_year > reference_last_year)
    throw ValidationError("config: empty reference year range");
  if (min_coverage_days_per_month < 1 || min_coverage_days_per_month > 31)
    throw ValidationError("config: min_coverage_days_per_month must be in [1, 31]");
  if (comprehensive_window_days < 0)
    throw ValidationError("config: comprehensive_window_days must be >= 0");
  if (exclusion_window_months < 0)
    throw ValidationError("config: exclusion_window_months must be >= 0");
  if (!(propensity_clip > 0.0 && propensity_clip < 0.5))
    throw ValidationError("config: propensity_clip must be in (0, 0.5)");
  if (!(emissions.elec_kg_per_kwh > 0 && emissions.gas_kg_per_kwh_lhv > 0 &&
        emissions.hhv_to_lhv > 0))
    throw ValidationError("config: emission factors must be strictly positive");
  if (analysis == Analysis::fuel_switch && measure && *measure != Measure::heat_pump_air_water)
    throw ValidationError("config: fuel_switch analysis requires measure heat_pump_air_water");
}

}  // namespace retrofit
