#pragma once

#include "retrofit/domain.hpp"
#include "retrofit/estimate.hpp"

namespace retrofit {

/// kg CO2eq per year for a consumption change in kWh per year (gas in kWh HHV).
inline double co2_delta(double att_kwh_per_year, Energy energy, const EmissionFactors& f) {
  return energy == Energy::electricity ? att_kwh_per_year * f.elec_kg_per_kwh
                                       : att_kwh_per_year * f.hhv_to_lhv * f.gas_kg_per_kwh_lhv;
}

/// Throws std::invalid_argument unless the estimate is on the kwh_per_year scale.
inline double co2_delta(const AttEstimate& est, Energy energy, const EmissionFactors& f) {
  if (est.scale != Scale::kwh_per_year)
    throw std::invalid_argument("co2_delta: estimate must be in kWh per year");
  return co2_delta(est.att, energy, f);
}

inline double fuel_switch_total(double delta_elec_kg, double delta_gas_kg) {
  return delta_elec_kg + delta_gas_kg;
}

}  // namespace retrofit
