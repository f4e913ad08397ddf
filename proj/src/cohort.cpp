#include "retrofit/cohort.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace retrofit {

HeatingDetection detect_heating(std::span<const MonthlyCell> cells, const HeatingDetectionRule& rule) {
  const auto n = static_cast<double>(cells.size());
  if (static_cast<int>(cells.size()) < std::max(rule.min_months, 3))
    return HeatingDetection::undetermined;

  double mx = 0, my = 0;
  for (const auto& c : cells) {
    mx += c.hdd;
    my += c.raw_kwh;
  }
  mx /= n;
  my /= n;
  double sxx = 0, sxy = 0;
  for (const auto& c : cells) {
    sxx += (c.hdd - mx) * (c.hdd - mx);
    sxy += (c.hdd - mx) * (c.raw_kwh - my);
  }
  if (sxx <= 0.0) return HeatingDetection::not_detected;
  const double slope = sxy / sxx;
  if (!(slope > 0.0)) return HeatingDetection::not_detected;

  double sse = 0;
  for (const auto& c : cells) {
    const double r = c.raw_kwh - my - slope * (c.hdd - mx);
    sse += r * r;
  }
  const double se = std::sqrt(sse / (n - 2) / sxx);
  const double t = se > 0 ? slope / se : INFINITY;
  if (!(t > rule.min_t_stat)) return HeatingDetection::not_detected;

  double heating = 0, corrected = 0;
  for (const auto& c : cells) {
    heating += c.heating_kwh;
    corrected += c.corrected_kwh;
  }
  if (!(corrected > 0.0) || heating / corrected < rule.min_heating_share)
    return HeatingDetection::not_detected;
  return HeatingDetection::detected;
}

std::variant<Treatment, Reason> derive_treatment(std::span<const RetrofitEvent> events,
                                                 int window_days) {
  if (events.empty()) throw std::invalid_argument("derive_treatment: no events");
  auto [first, last] = std::minmax_element(
      events.begin(), events.end(),
      [](const auto& a, const auto& b) { return a.completion_date < b.completion_date; });
  if (days_between(first->completion_date, last->completion_date) > window_days)
    return Reason::measure_overlap;
  std::set<Measure> measures;
  for (const auto& e : events) measures.insert(e.measure);
  const Measure m = measures.size() >= 2 ? Measure::comprehensive : *measures.begin();
  return Treatment{m, last->completion_date};
}

int distinct_calendar_months(const MonthlySeries& series) {
  std::set<unsigned> months;
  for (const auto& [m, v] : series) months.insert(m.month);
  return static_cast<int>(months.size());
}

std::variant<EnergyAssessment, Reason> assess_energy(const std::string& home_id, Energy energy,
                                                     const MonthlySeries& series,
                                                     const StationClimate& climate,
                                                     const Date& split,
                                                     const AnalysisConfig& config,
                                                     bool require_coverage) {
  if (require_coverage) {
    if (distinct_calendar_months(months_before(series, split, config.exclusion_window_months)) < 12)
      return Reason::coverage_pre;
    if (distinct_calendar_months(months_after(series, split, config.exclusion_window_months)) < 12)
      return Reason::coverage_post;
  }
  auto normalized = normalize_series(home_id, energy, series, climate, split, config);
  if (auto* r = std::get_if<Reason>(&normalized)) return *r;

  EnergyAssessment out;
  out.cells = std::move(std::get<std::vector<MonthlyCell>>(normalized));
  const auto split_month = MonthKey::of(split);
  for (const auto& c : out.cells) (c.month < split_month ? out.pre : out.post).push_back(c);
  out.heating_pre = detect_heating(out.pre, config.heating_rule);
  out.heating_post = detect_heating(out.post, config.heating_rule);
  return out;
}

MonthlySeries impute_gas_after(const MonthlySeries& gas, const MonthlySeries& elec,
                               const Date& split, int exclusion_months) {
  MonthlySeries out = gas;
  for (const auto& [m, v] : months_after(elec, split, exclusion_months)) out.try_emplace(m, 0.0);
  return out;
}

std::vector<const CohortMember*> Cohort::of(Group g) const {
  std::vector<const CohortMember*> out;
  for (const auto& m : members)
    if (m.group == g) out.push_back(&m);
  return out;
}

namespace {

bool measure_analyzed(Measure m, const AnalysisConfig& config) {
  if (config.measure && *config.measure != m) return false;
  if (m == Measure::heat_pump_air_water) return false;
  if (config.energy == Energy::gas && m == Measure::heat_pump_air_air) return false;
  return true;
}

bool heating_consistent(Heating h, Energy e) {
  return e == Energy::electricity ? (h == Heating::electric || h == Heating::heat_pump)
                                  : h == Heating::gas;
}

Energy other(Energy e) { return e == Energy::electricity ? Energy::gas : Energy::electricity; }

// True when the other energy shows heating in either period. Periods that
// cannot be assessed count as no heating.
bool other_energy_heats(const std::string& id, Energy e, const MonthlySeries& series,
                        const StationClimate& climate, const Date& split,
                        const AnalysisConfig& config) {
  if (series.empty()) return false;
  auto a = assess_energy(id, e, series, climate, split, config, false);
  if (std::holds_alternative<Reason>(a)) return false;
  const auto& as = std::get<EnergyAssessment>(a);
  return is_detected(as.heating_pre) || is_detected(as.heating_post);
}

}  // namespace

Cohort select_treated(const PreparedData& data, const AnalysisConfig& config) {
  Cohort out;
  for (const auto& [id, events] : data.retrofits) {
    auto home_it = data.homes.find(id);
    if (home_it == data.homes.end()) continue;
    const HomeRecord& home = home_it->second;
    auto exclude = [&](Reason r, std::optional<Treatment> t = std::nullopt) {
      out.exclusions.push_back({id, Group::treated, r, t ? std::optional{t->measure} : std::nullopt,
                                t ? std::optional{t->date} : std::nullopt});
    };

    auto derived = derive_treatment(events, config.comprehensive_window_days);
    if (auto* r = std::get_if<Reason>(&derived)) {
      exclude(*r);
      continue;
    }
    const auto t = std::get<Treatment>(derived);
    if (!measure_analyzed(t.measure, config)) {
      exclude(Reason::measure_not_analyzed, t);
      continue;
    }
    if (!heating_consistent(home.heating, config.energy)) {
      exclude(Reason::heating_system_mismatch, t);
      continue;
    }
    const StationClimate* climate = data.station(id);
    if (!climate) {
      exclude(data.series.contains(id) ? Reason::no_station : Reason::no_consumption, t);
      continue;
    }
    auto assessed =
        assess_energy(id, config.energy, data.monthly(id, config.energy), *climate, t.date, config);
    if (auto* r = std::get_if<Reason>(&assessed)) {
      exclude(*r, t);
      continue;
    }
    const auto& a = std::get<EnergyAssessment>(assessed);
    if (!is_detected(a.heating_pre)) {
      exclude(Reason::no_heating_pre, t);
      continue;
    }
    if (!is_detected(a.heating_post)) {
      exclude(Reason::no_heating_post, t);
      continue;
    }
    const Energy o = other(config.energy);
    if (other_energy_heats(id, o, data.monthly(id, o), *climate, t.date, config)) {
      exclude(Reason::other_energy_heating, t);
      continue;
    }
    out.members.push_back({id, Group::treated, t.date, t.measure, false, {config.energy}});
  }
  return out;
}

Cohort select_control_pool(const PreparedData& data) {
  Cohort out;
  for (const auto& [id, home] : data.homes) {
    if (auto it = data.retrofits.find(id); it != data.retrofits.end() && !it->second.empty()) {
      out.exclusions.push_back({id, Group::control_pool, Reason::declared_retrofit, {}, {}});
      continue;
    }
    auto it = data.series.find(id);
    if (it == data.series.end() || it->second.empty()) {
      out.exclusions.push_back({id, Group::control_pool, Reason::no_consumption, {}, {}});
      continue;
    }
    if (!data.station(id)) {
      out.exclusions.push_back({id, Group::control_pool, Reason::no_station, {}, {}});
      continue;
    }
    CohortMember m{id, Group::control_pool, {}, {}, false, {}};
    if (!it->second.electricity.empty()) m.eligible_energies.push_back(Energy::electricity);
    if (!it->second.gas.empty()) m.eligible_energies.push_back(Energy::gas);
    out.members.push_back(std::move(m));
  }
  return out;
}

Cohort select_fuel_switch_cohort(const PreparedData& data, const AnalysisConfig& config) {
  Cohort out;
  for (const auto& [id, events] : data.retrofits) {
    auto home_it = data.homes.find(id);
    if (home_it == data.homes.end()) continue;
    const HomeRecord& home = home_it->second;
    auto exclude = [&](Reason r, std::optional<Treatment> t = std::nullopt) {
      out.exclusions.push_back({id, Group::treated, r, t ? std::optional{t->measure} : std::nullopt,
                                t ? std::optional{t->date} : std::nullopt});
    };

    auto derived = derive_treatment(events, config.comprehensive_window_days);
    if (auto* r = std::get_if<Reason>(&derived)) {
      exclude(*r);
      continue;
    }
    const auto t = std::get<Treatment>(derived);
    if (t.measure != Measure::heat_pump_air_water) {
      exclude(Reason::measure_not_analyzed, t);
      continue;
    }
    if (home.has_solar_panels) {
      exclude(Reason::solar_panels, t);
      continue;
    }
    const StationClimate* climate = data.station(id);
    if (!climate) {
      exclude(data.series.contains(id) ? Reason::no_station : Reason::no_consumption, t);
      continue;
    }
    const auto& elec = data.monthly(id, Energy::electricity);
    const int excl = config.exclusion_window_months;
    auto elec_assessed = assess_energy(id, Energy::electricity, elec, *climate, t.date, config);
    if (auto* r = std::get_if<Reason>(&elec_assessed)) {
      exclude(*r, t);
      continue;
    }
    const auto gas = impute_gas_after(data.monthly(id, Energy::gas), elec, t.date, excl);
    auto gas_assessed = assess_energy(id, Energy::gas, gas, *climate, t.date, config);
    if (auto* r = std::get_if<Reason>(&gas_assessed)) {
      exclude(*r, t);
      continue;
    }
    const auto& ea = std::get<EnergyAssessment>(elec_assessed);
    const auto& ga = std::get<EnergyAssessment>(gas_assessed);
    if (!is_detected(ga.heating_pre)) {
      exclude(Reason::no_heating_pre, t);
      continue;
    }
    if (!is_detected(ea.heating_post)) {
      exclude(Reason::no_heating_post, t);
      continue;
    }
    if (is_detected(ga.heating_post)) {
      exclude(Reason::gas_heating_after, t);
      continue;
    }
    out.members.push_back(
        {id, Group::treated, t.date, t.measure, true, {Energy::electricity, Energy::gas}});
  }
  return out;
}

Cohort build_cohort(const PreparedData& data, const AnalysisConfig& config) {
  Cohort out = config.analysis == Analysis::fuel_switch ? select_fuel_switch_cohort(data, config)
                                                        : select_treated(data, config);
  Cohort pool = select_control_pool(data);
  out.members.insert(out.members.end(), pool.members.begin(), pool.members.end());
  // Homes with declared works are already reported on the treated side.
  for (auto& e : pool.exclusions)
    if (e.reason != Reason::declared_retrofit) out.exclusions.push_back(std::move(e));
  return out;
}

}  // namespace retrofit
