#include "retrofit/matching.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "retrofit/cohort.hpp"
#include "retrofit/geodesic.hpp"

namespace retrofit {

namespace {

double surface_term(const HomeRecord& t, const HomeRecord& c) {
  return std::floor(10.0 * std::abs(t.surface_m2 - c.surface_m2) / t.surface_m2);
}

double indicator(bool differs, double weight) { return differs ? weight : 0.0; }

std::optional<double> electric_attributes(const HomeRecord& t, const HomeRecord& c,
                                          bool heat_pump_treatment) {
  const bool heating_ok =
      heat_pump_treatment ? c.heating == Heating::electric : c.heating == t.heating;
  if (!heating_ok || t.has_pool != c.has_pool) return std::nullopt;
  return std::abs(t.inhabitants - c.inhabitants) + surface_term(t, c) +
         indicator(t.water_heating != c.water_heating, 3) + indicator(t.has_ac != c.has_ac, 2) +
         indicator(t.has_ev != c.has_ev, 4) + indicator(t.age_range != c.age_range, 2) +
         indicator(t.has_secondary_heating() != c.has_secondary_heating(), 3);
}

std::optional<double> gas_attributes(const HomeRecord& t, const HomeRecord& c) {
  if (c.heating != Heating::gas) return std::nullopt;
  return std::abs(t.inhabitants - c.inhabitants) + surface_term(t, c) +
         indicator(t.water_heating != c.water_heating, 3) +
         indicator(t.age_range != c.age_range, 2) +
         indicator(t.has_secondary_heating() != c.has_secondary_heating(), 1) +
         indicator(t.has_pool != c.has_pool, 2);
}

bool is_heat_pump(Measure m) {
  return m == Measure::heat_pump_air_air || m == Measure::heat_pump_air_water;
}

std::optional<double> attributes(DistanceKind kind, const TreatedUnit& t, const HomeRecord& c) {
  return kind == DistanceKind::electric ? electric_attributes(t.home, c, is_heat_pump(t.measure))
                                        : gas_attributes(t.home, c);
}

double location_term(const HomeRecord& t, const HomeRecord& c) {
  return geo_distance_km(t.latitude, t.longitude, c.latitude, c.longitude) / 100.0;
}

}  // namespace

std::optional<double> electric_distance(const HomeRecord& treated, const HomeRecord& candidate,
                                        bool heat_pump_treatment) {
  auto attr = electric_attributes(treated, candidate, heat_pump_treatment);
  if (!attr) return std::nullopt;
  return location_term(treated, candidate) + *attr;
}

std::optional<double> gas_distance(const HomeRecord& treated, const HomeRecord& candidate) {
  auto attr = gas_attributes(treated, candidate);
  if (!attr) return std::nullopt;
  return location_term(treated, candidate) + *attr;
}

std::optional<double> match_distance(DistanceKind kind, const TreatedUnit& treated,
                                     const HomeRecord& candidate) {
  return kind == DistanceKind::electric
             ? electric_distance(treated.home, candidate, is_heat_pump(treated.measure))
             : gas_distance(treated.home, candidate);
}

MatchResult match_controls(std::span<const TreatedUnit> treated, std::span<const HomeRecord> pool,
                           DistanceKind kind, int k, const Eligibility& eligible) {
  if (k < 1) throw std::invalid_argument("match_controls: k must be >= 1");

  std::vector<Eigen::Vector3d> pool_xyz;
  pool_xyz.reserve(pool.size());
  for (const auto& c : pool) pool_xyz.push_back(ecef_km(c.latitude, c.longitude));

  // Vincenty is accurate to well under a meter; the margin keeps the bound safe.
  constexpr double chord_margin_km = 1e-3;
  constexpr double sum_margin = 1e-9;

  struct Candidate {
    double bound;
    std::size_t index;
  };
  struct Chosen {
    double distance;
    std::size_t index;
  };

  MatchResult out;
  std::vector<Candidate> candidates;
  std::vector<Chosen> best;
  for (const auto& t : treated) {
    const Eigen::Vector3d txyz = ecef_km(t.home.latitude, t.home.longitude);
    candidates.clear();
    for (std::size_t i = 0; i < pool.size(); ++i) {
      if (pool[i].home_id == t.home.home_id) continue;
      auto attr = attributes(kind, t, pool[i]);
      if (!attr) continue;
      const double chord = std::max(0.0, chord_km(txyz, pool_xyz[i]) - chord_margin_km);
      candidates.push_back({chord / 100.0 + *attr - sum_margin, i});
    }
    std::sort(candidates.begin(), candidates.end(), [&](const auto& a, const auto& b) {
      return a.bound != b.bound ? a.bound < b.bound : pool[a.index].home_id < pool[b.index].home_id;
    });

    auto before = [&](double d, std::size_t i, const Chosen& c) {
      return d != c.distance ? d < c.distance : pool[i].home_id < pool[c.index].home_id;
    };
    best.clear();
    for (const auto& cand : candidates) {
      const bool full = static_cast<int>(best.size()) == k;
      if (full && cand.bound > best.back().distance) break;
      const double d = *match_distance(kind, t, pool[cand.index]);
      if (full && !before(d, cand.index, best.back())) continue;
      if (!eligible(t, pool[cand.index])) continue;
      auto pos = std::find_if(best.begin(), best.end(),
                              [&](const Chosen& c) { return before(d, cand.index, c); });
      best.insert(pos, {d, cand.index});
      if (static_cast<int>(best.size()) > k) best.pop_back();
    }

    if (best.empty()) {
      out.dropped.push_back({t.home.home_id, Reason::no_feasible_controls});
      continue;
    }
    for (const auto& c : best)
      out.records.push_back({t.home.home_id, pool[c.index].home_id, c.distance, t.date});
  }
  return out;
}

ObservationWindow window_of(const MonthlySeries& series) {
  if (series.empty()) throw std::invalid_argument("window_of: empty series");
  return {series.begin()->first, series.rbegin()->first};
}

std::variant<MonthlySeries, Reason> align_control_window(const MatchRecord& match,
                                                         const MonthlySeries& control,
                                                         const ObservationWindow& window,
                                                         int exclusion_months) {
  MonthlySeries clipped;
  for (const auto& [m, v] : control)
    if (m >= window.first && m <= window.last) clipped.emplace(m, v);
  if (distinct_calendar_months(months_before(clipped, match.fictive_date, exclusion_months)) < 12 ||
      distinct_calendar_months(months_after(clipped, match.fictive_date, exclusion_months)) < 12)
    return Reason::window_coverage;
  return clipped;
}

}  // namespace retrofit
