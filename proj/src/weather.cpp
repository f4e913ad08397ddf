#include "retrofit/weather.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <tuple>

#include "retrofit/geodesic.hpp"

namespace retrofit {

double daily_hdd(double mean_temp_c, double t_ref_c) {
  if (!std::isfinite(mean_temp_c) || !std::isfinite(t_ref_c))
    throw std::invalid_argument("daily_hdd: non-finite temperature");
  return std::max(0.0, t_ref_c - mean_temp_c);
}

double monthly_hdd(std::span<const DailyTemperature> series, unsigned month, int year,
                   double t_ref_c) {
  double total = 0.0;
  int days = 0;
  for (const auto& d : series) {
    if (static_cast<int>(d.date.year()) == year && static_cast<unsigned>(d.date.month()) == month) {
      total += daily_hdd(d.mean_temp_c, t_ref_c);
      ++days;
    }
  }
  if (days == 0) throw std::invalid_argument("monthly_hdd: no data for the month");
  return total;
}

double reference_hdd(std::span<const DailyTemperature> series, unsigned month, int first_year,
                     int last_year, double t_ref_c) {
  std::map<int, std::pair<double, unsigned>> per_year;
  for (const auto& d : series) {
    const int y = static_cast<int>(d.date.year());
    if (static_cast<unsigned>(d.date.month()) != month || y < first_year || y > last_year) continue;
    auto& [sum, n] = per_year[y];
    sum += daily_hdd(d.mean_temp_c, t_ref_c);
    ++n;
  }
  double total = 0.0;
  int years = 0;
  for (const auto& [y, acc] : per_year) {
    if (acc.second < days_in_month(y, month)) continue;
    total += acc.first;
    ++years;
  }
  if (years == 0) throw std::invalid_argument("reference_hdd: no fully covered reference year");
  return total / years;
}

std::optional<double> base_level(const MonthlySeries& period, const std::set<unsigned>& base_months) {
  double total = 0.0;
  int n = 0;
  for (const auto& [m, kwh] : period) {
    if (!base_months.contains(m.month)) continue;
    total += kwh;
    ++n;
  }
  if (n == 0) return std::nullopt;
  return total / n;
}

double correct_month(double raw_kwh, double hdd, double hdd_ref, double base_kwh,
                     double threshold) {
  if (hdd > threshold && raw_kwh > base_kwh)
    return raw_kwh + (raw_kwh - base_kwh) * (hdd_ref / hdd - 1.0);
  return raw_kwh;
}

Decomposition decompose(double corrected_kwh, double base_kwh) {
  const double heating = std::max(0.0, corrected_kwh - base_kwh);
  return {heating, corrected_kwh - heating};
}

std::vector<StationClimate> build_station_climates(std::span<const DailyTemperature> temps,
                                                   const AnalysisConfig& config) {
  struct Acc {
    double sum = 0.0;
    unsigned days = 0;
  };
  std::map<std::string, StationClimate> stations;
  std::map<std::string, std::map<MonthKey, Acc>> months;
  for (const auto& t : temps) {
    auto [it, inserted] = stations.try_emplace(t.station_id);
    if (inserted) {
      it->second.station_id = t.station_id;
      it->second.latitude = t.latitude;
      it->second.longitude = t.longitude;
    }
    auto& acc = months[t.station_id][MonthKey::of(t.date)];
    acc.sum += daily_hdd(t.mean_temp_c, config.t_ref_c);
    ++acc.days;
  }

  std::vector<StationClimate> out;
  out.reserve(stations.size());
  for (auto& [id, station] : stations) {
    std::array<double, 12> ref_sum{};
    std::array<int, 12> ref_n{};
    for (const auto& [m, acc] : months[id]) {
      if (acc.days < m.days()) continue;
      station.hdd[m] = acc.sum;
      if (m.year >= config.reference_first_year && m.year <= config.reference_last_year) {
        ref_sum[m.month - 1] += acc.sum;
        ++ref_n[m.month - 1];
      }
    }
    for (std::size_t i = 0; i < 12; ++i)
      if (ref_n[i] > 0) station.reference[i] = ref_sum[i] / ref_n[i];
    out.push_back(std::move(station));
  }
  return out;
}

std::optional<std::size_t> assign_station(const HomeRecord& home,
                                          std::span<const StationClimate> stations,
                                          const std::set<MonthKey>& months) {
  std::vector<std::tuple<double, std::string_view, std::size_t>> order;
  order.reserve(stations.size());
  for (std::size_t i = 0; i < stations.size(); ++i) {
    const double d =
        geo_distance_km(home.latitude, home.longitude, stations[i].latitude, stations[i].longitude);
    order.emplace_back(d, stations[i].station_id, i);
  }
  std::sort(order.begin(), order.end());
  for (const auto& [d, id, i] : order) {
    const auto& st = stations[i];
    if (std::all_of(months.begin(), months.end(), [&](const MonthKey& m) { return st.covers(m); }))
      return i;
  }
  return std::nullopt;
}

MonthlySeries monthly_totals(std::span<const DailyConsumption> days, unsigned min_coverage_days) {
  std::map<MonthKey, std::pair<double, unsigned>> acc;
  for (const auto& d : days) {
    auto& [sum, n] = acc[MonthKey::of(d.date)];
    sum += d.kwh;
    ++n;
  }
  MonthlySeries out;
  for (const auto& [m, a] : acc)
    if (a.second >= min_coverage_days) out.emplace(m, a.first / a.second * m.days());
  return out;
}

MonthlySeries months_before(const MonthlySeries& series, const Date& split, int exclusion_months) {
  const int last = MonthKey::of(split).index() - 1 - exclusion_months;
  MonthlySeries out;
  for (const auto& [m, v] : series)
    if (m.index() <= last) out.emplace(m, v);
  return out;
}

MonthlySeries months_after(const MonthlySeries& series, const Date& split, int exclusion_months) {
  const int first = MonthKey::of(split).index() + 1 + exclusion_months;
  MonthlySeries out;
  for (const auto& [m, v] : series)
    if (m.index() >= first) out.emplace(m, v);
  return out;
}

std::variant<std::vector<MonthlyCell>, Reason> normalize_series(
    const std::string& home_id, Energy energy, const MonthlySeries& raw,
    const StationClimate& climate, const Date& split, const AnalysisConfig& config) {
  std::vector<MonthlyCell> cells;
  for (const auto& period : {months_before(raw, split, config.exclusion_window_months),
                             months_after(raw, split, config.exclusion_window_months)}) {
    if (period.empty()) continue;
    const auto base = base_level(period, config.base_months(energy));
    if (!base) return Reason::no_base_months;
    for (const auto& [m, kwh] : period) {
      if (!climate.covers(m)) return Reason::missing_weather;
      MonthlyCell cell;
      cell.home_id = home_id;
      cell.energy = energy;
      cell.month = m;
      cell.raw_kwh = kwh;
      cell.hdd = climate.hdd.at(m);
      cell.hdd_ref = *climate.reference[m.month - 1];
      cell.corrected_kwh =
          correct_month(kwh, cell.hdd, cell.hdd_ref, *base, config.hdd_month_threshold);
      const auto parts = decompose(cell.corrected_kwh, *base);
      cell.heating_kwh = parts.heating_kwh;
      cell.base_kwh = parts.base_kwh;
      cells.push_back(std::move(cell));
    }
  }
  return cells;
}

}  // namespace retrofit
