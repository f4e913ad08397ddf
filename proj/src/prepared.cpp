#include "retrofit/prepared.hpp"

#include <algorithm>

namespace retrofit {

const MonthlySeries& PreparedData::monthly(const std::string& home_id, Energy e) const {
  static const MonthlySeries empty;
  auto it = series.find(home_id);
  return it == series.end() ? empty : it->second.of(e);
}

PreparedData prepare(const Dataset& data, const AnalysisConfig& config) {
  PreparedData out;
  for (const auto& h : data.homes) {
    if (!check_home(h).empty()) {
      out.exclusions.push_back({h.home_id, Reason::invalid_record});
      continue;
    }
    out.homes.emplace(h.home_id, h);
  }

  for (const auto& ev : data.retrofits) out.retrofits[ev.home_id].push_back(ev);
  for (auto& [id, events] : out.retrofits)
    std::sort(events.begin(), events.end(), [](const auto& a, const auto& b) {
      return std::tie(a.completion_date, a.measure) < std::tie(b.completion_date, b.measure);
    });

  std::map<std::pair<std::string, Energy>, std::vector<DailyConsumption>> days;
  for (const auto& d : data.consumption)
    if (out.homes.contains(d.home_id)) days[{d.home_id, d.energy}].push_back(d);
  for (auto& [key, rows] : days) {
    auto& s = out.series[key.first];
    (key.second == Energy::electricity ? s.electricity : s.gas) =
        monthly_totals(rows, config.min_coverage_days_per_month);
  }

  out.stations = build_station_climates(data.weather, config);
  for (const auto& [id, home] : out.homes) {
    auto it = out.series.find(id);
    if (it == out.series.end() || it->second.empty()) {
      out.exclusions.push_back({id, Reason::no_consumption});
      continue;
    }
    std::set<MonthKey> months;
    for (const auto& [m, v] : it->second.electricity) months.insert(m);
    for (const auto& [m, v] : it->second.gas) months.insert(m);
    if (auto st = assign_station(home, out.stations, months))
      out.station_of.emplace(id, *st);
    else
      out.exclusions.push_back({id, Reason::no_station});
  }
  return out;
}

}  // namespace retrofit
