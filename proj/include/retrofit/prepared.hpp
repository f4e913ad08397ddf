#pragma once

#include <map>
#include <string>
#include <vector>

#include "retrofit/domain.hpp"
#include "retrofit/weather.hpp"

namespace retrofit {

/// Raw input tables as ingested from CSV.
struct Dataset {
  std::vector<HomeRecord> homes;
  std::vector<RetrofitEvent> retrofits;
  std::vector<DailyConsumption> consumption;
  std::vector<DailyTemperature> weather;
};

struct HomeSeries {
  MonthlySeries electricity;
  MonthlySeries gas;

  const MonthlySeries& of(Energy e) const { return e == Energy::electricity ? electricity : gas; }
  bool empty() const { return electricity.empty() && gas.empty(); }
};

struct HomeExclusion {
  std::string home_id;
  Reason reason;
};

/// Indexed view of a Dataset: validated homes, monthly series, station
/// climates and the station assigned to each home.
struct PreparedData {
  std::map<std::string, HomeRecord> homes;
  std::map<std::string, std::vector<RetrofitEvent>> retrofits;  // events sorted by date
  std::map<std::string, HomeSeries> series;
  std::vector<StationClimate> stations;
  std::map<std::string, std::size_t> station_of;
  std::vector<HomeExclusion> exclusions;

  const StationClimate* station(const std::string& home_id) const {
    auto it = station_of.find(home_id);
    return it == station_of.end() ? nullptr : &stations[it->second];
  }
  const MonthlySeries& monthly(const std::string& home_id, Energy e) const;
};

PreparedData prepare(const Dataset& data, const AnalysisConfig& config);

}  // namespace retrofit
