#pragma once

#include <chrono>
#include <cmath>
#include <numbers>
#include <string>

#include "retrofit/prepared.hpp"

namespace fixtures {

using namespace retrofit;

inline Date ymd(int y, unsigned m, unsigned d) {
  return Date{std::chrono::year{y}, std::chrono::month{m}, std::chrono::day{d}};
}

inline HomeRecord home(std::string id, Heating heating = Heating::electric) {
  HomeRecord h;
  h.home_id = std::move(id);
  h.home_type = HomeType::house;
  h.surface_m2 = 100.0;
  h.inhabitants = 2;
  h.floors = 1;
  h.age_range = AgeRange::y1971_1990;
  h.heating = heating;
  h.water_heating = WaterHeating::electric;
  h.latitude = 45.0;
  h.longitude = 5.0;
  return h;
}

// Smooth seasonal climate, cold in January.
inline double temperature(const Date& d) {
  const auto doy = (std::chrono::sys_days{d} -
                    std::chrono::sys_days{Date{d.year(), std::chrono::January, std::chrono::day{1}}})
                       .count();
  return 11.0 - 9.0 * std::cos(2.0 * std::numbers::pi * (static_cast<double>(doy) - 15.0) / 365.0);
}

template <class F>
void each_day(const Date& from, const Date& to, F&& f) {
  for (auto d = std::chrono::sys_days{from}; d <= std::chrono::sys_days{to}; d += std::chrono::days{1})
    f(Date{d});
}

inline void add_station(Dataset& data, const std::string& id, double lat, double lon,
                        const Date& from, const Date& to) {
  each_day(from, to, [&](const Date& d) { data.weather.push_back({id, lat, lon, d, temperature(d)}); });
}

// kwh = base + slope * HDD (15 C reference).
inline void add_daily(Dataset& data, const std::string& home_id, Energy energy, const Date& from,
                      const Date& to, double base, double slope) {
  each_day(from, to, [&](const Date& d) {
    data.consumption.push_back(
        {home_id, energy, d, base + slope * std::max(0.0, 15.0 - temperature(d))});
  });
}

}  // namespace fixtures
