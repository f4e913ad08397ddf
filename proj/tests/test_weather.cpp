#include <doctest.h>

#include <random>

#include "fixtures.hpp"
#include "retrofit/weather.hpp"

using namespace retrofit;
using fixtures::ymd;

namespace {

std::vector<DailyTemperature> days_at(int year, unsigned month, std::initializer_list<double> temps) {
  std::vector<DailyTemperature> out;
  unsigned day = 1;
  for (double t : temps) out.push_back({"S", 45, 5, ymd(year, month, day++), t});
  return out;
}

std::vector<DailyTemperature> full_month(int year, unsigned month, double temp) {
  std::vector<DailyTemperature> out;
  for (unsigned d = 1; d <= days_in_month(year, month); ++d)
    out.push_back({"S", 45, 5, ymd(year, month, d), temp});
  return out;
}

}  // namespace

TEST_CASE("daily_hdd") {
  CHECK(daily_hdd(15, 15) == 0);
  CHECK(daily_hdd(5, 15) == 10);
  CHECK(daily_hdd(25, 15) == 0);
  CHECK_THROWS(daily_hdd(NAN, 15));
  CHECK_THROWS(daily_hdd(5, INFINITY));
}

TEST_CASE("monthly_hdd") {
  std::vector<DailyTemperature> d;
  for (unsigned i = 1; i <= 30; ++i) d.push_back({"S", 45, 5, ymd(2020, 4, i), 14.0});
  CHECK(monthly_hdd(d, 4, 2020, 15) == doctest::Approx(30));
  CHECK(monthly_hdd(full_month(2020, 7, 20), 7, 2020, 15) == 0);
  CHECK(monthly_hdd(days_at(2020, 1, {5, 25}), 1, 2020, 15) == doctest::Approx(10));
  CHECK_THROWS(monthly_hdd(d, 5, 2020, 15));

  SUBCASE("additive over disjoint day sets") {
    auto a = days_at(2020, 1, {1, 3, 9});
    std::vector<DailyTemperature> b{{"S", 45, 5, ymd(2020, 1, 20), 4.0},
                                    {"S", 45, 5, ymd(2020, 1, 21), 16.0}};
    auto ab = a;
    ab.insert(ab.end(), b.begin(), b.end());
    CHECK(monthly_hdd(ab, 1, 2020, 15) ==
          doctest::Approx(monthly_hdd(a, 1, 2020, 15) + monthly_hdd(b, 1, 2020, 15)));
  }
}

TEST_CASE("reference_hdd") {
  // January 2016 at 15 - 100/31 per day gives 100 HDD, 2017 gives 120.
  auto series = full_month(2016, 1, 15.0 - 100.0 / 31.0);
  auto other = full_month(2017, 1, 15.0 - 120.0 / 31.0);
  series.insert(series.end(), other.begin(), other.end());
  CHECK(reference_hdd(series, 1, 2015, 2024, 15) == doctest::Approx(110));
  CHECK(reference_hdd(other, 1, 2015, 2024, 15) == doctest::Approx(120));

  SUBCASE("partial months are excluded") {
    auto partial = days_at(2018, 1, {0, 0, 0});
    auto s = other;
    s.insert(s.end(), partial.begin(), partial.end());
    CHECK(reference_hdd(s, 1, 2015, 2024, 15) == doctest::Approx(120));
  }
  SUBCASE("identical climate every year") {
    std::vector<DailyTemperature> s;
    for (int y = 2015; y <= 2024; ++y) {
      auto m = full_month(y, 3, 8.0);
      s.insert(s.end(), m.begin(), m.end());
    }
    CHECK(reference_hdd(s, 3, 2015, 2024, 15) == doctest::Approx(monthly_hdd(s, 3, 2019, 15)));
  }
  CHECK_THROWS(reference_hdd(series, 2, 2015, 2024, 15));
  CHECK_THROWS(reference_hdd(series, 1, 2019, 2024, 15));
}

TEST_CASE("base_level") {
  const std::set<unsigned> elec{5, 6, 9}, gas{5, 6, 7, 8, 9};
  MonthlySeries s{{{2019, 5}, 100}, {{2019, 6}, 110}, {{2019, 9}, 120}, {{2019, 1}, 900}};
  CHECK(*base_level(s, elec) == doctest::Approx(110));
  MonthlySeries g;
  for (unsigned m = 5; m <= 9; ++m) g[{2019, m}] = 50;
  CHECK(*base_level(g, gas) == doctest::Approx(50));
  CHECK(*base_level(MonthlySeries{{{2019, 6}, 200}}, elec) == doctest::Approx(200));
  CHECK_FALSE(base_level(MonthlySeries{{{2019, 1}, 200}}, elec));
}

TEST_CASE("correct_month") {
  CHECK(correct_month(300, 200, 250, 100, 10) == doctest::Approx(350));
  CHECK(correct_month(300, 5, 250, 100, 10) == 300);
  CHECK(correct_month(90, 200, 250, 100, 10) == 90);
  CHECK(correct_month(300, 200, 200, 100, 10) == doctest::Approx(300));
  SUBCASE("monotone in the reference") {
    CHECK(correct_month(300, 200, 150, 100, 10) < correct_month(300, 200, 250, 100, 10));
  }
}

TEST_CASE("decompose") {
  auto a = decompose(350, 100);
  CHECK(a.heating_kwh == 250);
  CHECK(a.base_kwh == 100);
  auto b = decompose(80, 100);
  CHECK(b.heating_kwh == 0);
  CHECK(b.base_kwh == 80);
  auto c = decompose(100, 100);
  CHECK(c.heating_kwh == 0);
  CHECK(c.base_kwh == 100);

  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0, 1e4);
  for (int i = 0; i < 1000; ++i) {
    const double corrected = u(rng), base = u(rng);
    const auto d = decompose(corrected, base);
    CHECK(d.heating_kwh >= 0);
    CHECK(d.heating_kwh + d.base_kwh == corrected);
  }
}

TEST_CASE("assign_station") {
  AnalysisConfig config;
  Dataset data;
  const auto from = ymd(2019, 1, 1), to = ymd(2019, 12, 31);
  fixtures::add_station(data, "A", 45.0, 5.0, from, to);
  fixtures::add_station(data, "B", 45.09, 5.0, from, to);    // ~10 km north
  fixtures::add_station(data, "C", 45.45, 5.0, from, to);    // ~50 km north
  fixtures::add_station(data, "D", 45.0, 5.0, from, ymd(2019, 6, 30));  // co-located, short
  const auto stations = build_station_climates(data.weather, config);
  REQUIRE(stations.size() == 4);
  CHECK(stations[0].station_id == "A");

  auto h = fixtures::home("h");
  const std::set<MonthKey> months{{2019, 3}, {2019, 10}};
  auto name = [&](const HomeRecord& home, const std::set<MonthKey>& m) {
    auto i = assign_station(home, stations, m);
    return i ? stations[*i].station_id : std::string("none");
  };
  // D is co-located with A but stops in June.
  CHECK(name(h, months) == "A");
  h.latitude = 45.1;
  CHECK(name(h, months) == "B");

  SUBCASE("nearest station without coverage falls back to the next nearest") {
    std::vector<StationClimate> subset{stations[1], stations[2], stations[3]};  // B, C, D
    auto home = fixtures::home("h");
    auto i = assign_station(home, subset, months);
    REQUIRE(i);
    CHECK(subset[*i].station_id == "B");
    auto j = assign_station(home, subset, {{2019, 3}});
    REQUIRE(j);
    CHECK(subset[*j].station_id == "D");
  }
  CHECK(name(h, {{2020, 1}}) == "none");
}

TEST_CASE("monthly_totals scales to the full month and drops sparse months") {
  std::vector<DailyConsumption> days;
  for (unsigned d = 1; d <= 28; ++d) days.push_back({"h", Energy::electricity, ymd(2021, 1, d), 10.0});
  for (unsigned d = 1; d <= 20; ++d) days.push_back({"h", Energy::electricity, ymd(2021, 3, d), 10.0});
  const auto m = monthly_totals(days, 25);
  REQUIRE(m.size() == 1);
  CHECK(m.at({2021, 1}) == doctest::Approx(310));
}

TEST_CASE("normalize_series keeps both periods and drops the split month") {
  AnalysisConfig config;
  Dataset data;
  fixtures::add_station(data, "S", 45, 5, ymd(2018, 1, 1), ymd(2021, 12, 31));
  fixtures::add_daily(data, "h", Energy::electricity, ymd(2019, 1, 1), ymd(2020, 12, 31), 5, 0.8);
  const auto climates = build_station_climates(data.weather, config);
  const auto series = monthly_totals(data.consumption, 25);
  auto res = normalize_series("h", Energy::electricity, series, climates[0], ymd(2020, 1, 15), config);
  REQUIRE(std::holds_alternative<std::vector<MonthlyCell>>(res));
  const auto& cells = std::get<std::vector<MonthlyCell>>(res);
  CHECK(cells.size() == 23);
  for (const auto& c : cells) {
    CHECK_FALSE(c.month == MonthKey{2020, 1});
    CHECK(c.base_kwh + c.heating_kwh == c.corrected_kwh);
    CHECK(c.heating_kwh >= 0);
    if (c.hdd <= config.hdd_month_threshold) CHECK(c.corrected_kwh == c.raw_kwh);
  }
  SUBCASE("no base months in a period") {
    MonthlySeries winter;
    for (const auto& [m, v] : series)
      if (m.month <= 3 || m.month >= 11) winter.emplace(m, v);
    auto r = normalize_series("h", Energy::electricity, winter, climates[0], ymd(2020, 1, 15), config);
    REQUIRE(std::holds_alternative<Reason>(r));
    CHECK(std::get<Reason>(r) == Reason::no_base_months);
  }
}
