#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>

#include "retrofit/io.hpp"

using namespace retrofit;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name)
      : path(fs::temp_directory_path() / ("retrofit_io_" + name)) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

void put(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::vector<std::vector<std::string>> read_all(const fs::path& p,
                                               std::vector<std::string_view> cols) {
  std::vector<std::vector<std::string>> out;
  read_csv(p, cols, [&](const CsvRow& r) {
    std::vector<std::string> v;
    for (auto c : cols) v.push_back(r[c]);
    out.push_back(v);
  });
  return out;
}

const char* kHomes =
    "home_id,home_type,surface_m2,inhabitants,floors,age_range,heating,secondary_heating,"
    "water_heating,has_pool,has_ev,has_ac,has_solar_panels,latitude,longitude\n"
    "h1,house,100,2,1,1971_1990,electric,,electric,no,0,false,0,45,5\n"
    "h2,house,120,3,2,,gas,none,gas,yes,1,true,1,45.1,5.1\n"
    "h2,house,120,3,2,,gas,none,gas,yes,1,true,1,45.1,5.1\n"
    "h3,house,-5,2,1,1971_1990,electric,none,electric,0,0,0,0,45,5\n";

void write_small_dataset(const fs::path& dir) {
  put(dir / "homes.csv", kHomes);
  put(dir / "retrofits.csv",
      "home_id,measure,completion_date\n"
      "h1,attic_insulation,2020-05-04\n"
      "zz,attic_insulation,2020-05-04\n"
      "h2,comprehensive,2020-05-04\n");
  put(dir / "consumption.csv",
      "home_id,energy,date,kwh\n"
      "h1,electricity,2020-01-01,12.5\n"
      "h1,electricity,2020-01-02,-1\n"
      "h1,electricity,2020-01-01,3\n"
      "h2,gas,2020-01-01,40\n");
  put(dir / "weather.csv",
      "station_id,lat,lon,date,mean_temp_c\n"
      "S1,45,5,2020-01-01,3.5\n"
      "S1,45,5,2020-01-02,nan\n");
}

}  // namespace

TEST_CASE("csv quoting round trip") {
  TempDir t("quote");
  const std::vector<std::string> tricky{"plain", "with,comma", "with \"quote\"", "line\nbreak",
                                        "", " spaced "};
  {
    const std::string_view header[] = {"a", "b", "c", "d", "e", "f"};
    CsvWriter w(t.path / "x.csv", header);
    w.row(tricky);
    w.row({"1", "2", "3", "4", "5", "6"});
    w.commit();
  }
  auto rows = read_all(t.path / "x.csv", {"a", "b", "c", "d", "e", "f"});
  REQUIRE(rows.size() == 2);
  CHECK(rows[0] == tricky);
  CHECK(quote_csv("a,b") == "\"a,b\"");
  CHECK(quote_csv("x\"y") == "\"x\"\"y\"");
  CHECK(quote_csv("abc") == "abc");
}

TEST_CASE("csv reader edge cases") {
  TempDir t("edge");
  SUBCASE("CRLF, BOM and blank lines") {
    put(t.path / "x.csv", "\xEF\xBB\xBF" "a,b\r\n1,2\r\n\r\n3,\"4\r\n5\"\r\n");
    auto rows = read_all(t.path / "x.csv", {"a", "b"});
    REQUIRE(rows.size() == 2);
    CHECK(rows[0] == std::vector<std::string>{"1", "2"});
    CHECK(rows[1][1] == "4\r\n5");
  }
  SUBCASE("line numbers count embedded newlines") {
    put(t.path / "x.csv", "a,b\n\"x\ny\",1\n2,3\n");
    std::vector<std::size_t> lines;
    read_csv(t.path / "x.csv", {}, [&](const CsvRow& r) { lines.push_back(r.line()); });
    CHECK(lines == std::vector<std::size_t>{2, 4});
  }
  SUBCASE("missing column") {
    put(t.path / "x.csv", "a,b\n1,2\n");
    const std::string_view req[] = {"a", "c"};
    CHECK_THROWS_AS(read_csv(t.path / "x.csv", req, [](const CsvRow&) {}), ValidationError);
  }
  SUBCASE("field count mismatch") {
    put(t.path / "x.csv", "a,b\n1,2,3\n");
    CHECK_THROWS_AS(read_csv(t.path / "x.csv", {}, [](const CsvRow&) {}), ValidationError);
  }
  SUBCASE("unterminated quote") {
    put(t.path / "x.csv", "a,b\n\"1,2\n");
    CHECK_THROWS_AS(read_csv(t.path / "x.csv", {}, [](const CsvRow&) {}), ValidationError);
  }
  SUBCASE("missing file") {
    CHECK_THROWS_AS(read_csv(t.path / "none.csv", {}, [](const CsvRow&) {}), IoError);
  }
}

TEST_CASE("format_number round trips") {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(-1e6, 1e6);
  for (int i = 0; i < 1000; ++i) {
    const double x = u(rng) * std::pow(10.0, static_cast<int>(rng() % 20) - 10);
    CHECK(std::stod(format_number(x)) == x);
  }
  CHECK(format_number(0.1) == "0.1");
  CHECK(format_number(-2) == "-2");
  CHECK(format_fixed(-13.0349, 2) == "-13.03");
}

TEST_CASE("atomic file") {
  TempDir t("atomic");
  const auto target = t.path / "out.txt";
  put(target, "old");
  {
    AtomicFile f(target);
    f.stream() << "new";
  }
  CHECK(slurp(target) == "old");
  {
    AtomicFile f(target);
    f.stream() << "new";
    f.commit();
  }
  CHECK(slurp(target) == "new");
  int entries = 0;
  for ([[maybe_unused]] const auto& e : fs::directory_iterator(t.path)) ++entries;
  CHECK(entries == 1);
  CHECK_THROWS_AS(AtomicFile(t.path / "missing_dir" / "x.txt"), IoError);
}

TEST_CASE("load_dataset collects record-level rejections") {
  TempDir t("load");
  write_small_dataset(t.path);
  const auto r = load_dataset(t.path);
  CHECK(r.data.homes.size() == 2);
  CHECK(r.data.homes[0].home_id == "h1");
  CHECK(r.data.homes[0].secondary_heating == SecondaryHeating::none);
  CHECK(r.data.homes[1].age_range == AgeRange::unknown);
  CHECK(r.data.homes[1].has_pool);
  CHECK(r.data.retrofits.size() == 1);
  CHECK(r.data.consumption.size() == 2);
  CHECK(r.data.weather.size() == 1);

  auto has = [&](const std::string& table, const std::string& fragment) {
    return std::any_of(r.rejections.begin(), r.rejections.end(), [&](const Rejection& x) {
      return x.table == table && (x.field + ": " + x.rule).find(fragment) != std::string::npos;
    });
  };
  CHECK(has("homes", "duplicate"));
  CHECK(has("homes", "surface_m2"));
  CHECK(has("retrofits", "unknown home"));
  CHECK(has("retrofits", "comprehensive"));
  CHECK(has("consumption", "kwh"));
  CHECK(has("consumption", "duplicate"));
  CHECK(has("weather", "mean_temp_c"));

  write_rejections(t.path / "rej.csv", r.rejections);
  CHECK(read_all(t.path / "rej.csv", {"table", "line"}).size() == r.rejections.size());
}

TEST_CASE("write_dataset round trips through load_dataset") {
  TempDir a("rt_a"), b("rt_b");
  write_small_dataset(a.path);
  const auto first = load_dataset(a.path);
  write_dataset(b.path, first.data);
  const auto second = load_dataset(b.path);
  CHECK(second.rejections.empty());
  CHECK(second.data.homes.size() == first.data.homes.size());
  CHECK(second.data.consumption.size() == first.data.consumption.size());
  write_dataset(a.path, second.data);
  for (const char* f : {"homes.csv", "retrofits.csv", "consumption.csv", "weather.csv"})
    CHECK(slurp(a.path / f) == slurp(b.path / f));
}

TEST_CASE("estimates round trip") {
  TempDir t("est");
  std::vector<EstimateRow> rows{
      {"attic_insulation", Energy::electricity, Channel::heating,
       make_estimate(-0.1234567890123, 0.0123, Scale::log, Estimator::drdid, 40, 200)},
      {"heat_pump", Energy::gas, Channel::total,
       make_estimate(-8011.25, 260.6, Scale::kwh_per_year, Estimator::twfe, 12, 60)}};
  write_estimates(t.path / "e.csv", rows);
  const auto back = read_estimates(t.path / "e.csv");
  REQUIRE(back.size() == 2);
  CHECK(back[0].measure == "attic_insulation");
  CHECK(back[0].estimate.att == rows[0].estimate.att);
  CHECK(back[0].estimate.p_value == rows[0].estimate.p_value);
  CHECK(back[0].channel == Channel::heating);
  CHECK(back[1].energy == Energy::gas);
  CHECK(back[1].estimate.estimator == Estimator::twfe);
  CHECK(back[1].estimate.n_control == 60);
}

TEST_CASE("configuration") {
  SUBCASE("empty object keeps defaults") {
    const auto c = parse_config("{}");
    CHECK(c.analysis.k == 5);
    CHECK(c.analysis.t_ref_c == 15.0);
    CHECK(c.estimation.estimator == Estimator::drdid);
    CHECK(c.analysis.emissions.elec_kg_per_kwh == 0.079);
  }
  SUBCASE("values are applied") {
    const auto c = parse_config(R"({"analysis": {"energy": "gas", "k": 3, "measure": "heat_pump_air_air"},
                                    "estimation": {"estimator": "twfe", "scale": "log"},
                                    "scenario": {"n_treated": 40}})");
    CHECK(c.analysis.energy == Energy::gas);
    CHECK(c.analysis.k == 3);
    CHECK(c.analysis.measure == Measure::heat_pump_air_air);
    CHECK(c.estimation.estimator == Estimator::twfe);
    CHECK(c.estimation.scale == Scale::log);
    CHECK(c.scenario.n_treated == 40);
  }
  SUBCASE("errors") {
    CHECK_THROWS_AS(parse_config(R"({"analysis": {"kk": 3}})"), ValidationError);
    CHECK_THROWS_AS(parse_config(R"({"extra": {}})"), ValidationError);
    CHECK_THROWS_AS(parse_config(R"({"analysis": {"k": 0}})"), ValidationError);
    CHECK_THROWS_AS(parse_config(R"({"analysis": {"energy": "coal"}})"), ValidationError);
    CHECK_THROWS_AS(parse_config("{not json"), ValidationError);
    CHECK_THROWS_AS(load_config("/nonexistent/config.json"), IoError);
  }
}
