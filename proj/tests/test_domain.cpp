#include <doctest.h>

#include "fixtures.hpp"
#include "retrofit/domain.hpp"

using namespace retrofit;

TEST_CASE("valid home passes unchanged") {
  auto h = fixtures::home("h1");
  h.surface_m2 = 120;
  h.latitude = 48.8;
  CHECK(check_home(h).empty());
  CHECK(validate_home(h) == h);
}

TEST_CASE("validate_home is idempotent") {
  const auto h = fixtures::home("h1");
  CHECK(validate_home(validate_home(h)) == validate_home(h));
}

TEST_CASE("negative surface is rejected with its rule") {
  auto h = fixtures::home("h1");
  h.surface_m2 = -5;
  const auto v = check_home(h);
  REQUIRE(v.size() == 1);
  CHECK(v[0] == FieldViolation{"surface_m2", "surface_m2 > 0"});
  CHECK_THROWS_AS(validate_home(h), ValidationError);
}

TEST_CASE("latitude out of range is rejected") {
  auto h = fixtures::home("h1");
  h.latitude = 123;
  const auto v = check_home(h);
  REQUIRE(v.size() == 1);
  CHECK(v[0].field == "latitude");
}

TEST_CASE("every violation is listed") {
  auto h = fixtures::home("h1");
  h.surface_m2 = 0;
  h.inhabitants = 0;
  h.longitude = 200;
  CHECK(check_home(h).size() == 3);
}

TEST_CASE("enum names round-trip") {
  for (auto name : EnumTraits<AgeRange>::names) CHECK(to_string(parse_enum<AgeRange>(name)) == name);
  CHECK(to_string(Reason::coverage_pre) == "coverage_pre");
  CHECK_FALSE(try_parse_enum<Heating>("coal"));
  CHECK_THROWS_AS(parse_enum<Heating>("coal"), ValidationError);
}

TEST_CASE("config defaults and invariants") {
  AnalysisConfig c;
  CHECK(c.k == 5);
  CHECK(c.t_ref_c == 15.0);
  CHECK(c.base_months(Energy::electricity) == std::set<unsigned>{5, 6, 9});
  CHECK(c.base_months(Energy::gas) == std::set<unsigned>{5, 6, 7, 8, 9});
  CHECK_NOTHROW(c.validate());
  c.k = 0;
  CHECK_THROWS_AS(c.validate(), ValidationError);
  c.k = 5;
  c.base_months_gas.clear();
  CHECK_THROWS_AS(c.validate(), ValidationError);
}

TEST_CASE("dates") {
  CHECK(format_date(parse_date("2020-02-29")) == "2020-02-29");
  CHECK_THROWS(parse_date("2021-02-29"));
  CHECK_THROWS(parse_date("2021-1-5"));
  CHECK(days_in_month(2020, 2) == 29);
  CHECK(days_in_month(2021, 2) == 28);
  const MonthKey m{2020, 12};
  CHECK(MonthKey::from_index(m.index() + 1) == MonthKey{2021, 1});
  CHECK(days_between(parse_date("2020-01-01"), parse_date("2020-03-01")) == 60);
}
