#include <doctest.h>

#include <cmath>

#include "retrofit/emissions.hpp"
#include "retrofit/estimate.hpp"

using namespace retrofit;

TEST_CASE("normal distribution helpers") {
  CHECK(normal_quantile(0.975) == doctest::Approx(1.959964).epsilon(1e-7));
  CHECK(normal_cdf(0) == doctest::Approx(0.5));
  for (double p : {0.001, 0.02, 0.3, 0.5, 0.77, 0.999})
    CHECK(normal_cdf(normal_quantile(p)) == doctest::Approx(p).epsilon(1e-9));
}

TEST_CASE("confidence_and_p") {
  auto ci = confidence_and_p(0.0, 0.3);
  CHECK(ci.p_value == doctest::Approx(1.0));
  CHECK(confidence_and_p(1.959964, 1.0).p_value == doctest::Approx(0.05).epsilon(1e-4));
  auto c = confidence_and_p(-2.0, 0.5);
  CHECK(c.lcb == doctest::Approx(-2.0 - 1.959964 * 0.5));
  CHECK(c.ucb == doctest::Approx(-2.0 + 1.959964 * 0.5));
  CHECK_THROWS_AS(confidence_and_p(1.0, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(confidence_and_p(1.0, -1.0), std::invalid_argument);

  auto e = make_estimate(-0.2, 0.05, Scale::log, Estimator::drdid, 10, 50);
  CHECK(e.lcb <= e.att);
  CHECK(e.att <= e.ucb);
  CHECK(e.p_value == doctest::Approx(2 * (1 - normal_cdf(4.0))));
}

TEST_CASE("to_percent") {
  auto heat_pump = make_estimate(std::log(0.8697), std::log(1.0151), Scale::log,
                                 Estimator::drdid, 100, 500);
  auto pc = to_percent(heat_pump);
  CHECK(pc.scale == Scale::percent);
  CHECK(pc.att == doctest::Approx(-13.03).epsilon(1e-3));
  CHECK(pc.se == doctest::Approx(1.51));
  CHECK(std::abs(pc.lcb - -15.55) < 0.02);
  CHECK(std::abs(pc.ucb - -10.43) < 0.02);
  CHECK(pc.p_value == heat_pump.p_value);

  auto zero = to_percent(make_estimate(0.0, 0.1, Scale::log, Estimator::naive, 2, 2));
  CHECK(zero.att == 0.0);
  CHECK(zero.lcb < zero.att);
  CHECK(zero.att < zero.ucb);

  double prev = -1e9;
  for (double x = -2; x <= 2; x += 0.01) {
    const double y = log_to_percent(x);
    CHECK(y > prev);
    prev = y;
  }
}

TEST_CASE("co2_delta") {
  const EmissionFactors f;
  CHECK(co2_delta(4540, Energy::electricity, f) == doctest::Approx(358.66));
  CHECK(co2_delta(-11606, Energy::gas, f) == doctest::Approx(-2371.1).epsilon(1e-4));
  CHECK(co2_delta(0, Energy::gas, f) == 0);
  CHECK(fuel_switch_total(359, -2371) == -2012);
  CHECK(fuel_switch_total(0, 0) == 0);
  for (auto e : {Energy::electricity, Energy::gas})
    CHECK(co2_delta(123.4 + 567.8, e, f) ==
          doctest::Approx(co2_delta(123.4, e, f) + co2_delta(567.8, e, f)));

  auto est = make_estimate(4540, 100, Scale::kwh_per_year, Estimator::drdid, 10, 50);
  CHECK(co2_delta(est, Energy::electricity, f) == doctest::Approx(358.66));
  est.scale = Scale::percent;
  CHECK_THROWS_AS(co2_delta(est, Energy::electricity, f), std::invalid_argument);
}
