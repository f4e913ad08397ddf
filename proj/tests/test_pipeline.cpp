#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "retrofit/pipeline.hpp"
#include "retrofit/synth.hpp"

using namespace retrofit;
namespace fs = std::filesystem;

namespace {

struct Run {
  SyntheticDataset synth;
  AnalysisConfig config;
  PreparedData prepared;
  Cohort cohort;
  MatchResult matches;
};

Run run(ScenarioSpec spec, AnalysisConfig config) {
  Run r{generate(spec), config, {}, {}, {}};
  r.prepared = prepare(r.synth.data, r.config);
  r.cohort = build_cohort(r.prepared, r.config);
  r.matches = run_matching(r.prepared, r.cohort, r.config);
  return r;
}

ScenarioSpec small(std::uint64_t seed) {
  ScenarioSpec s;
  s.n_treated = 40;
  s.n_control_pool = 200;
  s.seed = seed;
  return s;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

PanelRow row(const std::string& measure, int d, double pre) {
  PanelRow r;
  r.measure = measure;
  r.observation.unit_id = r.observation.home_id = measure + std::to_string(pre);
  r.observation.d = d;
  r.observation.values = {pre, pre};
  return r;
}

}  // namespace

TEST_CASE("estimation on a small synthetic dataset") {
  auto r = run(small(3), AnalysisConfig{});
  CHECK(r.matches.records.size() <= 5 * r.cohort.of(Group::treated).size());
  CHECK(r.matches.records.size() >= 5 * (r.cohort.of(Group::treated).size() - 5));
  EstimationSettings s;
  s.channel = Channel::heating;
  s.scale = Scale::log;
  const auto out = run_estimation(r.prepared, r.cohort, r.matches.records, r.config, s);
  REQUIRE(out.estimates.size() == 1);
  const auto& e = out.estimates[0];
  CHECK(e.measure == "attic_insulation");
  CHECK(e.channel == Channel::heating);
  CHECK(e.estimate.scale == Scale::log);
  CHECK(std::abs(e.estimate.att - r.synth.truth.att_log_heating) < 4 * e.estimate.se);
  CHECK(e.estimate.n_treated > 30);
  REQUIRE(out.pretreatment.size() == 1);
  CHECK(out.pretreatment[0].treated_kwh_per_year > 0);
  CHECK(out.co2.empty());

  SUBCASE("percent and naive variants") {
    s.scale = Scale::percent;
    s.estimator = Estimator::naive;
    const auto p = run_estimation(r.prepared, r.cohort, r.matches.records, r.config, s);
    REQUIRE(p.estimates.size() == 1);
    CHECK(p.estimates[0].estimate.scale == Scale::percent);
    CHECK(p.estimates[0].estimate.estimator == Estimator::naive);
    CHECK(p.estimates[0].estimate.att < 0);
  }
  SUBCASE("deterministic") {
    const auto again = run_estimation(r.prepared, r.cohort, r.matches.records, r.config, s);
    CHECK(again.estimates[0].estimate.att == e.estimate.att);
    CHECK(again.estimates[0].estimate.se == e.estimate.se);
    CHECK(again.panel.size() == out.panel.size());
  }
}

TEST_CASE("pretreatment means of comparable groups") {
  auto spec = small(8);
  spec.n_treated = 60;
  spec.n_control_pool = 400;
  spec.propensity_coefs = {0.0, 0.0};
  auto r = run(spec, AnalysisConfig{});
  const auto panel = assemble_panel(r.prepared, r.cohort, r.matches.records, r.config,
                                    Energy::electricity, Channel::total, Scale::kwh_per_year);
  const auto pre = summarize_pretreatment(panel.rows);
  REQUIRE(pre.size() == 1);
  double st = 0, sc = 0, qt = 0, qc = 0;
  for (const auto& p : panel.rows) {
    const double a = 12 * p.observation.values.pre;
    (p.observation.d ? st : sc) += a;
    (p.observation.d ? qt : qc) += a * a;
  }
  const double nt = pre[0].n_treated, nc = pre[0].n_control;
  CHECK(pre[0].treated_kwh_per_year == doctest::Approx(st / nt));
  const double vt = (qt - st * st / nt) / (nt - 1), vc = (qc - sc * sc / nc) / (nc - 1);
  const double se = std::sqrt(vt / nt + vc / nc);
  CHECK(std::abs(pre[0].treated_kwh_per_year - pre[0].control_kwh_per_year) < 2 * se);
}

TEST_CASE("summarize_pretreatment") {
  std::vector<PanelRow> rows{row("attic_insulation", 1, 100), row("attic_insulation", 0, 80),
                             row("attic_insulation", 0, 120), row("heat_pump", 0, 50)};
  const auto pre = summarize_pretreatment(rows);
  REQUIRE(pre.size() == 1);
  CHECK(pre[0].measure == "attic_insulation");
  CHECK(pre[0].treated_kwh_per_year == 1200);
  CHECK(pre[0].control_kwh_per_year == 1200);
  CHECK(pre[0].n_control == 2);
  CHECK(summarize_pretreatment({}).empty());
}

TEST_CASE("fuel_switch_co2") {
  std::vector<EstimateRow> rows{
      {"heat_pump", Energy::electricity, Channel::total,
       make_estimate(4540, 100, Scale::kwh_per_year, Estimator::drdid, 10, 50)},
      {"heat_pump", Energy::gas, Channel::total,
       make_estimate(-11606, 300, Scale::kwh_per_year, Estimator::drdid, 10, 50)}};
  const auto co2 = fuel_switch_co2(rows, EmissionFactors{});
  REQUIRE(co2.size() == 3);
  CHECK(co2[0].delta_kg == doctest::Approx(358.66));
  CHECK(co2[1].delta_kg == doctest::Approx(-2371.1).epsilon(1e-4));
  CHECK(std::abs(co2[2].delta_kg - -2012) < 1);
  CHECK_FALSE(co2[2].delta_kwh);
  rows.pop_back();
  CHECK_THROWS_AS(fuel_switch_co2(rows, EmissionFactors{}), EstimationError);
}

TEST_CASE("report tables and figures") {
  std::vector<EstimateRow> rows{
      {"attic_insulation", Energy::electricity, Channel::total,
       to_percent(make_estimate(-0.1, 0.02, Scale::log, Estimator::drdid, 10, 50))},
      {"heat_pump", Energy::electricity, Channel::total,
       to_percent(make_estimate(std::log(0.8697), std::log(1.0151), Scale::log,
                                Estimator::drdid, 10, 50))}};
  const auto text = render_tables(rows, {}, {});
  CHECK(text.find("| measure | ATT | s.e. | LCB | UCB | p-value |") != std::string::npos);
  CHECK(text.find("| heat_pump | -13.03 | 1.51 | -15.55 | -10.44 | <0.001 |") != std::string::npos);

  const auto svg = render_svg(rows, "a < b");
  CHECK(svg.rfind("<svg", 0) == 0);
  CHECK(svg.find("a &lt; b") != std::string::npos);

  const auto dir = fs::temp_directory_path() / "retrofit_report_test";
  fs::remove_all(dir);
  write_report(dir, rows, {}, {});
  CHECK(fs::exists(dir / "report.md"));
  CHECK(fs::exists(dir / "figure_electricity_total_drdid_percent.csv"));
  CHECK(fs::exists(dir / "figure_electricity_total_drdid_percent.svg"));
  const auto first = slurp(dir / "report.md");
  write_report(dir, rows, {}, {});
  CHECK(slurp(dir / "report.md") == first);
  fs::remove_all(dir);
}
