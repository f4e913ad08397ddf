// Command-line driver: ingest, cohort, match, estimate, simulate, report.

#include <CLI11.hpp>
#include <cstdio>
#include <filesystem>
#include <iostream>

#include "json.hpp"
#include "retrofit/io.hpp"
#include "retrofit/pipeline.hpp"
#include "retrofit/synth.hpp"

namespace fs = std::filesystem;
using namespace retrofit;

namespace {

enum Exit { ok = 0, usage = 1, validation = 2, estimation = 3, io = 4 };

struct Options {
  std::string config;
  std::string input = ".";
  std::string output = ".";
  std::optional<std::uint64_t> seed;
  std::string energy, measure, estimator, channel, scale, analysis;
  std::optional<int> k;
  int replications = 0;
  bool strict = false;
};

RunConfig resolve(const Options& o) {
  RunConfig cfg = o.config.empty() ? RunConfig{} : load_config(o.config);
  auto& a = cfg.analysis;
  if (o.seed) a.seed = cfg.scenario.seed = *o.seed;
  if (!o.energy.empty()) a.energy = parse_enum<Energy>(o.energy);
  if (!o.measure.empty()) a.measure = parse_enum<Measure>(o.measure);
  if (o.k) a.k = *o.k;
  if (!o.analysis.empty()) {
    if (o.analysis == "fuel_switch") a.analysis = Analysis::fuel_switch;
    else if (o.analysis == "per_measure") a.analysis = Analysis::per_measure;
    else throw ValidationError("unknown analysis '" + o.analysis + "'");
  }
  if (!o.estimator.empty()) cfg.estimation.estimator = parse_enum<Estimator>(o.estimator);
  if (!o.channel.empty()) cfg.estimation.channel = parse_enum<Channel>(o.channel);
  if (!o.scale.empty()) cfg.estimation.scale = parse_enum<Scale>(o.scale);
  a.validate();
  cfg.scenario.validate();
  return cfg;
}

Dataset read_inputs(const fs::path& dir) {
  auto ingest = load_dataset(dir);
  if (!ingest.rejections.empty())
    std::cerr << "warning: " << ingest.rejections.size()
              << " input rows rejected; run 'ingest' to list them\n";
  return std::move(ingest.data);
}

fs::path stage_file(const fs::path& dir, const char* name) {
  const auto p = dir / name;
  if (!fs::exists(p)) throw IoError("missing " + p.string());
  return p;
}

int cmd_ingest(const Options& o) {
  auto ingest = load_dataset(o.input);
  fs::create_directories(o.output);
  write_dataset(o.output, ingest.data);
  write_rejections(fs::path(o.output) / "rejections.csv", ingest.rejections);
  std::cout << "homes " << ingest.data.homes.size() << ", retrofits "
            << ingest.data.retrofits.size() << ", consumption rows "
            << ingest.data.consumption.size() << ", weather rows " << ingest.data.weather.size()
            << ", rejected " << ingest.rejections.size() << "\n";
  if (o.strict && !ingest.rejections.empty())
    throw ValidationError(std::to_string(ingest.rejections.size()) + " rows rejected");
  return ok;
}

int cmd_cohort(const Options& o) {
  const auto cfg = resolve(o);
  const auto prepared = prepare(read_inputs(o.input), cfg.analysis);
  const auto cohort = build_cohort(prepared, cfg.analysis);
  fs::create_directories(o.output);
  write_cohort(fs::path(o.output) / "cohort.csv", cohort);
  std::cout << "treated " << cohort.of(Group::treated).size() << ", control pool "
            << cohort.of(Group::control_pool).size() << ", excluded " << cohort.exclusions.size()
            << "\n";
  return ok;
}

int cmd_match(const Options& o) {
  const auto cfg = resolve(o);
  const auto prepared = prepare(read_inputs(o.input), cfg.analysis);
  const auto cohort = read_cohort(stage_file(o.input, "cohort.csv"), cfg.analysis);
  const auto result = run_matching(prepared, cohort, cfg.analysis);
  fs::create_directories(o.output);
  write_matches(fs::path(o.output) / "matches.csv", result.records);
  write_match_drops(fs::path(o.output) / "unmatched.csv", result.dropped);
  std::cout << "match records " << result.records.size() << ", unmatched treated "
            << result.dropped.size() << "\n";
  return ok;
}

int cmd_estimate(const Options& o) {
  const auto cfg = resolve(o);
  const auto prepared = prepare(read_inputs(o.input), cfg.analysis);
  const auto cohort = read_cohort(stage_file(o.input, "cohort.csv"), cfg.analysis);
  const auto matches = read_matches(stage_file(o.input, "matches.csv"));
  const auto out = run_estimation(prepared, cohort, matches, cfg.analysis, cfg.estimation);
  for (const auto& w : out.warnings) std::cerr << "warning: " << w << "\n";

  const fs::path dir = o.output;
  fs::create_directories(dir);
  write_panel(dir / "panel.csv", out.panel);
  {
    const std::string_view header[] = {"unit", "reason"};
    CsvWriter w(dir / "dropped_units.csv", header);
    for (const auto& d : out.dropped) w.row({d.home_id, std::string(to_string(d.reason))});
    w.commit();
  }
  write_estimates(dir / "estimates.csv", out.estimates);
  write_pretreatment(dir / "pretreatment.csv", out.pretreatment);
  if (!out.co2.empty()) write_co2(dir / "co2.csv", out.co2);
  for (const auto& r : out.estimates)
    std::cout << r.measure << " (" << to_string(r.energy) << "): ATT " << r.estimate.att
              << " s.e. " << r.estimate.se << " [" << to_string(r.estimate.scale) << "]\n";
  return ok;
}

int cmd_simulate(const Options& o) {
  const auto cfg = resolve(o);
  const fs::path dir = o.output;
  fs::create_directories(dir);
  if (o.replications > 0) {
    const auto r = coverage_experiment(cfg.scenario, o.replications, cfg.estimation.estimator);
    nlohmann::ordered_json j;
    j["estimator"] = std::string(to_string(cfg.estimation.estimator));
    j["misspecification"] = std::string(to_string(cfg.scenario.misspecification));
    j["true_att_log"] = cfg.scenario.true_att_log;
    j["replications"] = r.replications;
    j["failures"] = r.failures;
    j["coverage"] = r.coverage;
    j["mean_bias"] = r.mean_bias;
    j["mean_se"] = r.mean_se;
    j["sd_estimate"] = r.sd_estimate;
    AtomicFile f(dir / "coverage.json");
    f.stream() << j.dump(2) << "\n";
    f.commit();
    std::cout << j.dump() << "\n";
    return ok;
  }
  const auto synth = generate(cfg.scenario);
  write_dataset(dir, synth.data);
  nlohmann::ordered_json t;
  t["kind"] = std::string(to_string(cfg.scenario.kind));
  t["att_log_heating"] = synth.truth.att_log_heating;
  t["elec_kwh_per_year"] = synth.truth.elec_kwh_per_year;
  t["gas_kwh_per_year"] = synth.truth.gas_kwh_per_year;
  t["treated_ids"] = synth.truth.treated_ids;
  AtomicFile f(dir / "truth.json");
  f.stream() << t.dump(2) << "\n";
  f.commit();
  std::cout << "homes " << synth.data.homes.size() << ", treated " << synth.truth.treated_ids.size()
            << ", consumption rows " << synth.data.consumption.size() << "\n";
  return ok;
}

int cmd_report(const Options& o) {
  const fs::path in = o.input;
  const auto estimates = read_estimates(stage_file(in, "estimates.csv"));
  std::vector<PretreatmentRow> pre;
  if (fs::exists(in / "pretreatment.csv")) pre = read_pretreatment(in / "pretreatment.csv");
  std::vector<Co2Row> co2;
  if (fs::exists(in / "co2.csv")) co2 = read_co2(in / "co2.csv");
  write_report(o.output, estimates, pre, co2);
  std::cout << render_tables(estimates, pre, co2);
  return ok;
}

void error_report(const char* kind, int code, const std::string& message) {
  nlohmann::ordered_json j;
  j["status"] = "error";
  j["kind"] = kind;
  j["exit_code"] = code;
  j["message"] = message;
  std::cerr << j.dump() << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Retrofit effect estimation on metered energy consumption"};
  app.require_subcommand(1, 1);
  Options o;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--config", o.config, "JSON configuration file")->check(CLI::ExistingFile);
    sub->add_option("--input", o.input, "input directory");
    sub->add_option("--output", o.output, "output directory");
    sub->add_option("--seed", o.seed, "random seed (analysis and scenario)");
    sub->add_option("--energy", o.energy, "electricity | gas");
    sub->add_option("--measure", o.measure, "restrict to one measure");
    sub->add_option("--k", o.k, "controls per treated home")->check(CLI::PositiveNumber);
    sub->add_option("--estimator", o.estimator, "naive | twfe | drdid");
    sub->add_option("--channel", o.channel, "total | heating | base");
    sub->add_option("--scale", o.scale, "log | percent | kwh_per_year");
    sub->add_option("--analysis", o.analysis, "per_measure | fuel_switch");
  };

  auto* ingest = app.add_subcommand("ingest", "validate and normalize input CSVs");
  common(ingest);
  ingest->add_flag("--strict", o.strict, "fail when any row is rejected");
  auto* cohort = app.add_subcommand("cohort", "select treated homes and the control pool");
  common(cohort);
  auto* match = app.add_subcommand("match", "k nearest controls per treated home");
  common(match);
  auto* estimate = app.add_subcommand("estimate", "panel reduction and ATT estimation");
  common(estimate);
  auto* simulate = app.add_subcommand("simulate", "synthetic dataset or coverage experiment");
  common(simulate);
  simulate->add_option("--replications", o.replications, "run a coverage experiment instead")
      ->check(CLI::NonNegativeNumber);
  auto* report = app.add_subcommand("report", "tables and figures from estimates.csv");
  common(report);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? ok : usage;
  }

  try {
    if (ingest->parsed()) return cmd_ingest(o);
    if (cohort->parsed()) return cmd_cohort(o);
    if (match->parsed()) return cmd_match(o);
    if (estimate->parsed()) return cmd_estimate(o);
    if (simulate->parsed()) return cmd_simulate(o);
    if (report->parsed()) return cmd_report(o);
  } catch (const ValidationError& e) {
    error_report("validation", validation, e.what());
    return validation;
  } catch (const EstimationError& e) {
    error_report("estimation", estimation, e.what());
    return estimation;
  } catch (const IoError& e) {
    error_report("io", io, e.what());
    return io;
  } catch (const fs::filesystem_error& e) {
    error_report("io", io, e.what());
    return io;
  } catch (const std::exception& e) {
    error_report("internal", usage, e.what());
    return usage;
  }
  return usage;
}
