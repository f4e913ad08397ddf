#include "retrofit/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <memory>
#include <sstream>
#include <tuple>

#include "retrofit/emissions.hpp"
#include "retrofit/estimators/did.hpp"

namespace retrofit {

DistanceKind distance_kind(const AnalysisConfig& config) {
  if (config.analysis == Analysis::fuel_switch) return DistanceKind::gas;
  return config.energy == Energy::electricity ? DistanceKind::electric : DistanceKind::gas;
}

std::vector<Energy> outcome_energies(const AnalysisConfig& config) {
  if (config.analysis == Analysis::fuel_switch) return {Energy::electricity, Energy::gas};
  return {config.energy};
}

namespace {

Energy heating_energy(const AnalysisConfig& config) {
  return config.analysis == Analysis::fuel_switch ? Energy::gas : config.energy;
}

std::map<std::string, const CohortMember*> treated_index(const Cohort& cohort) {
  std::map<std::string, const CohortMember*> out;
  for (const auto* m : cohort.of(Group::treated)) out.emplace(m->home_id, m);
  return out;
}

const HomeRecord& home_of(const PreparedData& data, const std::string& id) {
  auto it = data.homes.find(id);
  if (it == data.homes.end()) throw ValidationError("home '" + id + "' is not in homes.csv");
  return it->second;
}

const StationClimate& climate_of(const PreparedData& data, const std::string& id) {
  const auto* s = data.station(id);
  if (!s) throw ValidationError("home '" + id + "' has no weather station");
  return *s;
}

}  // namespace

MonthlySeries treated_series(const PreparedData& data, const CohortMember& member, Energy energy,
                             const AnalysisConfig& config) {
  const auto& raw = data.monthly(member.home_id, energy);
  if (member.fuel_switch && energy == Energy::gas)
    return impute_gas_after(raw, data.monthly(member.home_id, Energy::electricity),
                            *member.retrofit_date, config.exclusion_window_months);
  return raw;
}

std::vector<TreatedUnit> treated_units(const PreparedData& data, const Cohort& cohort) {
  std::vector<TreatedUnit> out;
  for (const auto* m : cohort.of(Group::treated))
    out.push_back({home_of(data, m->home_id), *m->retrofit_date, *m->measure});
  return out;
}

std::vector<HomeRecord> control_homes(const PreparedData& data, const Cohort& cohort) {
  std::vector<HomeRecord> out;
  for (const auto* m : cohort.of(Group::control_pool)) out.push_back(home_of(data, m->home_id));
  return out;
}

Eligibility control_eligibility(const PreparedData& data, const Cohort& cohort,
                                const AnalysisConfig& config) {
  struct Windows {
    std::map<Energy, std::optional<ObservationWindow>> of;
  };
  auto members = std::make_shared<std::map<std::string, const CohortMember*>>(treated_index(cohort));
  auto cache = std::make_shared<std::map<std::string, Windows>>();
  const auto energies = outcome_energies(config);
  const Energy heating = heating_energy(config);

  return [&data, &config, members, cache, energies, heating](const TreatedUnit& t,
                                                             const HomeRecord& c) {
    auto mit = members->find(t.home.home_id);
    if (mit == members->end()) return false;
    auto [wit, fresh] = cache->try_emplace(t.home.home_id);
    if (fresh)
      for (Energy e : energies) {
        const auto series = treated_series(data, *mit->second, e, config);
        wit->second.of[e] = series.empty() ? std::nullopt : std::optional{window_of(series)};
      }
    const auto* climate = data.station(c.home_id);
    if (!climate) return false;
    const MatchRecord probe{t.home.home_id, c.home_id, 0.0, t.date};
    for (Energy e : energies) {
      const auto& window = wit->second.of[e];
      if (!window) return false;
      auto clipped = align_control_window(probe, data.monthly(c.home_id, e), *window,
                                          config.exclusion_window_months);
      if (std::holds_alternative<Reason>(clipped)) return false;
      auto a = assess_energy(c.home_id, e, std::get<MonthlySeries>(clipped), *climate, t.date,
                             config);
      if (std::holds_alternative<Reason>(a)) return false;
      if (e == heating) {
        const auto& as = std::get<EnergyAssessment>(a);
        if (!is_detected(as.heating_pre) || !is_detected(as.heating_post)) return false;
      }
    }
    return true;
  };
}

MatchResult run_matching(const PreparedData& data, const Cohort& cohort,
                         const AnalysisConfig& config) {
  const auto treated = treated_units(data, cohort);
  const auto pool = control_homes(data, cohort);
  return match_controls(treated, pool, distance_kind(config), config.k,
                        control_eligibility(data, cohort, config));
}

namespace {

std::variant<PeriodValues, Reason> period_values(const std::string& id, Energy energy,
                                                 const MonthlySeries& series,
                                                 const StationClimate& climate, const Date& split,
                                                 Channel channel, const AnalysisConfig& config) {
  auto cells = normalize_series(id, energy, series, climate, split, config);
  if (auto* r = std::get_if<Reason>(&cells)) return *r;
  return reduce_periods(std::get<std::vector<MonthlyCell>>(cells), split, channel);
}

std::variant<TwoPeriodObservation, Reason> observation(const std::string& unit_id,
                                                       const HomeRecord& home,
                                                       const std::string& treated_id, int d,
                                                       std::variant<PeriodValues, Reason> values,
                                                       Scale scale) {
  if (auto* r = std::get_if<Reason>(&values)) return *r;
  const auto& v = std::get<PeriodValues>(values);
  const auto y0 = make_outcome(v.pre, scale);
  const auto y1 = make_outcome(v.post, scale);
  if (!y0 || !y1) return Reason::nonpositive_outcome;
  return TwoPeriodObservation{unit_id, home.home_id, treated_id, d, v, *y0, *y1, home};
}

}  // namespace

PanelAssembly assemble_panel(const PreparedData& data, const Cohort& cohort,
                             std::span<const MatchRecord> matches, const AnalysisConfig& config,
                             Energy energy, Channel channel, Scale outcome_scale) {
  const auto members = treated_index(cohort);
  std::vector<std::string> order;
  std::map<std::string, std::vector<const MatchRecord*>> by_treated;
  for (const auto& m : matches) {
    auto [it, fresh] = by_treated.try_emplace(m.treated_id);
    if (fresh) order.push_back(m.treated_id);
    it->second.push_back(&m);
  }

  PanelAssembly out;
  for (const auto& tid : order) {
    auto mit = members.find(tid);
    if (mit == members.end())
      throw ValidationError("matched treated home '" + tid + "' is not a treated cohort member");
    const CohortMember& member = *mit->second;
    const std::string measure(to_string(*member.measure));
    const HomeRecord& home = home_of(data, tid);
    const auto series = treated_series(data, member, energy, config);
    const Date split = *member.retrofit_date;

    auto treated = observation(
        tid, home, tid, 1,
        period_values(tid, energy, series, climate_of(data, tid), split, channel, config),
        outcome_scale);
    if (auto* r = std::get_if<Reason>(&treated)) {
      out.dropped.push_back({tid, *r});
      continue;
    }
    out.rows.push_back({measure, energy, channel, outcome_scale,
                        std::move(std::get<TwoPeriodObservation>(treated))});
    if (series.empty()) continue;
    const auto window = window_of(series);

    for (const auto* m : by_treated[tid]) {
      if (m->fictive_date != split)
        throw ValidationError("match " + tid + " -> " + m->control_id +
                              ": fictive date differs from the retrofit date");
      const std::string unit = m->control_id + "@" + tid;
      const HomeRecord& control = home_of(data, m->control_id);
      auto clipped = align_control_window(*m, data.monthly(m->control_id, energy), window,
                                          config.exclusion_window_months);
      if (auto* r = std::get_if<Reason>(&clipped)) {
        out.dropped.push_back({unit, *r});
        continue;
      }
      auto obs = observation(unit, control, tid, 0,
                             period_values(m->control_id, energy, std::get<MonthlySeries>(clipped),
                                           climate_of(data, m->control_id), split, channel, config),
                             outcome_scale);
      if (auto* r = std::get_if<Reason>(&obs)) {
        out.dropped.push_back({unit, *r});
        continue;
      }
      out.rows.push_back({measure, energy, channel, outcome_scale,
                          std::move(std::get<TwoPeriodObservation>(obs))});
    }
  }
  return out;
}

AttEstimate estimate_att(const Design& design, Estimator estimator, Scale outcome_scale,
                         const AnalysisConfig& config, int bootstrap_replicates) {
  double att = 0.0, se = 0.0;
  switch (estimator) {
    case Estimator::naive:
      att = naive_did(design.y0, design.y1, design.d);
      se = naive_did_se(design.delta_y, design.d);
      break;
    case Estimator::twfe: {
      const auto fit =
          twfe_att(design.y0, design.y1, design.d, design.x, design.home_cluster, design.columns);
      att = fit.att;
      se = fit.se;
      break;
    }
    case Estimator::drdid: {
      DrDidOptions opt;
      opt.propensity_clip = config.propensity_clip;
      const auto fit = drdid_panel(design.delta_y, design.d, design.x, opt, design.columns);
      att = fit.att;
      se = fit.se;
      if (bootstrap_replicates > 0) {
        const auto boot = drdid_bootstrap_se(design.delta_y, design.d, design.x,
                                             design.match_cluster, bootstrap_replicates,
                                             config.seed, opt);
        se = boot.se;
      }
      break;
    }
  }
  if (!(std::isfinite(att) && std::isfinite(se) && se > 0.0))
    throw EstimationError("estimate: degenerate standard error");
  return make_estimate(att, se, outcome_scale, estimator, design.n_treated, design.n_control);
}

namespace {

int measure_rank(const std::string& label) {
  if (auto m = try_parse_enum<Measure>(label)) return static_cast<int>(*m);
  return static_cast<int>(EnumTraits<Measure>::names.size());
}

// Rows grouped by (energy, channel, measure) in a stable order.
std::vector<std::vector<const PanelRow*>> group_rows(std::span<const PanelRow> rows) {
  std::map<std::tuple<int, int, int, std::string>, std::vector<const PanelRow*>> groups;
  for (const auto& r : rows)
    groups[{static_cast<int>(r.energy), static_cast<int>(r.channel), measure_rank(r.measure),
            r.measure}]
        .push_back(&r);
  std::vector<std::vector<const PanelRow*>> out;
  for (auto& [k, v] : groups) out.push_back(std::move(v));
  return out;
}

}  // namespace

std::vector<EstimateRow> estimate_by_measure(std::span<const PanelRow> rows,
                                             const AnalysisConfig& config,
                                             const EstimationSettings& settings,
                                             std::vector<std::string>* warnings) {
  std::vector<EstimateRow> out;
  for (const auto& group : group_rows(rows)) {
    const PanelRow& first = *group.front();
    if (settings.scale == Scale::percent && first.scale != Scale::log)
      throw EstimationError("percent estimates need a log-scale panel");
    if (settings.scale != Scale::percent && first.scale != settings.scale)
      throw EstimationError("panel scale does not match the requested scale");
    std::vector<TwoPeriodObservation> obs;
    for (const auto* r : group) obs.push_back(r->observation);
    const auto set = distance_kind(config) == DistanceKind::electric ? CovariateSet::electric
                                                                     : CovariateSet::surface_only;
    Design design;
    try {
      design = build_design(obs, set);
    } catch (const EstimationError& e) {
      throw EstimationError(first.measure + " (" + std::string(to_string(first.energy)) +
                            "): " + e.what());
    }
    if (warnings)
      for (const auto& w : design.warnings)
        warnings->push_back(first.measure + " (" + std::string(to_string(first.energy)) + "): " + w);
    auto est = estimate_att(design, settings.estimator, first.scale, config,
                            settings.bootstrap_replicates);
    if (settings.scale == Scale::percent) est = to_percent(est);
    out.push_back({first.measure, first.energy, first.channel, est});
  }
  return out;
}

std::vector<PretreatmentRow> summarize_pretreatment(std::span<const PanelRow> rows) {
  std::vector<PretreatmentRow> out;
  for (const auto& group : group_rows(rows)) {
    const PanelRow& first = *group.front();
    if (first.channel != Channel::total) continue;
    double st = 0.0, sc = 0.0;
    int nt = 0, nc = 0;
    for (const auto* r : group) {
      const double annual = 12.0 * r->observation.values.pre;
      if (r->observation.d != 0) st += annual, ++nt;
      else sc += annual, ++nc;
    }
    if (nt == 0 || nc == 0) continue;
    out.push_back({first.measure, first.energy, st / nt, sc / nc, nt, nc});
  }
  return out;
}

std::vector<Co2Row> fuel_switch_co2(std::span<const EstimateRow> rows,
                                    const EmissionFactors& factors) {
  const EstimateRow* elec = nullptr;
  const EstimateRow* gas = nullptr;
  for (const auto& r : rows) {
    if (r.estimate.scale != Scale::kwh_per_year) continue;
    if (r.energy == Energy::electricity && !elec) elec = &r;
    if (r.energy == Energy::gas && !gas) gas = &r;
  }
  if (!elec || !gas) throw EstimationError("fuel switch: need kWh per year estimates on both energies");
  const double ke = co2_delta(elec->estimate, Energy::electricity, factors);
  const double kg = co2_delta(gas->estimate, Energy::gas, factors);
  return {{"electricity", elec->estimate.att, ke},
          {"gas", gas->estimate.att, kg},
          {"total", std::nullopt, fuel_switch_total(ke, kg)}};
}

EstimationOutput run_estimation(const PreparedData& data, const Cohort& cohort,
                                std::span<const MatchRecord> matches,
                                const AnalysisConfig& config, const EstimationSettings& settings) {
  const bool fuel = config.analysis == Analysis::fuel_switch;
  EstimationSettings eff = settings;
  if (fuel) eff.scale = Scale::kwh_per_year;
  const Scale outcome = eff.scale == Scale::kwh_per_year ? Scale::kwh_per_year : Scale::log;

  EstimationOutput out;
  for (Energy e : outcome_energies(config)) {
    auto panel = assemble_panel(data, cohort, matches, config, e, eff.channel, outcome);
    auto est = estimate_by_measure(panel.rows, config, eff, &out.warnings);
    out.estimates.insert(out.estimates.end(), est.begin(), est.end());

    std::vector<PretreatmentRow> pre;
    if (eff.channel == Channel::total) {
      pre = summarize_pretreatment(panel.rows);
    } else {
      const auto total = assemble_panel(data, cohort, matches, config, e, Channel::total,
                                        Scale::kwh_per_year);
      pre = summarize_pretreatment(total.rows);
    }
    out.pretreatment.insert(out.pretreatment.end(), pre.begin(), pre.end());
    out.panel.insert(out.panel.end(), std::make_move_iterator(panel.rows.begin()),
                     std::make_move_iterator(panel.rows.end()));
    for (auto& d : panel.dropped)
      out.dropped.push_back({d.home_id + " (" + std::string(to_string(e)) + ")", d.reason});
  }
  if (fuel) out.co2 = fuel_switch_co2(out.estimates, config.emissions);
  return out;
}

// ---------------------------------------------------------------- report

namespace {

struct TableKey {
  int energy, channel, estimator, scale;
  auto operator<=>(const TableKey&) const = default;
};

std::map<TableKey, std::vector<const EstimateRow*>> tables_of(std::span<const EstimateRow> rows) {
  std::map<TableKey, std::vector<const EstimateRow*>> out;
  for (const auto& r : rows)
    out[{static_cast<int>(r.energy), static_cast<int>(r.channel),
         static_cast<int>(r.estimate.estimator), static_cast<int>(r.estimate.scale)}]
        .push_back(&r);
  for (auto& [k, v] : out)
    std::stable_sort(v.begin(), v.end(), [](const auto* a, const auto* b) {
      return measure_rank(a->measure) < measure_rank(b->measure);
    });
  return out;
}

std::string scale_unit(Scale s) {
  switch (s) {
    case Scale::log: return "log points";
    case Scale::percent: return "%";
    case Scale::kwh_per_year: return "kWh/year";
  }
  return "";
}

std::string table_title(const EstimateRow& r) {
  return std::string(to_string(r.energy)) + ", " + std::string(to_string(r.channel)) +
         " consumption, " + std::string(to_string(r.estimate.estimator)) + " (" +
         scale_unit(r.estimate.scale) + ")";
}

int decimals(Scale s) { return s == Scale::kwh_per_year ? 0 : s == Scale::log ? 4 : 2; }

std::string p_text(double p) { return p < 0.001 ? "<0.001" : format_fixed(p, 3); }

}  // namespace

std::string render_tables(std::span<const EstimateRow> estimates,
                          std::span<const PretreatmentRow> pretreatment,
                          std::span<const Co2Row> co2) {
  std::ostringstream md;
  md << "# Retrofit effect estimates\n";
  for (const auto& [key, rows] : tables_of(estimates)) {
    const auto s = rows.front()->estimate.scale;
    const int dp = decimals(s);
    md << "\n## " << table_title(*rows.front()) << "\n\n";
    md << "| measure | ATT | s.e. | LCB | UCB | p-value |\n";
    md << "|---|---:|---:|---:|---:|---:|\n";
    for (const auto* r : rows) {
      const auto& e = r->estimate;
      md << "| " << r->measure << " | " << format_fixed(e.att, dp) << " | "
         << format_fixed(e.se, dp) << " | " << format_fixed(e.lcb, dp) << " | "
         << format_fixed(e.ucb, dp) << " | " << p_text(e.p_value) << " |\n";
    }
  }

  if (!pretreatment.empty()) {
    md << "\n## Mean consumption before retrofit (kWh/year)\n\n";
    md << "| measure | energy | treated | control | n treated | n control |\n";
    md << "|---|---|---:|---:|---:|---:|\n";
    for (const auto& r : pretreatment)
      md << "| " << r.measure << " | " << to_string(r.energy) << " | "
         << format_fixed(r.treated_kwh_per_year, 0) << " | "
         << format_fixed(r.control_kwh_per_year, 0) << " | " << r.n_treated << " | "
         << r.n_control << " |\n";
  }

  if (!co2.empty()) {
    md << "\n## Emissions change (kg CO2eq/year)\n\n";
    md << "| energy | consumption change (kWh/year) | emissions change |\n";
    md << "|---|---:|---:|\n";
    for (const auto& r : co2)
      md << "| " << r.energy << " | " << (r.delta_kwh ? format_fixed(*r.delta_kwh, 0) : "")
         << " | " << format_fixed(r.delta_kg, 0) << " |\n";

    // Relative to the treated group's emissions before the switch, using the
    // factors implied by the rows above.
    std::map<std::string, double> factor;
    std::optional<double> total;
    for (const auto& r : co2) {
      if (r.energy == "total") total = r.delta_kg;
      else if (r.delta_kwh && *r.delta_kwh != 0.0) factor[r.energy] = r.delta_kg / *r.delta_kwh;
    }
    std::map<std::string, double> base;
    for (const auto& p : pretreatment) {
      const std::string e(to_string(p.energy));
      if (factor.contains(e) && !base.contains(e)) base[e] = factor[e] * p.treated_kwh_per_year;
    }
    if (total && base.size() == 2 && base["electricity"] + base["gas"] > 0)
      md << "\nChange relative to pre-retrofit emissions of the treated homes: "
         << format_fixed(100.0 * *total / (base["electricity"] + base["gas"]), 1) << "%\n";
  }
  return md.str();
}

namespace {

double nice_step(double span) {
  const double raw = span / 5.0;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  for (double m : {1.0, 2.0, 5.0})
    if (raw <= m * mag) return m * mag;
  return 10.0 * mag;
}

std::string xml_escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string px(double v) { return format_fixed(v, 2); }

}  // namespace

std::string render_svg(std::span<const EstimateRow> rows, const std::string& title) {
  const double left = 190, right = 30, top = 50, row_h = 32, bottom = 50, plot_w = 420;
  const double width = left + plot_w + right;
  const double height = top + row_h * static_cast<double>(std::max<std::size_t>(rows.size(), 1)) + bottom;

  double lo = 0.0, hi = 0.0;
  for (const auto& r : rows) {
    lo = std::min(lo, r.estimate.lcb);
    hi = std::max(hi, r.estimate.ucb);
  }
  if (hi - lo <= 0.0) hi = lo + 1.0;
  const double step = nice_step(hi - lo);
  lo = std::floor(lo / step) * step;
  hi = std::ceil(hi / step) * step;
  auto x = [&](double v) { return left + (v - lo) / (hi - lo) * plot_w; };

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << px(width) << "\" height=\""
      << px(height) << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg << "<text x=\"" << px(width / 2) << "\" y=\"24\" text-anchor=\"middle\" font-size=\"14\">"
      << xml_escape(title) << "</text>\n";
  const double axis_y = top + row_h * static_cast<double>(std::max<std::size_t>(rows.size(), 1));
  svg << "<line x1=\"" << px(left) << "\" y1=\"" << px(axis_y) << "\" x2=\"" << px(left + plot_w)
      << "\" y2=\"" << px(axis_y) << "\" stroke=\"black\"/>\n";
  const int ticks = static_cast<int>(std::lround((hi - lo) / step));
  for (int i = 0; i <= ticks; ++i) {
    const double v = lo + i * step;
    svg << "<line x1=\"" << px(x(v)) << "\" y1=\"" << px(axis_y) << "\" x2=\"" << px(x(v))
        << "\" y2=\"" << px(axis_y + 5) << "\" stroke=\"black\"/>\n";
    svg << "<text x=\"" << px(x(v)) << "\" y=\"" << px(axis_y + 18)
        << "\" text-anchor=\"middle\">" << format_number(std::abs(v) < step * 1e-9 ? 0.0 : v)
        << "</text>\n";
  }
  svg << "<line x1=\"" << px(x(0)) << "\" y1=\"" << px(top - 10) << "\" x2=\"" << px(x(0))
      << "\" y2=\"" << px(axis_y) << "\" stroke=\"gray\" stroke-dasharray=\"4 3\"/>\n";
  if (!rows.empty())
    svg << "<text x=\"" << px(left + plot_w / 2) << "\" y=\"" << px(axis_y + 38)
        << "\" text-anchor=\"middle\">ATT (" << xml_escape(scale_unit(rows.front().estimate.scale))
        << "), bars: 95% confidence interval</text>\n";

  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& e = rows[i].estimate;
    const double y = top + row_h * (static_cast<double>(i) + 0.5);
    svg << "<text x=\"" << px(left - 10) << "\" y=\"" << px(y + 4) << "\" text-anchor=\"end\">"
        << xml_escape(rows[i].measure) << "</text>\n";
    svg << "<line x1=\"" << px(x(e.lcb)) << "\" y1=\"" << px(y) << "\" x2=\"" << px(x(e.ucb))
        << "\" y2=\"" << px(y) << "\" stroke=\"steelblue\" stroke-width=\"2\"/>\n";
    for (double v : {e.lcb, e.ucb})
      svg << "<line x1=\"" << px(x(v)) << "\" y1=\"" << px(y - 6) << "\" x2=\"" << px(x(v))
          << "\" y2=\"" << px(y + 6) << "\" stroke=\"steelblue\" stroke-width=\"2\"/>\n";
    svg << "<circle cx=\"" << px(x(e.att)) << "\" cy=\"" << px(y)
        << "\" r=\"4\" fill=\"darkblue\"/>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

void write_report(const fs::path& dir, std::span<const EstimateRow> estimates,
                  std::span<const PretreatmentRow> pretreatment, std::span<const Co2Row> co2) {
  fs::create_directories(dir);
  {
    AtomicFile md(dir / "report.md");
    md.stream() << render_tables(estimates, pretreatment, co2);
    md.commit();
  }
  for (const auto& [key, rows] : tables_of(estimates)) {
    const auto& head = *rows.front();
    const std::string stem = "figure_" + std::string(to_string(head.energy)) + "_" +
                             std::string(to_string(head.channel)) + "_" +
                             std::string(to_string(head.estimate.estimator)) + "_" +
                             std::string(to_string(head.estimate.scale));
    const std::string_view header[] = {"measure", "ATT", "LCB", "UCB", "scale"};
    CsvWriter csv(dir / (stem + ".csv"), header);
    std::vector<EstimateRow> copy;
    for (const auto* r : rows) {
      csv.row({r->measure, format_number(r->estimate.att), format_number(r->estimate.lcb),
               format_number(r->estimate.ucb), std::string(to_string(r->estimate.scale))});
      copy.push_back(*r);
    }
    AtomicFile svg(dir / (stem + ".svg"));
    svg.stream() << render_svg(copy, table_title(head));
    csv.commit();
    svg.commit();
  }
}

}  // namespace retrofit
