#include "retrofit/synth.hpp"

#include <cmath>
#include <numbers>
#include <random>

#include "retrofit/estimators/did.hpp"
#include "retrofit/weather.hpp"

namespace retrofit {

void ScenarioSpec::validate() const {
  if (n_treated < 10 || n_control_pool < 10)
    throw ValidationError("scenario: n_treated and n_control_pool must be >= 10");
  if (!(noise_sd > 0.0)) throw ValidationError("scenario: noise_sd must be > 0");
  if (n_regions < 1) throw ValidationError("scenario: n_regions must be >= 1");
  if (first_year > last_year || weather_first_year > first_year || weather_last_year < last_year)
    throw ValidationError("scenario: weather years must cover the consumption years");
  if (retrofit_to < retrofit_from) throw ValidationError("scenario: empty retrofit window");
}

namespace {

std::uint64_t substream_seed(std::uint64_t master, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(master), static_cast<std::uint32_t>(master >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
  std::array<std::uint32_t, 2> out{};
  seq.generate(out.begin(), out.end());
  return (static_cast<std::uint64_t>(out[1]) << 32) | out[0];
}

bool hidden_in_outcome(Misspecification m) {
  return m == Misspecification::outcome || m == Misspecification::both;
}
bool hidden_in_propensity(Misspecification m) {
  return m == Misspecification::propensity || m == Misspecification::both;
}

double logistic(double eta) { return 1.0 / (1.0 + std::exp(-eta)); }

}  // namespace

SyntheticPanel generate_panel(const ScenarioSpec& spec, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> z(0.0, 1.0);
  std::uniform_real_distribution<double> u(0.0, 1.0);

  const int n = spec.n_treated + spec.n_control_pool;
  SyntheticPanel out;
  out.true_att = spec.true_att_log;
  out.y0.resize(n);
  out.y1.resize(n);
  out.delta_y.resize(n);
  out.d.resize(n);
  out.x.resize(n, 3);

  int nt = 0, nc = 0, row = 0;
  while (nt < spec.n_treated || nc < spec.n_control_pool) {
    const double x1 = z(rng), x2 = z(rng);
    const double hidden = x1 * x1 - 1.0;
    double eta = spec.propensity_intercept + spec.propensity_coefs[0] * x1 +
                 spec.propensity_coefs[1] * x2;
    if (hidden_in_propensity(spec.misspecification)) eta += spec.hidden_propensity_strength * hidden;
    const bool treated = u(rng) < logistic(eta);
    const double level = 6.0 + 0.3 * x1 + 0.2 * x2 + 0.3 * z(rng);
    double change = 0.01 + spec.trend_coefs[0] * x1 + spec.trend_coefs[1] * x2 +
                    spec.noise_sd * z(rng);
    if (hidden_in_outcome(spec.misspecification)) change += spec.hidden_outcome_strength * hidden;
    if (treated ? nt >= spec.n_treated : nc >= spec.n_control_pool) continue;
    (treated ? nt : nc)++;

    out.x.row(row) << 1.0, x1, x2;
    out.d(row) = treated ? 1.0 : 0.0;
    out.y0(row) = level;
    out.delta_y(row) = change + (treated ? spec.true_att_log : 0.0);
    out.y1(row) = level + out.delta_y(row);
    ++row;
  }
  return out;
}

CoverageResult coverage_experiment(const ScenarioSpec& spec, int replications, Estimator estimator) {
  if (replications < 1) throw std::invalid_argument("coverage_experiment: replications must be >= 1");
  CoverageResult out;
  std::vector<double> estimates;
  int covered = 0;
  double se_sum = 0.0;
  for (int r = 0; r < replications; ++r) {
    const auto panel = generate_panel(spec, substream_seed(spec.seed, static_cast<std::uint64_t>(r)));
    double att = 0.0, se = 0.0;
    try {
      switch (estimator) {
        case Estimator::naive:
          att = naive_did(panel.y0, panel.y1, panel.d);
          se = naive_did_se(panel.delta_y, panel.d);
          break;
        case Estimator::twfe: {
          std::vector<int> cluster(static_cast<std::size_t>(panel.d.size()));
          for (std::size_t i = 0; i < cluster.size(); ++i) cluster[i] = static_cast<int>(i);
          const auto fit = twfe_att(panel.y0, panel.y1, panel.d, panel.x, cluster);
          att = fit.att;
          se = fit.se;
          break;
        }
        case Estimator::drdid: {
          const auto fit = drdid_panel(panel.delta_y, panel.d, panel.x);
          att = fit.att;
          se = fit.se;
          break;
        }
      }
    } catch (const EstimationError&) {
      ++out.failures;
      continue;
    }
    const auto ci = confidence_and_p(att, se);
    if (ci.lcb <= panel.true_att && panel.true_att <= ci.ucb) ++covered;
    estimates.push_back(att);
    se_sum += se;
  }
  out.replications = static_cast<int>(estimates.size());
  if (out.replications == 0) return out;
  double mean = 0.0;
  for (double e : estimates) mean += e;
  mean /= out.replications;
  double ss = 0.0;
  for (double e : estimates) ss += (e - mean) * (e - mean);
  out.coverage = static_cast<double>(covered) / out.replications;
  out.mean_bias = mean - spec.true_att_log;
  out.mean_se = se_sum / out.replications;
  out.sd_estimate = out.replications > 1 ? std::sqrt(ss / (out.replications - 1)) : 0.0;
  return out;
}

namespace {

constexpr double kTrefC = 15.0;

struct Region {
  std::string station_id;
  double lat, lon, mean_temp;
  std::map<int, std::vector<double>> temps;  // year -> daily mean temperature
  std::array<double, 12> reference_hdd{};
};

struct HomeParams {
  double base_elec = 0.0;  // kWh/day
  double base_gas = 0.0;
  double slope = 0.0;      // kWh per degree-day on the heating energy
  double trend = 0.0;      // log change of the slope per year
  bool treated = false;
  Date retrofit{};
  bool gas_cooking_after = false;
  std::size_t region = 0;
};

int day_of_year(const Date& d) {
  using namespace std::chrono;
  return days_between(Date{d.year(), January, day{1}}, d);
}

template <class Rng>
std::vector<Region> make_regions(const ScenarioSpec& spec, Rng& rng) {
  std::uniform_real_distribution<double> lat(43.5, 49.5), lon(-1.0, 7.0);
  std::normal_distribution<double> z(0.0, 1.0);
  std::vector<Region> regions;
  while (static_cast<int>(regions.size()) < spec.n_regions) {
    const double la = lat(rng), lo = lon(rng);
    bool far = true;
    for (const auto& r : regions) far = far && std::hypot(r.lat - la, r.lon - lo) > 0.8;
    if (!far) continue;
    char id[16];
    std::snprintf(id, sizeof id, "ST%02zu", regions.size());
    regions.push_back({id, la, lo, spec.mean_temp_c + 0.7 * z(rng), {}, {}});
  }

  using namespace std::chrono;
  for (auto& r : regions) {
    std::array<double, 12> ref_sum{};
    std::array<int, 12> ref_n{};
    for (int y = spec.weather_first_year; y <= spec.weather_last_year; ++y) {
      std::array<double, 12> anomaly{};
      for (auto& a : anomaly) a = 1.0 * z(rng);
      const Date jan1{year{y}, January, day{1}};
      const int ndays = year{y}.is_leap() ? 366 : 365;
      auto& temps = r.temps[y];
      std::array<double, 12> month_hdd{};
      for (int k = 0; k < ndays; ++k) {
        const Date d{sys_days{jan1} + days{k}};
        const unsigned m = static_cast<unsigned>(d.month());
        const double t = r.mean_temp +
                         spec.seasonal_amplitude_c * std::cos(2 * std::numbers::pi * (k - 200) / 365.25) +
                         anomaly[m - 1] + spec.daily_temp_sd * z(rng);
        temps.push_back(t);
        month_hdd[m - 1] += std::max(0.0, kTrefC - t);
      }
      if (y >= 2015 && y <= 2024)
        for (int m = 0; m < 12; ++m) ref_sum[m] += month_hdd[m], ++ref_n[m];
    }
    for (int m = 0; m < 12; ++m) r.reference_hdd[m] = ref_n[m] ? ref_sum[m] / ref_n[m] : 0.0;
  }
  return regions;
}

// Common multiplicative shock on heating per calendar year.
double year_shock(int y) {
  switch (y % 3) {
    case 0: return 0.0;
    case 1: return -0.03;
    default: return 0.02;
  }
}

}  // namespace

SyntheticDataset generate(const ScenarioSpec& spec) {
  spec.validate();
  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> z(0.0, 1.0);
  std::uniform_real_distribution<double> u(0.0, 1.0);

  SyntheticDataset out;
  auto regions = make_regions(spec, rng);
  const bool fuel_switch = spec.kind == ScenarioKind::fuel_switch;
  const bool gas_heated = spec.kind != ScenarioKind::electric;

  std::vector<HomeParams> params;
  const int retrofit_span = days_between(spec.retrofit_from, spec.retrofit_to);
  int nt = 0, nc = 0;
  while (nt < spec.n_treated || nc < spec.n_control_pool) {
    HomeRecord h;
    HomeParams p;
    p.region = static_cast<std::size_t>(u(rng) * regions.size()) % regions.size();
    const auto& reg = regions[p.region];
    h.latitude = reg.lat + 0.2 * (u(rng) - 0.5);
    h.longitude = reg.lon + 0.2 * (u(rng) - 0.5);
    h.home_type = u(rng) < 0.7 ? HomeType::house : HomeType::flat;
    h.surface_m2 = std::round(std::exp(std::log(h.home_type == HomeType::house ? 110.0 : 65.0) +
                                       0.3 * z(rng)));
    h.surface_m2 = std::max(h.surface_m2, 15.0);
    h.inhabitants = 1 + static_cast<int>(u(rng) * 5);
    h.floors = h.home_type == HomeType::flat ? 1 : (u(rng) < 0.6 ? 2 : (u(rng) < 0.8 ? 1 : 3));
    h.age_range = u(rng) < 0.05 ? AgeRange::unknown : static_cast<AgeRange>(static_cast<int>(u(rng) * 6));
    const double sec = u(rng);
    h.secondary_heating = sec < 0.7 ? SecondaryHeating::none
                          : sec < 0.85 ? SecondaryHeating::wood_stove
                                       : SecondaryHeating::fireplace;
    h.has_pool = u(rng) < 0.08;
    h.has_ev = u(rng) < 0.08;
    h.has_ac = u(rng) < 0.15;
    h.has_solar_panels = u(rng) < 0.05;
    if (gas_heated) {
      h.heating = Heating::gas;
      h.water_heating = u(rng) < 0.7 ? WaterHeating::gas : WaterHeating::electric;
    } else {
      h.heating = u(rng) < 0.85 ? Heating::electric : Heating::heat_pump;
      const double w = u(rng);
      h.water_heating = w < 0.75 ? WaterHeating::electric
                        : w < 0.9 ? WaterHeating::thermodynamic
                                  : WaterHeating::solar;
    }

    const double x1 = (std::log(h.surface_m2) - std::log(95.0)) / 0.4;
    const double x2 = (h.inhabitants - 3.0) / 1.4;
    const double eta = spec.propensity_intercept + spec.propensity_coefs[0] * x1 +
                       spec.propensity_coefs[1] * x2;
    p.treated = u(rng) < logistic(eta);
    const double occupancy = 0.7 + 0.15 * h.inhabitants;
    p.base_elec = 5.5 * std::sqrt(h.surface_m2 / 100.0) * occupancy * std::exp(0.2 * z(rng));
    p.base_gas = gas_heated ? 4.0 * occupancy * std::exp(0.2 * z(rng)) : 0.0;
    const double slope_scale = gas_heated ? 3.5 : (h.heating == Heating::heat_pump ? 0.45 : 1.1);
    p.slope = slope_scale * h.surface_m2 / 100.0 * std::exp(0.25 * z(rng));
    p.trend = fuel_switch ? 0.0 : spec.trend_coefs[0] * x1 + spec.trend_coefs[1] * x2;
    p.gas_cooking_after = u(rng) < spec.gas_cooking_share;
    const int offset = static_cast<int>(u(rng) * (retrofit_span + 1));
    p.retrofit = Date{std::chrono::sys_days{spec.retrofit_from} + std::chrono::days{offset}};

    if (p.treated ? nt >= spec.n_treated : nc >= spec.n_control_pool) continue;
    (p.treated ? nt : nc)++;
    char id[16];
    std::snprintf(id, sizeof id, "H%06zu", params.size());
    h.home_id = id;
    if (fuel_switch && p.treated) h.heating = Heating::heat_pump;
    out.data.homes.push_back(h);
    params.push_back(p);
  }

  for (const auto& r : regions) {
    for (const auto& [y, temps] : r.temps) {
      const Date jan1{std::chrono::year{y}, std::chrono::January, std::chrono::day{1}};
      for (std::size_t k = 0; k < temps.size(); ++k)
        out.data.weather.push_back(
            {r.station_id, r.lat, r.lon,
             Date{std::chrono::sys_days{jan1} + std::chrono::days{static_cast<int>(k)}}, temps[k]});
    }
  }

  const double noise = spec.noise_sd;
  const Date start{std::chrono::year{spec.first_year}, std::chrono::January, std::chrono::day{1}};
  const Date end{std::chrono::year{spec.last_year}, std::chrono::December, std::chrono::day{31}};
  const int ndays = days_between(start, end) + 1;
  double truth_elec = 0.0, truth_gas = 0.0;
  for (std::size_t i = 0; i < params.size(); ++i) {
    const auto& p = params[i];
    const auto& h = out.data.homes[i];
    const auto& reg = regions[p.region];
    if (p.treated) {
      out.data.retrofits.push_back({h.home_id, spec.measure, p.retrofit});
      out.truth.treated_ids.push_back(h.home_id);
      double ref_annual = 0.0;
      for (double v : reg.reference_hdd) ref_annual += v;
      if (fuel_switch) {
        const double kept = p.gas_cooking_after ? 0.3 : 0.0;
        const double elec = spec.heat_pump_efficiency * p.slope * ref_annual;
        const double gas = -(p.slope * ref_annual + 365.0 * p.base_gas * (1.0 - kept));
        out.truth.elec_effect[h.home_id] = elec;
        out.truth.gas_effect[h.home_id] = gas;
        truth_elec += elec;
        truth_gas += gas;
      }
    }

    for (int k = 0; k < ndays; ++k) {
      const Date d{std::chrono::sys_days{start} + std::chrono::days{k}};
      const int y = static_cast<int>(d.year());
      const double temp = reg.temps.at(y)[static_cast<std::size_t>(day_of_year(d))];
      const double hdd = std::max(0.0, kTrefC - temp);
      const bool after = p.treated && days_between(p.retrofit, d) > 0;
      auto draw = [&](double mean) { return mean * std::exp(noise * z(rng) - noise * noise / 2); };

      if (fuel_switch) {
        double elec = p.base_elec, gas = p.base_gas + p.slope * hdd;
        bool gas_metered = true;
        if (after) {
          elec += spec.heat_pump_efficiency * p.slope * hdd;
          gas = 0.3 * p.base_gas;
          gas_metered = p.gas_cooking_after;
        }
        out.data.consumption.push_back({h.home_id, Energy::electricity, d, draw(elec)});
        if (gas_metered) out.data.consumption.push_back({h.home_id, Energy::gas, d, draw(gas)});
        continue;
      }

      const double years = days_between(start, d) / 365.25;
      double slope = p.slope * std::exp(p.trend * years + year_shock(y));
      if (after) slope *= std::exp(spec.true_att_log);
      if (gas_heated) {
        out.data.consumption.push_back({h.home_id, Energy::gas, d, draw(p.base_gas + slope * hdd)});
        out.data.consumption.push_back({h.home_id, Energy::electricity, d, draw(p.base_elec)});
      } else {
        out.data.consumption.push_back(
            {h.home_id, Energy::electricity, d, draw(p.base_elec + slope * hdd)});
      }
    }
  }
  out.truth.att_log_heating = spec.true_att_log;
  if (nt > 0) {
    out.truth.elec_kwh_per_year = truth_elec / nt;
    out.truth.gas_kwh_per_year = truth_gas / nt;
  }
  return out;
}

}  // namespace retrofit
