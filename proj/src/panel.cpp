#include "retrofit/panel.hpp"

#include <Eigen/Dense>
#include <array>
#include <cmath>
#include <map>

#include "retrofit/estimators/linear.hpp"

namespace retrofit {

double channel_value(const MonthlyCell& cell, Channel channel) {
  switch (channel) {
    case Channel::total: return cell.corrected_kwh;
    case Channel::heating: return cell.heating_kwh;
    case Channel::base: return cell.base_kwh;
  }
  return cell.corrected_kwh;
}

std::variant<PeriodValues, Reason> reduce_periods(std::span<const MonthlyCell> cells,
                                                  const Date& split, Channel channel) {
  const auto split_month = MonthKey::of(split);
  std::array<std::array<double, 12>, 2> sum{};
  std::array<std::array<int, 12>, 2> count{};
  for (const auto& c : cells) {
    if (c.month == split_month) continue;
    const int period = c.month < split_month ? 0 : 1;
    sum[period][c.month.month - 1] += channel_value(c, channel);
    ++count[period][c.month.month - 1];
  }
  std::array<double, 2> level{};
  for (int t = 0; t < 2; ++t) {
    int populated = 0;
    double total = 0.0;
    for (int m = 0; m < 12; ++m) {
      if (count[t][m] == 0) continue;
      total += sum[t][m] / count[t][m];
      ++populated;
    }
    if (populated < 12) return t == 0 ? Reason::coverage_pre : Reason::coverage_post;
    level[t] = total / populated;
  }
  return PeriodValues{level[0], level[1]};
}

std::optional<double> make_outcome(double period_value, Scale scale) {
  switch (scale) {
    case Scale::log:
      if (!(period_value > 0.0)) return std::nullopt;
      return std::log(period_value);
    case Scale::kwh_per_year: return 12.0 * period_value;
    case Scale::percent: break;
  }
  throw std::invalid_argument("make_outcome: percent is not an outcome scale");
}

namespace {

struct ColumnBuilder {
  std::vector<std::string> names;
  std::vector<Eigen::VectorXd> columns;
  std::vector<std::string> warnings;

  void add(std::string name, Eigen::VectorXd values) {
    if (values.size() > 0 && (values.array() == values(0)).all()) {
      warnings.push_back("dropped constant column '" + name + "'");
      return;
    }
    names.push_back(std::move(name));
    columns.push_back(std::move(values));
  }

  // One indicator per observed level except the first observed one.
  template <class Level>
  void one_hot(const std::string& prefix, const std::vector<Level>& levels,
               std::string (*label)(Level)) {
    std::map<Level, int> seen;
    for (const auto& l : levels) ++seen[l];
    if (seen.size() < 2) {
      warnings.push_back("dropped '" + prefix + "': single level");
      return;
    }
    for (auto it = std::next(seen.begin()); it != seen.end(); ++it) {
      Eigen::VectorXd col(static_cast<Eigen::Index>(levels.size()));
      for (std::size_t i = 0; i < levels.size(); ++i)
        col(static_cast<Eigen::Index>(i)) = levels[i] == it->first ? 1.0 : 0.0;
      add(prefix + "=" + label(it->first), std::move(col));
    }
  }
};

std::string age_label(AgeRange a) { return std::string(to_string(a)); }
std::string count_label(int v) { return std::to_string(v); }

}  // namespace

Design build_design(std::span<const TwoPeriodObservation> obs, CovariateSet set) {
  Design out;
  const auto n = static_cast<Eigen::Index>(obs.size());
  for (const auto& o : obs) (o.d != 0 ? out.n_treated : out.n_control)++;
  if (out.n_treated < 2 || out.n_control < 2)
    throw EstimationError("build_design: need at least two treated and two control units (got " +
                          std::to_string(out.n_treated) + " treated, " +
                          std::to_string(out.n_control) + " control)");

  out.delta_y.resize(n);
  out.y0.resize(n);
  out.y1.resize(n);
  out.d.resize(n);
  std::map<std::string, int> homes, treated;
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& o = obs[static_cast<std::size_t>(i)];
    out.y0(i) = o.y0;
    out.y1(i) = o.y1;
    out.delta_y(i) = o.y1 - o.y0;
    out.d(i) = o.d != 0 ? 1.0 : 0.0;
    out.home_cluster.push_back(homes.try_emplace(o.home_id, static_cast<int>(homes.size())).first->second);
    out.match_cluster.push_back(
        treated.try_emplace(o.treated_id, static_cast<int>(treated.size())).first->second);
  }

  auto column = [&](auto&& f) {
    Eigen::VectorXd v(n);
    for (Eigen::Index i = 0; i < n; ++i) v(i) = f(obs[static_cast<std::size_t>(i)].home);
    return v;
  };

  ColumnBuilder cols;
  cols.add("surface_m2", column([](const HomeRecord& h) { return h.surface_m2; }));
  if (set == CovariateSet::electric) {
    std::vector<AgeRange> ages;
    std::vector<int> inhabitants, floors;
    for (const auto& o : obs) {
      ages.push_back(o.home.age_range);
      inhabitants.push_back(std::min(o.home.inhabitants, 5));
      floors.push_back(std::min(o.home.floors, 3));
    }
    cols.one_hot("age", ages, &age_label);
    cols.add("heating=heat_pump",
             column([](const HomeRecord& h) { return h.heating == Heating::heat_pump ? 1.0 : 0.0; }));
    cols.add("water_heating=electric", column([](const HomeRecord& h) {
               return h.water_heating == WaterHeating::electric ? 1.0 : 0.0;
             }));
    cols.add("pool", column([](const HomeRecord& h) { return h.has_pool ? 1.0 : 0.0; }));
    cols.add("ev", column([](const HomeRecord& h) { return h.has_ev ? 1.0 : 0.0; }));
    cols.one_hot("inhabitants", inhabitants, &count_label);
    cols.one_hot("floors", floors, &count_label);
  }

  out.columns.push_back("intercept");
  out.x.resize(n, static_cast<Eigen::Index>(cols.columns.size()) + 1);
  out.x.col(0).setOnes();
  for (std::size_t j = 0; j < cols.columns.size(); ++j) {
    out.x.col(static_cast<Eigen::Index>(j) + 1) = cols.columns[j];
    out.columns.push_back(cols.names[j]);
  }
  out.warnings = std::move(cols.warnings);

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(out.x);
  detail::require_full_rank(qr, out.columns);
  return out;
}

}  // namespace retrofit
