#include "retrofit/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <tuple>
#include <unistd.h>

#include "json.hpp"

namespace retrofit {

const std::string& CsvRow::operator[](std::string_view column) const {
  auto it = index_->find(std::string(column));
  if (it == index_->end()) throw ValidationError("missing column '" + std::string(column) + "'");
  return fields_[it->second];
}

namespace {

// Returns false at end of input. Quoted fields may span lines.
bool next_record(std::streambuf& in, std::vector<std::string>& fields, std::size_t& line,
                 const fs::path& path) {
  fields.clear();
  std::string field;
  bool quoted = false, in_quotes = false, any = false;
  const std::size_t start = line;
  for (;;) {
    int c = in.sbumpc();
    if (c == std::char_traits<char>::eof()) {
      if (in_quotes)
        throw ValidationError(path.filename().string() + ":" + std::to_string(start) +
                              ": unterminated quoted field");
      if (!any) return false;
      fields.push_back(std::move(field));
      return true;
    }
    any = true;
    const char ch = static_cast<char>(c);
    if (in_quotes) {
      if (ch == '"') {
        if (in.sgetc() == '"') {
          in.sbumpc();
          field += '"';
        } else {
          in_quotes = false;
        }
      } else {
        if (ch == '\n') ++line;
        field += ch;
      }
      continue;
    }
    switch (ch) {
      case '"':
        if (!field.empty() || quoted)
          throw ValidationError(path.filename().string() + ":" + std::to_string(start) +
                                ": stray quote");
        quoted = in_quotes = true;
        break;
      case ',':
        fields.push_back(std::move(field));
        field.clear();
        quoted = false;
        break;
      case '\r':
        if (in.sgetc() == '\n') break;
        [[fallthrough]];
      case '\n':
        ++line;
        fields.push_back(std::move(field));
        return true;
      default:
        if (quoted)
          throw ValidationError(path.filename().string() + ":" + std::to_string(start) +
                                ": text after closing quote");
        field += ch;
    }
  }
}

}  // namespace

void read_csv(const fs::path& path, std::span<const std::string_view> required,
              const std::function<void(const CsvRow&)>& row) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  auto& buf = *in.rdbuf();
  // UTF-8 byte order mark
  if (buf.sgetc() == 0xEF) {
    char bom[3];
    if (buf.sgetn(bom, 3) != 3 || bom[1] != '\xBB' || bom[2] != '\xBF')
      throw ValidationError(path.filename().string() + ": invalid leading bytes");
  }
  std::size_t line = 1;
  std::vector<std::string> header;
  if (!next_record(buf, header, line, path))
    throw ValidationError(path.filename().string() + ": missing header row");
  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < header.size(); ++i)
    if (!index.emplace(header[i], i).second)
      throw ValidationError(path.filename().string() + ": duplicate column '" + header[i] + "'");
  for (auto col : required)
    if (!index.contains(std::string(col)))
      throw ValidationError(path.filename().string() + ": missing column '" + std::string(col) +
                            "'");
  std::vector<std::string> fields;
  for (;;) {
    const std::size_t at = line;
    if (!next_record(buf, fields, line, path)) break;
    if (fields.size() == 1 && fields[0].empty()) continue;  // blank line
    if (fields.size() != header.size())
      throw ValidationError(path.filename().string() + ":" + std::to_string(at) + ": expected " +
                            std::to_string(header.size()) + " fields, got " +
                            std::to_string(fields.size()));
    row(CsvRow(&index, std::move(fields), at));
    fields = {};
  }
  if (in.bad()) throw IoError("read error on " + path.string());
}

AtomicFile::AtomicFile(fs::path target) : target_(std::move(target)) {
  temp_ = target_;
  temp_ += ".tmp." + std::to_string(::getpid());
  out_.open(temp_, std::ios::binary | std::ios::trunc);
  if (!out_) throw IoError("cannot create " + temp_.string());
}

AtomicFile::~AtomicFile() {
  if (committed_) return;
  out_.close();
  std::error_code ec;
  fs::remove(temp_, ec);
}

void AtomicFile::commit() {
  out_.flush();
  if (!out_) throw IoError("write error on " + temp_.string());
  out_.close();
  std::error_code ec;
  fs::rename(temp_, target_, ec);
  if (ec) throw IoError("cannot rename " + temp_.string() + " to " + target_.string() + ": " +
                        ec.message());
  committed_ = true;
}

std::string quote_csv(std::string_view field) {
  if (field.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(field);
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

CsvWriter::CsvWriter(const fs::path& target, std::span<const std::string_view> header)
    : file_(target) {
  std::vector<std::string> h(header.begin(), header.end());
  row(h);
}

void CsvWriter::row(std::span<const std::string> fields) {
  auto& out = file_.stream();
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out << ',';
    out << quote_csv(fields[i]);
  }
  out << '\n';
}

std::string format_number(double value) {
  if (std::isnan(value)) return "NaN";
  if (std::isinf(value)) return value > 0 ? "Inf" : "-Inf";
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, res.ptr);
}

std::string format_fixed(double value, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, value);
  std::string s = buf;
  if (s.find_first_not_of("-0.") == std::string::npos && s.front() == '-') s.erase(0, 1);
  return s;
}

namespace {

double parse_double(const std::string& text, const char* field) {
  double v = 0.0;
  const char* first = text.data();
  const char* last = first + text.size();
  auto res = std::from_chars(first, last, v);
  if (text.empty() || res.ec != std::errc{} || res.ptr != last)
    throw ValidationError(std::string(field) + ": not a number '" + text + "'");
  return v;
}

int parse_int(const std::string& text, const char* field) {
  int v = 0;
  const char* first = text.data();
  const char* last = first + text.size();
  auto res = std::from_chars(first, last, v);
  if (text.empty() || res.ec != std::errc{} || res.ptr != last)
    throw ValidationError(std::string(field) + ": not an integer '" + text + "'");
  return v;
}

bool parse_bool(const std::string& text, const char* field) {
  std::string t = text;
  std::transform(t.begin(), t.end(), t.begin(), [](unsigned char c) { return std::tolower(c); });
  if (t.empty() || t == "false" || t == "0" || t == "no") return false;
  if (t == "true" || t == "1" || t == "yes") return true;
  throw ValidationError(std::string(field) + ": not a boolean '" + text + "'");
}

// Empty categorical cells map to `missing` when the type has such a level.
template <class E>
E parse_category(const std::string& text, const char* field, std::optional<E> missing) {
  if (text.empty()) {
    if (missing) return *missing;
    throw ValidationError(std::string(field) + ": required");
  }
  if (auto v = try_parse_enum<E>(text)) return *v;
  throw ValidationError(std::string(field) + ": unknown value '" + text + "'");
}

const std::string_view kHomeColumns[] = {
    "home_id",  "home_type",      "surface_m2",     "inhabitants",   "floors",
    "age_range", "heating",       "secondary_heating", "water_heating", "has_pool",
    "has_ev",   "has_ac",         "has_solar_panels", "latitude",     "longitude"};
const std::string_view kRetrofitColumns[] = {"home_id", "measure", "completion_date"};
const std::string_view kConsumptionColumns[] = {"home_id", "energy", "date", "kwh"};
const std::string_view kWeatherColumns[] = {"station_id", "lat", "lon", "date", "mean_temp_c"};

// Runs `parse` on a row; ValidationError becomes a rejection.
template <class F>
void guarded(std::vector<Rejection>& rejections, const char* table, const CsvRow& row,
             const std::string& key, F&& parse) {
  try {
    parse();
  } catch (const ValidationError& e) {
    std::string msg = e.what();
    auto colon = msg.find(": ");
    std::string field = colon == std::string::npos ? "" : msg.substr(0, colon);
    std::string rule = colon == std::string::npos ? msg : msg.substr(colon + 2);
    rejections.push_back({table, row.line(), key, field, rule});
  } catch (const std::invalid_argument& e) {
    rejections.push_back({table, row.line(), key, "date", e.what()});
  }
}

HomeRecord parse_home(const CsvRow& r) {
  HomeRecord h;
  h.home_id = r["home_id"];
  if (h.home_id.empty()) throw ValidationError("home_id: required");
  h.home_type = parse_category<HomeType>(r["home_type"], "home_type", std::nullopt);
  h.surface_m2 = parse_double(r["surface_m2"], "surface_m2");
  h.inhabitants = parse_int(r["inhabitants"], "inhabitants");
  h.floors = parse_int(r["floors"], "floors");
  h.age_range = parse_category<AgeRange>(r["age_range"], "age_range", AgeRange::unknown);
  h.heating = parse_category<Heating>(r["heating"], "heating", Heating::other);
  h.secondary_heating = parse_category<SecondaryHeating>(r["secondary_heating"],
                                                         "secondary_heating",
                                                         SecondaryHeating::none);
  h.water_heating =
      parse_category<WaterHeating>(r["water_heating"], "water_heating", WaterHeating::missing);
  h.has_pool = parse_bool(r["has_pool"], "has_pool");
  h.has_ev = parse_bool(r["has_ev"], "has_ev");
  h.has_ac = parse_bool(r["has_ac"], "has_ac");
  h.has_solar_panels = parse_bool(r["has_solar_panels"], "has_solar_panels");
  h.latitude = parse_double(r["latitude"], "latitude");
  h.longitude = parse_double(r["longitude"], "longitude");
  return h;
}

}  // namespace

IngestResult load_dataset(const fs::path& dir) {
  IngestResult out;
  auto& data = out.data;
  auto& rej = out.rejections;

  std::set<std::string> home_ids;
  read_csv(dir / "homes.csv", kHomeColumns, [&](const CsvRow& r) {
    guarded(rej, "homes", r, r["home_id"], [&] {
      HomeRecord h = parse_home(r);
      const auto violations = check_home(h);
      if (!violations.empty()) {
        for (const auto& v : violations) rej.push_back({"homes", r.line(), h.home_id, v.field, v.rule});
        return;
      }
      if (!home_ids.insert(h.home_id).second)
        throw ValidationError("home_id: duplicate home");
      data.homes.push_back(std::move(h));
    });
  });

  std::set<std::tuple<std::string, Measure, int>> events;
  read_csv(dir / "retrofits.csv", kRetrofitColumns, [&](const CsvRow& r) {
    guarded(rej, "retrofits", r, r["home_id"], [&] {
      RetrofitEvent e;
      e.home_id = r["home_id"];
      if (!home_ids.contains(e.home_id)) throw ValidationError("home_id: unknown home");
      e.measure = parse_category<Measure>(r["measure"], "measure", std::nullopt);
      if (e.measure == Measure::comprehensive)
        throw ValidationError("measure: comprehensive is derived, not declared");
      e.completion_date = parse_date(r["completion_date"]);
      const int day = static_cast<int>(std::chrono::sys_days{e.completion_date}.time_since_epoch().count());
      if (!events.emplace(e.home_id, e.measure, day).second)
        throw ValidationError("completion_date: duplicate event");
      data.retrofits.push_back(std::move(e));
    });
  });

  std::set<std::tuple<std::string, Energy, int>> readings;
  read_csv(dir / "consumption.csv", kConsumptionColumns, [&](const CsvRow& r) {
    guarded(rej, "consumption", r, r["home_id"], [&] {
      DailyConsumption c;
      c.home_id = r["home_id"];
      if (!home_ids.contains(c.home_id)) throw ValidationError("home_id: unknown home");
      c.energy = parse_category<Energy>(r["energy"], "energy", std::nullopt);
      c.date = parse_date(r["date"]);
      c.kwh = parse_double(r["kwh"], "kwh");
      if (!(std::isfinite(c.kwh) && c.kwh >= 0.0)) throw ValidationError("kwh: kwh >= 0");
      const int day = static_cast<int>(std::chrono::sys_days{c.date}.time_since_epoch().count());
      if (!readings.emplace(c.home_id, c.energy, day).second)
        throw ValidationError("date: duplicate reading");
      data.consumption.push_back(std::move(c));
    });
  });

  std::set<std::pair<std::string, int>> days;
  read_csv(dir / "weather.csv", kWeatherColumns, [&](const CsvRow& r) {
    guarded(rej, "weather", r, r["station_id"], [&] {
      DailyTemperature t;
      t.station_id = r["station_id"];
      if (t.station_id.empty()) throw ValidationError("station_id: required");
      t.latitude = parse_double(r["lat"], "lat");
      t.longitude = parse_double(r["lon"], "lon");
      if (!(t.latitude >= -90 && t.latitude <= 90)) throw ValidationError("lat: lat in [-90, 90]");
      if (!(t.longitude >= -180 && t.longitude <= 180))
        throw ValidationError("lon: lon in [-180, 180]");
      t.date = parse_date(r["date"]);
      t.mean_temp_c = parse_double(r["mean_temp_c"], "mean_temp_c");
      if (!std::isfinite(t.mean_temp_c)) throw ValidationError("mean_temp_c: finite");
      const int day = static_cast<int>(std::chrono::sys_days{t.date}.time_since_epoch().count());
      if (!days.emplace(t.station_id, day).second) throw ValidationError("date: duplicate reading");
      data.weather.push_back(std::move(t));
    });
  });
  return out;
}

namespace {

std::string str(bool b) { return b ? "true" : "false"; }
template <class E>
std::string str(E e) {
  return std::string(to_string(e));
}

}  // namespace

void write_dataset(const fs::path& dir, const Dataset& data) {
  fs::create_directories(dir);

  auto homes = data.homes;
  std::sort(homes.begin(), homes.end(),
            [](const auto& a, const auto& b) { return a.home_id < b.home_id; });
  CsvWriter hw(dir / "homes.csv", kHomeColumns);
  for (const auto& h : homes)
    hw.row({h.home_id, str(h.home_type), format_number(h.surface_m2),
            std::to_string(h.inhabitants), std::to_string(h.floors), str(h.age_range),
            str(h.heating), str(h.secondary_heating), str(h.water_heating), str(h.has_pool),
            str(h.has_ev), str(h.has_ac), str(h.has_solar_panels), format_number(h.latitude),
            format_number(h.longitude)});

  auto events = data.retrofits;
  std::sort(events.begin(), events.end(), [](const auto& a, const auto& b) {
    return std::tie(a.home_id, a.completion_date, a.measure) <
           std::tie(b.home_id, b.completion_date, b.measure);
  });
  CsvWriter rw(dir / "retrofits.csv", kRetrofitColumns);
  for (const auto& e : events) rw.row({e.home_id, str(e.measure), format_date(e.completion_date)});

  std::vector<const DailyConsumption*> cons;
  for (const auto& c : data.consumption) cons.push_back(&c);
  std::sort(cons.begin(), cons.end(), [](const auto* a, const auto* b) {
    return std::tie(a->home_id, a->energy, a->date) < std::tie(b->home_id, b->energy, b->date);
  });
  CsvWriter cw(dir / "consumption.csv", kConsumptionColumns);
  for (const auto* c : cons)
    cw.row({c->home_id, str(c->energy), format_date(c->date), format_number(c->kwh)});

  std::vector<const DailyTemperature*> temps;
  for (const auto& t : data.weather) temps.push_back(&t);
  std::sort(temps.begin(), temps.end(), [](const auto* a, const auto* b) {
    return std::tie(a->station_id, a->date) < std::tie(b->station_id, b->date);
  });
  CsvWriter ww(dir / "weather.csv", kWeatherColumns);
  for (const auto* t : temps)
    ww.row({t->station_id, format_number(t->latitude), format_number(t->longitude),
            format_date(t->date), format_number(t->mean_temp_c)});

  hw.commit();
  rw.commit();
  cw.commit();
  ww.commit();
}

void write_rejections(const fs::path& path, std::span<const Rejection> rejections) {
  const std::string_view header[] = {"table", "line", "key", "field", "rule"};
  CsvWriter w(path, header);
  for (const auto& r : rejections) w.row({r.table, std::to_string(r.line), r.key, r.field, r.rule});
  w.commit();
}

namespace {

const std::string_view kCohortColumns[] = {"home_id", "group", "measure", "retrofit_date",
                                           "exclusion_reason", "energies"};

std::string group_name(Group g) { return g == Group::treated ? "treated" : "control_pool"; }

Group parse_group(const std::string& s) {
  if (s == "treated") return Group::treated;
  if (s == "control_pool") return Group::control_pool;
  throw ValidationError("group: unknown value '" + s + "'");
}

template <class T, class F>
std::string opt(const std::optional<T>& v, F&& f) {
  return v ? f(*v) : std::string();
}

}  // namespace

void write_cohort(const fs::path& path, const Cohort& cohort) {
  struct Line {
    std::string home_id;
    int group;
    std::vector<std::string> fields;
  };
  std::vector<Line> lines;
  for (const auto& m : cohort.members) {
    std::string energies;
    for (auto e : m.eligible_energies) energies += (energies.empty() ? "" : ";") + str(e);
    lines.push_back({m.home_id, static_cast<int>(m.group),
                     {m.home_id, group_name(m.group), opt(m.measure, str<Measure>),
                      opt(m.retrofit_date, format_date), "", energies}});
  }
  for (const auto& x : cohort.exclusions)
    lines.push_back({x.home_id, static_cast<int>(x.group),
                     {x.home_id, group_name(x.group), opt(x.measure, str<Measure>),
                      opt(x.retrofit_date, format_date), str(x.reason), ""}});
  std::sort(lines.begin(), lines.end(), [](const Line& a, const Line& b) {
    return std::tie(a.group, a.home_id) < std::tie(b.group, b.home_id);
  });
  CsvWriter w(path, kCohortColumns);
  for (const auto& l : lines) w.row(l.fields);
  w.commit();
}

Cohort read_cohort(const fs::path& path, const AnalysisConfig& config) {
  Cohort out;
  read_csv(path, kCohortColumns, [&](const CsvRow& r) {
    const Group group = parse_group(r["group"]);
    std::optional<Measure> measure;
    if (!r["measure"].empty()) measure = parse_enum<Measure>(r["measure"]);
    std::optional<Date> date;
    if (!r["retrofit_date"].empty()) date = parse_date(r["retrofit_date"]);
    if (!r["exclusion_reason"].empty()) {
      out.exclusions.push_back(
          {r["home_id"], group, parse_enum<Reason>(r["exclusion_reason"]), measure, date});
      return;
    }
    CohortMember m;
    m.home_id = r["home_id"];
    m.group = group;
    m.measure = measure;
    m.retrofit_date = date;
    m.fuel_switch = group == Group::treated && config.analysis == Analysis::fuel_switch;
    std::string_view list = r["energies"];
    while (!list.empty()) {
      auto cut = list.find(';');
      m.eligible_energies.push_back(parse_enum<Energy>(list.substr(0, cut)));
      list = cut == std::string_view::npos ? std::string_view{} : list.substr(cut + 1);
    }
    if (group == Group::treated && (!measure || !date))
      throw ValidationError(path.filename().string() + ":" + std::to_string(r.line()) +
                            ": treated member needs measure and retrofit_date");
    out.members.push_back(std::move(m));
  });
  return out;
}

namespace {
const std::string_view kMatchColumns[] = {"treated_id", "control_id", "distance", "fictive_date"};
}

void write_matches(const fs::path& path, std::span<const MatchRecord> matches) {
  CsvWriter w(path, kMatchColumns);
  for (const auto& m : matches)
    w.row({m.treated_id, m.control_id, format_number(m.distance), format_date(m.fictive_date)});
  w.commit();
}

std::vector<MatchRecord> read_matches(const fs::path& path) {
  std::vector<MatchRecord> out;
  read_csv(path, kMatchColumns, [&](const CsvRow& r) {
    out.push_back({r["treated_id"], r["control_id"], parse_double(r["distance"], "distance"),
                   parse_date(r["fictive_date"])});
  });
  return out;
}

void write_match_drops(const fs::path& path, std::span<const DroppedUnit> dropped) {
  const std::string_view header[] = {"treated_id", "reason"};
  CsvWriter w(path, header);
  for (const auto& d : dropped) w.row({d.treated_id, str(d.reason)});
  w.commit();
}

void write_panel(const fs::path& path, std::span<const PanelRow> rows) {
  const std::string_view header[] = {
      "measure",    "energy",      "unit_id",    "home_id",      "treated_id",
      "D",          "Y0",          "Y1",         "channel",      "scale",
      "surface_m2", "age_range",   "heating",    "water_heating", "has_pool",
      "has_ev",     "inhabitants", "floors"};
  CsvWriter w(path, header);
  for (const auto& r : rows) {
    const auto& o = r.observation;
    const auto& h = o.home;
    w.row({r.measure, str(r.energy), o.unit_id, o.home_id, o.treated_id, std::to_string(o.d),
           format_number(o.y0), format_number(o.y1), str(r.channel), str(r.scale),
           format_number(h.surface_m2), str(h.age_range), str(h.heating), str(h.water_heating),
           str(h.has_pool), str(h.has_ev), std::to_string(h.inhabitants),
           std::to_string(h.floors)});
  }
  w.commit();
}

namespace {
const std::string_view kEstimateColumns[] = {"measure",  "ATT",       "s.e.",      "LCB",
                                             "UCB",      "p-value",   "scale",     "estimator",
                                             "n_treated", "n_control", "energy",   "channel"};
}

void write_estimates(const fs::path& path, std::span<const EstimateRow> rows) {
  CsvWriter w(path, kEstimateColumns);
  for (const auto& r : rows) {
    const auto& e = r.estimate;
    w.row({r.measure, format_number(e.att), format_number(e.se), format_number(e.lcb),
           format_number(e.ucb), format_number(e.p_value), str(e.scale), str(e.estimator),
           std::to_string(e.n_treated), std::to_string(e.n_control), str(r.energy),
           str(r.channel)});
  }
  w.commit();
}

std::vector<EstimateRow> read_estimates(const fs::path& path) {
  std::vector<EstimateRow> out;
  read_csv(path, kEstimateColumns, [&](const CsvRow& r) {
    EstimateRow row;
    row.measure = r["measure"];
    row.energy = parse_enum<Energy>(r["energy"]);
    row.channel = parse_enum<Channel>(r["channel"]);
    auto& e = row.estimate;
    e.att = parse_double(r["ATT"], "ATT");
    e.se = parse_double(r["s.e."], "s.e.");
    e.lcb = parse_double(r["LCB"], "LCB");
    e.ucb = parse_double(r["UCB"], "UCB");
    e.p_value = parse_double(r["p-value"], "p-value");
    e.scale = parse_enum<Scale>(r["scale"]);
    e.estimator = parse_enum<Estimator>(r["estimator"]);
    e.n_treated = parse_int(r["n_treated"], "n_treated");
    e.n_control = parse_int(r["n_control"], "n_control");
    out.push_back(std::move(row));
  });
  return out;
}

namespace {
const std::string_view kCo2Columns[] = {"energy", "delta_kwh", "delta_kg"};
}

void write_co2(const fs::path& path, std::span<const Co2Row> rows) {
  CsvWriter w(path, kCo2Columns);
  for (const auto& r : rows)
    w.row({r.energy, r.delta_kwh ? format_number(*r.delta_kwh) : std::string(),
           format_number(r.delta_kg)});
  w.commit();
}

std::vector<Co2Row> read_co2(const fs::path& path) {
  std::vector<Co2Row> out;
  read_csv(path, kCo2Columns, [&](const CsvRow& r) {
    Co2Row row;
    row.energy = r["energy"];
    if (!r["delta_kwh"].empty()) row.delta_kwh = parse_double(r["delta_kwh"], "delta_kwh");
    row.delta_kg = parse_double(r["delta_kg"], "delta_kg");
    out.push_back(std::move(row));
  });
  return out;
}

namespace {
const std::string_view kPretreatmentColumns[] = {"measure",   "energy",         "treated_kwh_per_year",
                                                 "control_kwh_per_year", "n_treated", "n_control"};
}

void write_pretreatment(const fs::path& path, std::span<const PretreatmentRow> rows) {
  CsvWriter w(path, kPretreatmentColumns);
  for (const auto& r : rows)
    w.row({r.measure, str(r.energy), format_number(r.treated_kwh_per_year),
           format_number(r.control_kwh_per_year), std::to_string(r.n_treated),
           std::to_string(r.n_control)});
  w.commit();
}

std::vector<PretreatmentRow> read_pretreatment(const fs::path& path) {
  std::vector<PretreatmentRow> out;
  read_csv(path, kPretreatmentColumns, [&](const CsvRow& r) {
    out.push_back({r["measure"], parse_enum<Energy>(r["energy"]),
                   parse_double(r["treated_kwh_per_year"], "treated_kwh_per_year"),
                   parse_double(r["control_kwh_per_year"], "control_kwh_per_year"),
                   parse_int(r["n_treated"], "n_treated"), parse_int(r["n_control"], "n_control")});
  });
  return out;
}

// ---------------------------------------------------------------- config

namespace {

using nlohmann::json;

template <class T>
void take(const json& j, const char* key, T& out) {
  if (!j.contains(key) || j.at(key).is_null()) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ValidationError(std::string("config: bad value for '") + key + "'");
  }
}

template <class E>
void take_enum(const json& j, const char* key, E& out) {
  std::string s;
  take(j, key, s);
  if (!s.empty()) out = parse_enum<E>(s);
}

void take_date(const json& j, const char* key, Date& out) {
  std::string s;
  take(j, key, s);
  if (s.empty()) return;
  try {
    out = parse_date(s);
  } catch (const std::invalid_argument&) {
    throw ValidationError(std::string("config: bad date for '") + key + "'");
  }
}

void check_keys(const json& j, const char* section, std::initializer_list<std::string_view> keys) {
  if (!j.is_object()) throw ValidationError(std::string("config: '") + section + "' must be an object");
  for (const auto& [k, v] : j.items())
    if (std::find(keys.begin(), keys.end(), k) == keys.end())
      throw ValidationError(std::string("config: unknown key '") + k + "' in '" + section + "'");
}

void read_analysis(const json& j, AnalysisConfig& c) {
  check_keys(j, "analysis",
             {"energy", "type", "measure", "k", "t_ref_c", "hdd_month_threshold", "base_months",
              "reference_years", "min_coverage_days_per_month", "comprehensive_window_days",
              "exclusion_window_months", "heating_detection", "propensity_clip", "seed"});
  take_enum(j, "energy", c.energy);
  std::string type;
  take(j, "type", type);
  if (type == "fuel_switch") c.analysis = Analysis::fuel_switch;
  else if (type == "per_measure") c.analysis = Analysis::per_measure;
  else if (!type.empty()) throw ValidationError("config: unknown analysis type '" + type + "'");
  if (j.contains("measure")) {
    if (j["measure"].is_null()) c.measure.reset();
    else {
      Measure m{};
      take_enum(j, "measure", m);
      c.measure = m;
    }
  }
  take(j, "k", c.k);
  take(j, "t_ref_c", c.t_ref_c);
  take(j, "hdd_month_threshold", c.hdd_month_threshold);
  if (j.contains("base_months")) {
    const auto& b = j["base_months"];
    check_keys(b, "base_months", {"electricity", "gas"});
    take(b, "electricity", c.base_months_elec);
    take(b, "gas", c.base_months_gas);
  }
  if (j.contains("reference_years")) {
    std::array<int, 2> years{c.reference_first_year, c.reference_last_year};
    take(j, "reference_years", years);
    c.reference_first_year = years[0];
    c.reference_last_year = years[1];
  }
  take(j, "min_coverage_days_per_month", c.min_coverage_days_per_month);
  take(j, "comprehensive_window_days", c.comprehensive_window_days);
  take(j, "exclusion_window_months", c.exclusion_window_months);
  if (j.contains("heating_detection")) {
    const auto& h = j["heating_detection"];
    check_keys(h, "heating_detection", {"min_months", "min_t_stat", "min_heating_share"});
    take(h, "min_months", c.heating_rule.min_months);
    take(h, "min_t_stat", c.heating_rule.min_t_stat);
    take(h, "min_heating_share", c.heating_rule.min_heating_share);
  }
  take(j, "propensity_clip", c.propensity_clip);
  take(j, "seed", c.seed);
}

void read_scenario(const json& j, ScenarioSpec& s) {
  check_keys(j, "scenario",
             {"kind", "n_treated", "n_control_pool", "true_att_log", "propensity_intercept",
              "propensity_coefs", "trend_coefs", "misspecification", "hidden_outcome_strength",
              "hidden_propensity_strength", "noise_sd", "mean_temp_c", "seasonal_amplitude_c",
              "daily_temp_sd", "n_regions", "first_year", "last_year", "weather_first_year",
              "weather_last_year", "retrofit_from", "retrofit_to", "measure",
              "heat_pump_efficiency", "gas_cooking_share", "seed"});
  take_enum(j, "kind", s.kind);
  take(j, "n_treated", s.n_treated);
  take(j, "n_control_pool", s.n_control_pool);
  take(j, "true_att_log", s.true_att_log);
  take(j, "propensity_intercept", s.propensity_intercept);
  take(j, "propensity_coefs", s.propensity_coefs);
  take(j, "trend_coefs", s.trend_coefs);
  take_enum(j, "misspecification", s.misspecification);
  take(j, "hidden_outcome_strength", s.hidden_outcome_strength);
  take(j, "hidden_propensity_strength", s.hidden_propensity_strength);
  take(j, "noise_sd", s.noise_sd);
  take(j, "mean_temp_c", s.mean_temp_c);
  take(j, "seasonal_amplitude_c", s.seasonal_amplitude_c);
  take(j, "daily_temp_sd", s.daily_temp_sd);
  take(j, "n_regions", s.n_regions);
  take(j, "first_year", s.first_year);
  take(j, "last_year", s.last_year);
  take(j, "weather_first_year", s.weather_first_year);
  take(j, "weather_last_year", s.weather_last_year);
  take_date(j, "retrofit_from", s.retrofit_from);
  take_date(j, "retrofit_to", s.retrofit_to);
  take_enum(j, "measure", s.measure);
  take(j, "heat_pump_efficiency", s.heat_pump_efficiency);
  take(j, "gas_cooking_share", s.gas_cooking_share);
  take(j, "seed", s.seed);
}

}  // namespace

RunConfig parse_config(std::string_view text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ValidationError(std::string("config: ") + e.what());
  }
  RunConfig cfg;
  check_keys(root, "root", {"analysis", "estimation", "emissions", "scenario"});
  if (root.contains("analysis")) read_analysis(root["analysis"], cfg.analysis);
  if (root.contains("estimation")) {
    const auto& e = root["estimation"];
    check_keys(e, "estimation", {"estimator", "channel", "scale", "bootstrap_replicates"});
    take_enum(e, "estimator", cfg.estimation.estimator);
    take_enum(e, "channel", cfg.estimation.channel);
    take_enum(e, "scale", cfg.estimation.scale);
    take(e, "bootstrap_replicates", cfg.estimation.bootstrap_replicates);
    if (cfg.estimation.bootstrap_replicates < 0)
      throw ValidationError("config: bootstrap_replicates must be >= 0");
  }
  if (root.contains("emissions")) {
    const auto& e = root["emissions"];
    check_keys(e, "emissions", {"elec_kg_per_kwh", "gas_kg_per_kwh_lhv", "hhv_to_lhv"});
    take(e, "elec_kg_per_kwh", cfg.analysis.emissions.elec_kg_per_kwh);
    take(e, "gas_kg_per_kwh_lhv", cfg.analysis.emissions.gas_kg_per_kwh_lhv);
    take(e, "hhv_to_lhv", cfg.analysis.emissions.hhv_to_lhv);
  }
  if (root.contains("scenario")) read_scenario(root["scenario"], cfg.scenario);
  cfg.analysis.validate();
  cfg.scenario.validate();
  return cfg;
}

RunConfig load_config(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

}  // namespace retrofit
