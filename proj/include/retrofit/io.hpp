#pragma once

#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "retrofit/cohort.hpp"
#include "retrofit/domain.hpp"
#include "retrofit/estimate.hpp"
#include "retrofit/matching.hpp"
#include "retrofit/panel.hpp"
#include "retrofit/prepared.hpp"
#include "retrofit/synth.hpp"

namespace retrofit {

namespace fs = std::filesystem;

/// One parsed CSV record with access by header name.
class CsvRow {
 public:
  CsvRow(const std::map<std::string, std::size_t>* index, std::vector<std::string> fields,
         std::size_t line)
      : index_(index), fields_(std::move(fields)), line_(line) {}

  /// Throws ValidationError when the column is absent from the header.
  const std::string& operator[](std::string_view column) const;
  bool has(std::string_view column) const { return index_->find(std::string(column)) != index_->end(); }
  std::size_t line() const { return line_; }

 private:
  const std::map<std::string, std::size_t>* index_;
  std::vector<std::string> fields_;
  std::size_t line_;
};

/// Streams an RFC-4180 file row by row. Throws IoError when the file cannot be
/// opened and ValidationError on malformed records or missing columns.
void read_csv(const fs::path& path, std::span<const std::string_view> required,
              const std::function<void(const CsvRow&)>& row);

/// Writes to a temporary sibling file and renames it over the target on
/// commit(). An uncommitted writer removes its temporary file.
class AtomicFile {
 public:
  explicit AtomicFile(fs::path target);
  AtomicFile(const AtomicFile&) = delete;
  AtomicFile& operator=(const AtomicFile&) = delete;
  ~AtomicFile();

  std::ostream& stream() { return out_; }
  void commit();

 private:
  fs::path target_;
  fs::path temp_;
  std::ofstream out_;
  bool committed_ = false;
};

class CsvWriter {
 public:
  CsvWriter(const fs::path& target, std::span<const std::string_view> header);
  void row(std::span<const std::string> fields);
  void row(std::initializer_list<std::string> fields) {
    row(std::span<const std::string>(fields.begin(), fields.size()));
  }
  void commit() { file_.commit(); }

 private:
  AtomicFile file_;
};

std::string quote_csv(std::string_view field);
/// Shortest text that parses back to exactly `value`.
std::string format_number(double value);
std::string format_fixed(double value, int decimals);

struct Rejection {
  std::string table;
  std::size_t line = 0;
  std::string key;
  std::string field;
  std::string rule;
};

struct IngestResult {
  Dataset data;
  std::vector<Rejection> rejections;
};

/// Loads homes.csv, retrofits.csv, consumption.csv and weather.csv from `dir`.
/// Record-level violations are collected as rejections; structural problems throw.
IngestResult load_dataset(const fs::path& dir);

/// Writes the four input tables in canonical order.
void write_dataset(const fs::path& dir, const Dataset& data);
void write_rejections(const fs::path& path, std::span<const Rejection> rejections);

void write_cohort(const fs::path& path, const Cohort& cohort);
Cohort read_cohort(const fs::path& path, const AnalysisConfig& config);

void write_matches(const fs::path& path, std::span<const MatchRecord> matches);
std::vector<MatchRecord> read_matches(const fs::path& path);
void write_match_drops(const fs::path& path, std::span<const DroppedUnit> dropped);

struct EstimateRow {
  std::string measure;
  Energy energy = Energy::electricity;
  Channel channel = Channel::total;
  AttEstimate estimate;
};

struct PanelRow {
  std::string measure;
  Energy energy = Energy::electricity;
  Channel channel = Channel::total;
  Scale scale = Scale::log;
  TwoPeriodObservation observation;
};

/// One row per unit with the unencoded covariates of its home.
void write_panel(const fs::path& path, std::span<const PanelRow> rows);
void write_estimates(const fs::path& path, std::span<const EstimateRow> rows);
std::vector<EstimateRow> read_estimates(const fs::path& path);

struct Co2Row {
  std::string energy;  // "electricity", "gas" or "total"
  std::optional<double> delta_kwh;
  double delta_kg = 0.0;
};
void write_co2(const fs::path& path, std::span<const Co2Row> rows);
std::vector<Co2Row> read_co2(const fs::path& path);

struct PretreatmentRow {
  std::string measure;
  Energy energy = Energy::electricity;
  double treated_kwh_per_year = 0.0;
  double control_kwh_per_year = 0.0;
  int n_treated = 0;
  int n_control = 0;
};
void write_pretreatment(const fs::path& path, std::span<const PretreatmentRow> rows);
std::vector<PretreatmentRow> read_pretreatment(const fs::path& path);

struct EstimationSettings {
  Estimator estimator = Estimator::drdid;
  Channel channel = Channel::total;
  Scale scale = Scale::percent;
  int bootstrap_replicates = 0;  // > 0 adds a matched-set cluster bootstrap se
};

struct RunConfig {
  AnalysisConfig analysis;
  EstimationSettings estimation;
  ScenarioSpec scenario;
};

/// Parses the JSON configuration file; absent keys keep their defaults.
RunConfig load_config(const fs::path& path);
RunConfig parse_config(std::string_view json_text);

}  // namespace retrofit
