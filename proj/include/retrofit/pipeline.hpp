#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "retrofit/cohort.hpp"
#include "retrofit/io.hpp"
#include "retrofit/matching.hpp"
#include "retrofit/panel.hpp"
#include "retrofit/prepared.hpp"

namespace retrofit {

/// Electric distance for electricity analyses, gas distance for gas and
/// fuel-switch analyses.
DistanceKind distance_kind(const AnalysisConfig& config);

/// Energies whose outcome is estimated: the configured one, or both for a fuel switch.
std::vector<Energy> outcome_energies(const AnalysisConfig& config);

/// Monthly series of a treated home for one energy; for a fuel switch, gas
/// months after the retrofit that are metered on electricity only count as zero.
MonthlySeries treated_series(const PreparedData& data, const CohortMember& member, Energy energy,
                             const AnalysisConfig& config);

std::vector<TreatedUnit> treated_units(const PreparedData& data, const Cohort& cohort);
std::vector<HomeRecord> control_homes(const PreparedData& data, const Cohort& cohort);

/// A pool home is a feasible control when, clipped to the treated window, it
/// has 12 calendar months on each side of the fictive date for every outcome
/// energy and shows heating in both periods on the heating energy.
Eligibility control_eligibility(const PreparedData& data, const Cohort& cohort,
                                const AnalysisConfig& config);

MatchResult run_matching(const PreparedData& data, const Cohort& cohort,
                         const AnalysisConfig& config);

struct PanelAssembly {
  std::vector<PanelRow> rows;
  std::vector<HomeExclusion> dropped;  // by unit_id
};

/// Two-period observations of every matched treated unit and its controls.
/// A treated unit whose own outcome cannot be formed is dropped with its
/// controls; a control that cannot be formed is dropped alone.
PanelAssembly assemble_panel(const PreparedData& data, const Cohort& cohort,
                             std::span<const MatchRecord> matches, const AnalysisConfig& config,
                             Energy energy, Channel channel, Scale outcome_scale);

/// Point estimate on the outcome scale of the design.
AttEstimate estimate_att(const Design& design, Estimator estimator, Scale outcome_scale,
                         const AnalysisConfig& config, int bootstrap_replicates = 0);

/// One estimate per measure present in `rows` (in measure order). Percent is
/// estimated on the log scale and converted. Analyses matched on the electric
/// distance use the electric covariate set, the others surface only.
std::vector<EstimateRow> estimate_by_measure(std::span<const PanelRow> rows,
                                             const AnalysisConfig& config,
                                             const EstimationSettings& settings,
                                             std::vector<std::string>* warnings = nullptr);

/// Mean annualized pre-period consumption of treated units and of their
/// matched controls, per measure. `rows` must hold the total channel.
std::vector<PretreatmentRow> summarize_pretreatment(std::span<const PanelRow> rows);

/// Electricity, gas and total rows from kwh_per_year estimates of one measure.
std::vector<Co2Row> fuel_switch_co2(std::span<const EstimateRow> rows,
                                    const EmissionFactors& factors);

struct EstimationOutput {
  std::vector<PanelRow> panel;
  std::vector<HomeExclusion> dropped;
  std::vector<EstimateRow> estimates;
  std::vector<PretreatmentRow> pretreatment;
  std::vector<Co2Row> co2;  // fuel switch only
  std::vector<std::string> warnings;
};

/// Panel assembly, estimation and the derived tables. A fuel switch is always
/// estimated in kWh per year on both energies.
EstimationOutput run_estimation(const PreparedData& data, const Cohort& cohort,
                                std::span<const MatchRecord> matches,
                                const AnalysisConfig& config, const EstimationSettings& settings);

/// Markdown tables with the columns measure, ATT, s.e., LCB, UCB, p-value.
std::string render_tables(std::span<const EstimateRow> estimates,
                          std::span<const PretreatmentRow> pretreatment,
                          std::span<const Co2Row> co2);

/// Point estimates with 95% interval bars, one row per measure.
std::string render_svg(std::span<const EstimateRow> rows, const std::string& title);

/// Writes report.md plus figure_<energy>_<channel>_<estimator>_<scale>.{csv,svg} into `dir`.
void write_report(const fs::path& dir, std::span<const EstimateRow> estimates,
                  std::span<const PretreatmentRow> pretreatment, std::span<const Co2Row> co2);

}  // namespace retrofit
