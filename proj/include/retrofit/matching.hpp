#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "retrofit/domain.hpp"
#include "retrofit/weather.hpp"

namespace retrofit {

struct MatchRecord {
  std::string treated_id;
  std::string control_id;
  double distance = 0.0;
  Date fictive_date{};  // the treated home's retrofit date

  friend bool operator==(const MatchRecord&, const MatchRecord&) = default;
};

enum class DistanceKind { electric, gas };

struct TreatedUnit {
  HomeRecord home;
  Date date{};
  Measure measure = Measure::attic_insulation;
};

/// Similarity score for electrically heated homes; nullopt when a hard
/// constraint fails. Heating must match, except that a heat-pump treatment
/// requires an electrically heated candidate. Pool presence must match.
std::optional<double> electric_distance(const HomeRecord& treated, const HomeRecord& candidate,
                                        bool heat_pump_treatment = false);

/// Similarity score for gas-heated homes; nullopt unless the candidate heats with gas.
std::optional<double> gas_distance(const HomeRecord& treated, const HomeRecord& candidate);

std::optional<double> match_distance(DistanceKind kind, const TreatedUnit& treated,
                                     const HomeRecord& candidate);

/// Data-dependent feasibility of a candidate for one treated unit (coverage
/// and heating detection around the treated date).
using Eligibility = std::function<bool(const TreatedUnit&, const HomeRecord&)>;

struct DroppedUnit {
  std::string treated_id;
  Reason reason;
};

struct MatchResult {
  std::vector<MatchRecord> records;
  std::vector<DroppedUnit> dropped;
};

/// k:1 nearest-neighbor matching with replacement. For each treated unit, the k
/// eligible candidates with the smallest (distance, control_id). Candidates are
/// visited in order of a chord-based lower bound and the scan stops once no
/// remaining candidate can enter the top k; the result equals a full scan.
MatchResult match_controls(std::span<const TreatedUnit> treated, std::span<const HomeRecord> pool,
                           DistanceKind kind, int k, const Eligibility& eligible);

struct ObservationWindow {
  MonthKey first;
  MonthKey last;
};

ObservationWindow window_of(const MonthlySeries& series);

/// Clips a control series to the treated window. Fails with window_coverage
/// when fewer than 12 calendar months remain on either side of the fictive date.
std::variant<MonthlySeries, Reason> align_control_window(const MatchRecord& match,
                                                         const MonthlySeries& control,
                                                         const ObservationWindow& window,
                                                         int exclusion_months = 0);

}  // namespace retrofit
