#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "groupopt/metrics.hpp"
#include "groupopt/model.hpp"

namespace groupopt {

struct RunReport {
  RunConfig config;
  int num_participants = 0;
  std::vector<int> table_sizes;
  std::vector<TableIndex> cluster_tables;
  std::vector<std::string> demographics;

  /// per_round_balance[k][j][d] = table distance of table j on demographic d in round k.
  std::vector<std::vector<std::vector<double>>> per_round_balance;
  double mean_distance = 0.0;

  /// meeting_curves[k][M] after round k+1: M = 0 counts pairs that have never
  /// met, M >= 1 counts pairs that met at least M times. Rows share one width.
  std::vector<std::vector<std::int64_t>> meeting_curves;
  /// meeting_histograms[k][c] = pairs that met exactly c times after round k+1.
  std::vector<std::vector<std::int64_t>> meeting_histograms;

  double geometric_score = 0.0;
  BoundsReport bounds;
  std::int64_t pairs_met = 0;
  std::int64_t unmet_pairs = 0;
  /// Absent when clustering constraints are in force.
  std::optional<double> excess;
  std::string excess_note;
  std::optional<double> first_meeting_fraction;
};

inline constexpr const char* kExcessClusteredNote = "clustering constraints present";

/// Recomputes every report field from a plan. The plan must be valid.
RunReport build_report(const AllocationPlan& plan, const EncodedPanel& panel, const TableLayout& layout,
                       const RunConfig& config);

struct Summary {
  double mean = 0.0;
  double min = 0.0;
  double max = 0.0;
};

Summary summarize(const std::vector<double>& values);

struct BaselineSummary {
  int num_seeds = 0;
  Summary geometric_score;
  Summary mean_distance;
};

/// Constraint-respecting random allocations (no swaps), one per derived seed.
BaselineSummary random_baseline(const EncodedPanel& panel, const TableLayout& layout, const RunConfig& config,
                                int num_seeds);

/// A random allocation plan for one baseline draw.
AllocationPlan random_plan(const EncodedPanel& panel, const TableLayout& layout, int num_rounds, std::uint64_t seed);

struct BalanceOffender {
  int round = 0;
  TableIndex table = 0;
  int demographic = 0;
  int value = 0;
  double deviation = 0.0;  // |p^j - p^P|
  double allowance = 0.0;  // tolerance + 1 / table size
};

struct BalanceCheck {
  bool passed = true;
  double max_deviation = 0.0;
  /// Location with the largest deviation relative to its allowance.
  std::optional<BalanceOffender> worst;
};

/// Passes when every table proportion lies within tolerance + 1/table_size
/// of the panel proportion, for all rounds, demographics and values.
BalanceCheck balance_tolerance_check(const AllocationPlan& plan, const EncodedPanel& panel, const TableLayout& layout,
                                     double tolerance);

}  // namespace groupopt
