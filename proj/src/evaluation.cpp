#include "groupopt/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "groupopt/allocator.hpp"
#include "groupopt/rng.hpp"

namespace groupopt {

RunReport build_report(const AllocationPlan& plan, const EncodedPanel& panel, const TableLayout& layout,
                       const RunConfig& config) {
  RunReport report;
  report.config = config;
  report.num_participants = panel.size();
  report.table_sizes = layout.sizes();
  report.cluster_tables = layout.cluster_tables();
  for (const auto& d : panel.panel().demographics) report.demographics.push_back(d.name);

  for (const auto& round : plan.rounds) {
    std::vector<std::vector<double>> tables;
    for (TableIndex t = 0; t < layout.num_tables(); ++t) {
      std::vector<double> row;
      for (int d = 0; d < panel.num_demographics(); ++d) row.push_back(table_distance(round, panel, t, d));
      tables.push_back(std::move(row));
    }
    report.per_round_balance.push_back(std::move(tables));
  }
  report.mean_distance = mean_distance(plan, panel, layout);

  MeetingLedger ledger(panel.size());
  for (const auto& round : plan.rounds) {
    ledger.record_round(round);
    report.meeting_histograms.push_back(ledger.histogram());
  }
  const std::size_t width = report.meeting_histograms.empty() ? 1 : report.meeting_histograms.back().size();
  for (auto& hist : report.meeting_histograms) {
    hist.resize(width, 0);
    std::vector<std::int64_t> curve(width, 0);
    curve[0] = hist[0];
    std::int64_t at_least = 0;
    for (std::size_t m = width; m-- > 1;) {
      at_least += hist[m];
      curve[m] = at_least;
    }
    report.meeting_curves.push_back(std::move(curve));
  }

  report.geometric_score = geometric_meeting_score(ledger, config.saturation_base);
  report.bounds = bounds(layout, plan.num_rounds());
  report.pairs_met = ledger.pairs_met();
  report.unmet_pairs = report.bounds.pairs_total - report.pairs_met;
  if (panel.has_clustering()) {
    report.excess_note = kExcessClusteredNote;
  } else {
    report.excess = excess(report.unmet_pairs, report.bounds);
  }
  if (report.bounds.max_first_meetings > 0) {
    report.first_meeting_fraction =
        static_cast<double>(report.pairs_met) / static_cast<double>(report.bounds.max_first_meetings);
  }
  return report;
}

Summary summarize(const std::vector<double>& values) {
  if (values.empty()) return {};
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  return Summary{std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size()), *lo, *hi};
}

AllocationPlan random_plan(const EncodedPanel& panel, const TableLayout& layout, int num_rounds, std::uint64_t seed) {
  RngStream rng(seed);
  AllocationPlan plan;
  for (int k = 0; k < num_rounds; ++k) plan.rounds.push_back(place_round(k, panel, layout, rng));
  return plan;
}

BaselineSummary random_baseline(const EncodedPanel& panel, const TableLayout& layout, const RunConfig& config,
                                int num_seeds) {
  std::vector<double> scores;
  std::vector<double> distances;
  for (int s = 0; s < num_seeds; ++s) {
    const auto plan = random_plan(panel, layout, config.num_rounds, mix_seed(config.rng_seed, static_cast<std::uint64_t>(s)));
    MeetingLedger ledger(panel.size());
    for (const auto& round : plan.rounds) ledger.record_round(round);
    scores.push_back(geometric_meeting_score(ledger, config.saturation_base));
    distances.push_back(mean_distance(plan, panel, layout));
  }
  return BaselineSummary{num_seeds, summarize(scores), summarize(distances)};
}

BalanceCheck balance_tolerance_check(const AllocationPlan& plan, const EncodedPanel& panel, const TableLayout& layout,
                                     double tolerance) {
  // Absorbs the rounding in differences such as 0.6 - 0.5.
  constexpr double kEpsilon = 1e-12;
  BalanceCheck check;
  double worst_margin = -INFINITY;
  for (int k = 0; k < plan.num_rounds(); ++k) {
    const auto& round = plan.rounds[static_cast<std::size_t>(k)];
    for (TableIndex t = 0; t < layout.num_tables(); ++t) {
      const double allowance = tolerance + 1.0 / layout.size(t);
      for (int d = 0; d < panel.num_demographics(); ++d) {
        for (int v = 0; v < panel.num_values(d); ++v) {
          const double deviation = std::abs(table_proportion(round, panel, t, d, v) - panel.panel_proportion(d, v));
          check.max_deviation = std::max(check.max_deviation, deviation);
          if (deviation - allowance > worst_margin) {
            worst_margin = deviation - allowance;
            check.worst = BalanceOffender{k, t, d, v, deviation, allowance};
          }
          if (deviation > allowance + kEpsilon) check.passed = false;
        }
      }
    }
  }
  return check;
}

}  // namespace groupopt
