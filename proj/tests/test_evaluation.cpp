#include <doctest.h>

#include <algorithm>
#include <numeric>

#include "groupopt/allocator.hpp"
#include "groupopt/evaluation.hpp"
#include "groupopt/synthetic.hpp"
#include "support.hpp"

using namespace groupopt;
using namespace testsupport;

TEST_CASE("report fields agree with independent recounts") {
  RngStream rng(12);
  const auto panel = random_panel(PanelShape{24, {2, 3}, 0.0, 0, 4, 0}, rng);
  const EncodedPanel enc(panel);
  RunConfig config;
  config.num_tables = 4;
  config.num_rounds = 5;
  config.rng_seed = 3;
  const auto layout = validate_config(panel, config);
  const auto result = run(enc, layout, config);
  const auto report = build_report(result.plan, enc, layout, config);

  const auto counts = count_meetings(result.plan, 24);
  CHECK(report.geometric_score == doctest::Approx(brute_geometric(counts, 0.5)).epsilon(1e-12));

  std::int64_t met = 0;
  for (int a = 0; a < 24; ++a)
    for (int b = a + 1; b < 24; ++b) met += counts[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)] > 0 ? 1 : 0;
  CHECK(report.pairs_met == met);
  CHECK(report.unmet_pairs == 276 - met);

  REQUIRE(report.per_round_balance.size() == 5);
  double sum = 0;
  for (int k = 0; k < 5; ++k) {
    for (int t = 0; t < 4; ++t) {
      for (int d = 0; d < 2; ++d) {
        const double expected = brute_distance(result.plan.rounds[static_cast<std::size_t>(k)], enc, t, d);
        CHECK(report.per_round_balance[static_cast<std::size_t>(k)][static_cast<std::size_t>(t)][static_cast<std::size_t>(d)] ==
              doctest::Approx(expected));
        sum += expected;
      }
    }
  }
  CHECK(report.mean_distance == doctest::Approx(sum / 40));

  REQUIRE(report.meeting_curves.size() == 5);
  for (std::size_t k = 0; k < 5; ++k) {
    const auto& curve = report.meeting_curves[k];
    const auto& hist = report.meeting_histograms[k];
    CHECK(curve.size() == report.meeting_curves.back().size());
    CHECK(std::accumulate(hist.begin(), hist.end(), std::int64_t{0}) == 276);
    std::int64_t weighted = 0;
    for (std::size_t c = 0; c < hist.size(); ++c) weighted += static_cast<std::int64_t>(c) * hist[c];
    CHECK(weighted == static_cast<std::int64_t>(k + 1) * report.bounds.meetings_per_round);
    CHECK(curve[0] == hist[0]);
    for (std::size_t m = 1; m < curve.size(); ++m) {
      std::int64_t at_least = 0;
      for (std::size_t c = m; c < hist.size(); ++c) at_least += hist[c];
      CHECK(curve[m] == at_least);
    }
  }
  REQUIRE(report.excess);
  CHECK(*report.excess == doctest::Approx(static_cast<double>(report.unmet_pairs - report.bounds.min_unmet_pairs) / 276));
  REQUIRE(report.first_meeting_fraction);
  CHECK(*report.first_meeting_fraction == doctest::Approx(static_cast<double>(met) / report.bounds.max_first_meetings));
}

TEST_CASE("excess is withheld under clustering") {
  const auto panel = make_synthetic_panel(desk_dataset("hd30"), true);
  RunConfig config;
  config.num_tables = 3;
  config.num_cluster_tables = suggest_cluster_tables(panel, config).minimum;
  config.num_rounds = 3;
  const EncodedPanel enc(panel);
  const auto layout = validate_config(panel, config);
  const auto report = build_report(run(enc, layout, config).plan, enc, layout, config);
  CHECK_FALSE(report.excess);
  CHECK(report.excess_note == kExcessClusteredNote);
}

TEST_CASE("balance check uses tolerance plus one seat of slack") {
  Panel p;
  p.demographics = {{"sex", {"f", "m"}}};
  for (int i = 0; i < 8; ++i) p.participants.push_back({"p" + std::to_string(i), {{"sex", i < 4 ? "f" : "m"}}, false, {}, {}});
  const EncodedPanel enc(p);
  const auto layout = TableLayout::balanced(8, 2);
  // 3f+1m at table 0: share 0.75 vs 0.5, allowance 0.1 + 0.25
  const AllocationPlan near{{{0, 0, 0, 1, 0, 1, 1, 1}}};
  const auto ok = balance_tolerance_check(near, enc, layout, 0.10);
  CHECK(ok.passed);
  CHECK(ok.max_deviation == doctest::Approx(0.25));
  const AllocationPlan split{{{0, 0, 0, 0, 1, 1, 1, 1}}};
  const auto bad = balance_tolerance_check(split, enc, layout, 0.10);
  CHECK_FALSE(bad.passed);
  REQUIRE(bad.worst);
  CHECK(bad.worst->deviation == doctest::Approx(0.5));
  CHECK(bad.worst->allowance == doctest::Approx(0.35));
}

TEST_CASE("random baseline plans are valid and summarised") {
  RngStream rng(9);
  const auto panel = random_panel(PanelShape{18, {2, 2}, 0.3, 2, 3, 1}, rng);
  RunConfig config;
  config.num_tables = 3;
  config.num_cluster_tables = 1;
  config.num_rounds = 3;
  TableLayout layout;
  try {
    layout = validate_config(panel, config);
  } catch (const ConfigError&) {
    config.num_cluster_tables = suggest_cluster_tables(panel, config).minimum;
    layout = validate_config(panel, config);
  }
  const EncodedPanel enc(panel);
  std::vector<double> scores;
  for (std::uint64_t s = 0; s < 5; ++s) {
    const auto plan = random_plan(enc, layout, 3, mix_seed(config.rng_seed, s));
    CHECK(independent_plan_check(plan, enc, layout).empty());
    scores.push_back(brute_geometric(count_meetings(plan, 18), 0.5));
  }
  const auto summary = random_baseline(enc, layout, config, 5);
  CHECK(summary.num_seeds == 5);
  CHECK(summary.geometric_score.mean == doctest::Approx(std::accumulate(scores.begin(), scores.end(), 0.0) / 5));
  CHECK(summary.geometric_score.min <= summary.geometric_score.mean);
  CHECK(summary.geometric_score.max >= summary.geometric_score.mean);
}

TEST_CASE("summarize") {
  const auto s = summarize({3.0, 1.0, 2.0});
  CHECK(s.mean == doctest::Approx(2.0));
  CHECK(s.min == 1.0);
  CHECK(s.max == 3.0);
}

TEST_CASE("synthetic data sets are deterministic and shaped as described") {
  for (const auto& name : desk_dataset_names()) {
    const auto spec = desk_dataset(name);
    const auto a = make_synthetic_panel(spec, false);
    const auto b = make_synthetic_panel(spec, false);
    CHECK(a.participants.size() == static_cast<std::size_t>(spec.size));
    CHECK(a.demographics.size() == spec.levels.size());
    CHECK_FALSE(has_errors(validate_panel(a)));
    for (std::size_t i = 0; i < a.participants.size(); ++i) CHECK(a.participants[i].demographics == b.participants[i].demographics);
    if (spec.cluster_demographic) {
      const auto c = make_synthetic_panel(spec, true);
      CHECK(c.cluster);
      CHECK(c.demographics.size() == spec.levels.size() - 1);
      CHECK(c.cluster_count() > 0);
    }
  }
  CHECK_THROWS(desk_dataset("nope"));
}
