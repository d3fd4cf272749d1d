#include <doctest.h>

#include <cmath>

#include "groupopt/metrics.hpp"
#include "support.hpp"

using namespace groupopt;
using namespace testsupport;

namespace {

// sex: f f f m m m, age: y o y o y o
Panel six() {
  Panel p;
  p.demographics = {{"sex", {"f", "m"}}, {"age", {"y", "o"}}};
  const char* sex[] = {"f", "f", "f", "m", "m", "m"};
  const char* age[] = {"y", "o", "y", "o", "y", "o"};
  for (int i = 0; i < 6; ++i) p.participants.push_back({"p" + std::to_string(i), {{"sex", sex[i]}, {"age", age[i]}}, false, {}, {}});
  return p;
}

}  // namespace

TEST_CASE("table distance is the L1 gap to panel shares") {
  const EncodedPanel enc(six());
  const RoundAllocation round{0, 0, 0, 1, 1, 1};
  CHECK(table_proportion(round, enc, 0, 0, 0) == doctest::Approx(1.0));
  CHECK(table_distance(round, enc, 0, 0) == doctest::Approx(1.0));
  CHECK(table_distance(round, enc, 1, 0) == doctest::Approx(1.0));
  // age at table 0: y o y -> 2/3 vs 1/2
  CHECK(table_distance(round, enc, 0, 1) == doctest::Approx(1.0 / 3.0));
  const RoundAllocation mixed{0, 1, 0, 1, 0, 1};
  CHECK(table_distance(mixed, enc, 0, 0) == doctest::Approx(1.0 / 3.0));
  for (int t = 0; t < 2; ++t) {
    for (int d = 0; d < 2; ++d) CHECK(table_distance(mixed, enc, t, d) == doctest::Approx(brute_distance(mixed, enc, t, d)));
  }
}

TEST_CASE("mean distance averages tables, demographics and rounds") {
  const EncodedPanel enc(six());
  const auto layout = TableLayout::balanced(6, 2);
  AllocationPlan plan{{{0, 0, 0, 1, 1, 1}, {0, 1, 0, 1, 0, 1}}};
  double sum = 0;
  for (const auto& r : plan.rounds)
    for (int t = 0; t < 2; ++t)
      for (int d = 0; d < 2; ++d) sum += brute_distance(r, enc, t, d);
  CHECK(mean_distance(plan, enc, layout) == doctest::Approx(sum / 8));
}

TEST_CASE("pareto score collapses to -1 when any demographic worsens") {
  const EncodedPanel enc(six());
  const RoundAllocation round{0, 0, 0, 1, 1, 1};
  // p0 (f,y) for p3 (m,o): sex improves on both tables, age stays 1/3 off.
  CHECK(pareto_change(round, enc, 0, 3, 0, 0) == 1);
  CHECK(pareto_change(round, enc, 0, 3, 1, 0) == 1);
  CHECK(pareto_score(round, enc, 0, 3, 0) >= 1);
  // Swapping p0 (f,y) with p4 (m,y) keeps age and improves sex.
  CHECK(pareto_change(round, enc, 0, 4, 0, 1) == 0);
  CHECK(pareto_score(round, enc, 0, 4, 0) == 1);
  // From a balanced table, a swap that unbalances sex scores -1.
  const RoundAllocation mixed{0, 1, 0, 1, 0, 1};
  CHECK(pareto_score(mixed, enc, 4, 1, 0) == -1);
}

TEST_CASE("reversing an improving swap worsens the same table") {
  RngStream rng(11);
  for (int trial = 0; trial < 40; ++trial) {
    PanelShape shape{10, {2, 3}, 0.0, 0, 2, 0};
    const EncodedPanel enc(random_panel(shape, rng));
    RoundAllocation round(10);
    for (int i = 0; i < 10; ++i) round[static_cast<std::size_t>(i)] = i % 2;
    rng.shuffle(std::span(round));
    for (int i = 0; i < 10; ++i) {
      for (int j = 0; j < 10; ++j) {
        if (round[static_cast<std::size_t>(i)] == round[static_cast<std::size_t>(j)]) continue;
        for (int t = 0; t < 2; ++t) {
          for (int d = 0; d < 2; ++d) {
            if (pareto_change(round, enc, i, j, t, d) != 1) continue;
            auto after = round;
            std::swap(after[static_cast<std::size_t>(i)], after[static_cast<std::size_t>(j)]);
            CHECK(pareto_change(after, enc, i, j, t, d) == -1);
          }
        }
      }
    }
  }
}

TEST_CASE("meeting ledger counts co-seated pairs") {
  MeetingLedger ledger(5);
  ledger.record_round({0, 0, 1, 1, 1});
  ledger.record_round({0, 1, 0, 1, 1});
  CHECK(ledger.count(0, 1) == 1);
  CHECK(ledger.count(3, 4) == 2);
  CHECK(ledger.count(4, 3) == 2);
  CHECK(ledger.total() == 4 + 4);
  CHECK(ledger.pairs_met() == 7);
  CHECK(ledger.max_count() == 2);
  const auto h = ledger.histogram();
  REQUIRE(h.size() == 3);
  CHECK(h[0] == 3);
  CHECK(h[1] == 6);
  CHECK(h[2] == 1);
}

TEST_CASE("swap meeting delta matches a full recount") {
  RngStream rng(5);
  for (int trial = 0; trial < 30; ++trial) {
    const int n = 9;
    MeetingLedger ledger(n);
    for (int r = 0; r < 3; ++r) {
      RoundAllocation prior(n);
      for (int i = 0; i < n; ++i) prior[static_cast<std::size_t>(i)] = i % 3;
      rng.shuffle(std::span(prior));
      ledger.record_round(prior);
    }
    RoundAllocation round(n);
    for (int i = 0; i < n; ++i) round[static_cast<std::size_t>(i)] = i % 3;
    rng.shuffle(std::span(round));
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        const TableIndex ti = round[static_cast<std::size_t>(i)];
        const TableIndex tj = round[static_cast<std::size_t>(j)];
        if (ti == tj) continue;
        auto after = round;
        std::swap(after[static_cast<std::size_t>(i)], after[static_cast<std::size_t>(j)]);
        const auto expected = table_meeting_load(round, ti, ledger) + table_meeting_load(round, tj, ledger) -
                              table_meeting_load(after, ti, ledger) - table_meeting_load(after, tj, ledger);
        CHECK(swap_meeting_delta(round, i, j, ledger) == expected);
      }
    }
  }
}

TEST_CASE("geometric score sums a^t per meeting") {
  MeetingLedger ledger(4);
  ledger.record_round({0, 0, 1, 1});
  ledger.record_round({0, 0, 1, 1});
  ledger.record_round({0, 1, 0, 1});
  // pairs (0,1) and (2,3) met twice, (0,2) and (1,3) once
  const double expected = 2 * (0.5 + 0.25) + 2 * 0.5;
  CHECK(geometric_meeting_score(ledger, 0.5) == doctest::Approx(expected));
  const auto h = ledger.histogram();
  CHECK(geometric_score_from_histogram(h, 0.5) == doctest::Approx(expected));
  CHECK(geometric_meeting_score(ledger, 0.3) == doctest::Approx(2 * (0.3 + 0.09) + 2 * 0.3));
}

TEST_CASE("pair and meeting counts") {
  CHECK(pairs_total(30) == 435);
  CHECK(pairs_total(1) == 0);
  CHECK(meetings_per_round(TableLayout::balanced(30, 4)) == 28 + 28 + 21 + 21);
}

TEST_CASE("minimum repeats between rounds") {
  // each table of 10 spreads 4 3 3: 6 + 3 + 3 repeats
  CHECK(min_repeats_between_rounds(TableLayout::balanced(30, 3)).value == 36);
  CHECK(min_repeats_between_rounds(TableLayout::balanced(6, 1)).value == 15);
  CHECK(min_repeats_between_rounds(TableLayout::balanced(9, 3)).value == 0);
  for (const auto& sizes : std::vector<std::vector<int>>{{3, 3}, {4, 3}, {4, 4, 3}, {5, 1}, {3, 3, 2, 1}, {6, 2, 1}}) {
    const auto bound = min_repeats_between_rounds(TableLayout::from_sizes(sizes));
    CHECK(bound.exact);
    CHECK(bound.value == brute_min_repeats(sizes));
  }
}

TEST_CASE("bounds follow the round-wise recurrence") {
  const auto layout = TableLayout::balanced(30, 3);
  const auto b = bounds(layout, 3);
  CHECK(b.pairs_total == 435);
  CHECK(b.meetings_per_round == 135);
  CHECK(b.min_repeats == 36);
  CHECK(b.min_unmet_pairs == std::max<std::int64_t>(0, 435 - (135 + 2 * (135 - 36))));
  CHECK(b.max_first_meetings == 435 - b.min_unmet_pairs);
  CHECK(excess(b.min_unmet_pairs + 87, b) == doctest::Approx(0.2));
  const auto saturated = bounds(layout, 10);
  CHECK(saturated.min_unmet_pairs == 0);
}
