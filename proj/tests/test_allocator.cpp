#include <doctest.h>

#include <map>

#include "groupopt/allocator.hpp"
#include "support.hpp"

using namespace groupopt;
using namespace testsupport;

namespace {

SwapCandidate cand(int partner, int pareto, double delta) {
  SwapCandidate c;
  c.partner = partner;
  c.combined_pareto = pareto;
  c.meeting_delta = delta;
  return c;
}

std::vector<int> partners(const std::vector<SwapCandidate>& cs) {
  std::vector<int> out;
  for (const auto& c : cs) out.push_back(c.partner);
  return out;
}

}  // namespace

TEST_CASE("filter_dominated keeps the Pareto front") {
  const std::vector<SwapCandidate> cs{cand(0, 2, 1), cand(1, 1, 1), cand(2, 0, 5), cand(3, 2, 1), cand(4, 1, 3),
                                      cand(5, 0, 0)};
  // 1 is dominated by 0 and 4, 5 by everyone; 0 and 3 tie and both stay.
  CHECK(partners(filter_dominated(cs)) == std::vector<int>{0, 2, 3, 4});
}

TEST_CASE("filter_dominated matches a quadratic reference") {
  RngStream rng(3);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<SwapCandidate> cs;
    const int n = 1 + static_cast<int>(rng.below(12));
    for (int k = 0; k < n; ++k) cs.push_back(cand(k, static_cast<int>(rng.below(4)), static_cast<double>(rng.below(5)) - 2));
    std::vector<int> expected;
    for (const auto& c : cs) {
      bool dominated = false;
      for (const auto& o : cs) {
        const bool ge = o.combined_pareto >= c.combined_pareto && o.meeting_delta >= c.meeting_delta;
        const bool gt = o.combined_pareto > c.combined_pareto || o.meeting_delta > c.meeting_delta;
        dominated = dominated || (ge && gt);
      }
      if (!dominated) expected.push_back(c.partner);
    }
    CHECK(partners(filter_dominated(cs)) == expected);
  }
}

TEST_CASE("select_swap samples in proportion to the branch weights") {
  const std::vector<SwapCandidate> cs{cand(0, 3, 0), cand(1, 1, 4), cand(2, 0, 0)};
  RngStream rng(99);
  std::map<int, int> pareto_hits;
  std::map<int, int> meeting_hits;
  const int draws = 20000;
  for (int k = 0; k < draws; ++k) {
    const auto a = select_swap(cs, 1.0, rng);
    REQUIRE(a);
    ++pareto_hits[a->partner];
    const auto b = select_swap(cs, 0.0, rng);
    REQUIRE(b);
    ++meeting_hits[b->partner];
  }
  CHECK(pareto_hits[2] == 0);
  CHECK(static_cast<double>(pareto_hits[0]) / draws == doctest::Approx(0.75).epsilon(0.03));
  CHECK(meeting_hits[1] == draws);
}

TEST_CASE("select_swap falls back to the other branch, then to none") {
  RngStream rng(1);
  const std::vector<SwapCandidate> only_meeting{cand(7, 0, 2)};
  CHECK(select_swap(only_meeting, 1.0, rng)->partner == 7);
  const std::vector<SwapCandidate> only_pareto{cand(8, 2, -1)};
  CHECK(select_swap(only_pareto, 0.0, rng)->partner == 8);
  const std::vector<SwapCandidate> nothing{cand(9, 0, 0), cand(10, 0, -3)};
  CHECK_FALSE(select_swap(nothing, 0.5, rng));
  CHECK_FALSE(select_swap(std::vector<SwapCandidate>{}, 0.5, rng));
}

TEST_CASE("place_round honours clustering and manual pins") {
  RngStream rng(21);
  for (int trial = 0; trial < 50; ++trial) {
    PanelShape shape{20, {2, 3}, 0.3, 3, 4, 2};
    const auto panel = random_panel(shape, rng);
    RunConfig config;
    config.num_tables = 4;
    config.num_cluster_tables = 2;
    TableLayout layout;
    try {
      layout = validate_config(panel, config);
    } catch (const ConfigError&) {
      continue;
    }
    const EncodedPanel enc(panel);
    RngStream place_rng(static_cast<std::uint64_t>(trial));
    const auto round = place_round(0, enc, layout, place_rng);
    CHECK(independent_plan_check(AllocationPlan{{round}}, enc, layout).empty());
  }
}

TEST_CASE("round state meeting delta matches the raw recount") {
  RngStream rng(8);
  PanelShape shape{12, {2, 2}, 0.0, 0, 3, 0};
  const EncodedPanel enc(random_panel(shape, rng));
  const auto layout = TableLayout::balanced(12, 3);
  MeetingLedger ledger(12);
  for (int r = 0; r < 2; ++r) ledger.record_round(place_round(r, enc, layout, rng));
  RunConfig config;
  config.num_tables = 3;
  RoundState state(enc, layout, ledger, 2, config, place_round(2, enc, layout, rng));
  for (int step = 0; step < 20; ++step) {
    for (int i = 0; i < 12; ++i) {
      for (int j = 0; j < 12; ++j) {
        if (state.table_of(i) == state.table_of(j)) continue;
        CHECK(state.meeting_delta(i, j) ==
              doctest::Approx(static_cast<double>(swap_meeting_delta(state.allocation(), i, j, ledger))));
        for (int side = 0; side < 2; ++side) {
          const int leaving = side == 0 ? i : j;
          const int arriving = side == 0 ? j : i;
          CHECK(state.pareto_score_on(state.table_of(leaving), leaving, arriving) ==
                pareto_score(state.allocation(), enc, i, j, state.table_of(leaving)));
        }
      }
    }
    int a = static_cast<int>(rng.below(12));
    int b = static_cast<int>(rng.below(12));
    if (state.table_of(a) != state.table_of(b)) state.apply_swap(a, b);
  }
}

TEST_CASE("geometric weighting scores the change in saturation value") {
  RngStream rng(4);
  PanelShape shape{10, {2}, 0.0, 0, 2, 0};
  const EncodedPanel enc(random_panel(shape, rng));
  const auto layout = TableLayout::balanced(10, 2);
  MeetingLedger ledger(10);
  for (int r = 0; r < 3; ++r) ledger.record_round(place_round(r, enc, layout, rng));
  RunConfig config;
  config.num_tables = 2;
  config.swap_weighting = SwapWeighting::geometric;
  const auto initial = place_round(3, enc, layout, rng);
  RoundState state(enc, layout, ledger, 3, config, initial);
  const auto value = [&](const RoundAllocation& round) {
    MeetingLedger after = ledger;
    after.record_round(round);
    return geometric_meeting_score(after, config.saturation_base);
  };
  for (int i = 0; i < 10; ++i) {
    for (int j = 0; j < 10; ++j) {
      if (initial[static_cast<std::size_t>(i)] == initial[static_cast<std::size_t>(j)]) continue;
      auto swapped = initial;
      std::swap(swapped[static_cast<std::size_t>(i)], swapped[static_cast<std::size_t>(j)]);
      CHECK(state.meeting_delta(i, j) == doctest::Approx(value(swapped) - value(initial)));
    }
  }
}

TEST_CASE("candidates never worsen either table and skip manual partners") {
  RngStream rng(17);
  for (int trial = 0; trial < 20; ++trial) {
    PanelShape shape{16, {2, 3}, 0.25, 3, 4, 1};
    const auto panel = random_panel(shape, rng);
    RunConfig config;
    config.num_tables = 4;
    config.num_cluster_tables = 1;
    TableLayout layout;
    try {
      layout = validate_config(panel, config);
    } catch (const ConfigError&) {
      continue;
    }
    const EncodedPanel enc(panel);
    MeetingLedger ledger(16);
    RoundState state(enc, layout, ledger, 0, config, place_round(0, enc, layout, rng));
    for (int i = 0; i < 16; ++i) {
      if (state.is_manual(i)) continue;
      for (const auto& c : candidates_for(i, state)) {
        CHECK_FALSE(state.is_manual(c.partner));
        CHECK(state.table_of(c.partner) != state.table_of(i));
        CHECK(c.pareto_i_table >= 0);
        CHECK(c.pareto_partner_table >= 0);
        CHECK(c.combined_pareto == c.pareto_i_table + c.pareto_partner_table);
        auto after = state.allocation();
        std::swap(after[static_cast<std::size_t>(i)], after[static_cast<std::size_t>(c.partner)]);
        CHECK(independent_plan_check(AllocationPlan{{after}}, enc, layout).empty());
        for (int d = 0; d < enc.num_demographics(); ++d) {
          for (const TableIndex t : {state.table_of(i), state.table_of(c.partner)}) {
            CHECK(brute_distance(after, enc, t, d) <= brute_distance(state.allocation(), enc, t, d) + 1e-12);
          }
        }
      }
    }
  }
}

TEST_CASE("runs are reproducible and seed dependent") {
  RngStream rng(2);
  PanelShape shape{30, {2, 2, 3}, 0.2, 2, 3, 1};
  const auto panel = random_panel(shape, rng);
  RunConfig config;
  config.num_tables = 3;
  config.num_cluster_tables = 1;
  config.num_rounds = 4;
  config.rng_seed = 42;
  const auto a = run(panel, config);
  const auto b = run(panel, config);
  CHECK(a.plan == b.plan);
  CHECK(a.ledger == b.ledger);
  config.rng_seed = 43;
  CHECK_FALSE(run(panel, config).plan == a.plan);
}

TEST_CASE("sweeps improve balance over the random start") {
  RngStream rng(6);
  PanelShape shape{30, {2, 2, 2}, 0.0, 0, 3, 0};
  const auto panel = random_panel(shape, rng);
  const EncodedPanel enc(panel);
  const auto layout = TableLayout::balanced(30, 3);
  RunConfig config;
  config.num_tables = 3;
  config.num_rounds = 3;
  double optimised = 0;
  double random = 0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    config.rng_seed = seed;
    optimised += mean_distance(run(enc, layout, config).plan, enc, layout);
    RngStream r(seed);
    AllocationPlan plan;
    for (int k = 0; k < 3; ++k) plan.rounds.push_back(place_round(k, enc, layout, r));
    random += mean_distance(plan, enc, layout);
  }
  CHECK(optimised < random);
}

TEST_CASE("run validates its configuration") {
  RngStream rng(1);
  const auto panel = random_panel(PanelShape{}, rng);
  RunConfig config;
  config.num_tables = 20;
  CHECK_THROWS_AS(run(panel, config), TableCountError);
}
