#include "groupopt/allocator.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace groupopt {

RoundState::RoundState(const EncodedPanel& panel, const TableLayout& layout, const MeetingLedger& ledger,
                       int round_index, const RunConfig& config, RoundAllocation initial)
    : panel_(&panel), layout_(&layout), ledger_(&ledger), round_index_(round_index), seats_(std::move(initial)) {
  const int n = panel.size();
  manual_.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) manual_[static_cast<std::size_t>(i)] = panel.is_manual_in_round(i, round_index);

  for (int d = 0; d < panel.num_demographics(); ++d) {
    offsets_.push_back(stride_);
    stride_ += static_cast<std::size_t>(panel.num_values(d));
  }
  value_counts_.assign(stride_ * static_cast<std::size_t>(layout.num_tables()), 0);
  for (int i = 0; i < n; ++i) {
    for (int d = 0; d < panel.num_demographics(); ++d) ++count_at(table_of(i), d, panel.value(i, d));
  }

  const int max_count = ledger.max_count();
  pair_weight_.resize(static_cast<std::size_t>(max_count) + 1);
  for (int c = 0; c <= max_count; ++c) {
    pair_weight_[static_cast<std::size_t>(c)] = config.swap_weighting == SwapWeighting::raw
                                                    ? static_cast<double>(c)
                                                    : -std::pow(config.saturation_base, c + 1);
  }

  load_.assign(static_cast<std::size_t>(n) * static_cast<std::size_t>(layout.num_tables()), 0.0);
  for (int a = 0; a < n; ++a) {
    for (int x = 0; x < n; ++x) {
      if (x != a) load(a, table_of(x)) += weight(a, x);
    }
  }
}

std::span<const int> RoundState::counts_of(TableIndex t, int d) const {
  const std::size_t start = static_cast<std::size_t>(t) * stride_ + offsets_[static_cast<std::size_t>(d)];
  return {value_counts_.data() + start, static_cast<std::size_t>(panel_->num_values(d))};
}

double RoundState::weight(int a, int b) const {
  return pair_weight_[static_cast<std::size_t>(ledger_->count(a, b))];
}

int RoundState::pareto_score_on(TableIndex table, int leaving, int arriving) const {
  const int size = layout_->size(table);
  int sum = 0;
  for (int d = 0; d < panel_->num_demographics(); ++d) {
    const int change = distance_change_sign(counts_of(table, d), size, *panel_, d, panel_->value(leaving, d),
                                            panel_->value(arriving, d));
    if (change < 0) return -1;
    sum += change;
  }
  return sum;
}

double RoundState::meeting_delta(int i, int i_prime) const {
  const TableIndex j = table_of(i);
  const TableIndex j_prime = table_of(i_prime);
  // load(i', j) includes the pair (i', i), which is not co-seated after the
  // swap; likewise load(i, j').
  const double cross = weight(i, i_prime);
  return (load(i, j) - (load(i_prime, j) - cross)) + (load(i_prime, j_prime) - (load(i, j_prime) - cross));
}

void RoundState::apply_swap(int i, int i_prime) {
  const TableIndex j = table_of(i);
  const TableIndex j_prime = table_of(i_prime);
  for (int d = 0; d < panel_->num_demographics(); ++d) {
    --count_at(j, d, panel_->value(i, d));
    ++count_at(j, d, panel_->value(i_prime, d));
    --count_at(j_prime, d, panel_->value(i_prime, d));
    ++count_at(j_prime, d, panel_->value(i, d));
  }
  for (int a = 0; a < panel_->size(); ++a) {
    const double to_i = a == i ? 0.0 : weight(a, i);
    const double to_i_prime = a == i_prime ? 0.0 : weight(a, i_prime);
    load(a, j) += to_i_prime - to_i;
    load(a, j_prime) += to_i - to_i_prime;
  }
  seats_[static_cast<std::size_t>(i)] = j_prime;
  seats_[static_cast<std::size_t>(i_prime)] = j;
}

// ---------------------------------------------------------------------------

RoundAllocation place_round(int round_index, const EncodedPanel& panel, const TableLayout& layout, RngStream& rng) {
  const int n = panel.size();
  RoundAllocation seats(static_cast<std::size_t>(n), -1);
  std::vector<int> free(layout.sizes());

  std::vector<int> clustered;
  std::vector<int> others;
  for (int i = 0; i < n; ++i) {
    if (const auto table = panel.manual_table(i, round_index)) {
      if (*table < 0 || *table >= layout.num_tables() || free[static_cast<std::size_t>(*table)] == 0) {
        throw InfeasibleError("cannot seat manually allocated participant '" + panel.id(i) + "' at table " +
                              std::to_string(*table + 1));
      }
      seats[static_cast<std::size_t>(i)] = *table;
      --free[static_cast<std::size_t>(*table)];
    } else if (panel.is_cluster(i)) {
      clustered.push_back(i);
    } else {
      others.push_back(i);
    }
  }

  std::vector<TableIndex> cluster_seats;
  for (TableIndex t : layout.cluster_tables()) cluster_seats.insert(cluster_seats.end(), static_cast<std::size_t>(free[static_cast<std::size_t>(t)]), t);
  if (clustered.size() > cluster_seats.size()) {
    throw InfeasibleError("cluster tables have " + std::to_string(cluster_seats.size()) + " free seats for " +
                          std::to_string(clustered.size()) + " cluster agents");
  }
  rng.shuffle(std::span(clustered));
  rng.shuffle(std::span(cluster_seats));
  for (std::size_t k = 0; k < clustered.size(); ++k) {
    seats[static_cast<std::size_t>(clustered[k])] = cluster_seats[k];
    --free[static_cast<std::size_t>(cluster_seats[k])];
  }

  rng.shuffle(std::span(others));
  std::size_t next = 0;
  for (TableIndex t = 0; t < layout.num_tables(); ++t) {
    for (; free[static_cast<std::size_t>(t)] > 0 && next < others.size(); --free[static_cast<std::size_t>(t)]) {
      seats[static_cast<std::size_t>(others[next++])] = t;
    }
  }
  if (next != others.size()) throw InfeasibleError("not enough seats for all participants");
  return seats;
}

std::vector<SwapCandidate> candidates_for(int i, const RoundState& state) {
  std::vector<SwapCandidate> out;
  if (state.is_manual(i)) return out;
  const auto& panel = state.panel();
  const auto& layout = state.layout();
  const TableIndex j = state.table_of(i);
  const bool i_ok_anywhere = !panel.is_cluster(i);

  for (int partner = 0; partner < panel.size(); ++partner) {
    const TableIndex j_prime = state.table_of(partner);
    if (j_prime == j || state.is_manual(partner)) continue;
    if (!i_ok_anywhere && !layout.is_cluster_table(j_prime)) continue;
    if (panel.is_cluster(partner) && !layout.is_cluster_table(j)) continue;

    const int on_i_table = state.pareto_score_on(j, i, partner);
    if (on_i_table < 0) continue;
    const int on_partner_table = state.pareto_score_on(j_prime, partner, i);
    if (on_partner_table < 0) continue;

    out.push_back(SwapCandidate{partner, on_i_table, on_partner_table, on_i_table + on_partner_table,
                                state.meeting_delta(i, partner)});
  }
  return out;
}

std::vector<SwapCandidate> filter_dominated(std::span<const SwapCandidate> candidates) {
  // Best meeting delta per Pareto level, then a suffix maximum over levels.
  std::map<int, double, std::greater<>> best_at;
  for (const auto& c : candidates) {
    auto [it, inserted] = best_at.emplace(c.combined_pareto, c.meeting_delta);
    if (!inserted) it->second = std::max(it->second, c.meeting_delta);
  }
  std::map<int, double> best_above;  // max delta over strictly higher levels
  double running = -INFINITY;
  for (const auto& [level, delta] : best_at) {
    best_above[level] = running;
    running = std::max(running, delta);
  }

  std::vector<SwapCandidate> kept;
  for (const auto& c : candidates) {
    const bool beaten_same_level = best_at.at(c.combined_pareto) > c.meeting_delta;
    const bool beaten_higher_level = best_above.at(c.combined_pareto) >= c.meeting_delta;
    if (!beaten_same_level && !beaten_higher_level) kept.push_back(c);
  }
  return kept;
}

namespace {

template <typename WeightFn>
std::optional<SwapCandidate> sample_proportional(std::span<const SwapCandidate> candidates, WeightFn weight,
                                                 RngStream& rng) {
  double total = 0.0;
  for (const auto& c : candidates) total += weight(c);
  if (!(total > 0.0)) return std::nullopt;
  const double target = rng.uniform01() * total;
  double cumulative = 0.0;
  const SwapCandidate* last_positive = nullptr;
  for (const auto& c : candidates) {
    const double w = weight(c);
    if (w <= 0.0) continue;
    last_positive = &c;
    cumulative += w;
    if (target < cumulative) return c;
  }
  return *last_positive;
}

}  // namespace

std::optional<SwapCandidate> select_swap(std::span<const SwapCandidate> candidates, double pareto_mix, RngStream& rng) {
  if (candidates.empty()) return std::nullopt;
  const auto by_pareto = [](const SwapCandidate& c) { return static_cast<double>(c.combined_pareto); };
  const auto by_meetings = [](const SwapCandidate& c) { return std::max(0.0, c.meeting_delta); };
  const bool pareto_first = rng.uniform01() < pareto_mix;
  if (pareto_first) {
    if (auto pick = sample_proportional(candidates, by_pareto, rng)) return pick;
    return sample_proportional(candidates, by_meetings, rng);
  }
  if (auto pick = sample_proportional(candidates, by_meetings, rng)) return pick;
  return sample_proportional(candidates, by_pareto, rng);
}

int sweep(RoundState& state, const RunConfig& config, RngStream& rng, const SwapObserver& observer, int sweep_index) {
  int applied = 0;
  for (int i = 0; i < state.panel().size(); ++i) {
    if (state.is_manual(i)) continue;
    const auto candidates = candidates_for(i, state);
    if (candidates.empty()) continue;
    const auto kept = filter_dominated(candidates);
    const auto choice = select_swap(kept, config.pareto_mix, rng);
    if (!choice) continue;

    if (observer) {
      const RoundAllocation before = state.allocation();
      state.apply_swap(i, choice->partner);
      observer(SwapEvent{state.round_index(), sweep_index, i, choice->partner, &before, &state.allocation()});
    } else {
      state.apply_swap(i, choice->partner);
    }
    ++applied;
  }
  return applied;
}

RoundAllocation allocate_round(int round_index, const EncodedPanel& panel, const TableLayout& layout,
                               const MeetingLedger& ledger, const RunConfig& config, RngStream& rng,
                               const SwapObserver& observer) {
  RoundState state(panel, layout, ledger, round_index, config, place_round(round_index, panel, layout, rng));
  for (int s = 0; s < config.swap_rounds; ++s) sweep(state, config, rng, observer, s);
  return std::move(state).release();
}

RunResult run(const EncodedPanel& panel, const TableLayout& layout, const RunConfig& config,
              const SwapObserver& observer) {
  RunResult result{AllocationPlan{}, MeetingLedger(panel.size()), layout};
  RngStream rng(config.rng_seed);
  for (int k = 0; k < config.num_rounds; ++k) {
    auto round = allocate_round(k, panel, layout, result.ledger, config, rng, observer);
    result.ledger.record_round(round);
    result.plan.rounds.push_back(std::move(round));
  }
  return result;
}

RunResult run(const Panel& panel, const RunConfig& config, const SwapObserver& observer) {
  const auto layout = validate_config(panel, config);
  const EncodedPanel encoded(panel);
  return run(encoded, layout, config, observer);
}

}  // namespace groupopt
