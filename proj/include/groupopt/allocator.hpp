#pragma once

#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "groupopt/metrics.hpp"
#include "groupopt/model.hpp"
#include "groupopt/rng.hpp"

namespace groupopt {

/// A proposed exchange of the sweep's current agent with `partner`.
struct SwapCandidate {
  int partner = -1;
  int pareto_i_table = 0;        // P_S on the current agent's table
  int pareto_partner_table = 0;  // P_S on the partner's table
  int combined_pareto = 0;
  /// Reduction in prior-meeting load over both tables (raw counts), or the
  /// gain in saturation value under geometric weighting.
  double meeting_delta = 0.0;

  bool operator==(const SwapCandidate&) const = default;
};

struct SwapEvent {
  int round_index = 0;
  int sweep = 0;
  int agent = 0;
  int partner = 0;
  const RoundAllocation* before = nullptr;
  const RoundAllocation* after = nullptr;
};

/// Called after every applied swap. Setting an observer makes each swap copy
/// the round allocation; leave it empty for production runs.
using SwapObserver = std::function<void(const SwapEvent&)>;

/// One round under optimisation. Keeps per-table value counts and each
/// agent's weighted meeting load towards every table up to date across swaps.
class RoundState {
 public:
  RoundState(const EncodedPanel& panel, const TableLayout& layout, const MeetingLedger& ledger, int round_index,
             const RunConfig& config, RoundAllocation initial);

  const RoundAllocation& allocation() const noexcept { return seats_; }
  RoundAllocation release() && { return std::move(seats_); }
  TableIndex table_of(int i) const { return seats_[static_cast<std::size_t>(i)]; }
  int round_index() const noexcept { return round_index_; }
  const EncodedPanel& panel() const noexcept { return *panel_; }
  const TableLayout& layout() const noexcept { return *layout_; }

  bool is_manual(int i) const { return manual_[static_cast<std::size_t>(i)]; }

  /// P_S on `table` when an agent holding the values of `leaving` is replaced
  /// by one holding the values of `arriving`.
  int pareto_score_on(TableIndex table, int leaving, int arriving) const;

  /// Meeting-score effect of swapping i and i_prime (seated apart).
  double meeting_delta(int i, int i_prime) const;

  void apply_swap(int i, int i_prime);

 private:
  int& count_at(TableIndex t, int d, int v) {
    return value_counts_[static_cast<std::size_t>(t) * stride_ + offsets_[static_cast<std::size_t>(d)] +
                         static_cast<std::size_t>(v)];
  }
  int count_at(TableIndex t, int d, int v) const {
    return value_counts_[static_cast<std::size_t>(t) * stride_ + offsets_[static_cast<std::size_t>(d)] +
                         static_cast<std::size_t>(v)];
  }
  std::span<const int> counts_of(TableIndex t, int d) const;
  double weight(int a, int b) const;
  double& load(int a, TableIndex t) {
    return load_[static_cast<std::size_t>(a) * static_cast<std::size_t>(layout_->num_tables()) + static_cast<std::size_t>(t)];
  }
  double load(int a, TableIndex t) const {
    return load_[static_cast<std::size_t>(a) * static_cast<std::size_t>(layout_->num_tables()) + static_cast<std::size_t>(t)];
  }

  const EncodedPanel* panel_;
  const TableLayout* layout_;
  const MeetingLedger* ledger_;
  int round_index_;
  RoundAllocation seats_;
  std::vector<bool> manual_;
  std::vector<std::size_t> offsets_;
  std::size_t stride_ = 0;
  std::vector<int> value_counts_;
  std::vector<double> pair_weight_;  // indexed by prior meeting count
  std::vector<double> load_;
};

/// Constraint-respecting random seating: manual agents at their tables,
/// cluster agents on random free cluster-table seats, everyone else as a
/// random permutation filled table by table.
RoundAllocation place_round(int round_index, const EncodedPanel& panel, const TableLayout& layout, RngStream& rng);

/// Partners for agent i that keep every demographic at least as balanced on
/// both tables and respect clustering. Manual agents have no candidates.
std::vector<SwapCandidate> candidates_for(int i, const RoundState& state);

/// Drops candidates that another candidate beats on one score and matches or
/// beats on the other. Order is preserved.
std::vector<SwapCandidate> filter_dominated(std::span<const SwapCandidate> candidates);

/// With probability `pareto_mix` samples proportionally to combined_pareto,
/// otherwise proportionally to max(0, meeting_delta). A branch whose weights
/// are all zero falls back to the other branch.
std::optional<SwapCandidate> select_swap(std::span<const SwapCandidate> candidates, double pareto_mix, RngStream& rng);

/// One pass over all agents in panel order. Returns the number of swaps applied.
int sweep(RoundState& state, const RunConfig& config, RngStream& rng, const SwapObserver& observer = {},
          int sweep_index = 0);

RoundAllocation allocate_round(int round_index, const EncodedPanel& panel, const TableLayout& layout,
                               const MeetingLedger& ledger, const RunConfig& config, RngStream& rng,
                               const SwapObserver& observer = {});

struct RunResult {
  AllocationPlan plan;
  MeetingLedger ledger;
  TableLayout layout;
};

/// Full multi-round allocation. Validates the configuration first.
RunResult run(const Panel& panel, const RunConfig& config, const SwapObserver& observer = {});
RunResult run(const EncodedPanel& panel, const TableLayout& layout, const RunConfig& config,
              const SwapObserver& observer = {});

}  // namespace groupopt
