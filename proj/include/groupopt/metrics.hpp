#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "groupopt/model.hpp"

namespace groupopt {

/// Symmetric pair -> meeting-count matrix accumulated over completed rounds.
class MeetingLedger {
 public:
  explicit MeetingLedger(int participants = 0);

  int size() const noexcept { return n_; }
  int count(int a, int b) const {
    return counts_[static_cast<std::size_t>(a) * static_cast<std::size_t>(n_) + static_cast<std::size_t>(b)];
  }
  void add_meeting(int a, int b);
  /// Adds one meeting for every co-seated pair of `round`.
  void record_round(const RoundAllocation& round);

  std::int64_t total() const noexcept { return total_; }
  std::int64_t pairs_met() const;
  int max_count() const;
  /// histogram[c] = number of unordered pairs that met exactly c times.
  std::vector<std::int64_t> histogram() const;

  bool operator==(const MeetingLedger&) const = default;

 private:
  int n_ = 0;
  std::vector<int> counts_;
  std::int64_t total_ = 0;
};

struct BoundsReport {
  std::int64_t pairs_total = 0;         // N^P
  std::int64_t meetings_per_round = 0;  // M^k
  std::int64_t min_repeats = 0;         // L_R*
  bool min_repeats_exact = true;
  int num_rounds = 0;
  std::int64_t min_unmet_pairs = 0;  // N^*(0)
  std::int64_t max_first_meetings = 0;
};

struct RepeatBound {
  std::int64_t value = 0;
  /// False when the value is the pigeonhole estimate on a layout whose
  /// destination capacities prevent even spreading and is too large to
  /// enumerate.
  bool exact = true;
};

/// Members of each table, in participant order.
std::vector<std::vector<int>> table_members(const RoundAllocation& round, int num_tables);

// --- demographic balance -----------------------------------------------------

double table_proportion(const RoundAllocation& round, const EncodedPanel& panel, TableIndex table, int demographic,
                        int value);

/// L1 distance between the table's value distribution and the panel's.
double table_distance(const RoundAllocation& round, const EncodedPanel& panel, TableIndex table, int demographic);

/// Mean of table_distance over all tables, demographics and rounds.
double mean_distance(const AllocationPlan& plan, const EncodedPanel& panel, const TableLayout& layout);

/// Table distance scaled by |I| * table size, which makes it an exact
/// integer: sum_v |c_v * |I| - C_v * n|. `counts` holds the table's count for
/// each value of the demographic.
std::int64_t scaled_distance(std::span<const int> counts, int table_size, const EncodedPanel& panel, int demographic);

/// Sign of the distance improvement on a table when one member holding
/// `leaving` is replaced by one holding `arriving`.
int distance_change_sign(std::span<const int> counts, int table_size, const EncodedPanel& panel, int demographic,
                         int leaving, int arriving);

/// +1, 0 or -1: whether swapping i for i_prime improves, keeps or worsens
/// `table`'s balance on `demographic`. Exactly one of i, i_prime must sit at
/// `table`.
int pareto_change(const RoundAllocation& round, const EncodedPanel& panel, int i, int i_prime, TableIndex table,
                  int demographic);

/// -1 if any demographic worsens on `table`, otherwise the sum of changes.
int pareto_score(const RoundAllocation& round, const EncodedPanel& panel, int i, int i_prime, TableIndex table);

// --- meetings ----------------------------------------------------------------

/// Sum of prior meeting counts over pairs currently seated at `table`.
std::int64_t table_meeting_load(const RoundAllocation& round, TableIndex table, const MeetingLedger& ledger);

/// (m_j - m_j(i->i')) + (m_j' - m_j'(i'->i)). Positive values mean the swap
/// lowers the repeat load of the two tables.
std::int64_t swap_meeting_delta(const RoundAllocation& round, int i, int i_prime, const MeetingLedger& ledger);

/// Sum over pairs of a + a^2 + ... + a^count.
double geometric_meeting_score(const MeetingLedger& ledger, double a);

/// Same score from a count histogram (histogram[c] pairs met c times).
double geometric_score_from_histogram(std::span<const std::int64_t> histogram, double a);

// --- bounds ------------------------------------------------------------------

std::int64_t pairs_total(int participants);

/// Co-seated pairs in one round.
std::int64_t meetings_per_round(const TableLayout& layout);

/// Minimum number of pairs forced to meet again between two consecutive
/// rounds with the same layout.
RepeatBound min_repeats_between_rounds(const TableLayout& layout);

BoundsReport bounds(const TableLayout& layout, int num_rounds);

/// (N(0) - N^*(0)) / N^P.
double excess(std::int64_t unmet_pairs, const BoundsReport& bounds);

}  // namespace groupopt
