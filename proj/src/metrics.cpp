#include "groupopt/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <limits>
#include <map>
#include <numeric>

namespace groupopt {

MeetingLedger::MeetingLedger(int participants)
    : n_(participants), counts_(static_cast<std::size_t>(participants) * static_cast<std::size_t>(participants), 0) {}

void MeetingLedger::add_meeting(int a, int b) {
  if (a == b) return;
  ++counts_[static_cast<std::size_t>(a) * static_cast<std::size_t>(n_) + static_cast<std::size_t>(b)];
  ++counts_[static_cast<std::size_t>(b) * static_cast<std::size_t>(n_) + static_cast<std::size_t>(a)];
  ++total_;
}

void MeetingLedger::record_round(const RoundAllocation& round) {
  const int tables = round.empty() ? 0 : *std::max_element(round.begin(), round.end()) + 1;
  for (const auto& members : table_members(round, tables)) {
    for (std::size_t x = 0; x < members.size(); ++x) {
      for (std::size_t y = x + 1; y < members.size(); ++y) add_meeting(members[x], members[y]);
    }
  }
}

std::int64_t MeetingLedger::pairs_met() const {
  std::int64_t met = 0;
  for (int a = 0; a < n_; ++a) {
    for (int b = a + 1; b < n_; ++b) met += count(a, b) > 0 ? 1 : 0;
  }
  return met;
}

int MeetingLedger::max_count() const {
  return counts_.empty() ? 0 : *std::max_element(counts_.begin(), counts_.end());
}

std::vector<std::int64_t> MeetingLedger::histogram() const {
  std::vector<std::int64_t> hist(static_cast<std::size_t>(max_count()) + 1, 0);
  for (int a = 0; a < n_; ++a) {
    for (int b = a + 1; b < n_; ++b) ++hist[static_cast<std::size_t>(count(a, b))];
  }
  return hist;
}

std::vector<std::vector<int>> table_members(const RoundAllocation& round, int num_tables) {
  std::vector<std::vector<int>> members(static_cast<std::size_t>(num_tables));
  for (std::size_t i = 0; i < round.size(); ++i) members[static_cast<std::size_t>(round[i])].push_back(static_cast<int>(i));
  return members;
}

// ---------------------------------------------------------------------------

namespace {

std::vector<int> table_value_counts(const RoundAllocation& round, const EncodedPanel& panel, TableIndex table,
                                    int demographic, int& occupants) {
  std::vector<int> counts(static_cast<std::size_t>(panel.num_values(demographic)), 0);
  occupants = 0;
  for (int i = 0; i < panel.size(); ++i) {
    if (round[static_cast<std::size_t>(i)] != table) continue;
    ++counts[static_cast<std::size_t>(panel.value(i, demographic))];
    ++occupants;
  }
  return counts;
}

}  // namespace

double table_proportion(const RoundAllocation& round, const EncodedPanel& panel, TableIndex table, int demographic,
                        int value) {
  int occupants = 0;
  const auto counts = table_value_counts(round, panel, table, demographic, occupants);
  if (occupants == 0) return 0.0;
  return static_cast<double>(counts[static_cast<std::size_t>(value)]) / occupants;
}

double table_distance(const RoundAllocation& round, const EncodedPanel& panel, TableIndex table, int demographic) {
  int occupants = 0;
  const auto counts = table_value_counts(round, panel, table, demographic, occupants);
  if (occupants == 0) return 0.0;
  return static_cast<double>(scaled_distance(counts, occupants, panel, demographic)) /
         (static_cast<double>(occupants) * panel.size());
}

double mean_distance(const AllocationPlan& plan, const EncodedPanel& panel, const TableLayout& layout) {
  double sum = 0.0;
  std::int64_t terms = 0;
  for (const auto& round : plan.rounds) {
    for (TableIndex t = 0; t < layout.num_tables(); ++t) {
      for (int d = 0; d < panel.num_demographics(); ++d) {
        sum += table_distance(round, panel, t, d);
        ++terms;
      }
    }
  }
  return terms == 0 ? 0.0 : sum / static_cast<double>(terms);
}

std::int64_t scaled_distance(std::span<const int> counts, int table_size, const EncodedPanel& panel, int demographic) {
  std::int64_t total = 0;
  for (std::size_t v = 0; v < counts.size(); ++v) {
    total += std::llabs(static_cast<std::int64_t>(counts[v]) * panel.size() -
                        static_cast<std::int64_t>(panel.value_count(demographic, static_cast<int>(v))) * table_size);
  }
  return total;
}

int distance_change_sign(std::span<const int> counts, int table_size, const EncodedPanel& panel, int demographic,
                         int leaving, int arriving) {
  if (leaving == arriving) return 0;
  const std::int64_t n = panel.size();
  const auto term = [&](int v, std::int64_t c) {
    return std::llabs(c * n - static_cast<std::int64_t>(panel.value_count(demographic, v)) * table_size);
  };
  const std::int64_t c_leave = counts[static_cast<std::size_t>(leaving)];
  const std::int64_t c_arrive = counts[static_cast<std::size_t>(arriving)];
  const std::int64_t before = term(leaving, c_leave) + term(arriving, c_arrive);
  const std::int64_t after = term(leaving, c_leave - 1) + term(arriving, c_arrive + 1);
  return (before > after) - (before < after);
}

int pareto_change(const RoundAllocation& round, const EncodedPanel& panel, int i, int i_prime, TableIndex table,
                  int demographic) {
  int leaving = i;
  int arriving = i_prime;
  if (round[static_cast<std::size_t>(i_prime)] == table) std::swap(leaving, arriving);
  int occupants = 0;
  const auto counts = table_value_counts(round, panel, table, demographic, occupants);
  return distance_change_sign(counts, occupants, panel, demographic, panel.value(leaving, demographic),
                              panel.value(arriving, demographic));
}

int pareto_score(const RoundAllocation& round, const EncodedPanel& panel, int i, int i_prime, TableIndex table) {
  int sum = 0;
  for (int d = 0; d < panel.num_demographics(); ++d) {
    const int change = pareto_change(round, panel, i, i_prime, table, d);
    if (change < 0) return -1;
    sum += change;
  }
  return sum;
}

// ---------------------------------------------------------------------------

std::int64_t table_meeting_load(const RoundAllocation& round, TableIndex table, const MeetingLedger& ledger) {
  std::vector<int> members;
  for (std::size_t i = 0; i < round.size(); ++i) {
    if (round[i] == table) members.push_back(static_cast<int>(i));
  }
  std::int64_t load = 0;
  for (std::size_t x = 0; x < members.size(); ++x) {
    for (std::size_t y = x + 1; y < members.size(); ++y) load += ledger.count(members[x], members[y]);
  }
  return load;
}

std::int64_t swap_meeting_delta(const RoundAllocation& round, int i, int i_prime, const MeetingLedger& ledger) {
  const TableIndex j = round[static_cast<std::size_t>(i)];
  const TableIndex j_prime = round[static_cast<std::size_t>(i_prime)];
  if (j == j_prime) return 0;
  std::int64_t delta = 0;
  for (std::size_t x = 0; x < round.size(); ++x) {
    const int other = static_cast<int>(x);
    if (round[x] == j && other != i) delta += ledger.count(i, other) - ledger.count(i_prime, other);
    if (round[x] == j_prime && other != i_prime) delta += ledger.count(i_prime, other) - ledger.count(i, other);
  }
  return delta;
}

double geometric_meeting_score(const MeetingLedger& ledger, double a) {
  return geometric_score_from_histogram(ledger.histogram(), a);
}

double geometric_score_from_histogram(std::span<const std::int64_t> histogram, double a) {
  // Per pair: a + ... + a^c = a (1 - a^c) / (1 - a).
  const double scale = a / (1.0 - a);
  double score = 0.0;
  for (std::size_t c = 1; c < histogram.size(); ++c) {
    score += static_cast<double>(histogram[c]) * scale * (1.0 - std::pow(a, static_cast<double>(c)));
  }
  return score;
}

// ---------------------------------------------------------------------------

std::int64_t pairs_total(int participants) {
  return static_cast<std::int64_t>(participants) * (participants - 1) / 2;
}

std::int64_t meetings_per_round(const TableLayout& layout) {
  std::int64_t m = 0;
  for (int s : layout.sizes()) m += pairs_total(s);
  return m;
}

namespace {

// Whether a 0/1 matrix with the given row and column sums exists (Gale-Ryser).
bool zero_one_matrix_exists(std::vector<int> rows, const std::vector<int>& cols) {
  if (std::any_of(cols.begin(), cols.end(), [](int c) { return c < 0; })) return false;
  const int num_rows = static_cast<int>(rows.size());
  if (std::any_of(cols.begin(), cols.end(), [&](int c) { return c > num_rows; })) return false;
  if (std::accumulate(rows.begin(), rows.end(), 0) != std::accumulate(cols.begin(), cols.end(), 0)) return false;
  std::sort(rows.begin(), rows.end(), std::greater<>());
  int lhs = 0;
  for (int k = 1; k <= num_rows; ++k) {
    lhs += rows[static_cast<std::size_t>(k - 1)];
    int rhs = 0;
    for (int c : cols) rhs += std::min(c, k);
    if (lhs > rhs) return false;
  }
  return true;
}

// Exact minimum of sum C(x_st, 2) over nonnegative integer matrices with row
// sums = column sums = sizes, by depth-first search over source rows.
std::int64_t min_repeats_by_search(const std::vector<int>& sizes) {
  const std::size_t tables = sizes.size();
  std::map<std::pair<std::size_t, std::vector<int>>, std::int64_t> memo;
  std::function<std::int64_t(std::size_t, std::vector<int>&)> solve = [&](std::size_t row,
                                                                         std::vector<int>& capacity) -> std::int64_t {
    if (row == tables) return 0;
    auto key = std::make_pair(row, capacity);
    if (auto it = memo.find(key); it != memo.end()) return it->second;
    std::int64_t best = std::numeric_limits<std::int64_t>::max();
    std::vector<int> split(tables, 0);
    std::function<void(std::size_t, int, std::int64_t)> place = [&](std::size_t col, int remaining, std::int64_t cost) {
      if (col + 1 == tables) {
        if (remaining > capacity[col]) return;
        capacity[col] -= remaining;
        const std::int64_t rest = solve(row + 1, capacity);
        capacity[col] += remaining;
        if (rest != std::numeric_limits<std::int64_t>::max()) {
          best = std::min(best, cost + pairs_total(remaining) + rest);
        }
        return;
      }
      for (int x = 0; x <= std::min(remaining, capacity[col]); ++x) {
        capacity[col] -= x;
        place(col + 1, remaining - x, cost + pairs_total(x));
        capacity[col] += x;
      }
    };
    place(0, sizes[row], 0);
    memo.emplace(std::move(key), best);
    return best;
  };
  std::vector<int> capacity = sizes;
  return solve(0, capacity);
}

}  // namespace

RepeatBound min_repeats_between_rounds(const TableLayout& layout) {
  const auto& sizes = layout.sizes();
  const int tables = layout.num_tables();

  // Spread each source table as evenly as possible over the next round's
  // tables: r destinations receive q + 1 of its members, the rest q.
  std::int64_t pigeonhole = 0;
  std::vector<int> extra_per_row;
  int base_per_column = 0;
  for (int n : sizes) {
    const int q = n / tables;
    const int r = n % tables;
    pigeonhole += static_cast<std::int64_t>(r) * pairs_total(q + 1) + static_cast<std::int64_t>(tables - r) * pairs_total(q);
    extra_per_row.push_back(r);
    base_per_column += q;
  }
  // Even spreading needs destination t to absorb base_per_column + b_t
  // members, with b a 0/1 matrix of row sums r_s.
  std::vector<int> extra_per_column;
  for (int n : sizes) extra_per_column.push_back(n - base_per_column);
  if (zero_one_matrix_exists(extra_per_row, extra_per_column)) return {pigeonhole, true};

  if (layout.total_seats() < 12) return {min_repeats_by_search(sizes), true};
  return {pigeonhole, false};
}

BoundsReport bounds(const TableLayout& layout, int num_rounds) {
  BoundsReport report;
  report.pairs_total = pairs_total(layout.total_seats());
  report.meetings_per_round = meetings_per_round(layout);
  const auto repeats = min_repeats_between_rounds(layout);
  report.min_repeats = repeats.value;
  report.min_repeats_exact = repeats.exact;
  report.num_rounds = num_rounds;
  const std::int64_t reachable =
      report.meetings_per_round + static_cast<std::int64_t>(num_rounds - 1) * (report.meetings_per_round - report.min_repeats);
  report.min_unmet_pairs = std::max<std::int64_t>(0, report.pairs_total - reachable);
  report.max_first_meetings = report.pairs_total - report.min_unmet_pairs;
  return report;
}

double excess(std::int64_t unmet_pairs, const BoundsReport& bounds) {
  if (bounds.pairs_total == 0) return 0.0;
  return static_cast<double>(unmet_pairs - bounds.min_unmet_pairs) / static_cast<double>(bounds.pairs_total);
}

}  // namespace groupopt
