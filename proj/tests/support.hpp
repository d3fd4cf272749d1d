#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "groupopt/model.hpp"
#include "groupopt/rng.hpp"

namespace testsupport {

using namespace groupopt;

struct PanelShape {
  int size = 12;
  std::vector<int> levels{2, 2};
  double cluster_fraction = 0.0;
  int manual = 0;
  int num_tables = 3;
  int num_cluster_tables = 0;
};

/// Random panel. Manual agents are pinned to tables that still have room and
/// respect their cluster flag.
inline Panel random_panel(const PanelShape& shape, RngStream& rng) {
  Panel panel;
  for (std::size_t d = 0; d < shape.levels.size(); ++d) {
    Demographic demo{"q" + std::to_string(d), {}};
    for (int v = 0; v < shape.levels[d]; ++v) demo.values.push_back("v" + std::to_string(v));
    panel.demographics.push_back(demo);
  }
  for (int i = 0; i < shape.size; ++i) {
    Participant p;
    p.id = "a" + std::to_string(i);
    for (std::size_t d = 0; d < shape.levels.size(); ++d) {
      // every value appears at least once
      const int v = i < shape.levels[d] ? i : static_cast<int>(rng.below(static_cast<std::uint64_t>(shape.levels[d])));
      p.demographics[panel.demographics[d].name] = "v" + std::to_string(v);
    }
    panel.participants.push_back(p);
  }
  if (shape.cluster_fraction > 0 && shape.num_cluster_tables > 0) {
    const auto layout = TableLayout::balanced(shape.size, shape.num_tables, shape.num_cluster_tables);
    const int max_cluster = layout.cluster_seats();
    int flagged = 0;
    panel.cluster = ClusterSpec{"consent", "no"};
    for (auto& p : panel.participants) {
      const bool c = flagged < max_cluster && rng.uniform01() < shape.cluster_fraction;
      flagged += c ? 1 : 0;
      p.demographics["consent"] = c ? "no" : "yes";
    }
    panel.derive_cluster_flags();
  }
  if (shape.manual > 0) {
    const auto layout = TableLayout::balanced(shape.size, shape.num_tables, shape.num_cluster_tables);
    std::vector<int> room(layout.sizes().begin(), layout.sizes().end());
    int cluster_room = layout.cluster_seats() - static_cast<int>(panel.cluster_count());
    int pinned = 0;
    for (auto& p : panel.participants) {
      if (pinned == shape.manual) break;
      const auto t = static_cast<TableIndex>(rng.below(static_cast<std::uint64_t>(shape.num_tables)));
      if (room[static_cast<std::size_t>(t)] <= 1) continue;
      if (p.is_cluster && !layout.is_cluster_table(t)) continue;
      if (!p.is_cluster && layout.is_cluster_table(t)) {
        if (cluster_room <= 0) continue;
        --cluster_room;
      }
      --room[static_cast<std::size_t>(t)];
      p.manual_table = t;
      ++pinned;
    }
  }
  return panel;
}

/// Pairs that share a table, counted pair by pair.
inline std::int64_t direct_pair_count(const RoundAllocation& round) {
  std::int64_t pairs = 0;
  for (std::size_t a = 0; a < round.size(); ++a) {
    for (std::size_t b = a + 1; b < round.size(); ++b) pairs += round[a] == round[b] ? 1 : 0;
  }
  return pairs;
}

/// Minimum repeated pairs over every way of re-seating individual agents from
/// `sizes` into the same table sizes, by exhaustive enumeration.
inline std::int64_t brute_min_repeats(const std::vector<int>& sizes) {
  std::vector<int> source;
  for (std::size_t t = 0; t < sizes.size(); ++t) source.insert(source.end(), static_cast<std::size_t>(sizes[t]), static_cast<int>(t));
  const std::size_t n = source.size();
  const std::size_t J = sizes.size();
  std::vector<int> room(sizes.begin(), sizes.end());
  std::vector<int> dest(n, -1);
  std::int64_t best = INT64_MAX;
  std::function<void(std::size_t, std::int64_t)> place = [&](std::size_t i, std::int64_t repeats) {
    if (repeats >= best) return;
    if (i == n) {
      best = repeats;
      return;
    }
    for (std::size_t t = 0; t < J; ++t) {
      if (room[t] == 0) continue;
      std::int64_t added = 0;
      for (std::size_t k = 0; k < i; ++k) added += (dest[k] == static_cast<int>(t) && source[k] == source[i]) ? 1 : 0;
      --room[t];
      dest[i] = static_cast<int>(t);
      place(i + 1, repeats + added);
      dest[i] = -1;
      ++room[t];
    }
  };
  place(0, 0);
  return best;
}

/// Saturation score summed pair by pair and meeting by meeting.
inline double brute_geometric(const std::vector<std::vector<int>>& counts, double a) {
  double total = 0.0;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    for (std::size_t j = i + 1; j < counts.size(); ++j) {
      for (int t = 1; t <= counts[i][j]; ++t) total += std::pow(a, t);
    }
  }
  return total;
}

inline std::vector<std::vector<int>> count_meetings(const AllocationPlan& plan, int n) {
  std::vector<std::vector<int>> counts(static_cast<std::size_t>(n), std::vector<int>(static_cast<std::size_t>(n), 0));
  for (const auto& round : plan.rounds) {
    for (int a = 0; a < n; ++a) {
      for (int b = 0; b < n; ++b) {
        if (a != b && round[static_cast<std::size_t>(a)] == round[static_cast<std::size_t>(b)]) {
          ++counts[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)];
        }
      }
    }
  }
  return counts;
}

/// L1 distance of a table's value shares from the panel's, from raw members.
inline double brute_distance(const RoundAllocation& round, const EncodedPanel& panel, TableIndex table, int d) {
  std::vector<int> members;
  for (int i = 0; i < panel.size(); ++i) {
    if (round[static_cast<std::size_t>(i)] == table) members.push_back(i);
  }
  double dist = 0.0;
  for (int v = 0; v < panel.num_values(d); ++v) {
    int at_table = 0;
    int overall = 0;
    for (int i : members) at_table += panel.value(i, d) == v ? 1 : 0;
    for (int i = 0; i < panel.size(); ++i) overall += panel.value(i, d) == v ? 1 : 0;
    dist += std::abs(static_cast<double>(at_table) / static_cast<double>(members.size()) -
                     static_cast<double>(overall) / panel.size());
  }
  return dist;
}

/// Partition, clustering and manual invariants checked from scratch.
inline std::string independent_plan_check(const AllocationPlan& plan, const EncodedPanel& panel,
                                          const TableLayout& layout) {
  for (int k = 0; k < plan.num_rounds(); ++k) {
    const auto& round = plan.rounds[static_cast<std::size_t>(k)];
    if (static_cast<int>(round.size()) != panel.size()) return "round " + std::to_string(k) + " has the wrong length";
    std::vector<int> filled(static_cast<std::size_t>(layout.num_tables()), 0);
    for (int i = 0; i < panel.size(); ++i) {
      const TableIndex t = round[static_cast<std::size_t>(i)];
      if (t < 0 || t >= layout.num_tables()) return "participant outside the tables";
      ++filled[static_cast<std::size_t>(t)];
      if (panel.is_cluster(i) && !layout.is_cluster_table(t)) return "cluster agent on an open table";
      if (const auto m = panel.manual_table(i, k); m && *m != t) return "manual agent moved";
    }
    for (int t = 0; t < layout.num_tables(); ++t) {
      if (filled[static_cast<std::size_t>(t)] != layout.size(t)) return "table size differs from layout";
    }
  }
  return {};
}

/// Fresh scratch directory under the system temp path.
inline std::filesystem::path scratch_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("groupopt-test-" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace testsupport
