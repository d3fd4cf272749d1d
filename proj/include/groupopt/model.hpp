#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "groupopt/errors.hpp"

namespace groupopt {

/// Zero-based table index. Human-facing output adds one.
using TableIndex = int;

struct Participant {
  std::string id;
  /// Attribute values by column name. Holds every diversification demographic
  /// and, when clustering is configured, the cluster column.
  std::map<std::string, std::string> demographics;
  bool is_cluster = false;
  std::optional<TableIndex> manual_table;
  /// Per-round overrides of the manual table (round index is zero-based).
  std::map<int, TableIndex> manual_overrides;

  std::optional<TableIndex> manual_table_for(int round) const;
  bool is_manual_in(int round) const { return manual_table_for(round).has_value(); }
};

struct Demographic {
  std::string name;
  std::vector<std::string> values;
};

struct ClusterSpec {
  std::string demographic;
  std::string value;
};

struct Panel {
  std::vector<Participant> participants;
  /// The diversification demographics.
  std::vector<Demographic> demographics;
  std::optional<ClusterSpec> cluster;

  /// Recomputes Participant::is_cluster from `cluster`.
  void derive_cluster_flags();
  std::size_t cluster_count() const;
};

enum class SwapWeighting { raw, geometric };

struct RunConfig {
  int num_tables = 1;
  int num_cluster_tables = 0;
  int num_rounds = 1;
  int swap_rounds = 5;
  double pareto_mix = 0.5;
  double saturation_base = 0.5;
  std::uint64_t rng_seed = 0;
  SwapWeighting swap_weighting = SwapWeighting::raw;
};

/// Seat counts per table. Balanced layouts put the Z_u tables of size
/// ceil(|I|/|J|) first, followed by the Z_l tables of size floor(|I|/|J|).
class TableLayout {
 public:
  /// Balanced layout; cluster tables are the largest tables, lowest index first.
  static TableLayout balanced(int participants, int tables, int cluster_tables = 0);
  /// Arbitrary sizes, used for bound computations on custom geometries.
  static TableLayout from_sizes(std::vector<int> sizes, int cluster_tables = 0);

  const std::vector<int>& sizes() const noexcept { return sizes_; }
  int num_tables() const noexcept { return static_cast<int>(sizes_.size()); }
  int size(TableIndex t) const { return sizes_.at(static_cast<std::size_t>(t)); }
  int total_seats() const noexcept;
  bool is_cluster_table(TableIndex t) const { return cluster_.at(static_cast<std::size_t>(t)); }
  std::vector<TableIndex> cluster_tables() const;
  int num_cluster_tables() const noexcept;
  int cluster_seats() const noexcept;

  int lower_size() const noexcept;
  int upper_size() const noexcept;
  int lower_count() const noexcept;  // Z_l
  int upper_count() const noexcept;  // Z_u

 private:
  std::vector<int> sizes_;
  std::vector<bool> cluster_;
};

/// Table of each participant, indexed by position in Panel::participants.
using RoundAllocation = std::vector<TableIndex>;

struct AllocationPlan {
  std::vector<RoundAllocation> rounds;

  int num_rounds() const noexcept { return static_cast<int>(rounds.size()); }
  bool operator==(const AllocationPlan&) const = default;
};

enum class Severity { warning, error };

struct ValidationIssue {
  Severity severity = Severity::error;
  std::string code;
  std::string message;
};

/// Structural and usability checks. Never throws; an empty result means the
/// panel is well formed. When `num_tables` is given, values held by fewer
/// participants than there are tables are flagged as un-spreadable.
std::vector<ValidationIssue> validate_panel(const Panel& panel,
                                            std::optional<int> num_tables = std::nullopt);

bool has_errors(const std::vector<ValidationIssue>& issues);

/// Checks `config` against `panel` and returns the table layout.
/// Throws TableCountError, ClusterCapacityError, ManualConflictError or
/// ConfigError.
TableLayout validate_config(const Panel& panel, const RunConfig& config);

/// Smallest number of (largest-first) tables that seat every cluster agent,
/// and that number plus one capped at the table count.
ClusterSuggestion suggest_cluster_tables(const Panel& panel, const RunConfig& config);

/// Table count that brings tables closest to ten members.
int default_table_count(int participants);

/// Integer-coded view of a validated panel used by the numeric code.
class EncodedPanel {
 public:
  /// Throws InvalidInputError if the panel has validation errors.
  explicit EncodedPanel(const Panel& panel);

  int size() const noexcept { return n_; }
  int num_demographics() const noexcept { return static_cast<int>(value_counts_.size()); }
  int num_values(int d) const { return static_cast<int>(value_counts_[static_cast<std::size_t>(d)].size()); }
  int value(int i, int d) const {
    return codes_[static_cast<std::size_t>(i) * static_cast<std::size_t>(num_demographics()) +
                  static_cast<std::size_t>(d)];
  }
  /// Number of panel members holding value v of demographic d.
  int value_count(int d, int v) const {
    return value_counts_[static_cast<std::size_t>(d)][static_cast<std::size_t>(v)];
  }
  double panel_proportion(int d, int v) const {
    return static_cast<double>(value_count(d, v)) / n_;
  }
  bool is_cluster(int i) const { return cluster_[static_cast<std::size_t>(i)]; }
  int cluster_count() const noexcept { return cluster_total_; }
  bool has_clustering() const noexcept { return cluster_total_ > 0; }
  std::optional<TableIndex> manual_table(int i, int round) const {
    return panel_.participants[static_cast<std::size_t>(i)].manual_table_for(round);
  }
  bool is_manual_in_round(int i, int round) const { return manual_table(i, round).has_value(); }
  const std::string& id(int i) const { return panel_.participants[static_cast<std::size_t>(i)].id; }
  std::optional<int> index_of(const std::string& id) const;
  const Panel& panel() const noexcept { return panel_; }

 private:
  Panel panel_;
  int n_ = 0;
  std::vector<int> codes_;
  std::vector<std::vector<int>> value_counts_;
  std::vector<bool> cluster_;
  int cluster_total_ = 0;
  std::unordered_map<std::string, int> index_;
};

/// First broken plan invariant (shape, partition, clustering, manual), or
/// nullopt when the plan is valid.
std::optional<std::string> check_plan(const AllocationPlan& plan, const EncodedPanel& panel,
                                      const TableLayout& layout);

/// First broken invariant of a single round.
std::optional<std::string> check_round(const RoundAllocation& round, int round_index,
                                       const EncodedPanel& panel, const TableLayout& layout);

}  // namespace groupopt
