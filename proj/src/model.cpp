#include "groupopt/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <sstream>

namespace groupopt {

std::optional<TableIndex> Participant::manual_table_for(int round) const {
  if (auto it = manual_overrides.find(round); it != manual_overrides.end()) return it->second;
  return manual_table;
}

void Panel::derive_cluster_flags() {
  for (auto& p : participants) {
    p.is_cluster = false;
    if (!cluster) continue;
    auto it = p.demographics.find(cluster->demographic);
    p.is_cluster = it != p.demographics.end() && it->second == cluster->value;
  }
}

std::size_t Panel::cluster_count() const {
  return static_cast<std::size_t>(
      std::count_if(participants.begin(), participants.end(), [](const Participant& p) { return p.is_cluster; }));
}

// ---------------------------------------------------------------------------
// TableLayout

TableLayout TableLayout::balanced(int participants, int tables, int cluster_tables) {
  if (tables < 1) throw TableCountError("number of tables must be at least 1");
  if (participants < tables) {
    throw TableCountError("number of tables (" + std::to_string(tables) +
                          ") exceeds number of participants (" + std::to_string(participants) + ")");
  }
  const int upper_count = participants % tables;
  const int lower = participants / tables;
  std::vector<int> sizes(static_cast<std::size_t>(tables), lower);
  for (int t = 0; t < upper_count; ++t) sizes[static_cast<std::size_t>(t)] = lower + 1;
  return from_sizes(std::move(sizes), cluster_tables);
}

TableLayout TableLayout::from_sizes(std::vector<int> sizes, int cluster_tables) {
  if (sizes.empty()) throw TableCountError("layout needs at least one table");
  if (std::any_of(sizes.begin(), sizes.end(), [](int s) { return s < 1; })) {
    throw TableCountError("every table needs at least one seat");
  }
  if (cluster_tables < 0 || cluster_tables > static_cast<int>(sizes.size())) {
    throw ConfigError("ConfigError", "number of cluster tables must lie between 0 and the number of tables");
  }
  TableLayout layout;
  layout.sizes_ = std::move(sizes);
  layout.cluster_.assign(layout.sizes_.size(), false);

  // Largest tables host clusters; stable sort keeps lowest index first on ties.
  std::vector<TableIndex> order(layout.sizes_.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](TableIndex a, TableIndex b) {
    return layout.sizes_[static_cast<std::size_t>(a)] > layout.sizes_[static_cast<std::size_t>(b)];
  });
  for (int c = 0; c < cluster_tables; ++c) layout.cluster_[static_cast<std::size_t>(order[static_cast<std::size_t>(c)])] = true;
  return layout;
}

int TableLayout::total_seats() const noexcept { return std::accumulate(sizes_.begin(), sizes_.end(), 0); }

std::vector<TableIndex> TableLayout::cluster_tables() const {
  std::vector<TableIndex> out;
  for (TableIndex t = 0; t < num_tables(); ++t) {
    if (cluster_[static_cast<std::size_t>(t)]) out.push_back(t);
  }
  return out;
}

int TableLayout::num_cluster_tables() const noexcept {
  return static_cast<int>(std::count(cluster_.begin(), cluster_.end(), true));
}

int TableLayout::cluster_seats() const noexcept {
  int seats = 0;
  for (std::size_t t = 0; t < sizes_.size(); ++t) {
    if (cluster_[t]) seats += sizes_[t];
  }
  return seats;
}

int TableLayout::lower_size() const noexcept { return *std::min_element(sizes_.begin(), sizes_.end()); }
int TableLayout::upper_size() const noexcept { return *std::max_element(sizes_.begin(), sizes_.end()); }

int TableLayout::upper_count() const noexcept {
  if (lower_size() == upper_size()) return 0;
  return static_cast<int>(std::count(sizes_.begin(), sizes_.end(), upper_size()));
}

int TableLayout::lower_count() const noexcept { return num_tables() - upper_count(); }

// ---------------------------------------------------------------------------
// Panel validation

namespace {

ValidationIssue issue(Severity severity, std::string code, std::string message) {
  return ValidationIssue{severity, std::move(code), std::move(message)};
}

}  // namespace

std::vector<ValidationIssue> validate_panel(const Panel& panel, std::optional<int> num_tables) {
  std::vector<ValidationIssue> issues;

  if (panel.participants.size() < 2) {
    issues.push_back(issue(Severity::error, "too_few_participants",
                           "a panel needs at least 2 participants, found " +
                               std::to_string(panel.participants.size())));
  }

  std::set<std::string> names;
  for (const auto& demo : panel.demographics) {
    if (!names.insert(demo.name).second) {
      issues.push_back(issue(Severity::error, "duplicate_demographic",
                             "demographic '" + demo.name + "' is declared twice"));
    }
    const std::set<std::string> distinct(demo.values.begin(), demo.values.end());
    if (distinct.size() != demo.values.size()) {
      issues.push_back(issue(Severity::error, "duplicate_value",
                             "demographic '" + demo.name + "' lists a value more than once"));
    }
    if (distinct.size() < 2) {
      issues.push_back(issue(Severity::error, "too_few_values",
                             "demographic '" + demo.name + "' needs at least 2 distinct values to diversify"));
    }
    if (distinct.size() > 5) {
      issues.push_back(issue(Severity::warning, "many_values",
                             "demographic '" + demo.name + "' has " + std::to_string(distinct.size()) +
                                 " values; consider merging levels into broader groups (at most 5)"));
    }
  }

  std::set<std::string> ids;
  for (const auto& p : panel.participants) {
    if (p.id.empty()) {
      issues.push_back(issue(Severity::error, "empty_id", "a participant has an empty id"));
    } else if (!ids.insert(p.id).second) {
      issues.push_back(issue(Severity::error, "duplicate_id", "participant id '" + p.id + "' appears more than once"));
    }
    for (const auto& demo : panel.demographics) {
      auto it = p.demographics.find(demo.name);
      if (it == p.demographics.end() || it->second.empty()) {
        issues.push_back(issue(Severity::error, "missing_value",
                               "participant '" + p.id + "' has no value for demographic '" + demo.name + "'"));
      } else if (std::find(demo.values.begin(), demo.values.end(), it->second) == demo.values.end()) {
        issues.push_back(issue(Severity::error, "unknown_value",
                               "participant '" + p.id + "' has undeclared value '" + it->second +
                                   "' for demographic '" + demo.name + "'"));
      }
    }
    if (panel.cluster) {
      auto it = p.demographics.find(panel.cluster->demographic);
      if (it == p.demographics.end() || it->second.empty()) {
        issues.push_back(issue(Severity::error, "missing_cluster_value",
                               "participant '" + p.id + "' has no value for cluster column '" +
                                   panel.cluster->demographic + "'"));
      } else if (p.is_cluster != (it->second == panel.cluster->value)) {
        issues.push_back(issue(Severity::error, "cluster_flag_mismatch",
                               "participant '" + p.id + "' has a cluster flag inconsistent with column '" +
                                   panel.cluster->demographic + "'"));
      }
    } else if (p.is_cluster) {
      issues.push_back(issue(Severity::error, "cluster_flag_mismatch",
                             "participant '" + p.id + "' is flagged for clustering but no cluster column is set"));
    }
    const auto bad_table = [](TableIndex t) { return t < 0; };
    bool negative = p.manual_table && bad_table(*p.manual_table);
    for (const auto& [round, table] : p.manual_overrides) negative = negative || bad_table(table) || round < 0;
    if (negative) {
      issues.push_back(issue(Severity::error, "invalid_manual_table",
                             "participant '" + p.id + "' has a negative manual table or round"));
    }
  }

  if (num_tables && *num_tables > 1) {
    for (const auto& demo : panel.demographics) {
      for (const auto& value : demo.values) {
        const auto held = std::count_if(panel.participants.begin(), panel.participants.end(), [&](const Participant& p) {
          auto it = p.demographics.find(demo.name);
          return it != p.demographics.end() && it->second == value;
        });
        if (held < *num_tables) {
          issues.push_back(issue(Severity::warning, "unspreadable_value",
                                 "value '" + value + "' of demographic '" + demo.name + "' is held by " +
                                     std::to_string(held) + " participants, fewer than the " +
                                     std::to_string(*num_tables) + " tables; consider merging it with another level"));
        }
      }
    }
  }
  return issues;
}

bool has_errors(const std::vector<ValidationIssue>& issues) {
  return std::any_of(issues.begin(), issues.end(), [](const ValidationIssue& i) { return i.severity == Severity::error; });
}

// ---------------------------------------------------------------------------
// Config validation

ClusterSuggestion suggest_cluster_tables(const Panel& panel, const RunConfig& config) {
  const int clustered = static_cast<int>(panel.cluster_count());
  if (clustered == 0) return {0, 0};
  const auto layout = TableLayout::balanced(static_cast<int>(panel.participants.size()), config.num_tables);
  std::vector<int> sizes = layout.sizes();
  std::sort(sizes.begin(), sizes.end(), std::greater<>());
  int seats = 0;
  for (int m = 1; m <= static_cast<int>(sizes.size()); ++m) {
    seats += sizes[static_cast<std::size_t>(m - 1)];
    if (seats >= clustered) return {m, std::min(m + 1, layout.num_tables())};
  }
  throw InfeasibleError("even " + std::to_string(layout.num_tables()) + " cluster tables cannot seat " +
                        std::to_string(clustered) + " cluster agents");
}

TableLayout validate_config(const Panel& panel, const RunConfig& config) {
  const int n = static_cast<int>(panel.participants.size());
  if (config.num_tables < 1) throw TableCountError("number of tables must be at least 1");
  if (config.num_tables > n) {
    throw TableCountError("number of tables (" + std::to_string(config.num_tables) +
                          ") exceeds number of participants (" + std::to_string(n) + ")");
  }
  if (config.num_cluster_tables < 0 || config.num_cluster_tables > config.num_tables) {
    throw ConfigError("ConfigError", "number of cluster tables must lie between 0 and the number of tables (" +
                                         std::to_string(config.num_tables) + ")");
  }
  if (config.num_rounds < 1) throw ConfigError("ConfigError", "number of rounds must be at least 1");
  if (config.swap_rounds < 1) throw ConfigError("ConfigError", "number of swap rounds must be at least 1");
  if (!(config.pareto_mix >= 0.0 && config.pareto_mix <= 1.0)) {
    throw ConfigError("ConfigError", "pareto mix must lie in [0, 1]");
  }
  if (!(config.saturation_base > 0.0 && config.saturation_base < 1.0)) {
    throw ConfigError("ConfigError", "saturation base must lie in (0, 1)");
  }

  auto layout = TableLayout::balanced(n, config.num_tables, config.num_cluster_tables);

  const int clustered = static_cast<int>(panel.cluster_count());
  if (clustered > layout.cluster_seats()) {
    const auto suggestion = suggest_cluster_tables(panel, config);
    std::ostringstream msg;
    msg << config.num_cluster_tables << " cluster table(s) seat " << layout.cluster_seats() << " but " << clustered
        << " participants must be clustered; use at least " << suggestion.minimum << " cluster tables (recommended "
        << suggestion.recommended << ")";
    throw ClusterCapacityError(msg.str(), suggestion);
  }

  for (int round = 0; round < config.num_rounds; ++round) {
    std::vector<int> pinned(static_cast<std::size_t>(layout.num_tables()), 0);
    int cluster_side_demand = clustered;
    for (const auto& p : panel.participants) {
      const auto table = p.manual_table_for(round);
      if (!table) continue;
      const std::string where = "participant '" + p.id + "' (round " + std::to_string(round + 1) + ")";
      if (*table < 0 || *table >= layout.num_tables()) {
        throw ManualConflictError(where + " is manually allocated to table " + std::to_string(*table + 1) +
                                  ", which does not exist");
      }
      if (p.is_cluster && !layout.is_cluster_table(*table)) {
        throw ManualConflictError(where + " is a cluster agent manually allocated to non-cluster table " +
                                  std::to_string(*table + 1));
      }
      if (++pinned[static_cast<std::size_t>(*table)] > layout.size(*table)) {
        throw ManualConflictError("table " + std::to_string(*table + 1) + " has more manual allocations than its " +
                                  std::to_string(layout.size(*table)) + " seats in round " + std::to_string(round + 1));
      }
      if (!p.is_cluster && layout.is_cluster_table(*table)) ++cluster_side_demand;
    }
    if (cluster_side_demand > layout.cluster_seats()) {
      throw ManualConflictError("manual allocations to cluster tables leave too few seats for the " +
                                std::to_string(clustered) + " cluster agents in round " + std::to_string(round + 1));
    }
  }
  for (const auto& p : panel.participants) {
    for (const auto& [round, table] : p.manual_overrides) {
      if (round >= config.num_rounds) {
        throw ManualConflictError("participant '" + p.id + "' has a manual override for round " +
                                  std::to_string(round + 1) + " beyond the " + std::to_string(config.num_rounds) +
                                  " configured rounds");
      }
    }
  }
  return layout;
}

int default_table_count(int participants) {
  int best = 1;
  double best_gap = std::abs(participants - 10.0);
  for (int j = 2; j <= participants; ++j) {
    const double gap = std::abs(static_cast<double>(participants) / j - 10.0);
    if (gap < best_gap) {
      best = j;
      best_gap = gap;
    }
  }
  return best;
}

// ---------------------------------------------------------------------------
// EncodedPanel

EncodedPanel::EncodedPanel(const Panel& panel) : panel_(panel), n_(static_cast<int>(panel.participants.size())) {
  const auto issues = validate_panel(panel);
  for (const auto& i : issues) {
    if (i.severity == Severity::error) throw InvalidInputError("invalid panel: " + i.message);
  }
  const std::size_t dims = panel.demographics.size();
  codes_.resize(static_cast<std::size_t>(n_) * dims);
  value_counts_.resize(dims);
  for (std::size_t d = 0; d < dims; ++d) value_counts_[d].assign(panel.demographics[d].values.size(), 0);
  cluster_.resize(static_cast<std::size_t>(n_));

  for (int i = 0; i < n_; ++i) {
    const auto& p = panel.participants[static_cast<std::size_t>(i)];
    for (std::size_t d = 0; d < dims; ++d) {
      const auto& values = panel.demographics[d].values;
      const auto v = static_cast<int>(std::find(values.begin(), values.end(), p.demographics.at(panel.demographics[d].name)) -
                                      values.begin());
      codes_[static_cast<std::size_t>(i) * dims + d] = v;
      ++value_counts_[d][static_cast<std::size_t>(v)];
    }
    cluster_[static_cast<std::size_t>(i)] = p.is_cluster;
    cluster_total_ += p.is_cluster ? 1 : 0;
    index_.emplace(p.id, i);
  }
}

std::optional<int> EncodedPanel::index_of(const std::string& id) const {
  if (auto it = index_.find(id); it != index_.end()) return it->second;
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Plan invariants

std::optional<std::string> check_round(const RoundAllocation& round, int round_index, const EncodedPanel& panel,
                                       const TableLayout& layout) {
  const std::string where = "round " + std::to_string(round_index + 1) + ": ";
  if (static_cast<int>(round.size()) != panel.size()) {
    return where + "allocation covers " + std::to_string(round.size()) + " participants, panel has " +
           std::to_string(panel.size());
  }
  std::vector<int> occupancy(static_cast<std::size_t>(layout.num_tables()), 0);
  for (int i = 0; i < panel.size(); ++i) {
    const TableIndex t = round[static_cast<std::size_t>(i)];
    if (t < 0) return where + "participant '" + panel.id(i) + "' has no table";
    if (t >= layout.num_tables()) {
      return where + "participant '" + panel.id(i) + "' sits at nonexistent table " + std::to_string(t + 1);
    }
    ++occupancy[static_cast<std::size_t>(t)];
    if (panel.is_cluster(i) && !layout.is_cluster_table(t)) {
      return where + "cluster participant '" + panel.id(i) + "' sits at non-cluster table " + std::to_string(t + 1);
    }
    if (const auto manual = panel.manual_table(i, round_index); manual && *manual != t) {
      return where + "participant '" + panel.id(i) + "' is manually allocated to table " + std::to_string(*manual + 1) +
             " but sits at table " + std::to_string(t + 1);
    }
  }
  for (TableIndex t = 0; t < layout.num_tables(); ++t) {
    if (occupancy[static_cast<std::size_t>(t)] != layout.size(t)) {
      return where + "table " + std::to_string(t + 1) + " has " + std::to_string(occupancy[static_cast<std::size_t>(t)]) +
             " occupants, expected " + std::to_string(layout.size(t));
    }
  }
  return std::nullopt;
}

std::optional<std::string> check_plan(const AllocationPlan& plan, const EncodedPanel& panel,
                                      const TableLayout& layout) {
  for (int k = 0; k < plan.num_rounds(); ++k) {
    if (auto v = check_round(plan.rounds[static_cast<std::size_t>(k)], k, panel, layout)) return v;
  }
  return std::nullopt;
}

}  // namespace groupopt
