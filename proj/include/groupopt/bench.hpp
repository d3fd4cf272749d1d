#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "groupopt/evaluation.hpp"
#include "groupopt/model.hpp"

namespace groupopt {

struct BenchDataset {
  std::string name;
  /// Name of a built-in synthetic data set, or empty when files are given.
  std::string synthetic;
  std::filesystem::path panel_file;
  std::filesystem::path config_file;
  /// Table counts for this data set only; overrides the grid-wide choice.
  std::vector<int> tables;
};

/// Experiment grid: data sets x clustering modes x table counts x rounds.
struct GridSpec {
  std::vector<BenchDataset> datasets;
  std::vector<int> rounds;
  /// Offsets from the table count closest to ten per table; ignored when
  /// `tables` is non-empty.
  std::vector<int> table_offsets{0};
  std::vector<int> tables;
  std::vector<bool> clustering{false};
  int swap_rounds = 5;
  double pareto_mix = 0.5;
  int baseline_seeds = 10;
};

/// Parses a grid document. Relative file paths resolve against `base_dir`.
/// Throws SchemaError.
GridSpec parse_grid(std::string_view json_text, const std::filesystem::path& base_dir = {});

struct BenchCell {
  std::string dataset;
  bool clustering = false;
  int tables = 0;
  int cluster_tables = 0;
  int rounds = 0;
};

struct CellResult {
  BenchCell cell;
  std::vector<RunReport> reports;  // one per seed
  std::optional<BaselineSummary> baseline;
  std::optional<std::string> error;
};

struct BenchOutcome {
  std::vector<CellResult> cells;
  int failures() const;
};

/// Runs every cell for seeds 0..seeds-1 plus a random baseline. A failing cell
/// records its error and the remaining cells still run.
BenchOutcome run_bench(const GridSpec& grid, int seeds, int jobs = 1);

/// Writes cells.csv, baseline.csv, meeting_curves.csv and excess.csv.
void write_bench_outputs(const BenchOutcome& outcome, const std::filesystem::path& out_dir);

}  // namespace groupopt
