#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>

#include "groupopt/io.hpp"

namespace groupopt {

/// Command-line values that take precedence over the config file.
struct RunOverrides {
  std::optional<std::uint64_t> seed;
  std::optional<int> rounds;
  std::optional<int> tables;
  std::optional<int> cluster_tables;
  std::optional<int> swap_rounds;
  std::optional<double> pareto_mix;
};

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitInvalid = 2;

/// Seed order: override, config file, `env_seed` (GROUPOPT_SEED), then 0.
/// Throws ConfigError when `env_seed` is not an unsigned integer.
RunConfig resolve_run_config(const ConfigFile& file, const RunOverrides& overrides, const char* env_seed);

struct AllocateOptions {
  std::filesystem::path panel;
  std::filesystem::path config;
  std::filesystem::path out;
  RunOverrides overrides;
};

struct EvaluateOptions {
  std::filesystem::path allocations;
  std::filesystem::path panel;
  std::filesystem::path config;
  /// Report goes to standard output when unset.
  std::optional<std::filesystem::path> out;
  RunOverrides overrides;
};

struct BenchOptions {
  std::filesystem::path suite;
  int seeds = 10;
  std::filesystem::path out = "bench-out";
  int jobs = 1;
};

/// Writes allocations.csv and report.json under `out` and prints a summary.
int cmd_allocate(const AllocateOptions& options, std::ostream& out, std::ostream& err);
/// Recomputes the report for an existing allocation file.
int cmd_evaluate(const EvaluateOptions& options, std::ostream& out, std::ostream& err);
int cmd_bench(const BenchOptions& options, std::ostream& out, std::ostream& err);

/// The terminal summary, drawn only from report fields.
void print_summary(const RunReport& report, std::ostream& out);

}  // namespace groupopt
