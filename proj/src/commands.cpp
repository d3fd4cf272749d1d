#include "groupopt/commands.hpp"

#include <charconv>
#include <cstdlib>
#include <iomanip>
#include <ostream>

#include "groupopt/allocator.hpp"
#include "groupopt/bench.hpp"

namespace groupopt {

RunConfig resolve_run_config(const ConfigFile& file, const RunOverrides& overrides, const char* env_seed) {
  RunConfig config = file.run;
  if (!file.seed_given) {
    config.rng_seed = 0;
    if (env_seed != nullptr && *env_seed != '\0') {
      const std::string_view text(env_seed);
      std::uint64_t value = 0;
      const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
      if (ec != std::errc() || end != text.data() + text.size()) {
        throw ConfigError("SeedError", "GROUPOPT_SEED must be a non-negative integer, got '" + std::string(text) + "'");
      }
      config.rng_seed = value;
    }
  }
  if (overrides.seed) config.rng_seed = *overrides.seed;
  if (overrides.rounds) config.num_rounds = *overrides.rounds;
  if (overrides.tables) config.num_tables = *overrides.tables;
  if (overrides.cluster_tables) config.num_cluster_tables = *overrides.cluster_tables;
  if (overrides.swap_rounds) config.swap_rounds = *overrides.swap_rounds;
  if (overrides.pareto_mix) config.pareto_mix = *overrides.pareto_mix;
  return config;
}

void print_summary(const RunReport& report, std::ostream& out) {
  const auto flags = out.flags();
  out << std::fixed << std::setprecision(4);
  out << "participants     " << report.num_participants << " at " << report.table_sizes.size() << " tables ("
      << report.cluster_tables.size() << " cluster), " << report.config.num_rounds << " rounds, seed "
      << report.config.rng_seed << "\n";
  out << "mean distance    " << report.mean_distance << "\n";
  out << "geometric score  " << report.geometric_score << "\n";
  out << "unmet pairs      " << report.unmet_pairs << " of " << report.bounds.pairs_total << " (bound "
      << report.bounds.min_unmet_pairs << ")\n";
  out << "excess           ";
  if (report.excess) {
    out << *report.excess << "\n";
  } else {
    out << "n/a (" << report.excess_note << ")\n";
  }
  out.flags(flags);
}

namespace {

struct Loaded {
  ConfigFile file;
  Panel panel;
};

Loaded load_inputs(const std::filesystem::path& panel_path, const std::filesystem::path& config_path, std::ostream& err) {
  Loaded loaded;
  loaded.file = parse_config(read_file(config_path));
  auto lp = load_panel_text(read_file(panel_path), loaded.file);
  loaded.panel = std::move(lp.panel);
  bool failed = false;
  for (const auto& issue : lp.issues) {
    if (issue.severity == Severity::error) {
      failed = true;
      err << "error: " << issue.message << "\n";
    }
  }
  if (failed) throw InvalidInputError("panel '" + panel_path.string() + "' failed validation");
  return loaded;
}

void report_warnings(const Panel& panel, int num_tables, std::ostream& err) {
  for (const auto& issue : validate_panel(panel, num_tables)) {
    if (issue.severity == Severity::warning) err << "warning: " << issue.message << "\n";
  }
}

template <typename Body>
int guarded(std::ostream& err, Body&& body) {
  try {
    return body();
  } catch (const IoError& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitInvalid;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  }
}

}  // namespace

int cmd_allocate(const AllocateOptions& options, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    auto [file, panel] = load_inputs(options.panel, options.config, err);
    const RunConfig config = resolve_run_config(file, options.overrides, std::getenv("GROUPOPT_SEED"));
    report_warnings(panel, config.num_tables, err);
    const auto layout = validate_config(panel, config);
    const EncodedPanel encoded(panel);
    const auto result = run(encoded, layout, config);
    const auto report = build_report(result.plan, encoded, layout, config);

    std::error_code ec;
    std::filesystem::create_directories(options.out, ec);
    if (ec) throw IoError("cannot create '" + options.out.string() + "': " + ec.message());
    write_file_atomic(options.out / "allocations.csv", write_allocations(result.plan, encoded, layout));
    write_file_atomic(options.out / "report.json", write_report(report));
    print_summary(report, out);
    return kExitOk;
  });
}

int cmd_evaluate(const EvaluateOptions& options, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    auto [file, panel] = load_inputs(options.panel, options.config, err);
    const EncodedPanel encoded(panel);
    const auto plan = read_allocations(read_file(options.allocations), encoded);
    if (plan.num_rounds() == 0) throw InvalidInputError("allocation file has no rounds");

    RunOverrides overrides = options.overrides;
    overrides.rounds = plan.num_rounds();
    const RunConfig config = resolve_run_config(file, overrides, std::getenv("GROUPOPT_SEED"));
    const auto layout = validate_config(panel, config);
    if (const auto violation = check_plan(plan, encoded, layout)) {
      throw InvalidInputError("allocation violates plan invariants: " + *violation);
    }
    const auto report = build_report(plan, encoded, layout, config);
    if (options.out) {
      std::error_code ec;
      std::filesystem::create_directories(*options.out, ec);
      if (ec) throw IoError("cannot create '" + options.out->string() + "': " + ec.message());
      write_file_atomic(*options.out / "report.json", write_report(report));
      print_summary(report, out);
    } else {
      out << write_report(report);
    }
    return kExitOk;
  });
}

int cmd_bench(const BenchOptions& options, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    if (options.seeds < 1) throw ConfigError("SeedError", "--seeds must be at least 1");
    const auto grid = parse_grid(read_file(options.suite), options.suite.parent_path());
    const auto outcome = run_bench(grid, options.seeds, options.jobs);
    write_bench_outputs(outcome, options.out);
    out << outcome.cells.size() << " cells, " << outcome.failures() << " failed, outputs in " << options.out.string() << "\n";
    for (const auto& cell : outcome.cells) {
      if (!cell.error) continue;
      err << "failed: " << cell.cell.dataset << " clustering=" << (cell.cell.clustering ? "true" : "false")
          << " tables=" << cell.cell.tables << " rounds=" << cell.cell.rounds << ": " << *cell.error << "\n";
    }
    return outcome.failures() == 0 ? kExitOk : kExitFailure;
  });
}

}  // namespace groupopt
