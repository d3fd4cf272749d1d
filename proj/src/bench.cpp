#include "groupopt/bench.hpp"

#include <algorithm>
#include <atomic>
#include <set>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "groupopt/allocator.hpp"
#include "groupopt/io.hpp"
#include "groupopt/synthetic.hpp"

namespace groupopt {

using nlohmann::json;

GridSpec parse_grid(std::string_view json_text, const std::filesystem::path& base_dir) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw SchemaError(std::string("grid is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw SchemaError("grid must be a JSON object");

  GridSpec grid;
  try {
    for (const auto& d : doc.value("datasets", json::array())) {
      BenchDataset ds;
      if (d.is_string()) {
        ds.name = ds.synthetic = d.get<std::string>();
      } else {
        ds.synthetic = d.value("synthetic", "");
        ds.name = d.value("name", ds.synthetic);
        if (ds.synthetic.empty()) {
          if (!d.contains("panel") || !d.contains("config")) {
            throw SchemaError("dataset '" + ds.name + "' needs either 'synthetic' or both 'panel' and 'config'");
          }
          ds.panel_file = base_dir / d.at("panel").get<std::string>();
          ds.config_file = base_dir / d.at("config").get<std::string>();
        }
        ds.tables = d.value("tables", std::vector<int>{});
      }
      if (!ds.synthetic.empty()) (void)desk_dataset(ds.synthetic);
      if (ds.name.empty()) throw SchemaError("dataset without a name");
      grid.datasets.push_back(std::move(ds));
    }
    grid.rounds = doc.value("rounds", std::vector<int>{});
    grid.table_offsets = doc.value("table_offsets", std::vector<int>{0});
    grid.tables = doc.value("tables", std::vector<int>{});
    grid.clustering = doc.value("clustering", std::vector<bool>{false});
    grid.swap_rounds = doc.value("swap_rounds", grid.swap_rounds);
    grid.pareto_mix = doc.value("pareto_mix", grid.pareto_mix);
    grid.baseline_seeds = doc.value("baseline_seeds", grid.baseline_seeds);
  } catch (const json::exception& e) {
    throw SchemaError(std::string("malformed grid: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw SchemaError(e.what());
  }
  return grid;
}

int BenchOutcome::failures() const {
  return static_cast<int>(std::count_if(cells.begin(), cells.end(), [](const CellResult& c) { return c.error.has_value(); }));
}

namespace {

struct Job {
  BenchCell cell;
  std::optional<Panel> panel;
  std::optional<std::string> error;
};

Panel dataset_panel(const BenchDataset& ds, bool clustering) {
  if (!ds.synthetic.empty()) return make_synthetic_panel(desk_dataset(ds.synthetic), clustering);
  auto loaded = load_panel(ds.panel_file, ds.config_file);
  if (has_errors(loaded.issues)) {
    for (const auto& i : loaded.issues) {
      if (i.severity == Severity::error) throw InvalidInputError(i.message);
    }
  }
  if (!clustering) {
    loaded.panel.cluster.reset();
    loaded.panel.derive_cluster_flags();
  }
  return loaded.panel;
}

bool dataset_can_cluster(const BenchDataset& ds) {
  if (!ds.synthetic.empty()) return desk_dataset(ds.synthetic).cluster_demographic.has_value();
  return parse_config(read_file(ds.config_file)).columns.cluster_column.has_value();
}

std::vector<Job> expand(const GridSpec& grid) {
  std::vector<Job> jobs;
  for (const auto& ds : grid.datasets) {
    for (const bool clustering : grid.clustering) {
      try {
        if (clustering && !dataset_can_cluster(ds)) continue;
        const Panel panel = dataset_panel(ds, clustering);
        const int n = static_cast<int>(panel.participants.size());
        std::vector<int> table_counts = ds.tables.empty() ? grid.tables : ds.tables;
        if (table_counts.empty()) {
          for (int offset : grid.table_offsets) table_counts.push_back(default_table_count(n) + offset);
        }
        std::set<int> seen;
        for (int tables : table_counts) {
          if (tables < 1 || tables > n || !seen.insert(tables).second) continue;
          int cluster_tables = 0;
          if (clustering) {
            RunConfig probe;
            probe.num_tables = tables;
            cluster_tables = suggest_cluster_tables(panel, probe).minimum;
          }
          for (int rounds : grid.rounds) jobs.push_back(Job{BenchCell{ds.name, clustering, tables, cluster_tables, rounds}, panel, {}});
        }
      } catch (const std::exception& e) {
        jobs.push_back(Job{BenchCell{ds.name, clustering, 0, 0, 0}, std::nullopt, std::string(e.what())});
      }
    }
  }
  return jobs;
}

CellResult run_cell(const Job& job, const GridSpec& grid, int seeds) {
  CellResult result{job.cell, {}, std::nullopt, job.error};
  if (job.error) return result;
  try {
    RunConfig config;
    config.num_tables = job.cell.tables;
    config.num_cluster_tables = job.cell.cluster_tables;
    config.num_rounds = job.cell.rounds;
    config.swap_rounds = grid.swap_rounds;
    config.pareto_mix = grid.pareto_mix;
    const auto layout = validate_config(*job.panel, config);
    const EncodedPanel encoded(*job.panel);
    for (int s = 0; s < seeds; ++s) {
      config.rng_seed = static_cast<std::uint64_t>(s);
      const auto outcome = run(encoded, layout, config);
      result.reports.push_back(build_report(outcome.plan, encoded, layout, config));
    }
    if (grid.baseline_seeds > 0) {
      config.rng_seed = 0;
      result.baseline = random_baseline(encoded, layout, config, grid.baseline_seeds);
    }
  } catch (const std::exception& e) {
    result.error = e.what();
    result.reports.clear();
  }
  return result;
}

std::string number(double x) {
  std::ostringstream out;
  out.precision(10);
  out << x;
  return out.str();
}

std::vector<std::string> cell_fields(const BenchCell& c) {
  return {c.dataset, c.clustering ? "true" : "false", std::to_string(c.tables), std::to_string(c.cluster_tables),
          std::to_string(c.rounds)};
}

}  // namespace

BenchOutcome run_bench(const GridSpec& grid, int seeds, int jobs) {
  const auto work = expand(grid);
  BenchOutcome outcome;
  outcome.cells.resize(work.size());
  std::atomic<std::size_t> next{0};
  const auto worker = [&] {
    for (std::size_t k = next++; k < work.size(); k = next++) outcome.cells[k] = run_cell(work[k], grid, seeds);
  };
  const int threads = std::max(1, std::min<int>(jobs, static_cast<int>(work.size())));
  std::vector<std::thread> pool;
  for (int t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  return outcome;
}

void write_bench_outputs(const BenchOutcome& outcome, const std::filesystem::path& out_dir) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create '" + out_dir.string() + "': " + ec.message());

  const std::vector<std::string> key{"dataset", "clustering", "tables", "cluster_tables", "rounds"};
  const auto with_key = [&](std::vector<std::string> tail) {
    std::vector<std::string> row = key;
    row.insert(row.end(), tail.begin(), tail.end());
    return row;
  };
  Rows cells{with_key({"seed", "status", "mean_distance", "geometric_score", "pairs_met", "unmet_pairs",
                       "min_unmet_pairs", "excess", "first_meeting_fraction"})};
  Rows baseline{with_key({"baseline_seeds", "geometric_mean", "geometric_min", "geometric_max", "distance_mean",
                          "distance_min", "distance_max"})};
  Rows curves{with_key({"seed", "round", "M", "pairs"})};
  Rows excess_rows{with_key({"seed", "excess"})};

  for (const auto& result : outcome.cells) {
    const auto prefix = cell_fields(result.cell);
    const auto row = [&](std::vector<std::string> tail) {
      std::vector<std::string> r = prefix;
      r.insert(r.end(), tail.begin(), tail.end());
      return r;
    };
    if (result.error) {
      cells.push_back(row({"", "failed: " + *result.error, "", "", "", "", "", "", ""}));
      continue;
    }
    for (std::size_t s = 0; s < result.reports.size(); ++s) {
      const auto& rep = result.reports[s];
      const std::string seed = std::to_string(s);
      cells.push_back(row({seed, "ok", number(rep.mean_distance), number(rep.geometric_score), std::to_string(rep.pairs_met),
                           std::to_string(rep.unmet_pairs), std::to_string(rep.bounds.min_unmet_pairs),
                           rep.excess ? number(*rep.excess) : "", rep.first_meeting_fraction ? number(*rep.first_meeting_fraction) : ""}));
      for (std::size_t k = 0; k < rep.meeting_curves.size(); ++k) {
        for (std::size_t m = 0; m < rep.meeting_curves[k].size(); ++m) {
          curves.push_back(row({seed, std::to_string(k + 1), std::to_string(m), std::to_string(rep.meeting_curves[k][m])}));
        }
      }
      if (rep.excess) excess_rows.push_back(row({seed, number(*rep.excess)}));
    }
    if (result.baseline) {
      const auto& b = *result.baseline;
      baseline.push_back(row({std::to_string(b.num_seeds), number(b.geometric_score.mean), number(b.geometric_score.min),
                              number(b.geometric_score.max), number(b.mean_distance.mean), number(b.mean_distance.min),
                              number(b.mean_distance.max)}));
    }
  }
  write_file_atomic(out_dir / "cells.csv", format_delimited(cells));
  write_file_atomic(out_dir / "baseline.csv", format_delimited(baseline));
  write_file_atomic(out_dir / "meeting_curves.csv", format_delimited(curves));
  write_file_atomic(out_dir / "excess.csv", format_delimited(excess_rows));
}

}  // namespace groupopt
