#include <csignal>
#include <iostream>

#include <CLI11.hpp>
#include <httplib.h>

#include "groupopt/commands.hpp"
#include "groupopt/service.hpp"

namespace {

void add_overrides(CLI::App* cmd, groupopt::RunOverrides& o) {
  cmd->add_option("--seed", o.seed, "RNG seed (beats config and GROUPOPT_SEED)");
  cmd->add_option("--rounds", o.rounds, "Number of rounds")->check(CLI::PositiveNumber);
  cmd->add_option("--tables", o.tables, "Number of tables")->check(CLI::PositiveNumber);
  cmd->add_option("--cluster-tables", o.cluster_tables, "Number of cluster tables")->check(CLI::NonNegativeNumber);
  cmd->add_option("--swap-rounds", o.swap_rounds, "Swap sweeps per round")->check(CLI::PositiveNumber);
  cmd->add_option("--pareto-mix", o.pareto_mix, "Probability of the Pareto branch")->check(CLI::Range(0.0, 1.0));
}

httplib::Server* g_server = nullptr;

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-round table allocation for deliberative panels"};
  app.require_subcommand(1);

  groupopt::AllocateOptions alloc;
  auto* allocate = app.add_subcommand("allocate", "Allocate participants to tables for every round");
  allocate->add_option("--panel", alloc.panel, "Panel file")->required();
  allocate->add_option("--config", alloc.config, "Config JSON")->required();
  allocate->add_option("--out", alloc.out, "Output directory")->required();
  add_overrides(allocate, alloc.overrides);

  groupopt::EvaluateOptions eval;
  auto* evaluate = app.add_subcommand("evaluate", "Recompute the report for an allocation file");
  evaluate->add_option("--allocations", eval.allocations, "Allocation CSV")->required();
  evaluate->add_option("--panel", eval.panel, "Panel file")->required();
  evaluate->add_option("--config", eval.config, "Config JSON")->required();
  evaluate->add_option("--out", eval.out, "Write report.json here instead of printing it");
  evaluate->add_option("--seed", eval.overrides.seed, "Seed recorded in the report");
  evaluate->add_option("--swap-rounds", eval.overrides.swap_rounds, "Swap sweeps recorded in the report");
  evaluate->add_option("--pareto-mix", eval.overrides.pareto_mix, "Pareto mix recorded in the report");
  evaluate->add_option("--tables", eval.overrides.tables, "Number of tables")->check(CLI::PositiveNumber);
  evaluate->add_option("--cluster-tables", eval.overrides.cluster_tables, "Number of cluster tables");

  groupopt::BenchOptions bench;
  auto* bench_cmd = app.add_subcommand("bench", "Run an experiment grid");
  bench_cmd->add_option("--suite", bench.suite, "Grid JSON")->required();
  bench_cmd->add_option("--seeds", bench.seeds, "Seeds per cell")->capture_default_str();
  bench_cmd->add_option("--out", bench.out, "Output directory")->capture_default_str();
  bench_cmd->add_option("--jobs", bench.jobs, "Worker threads")->capture_default_str()->check(CLI::PositiveNumber);

  std::string host = "127.0.0.1";
  int port = 8080;
  std::optional<std::filesystem::path> spool;
  auto* serve = app.add_subcommand("serve", "Serve the JSON API");
  serve->add_option("--host", host)->capture_default_str();
  serve->add_option("--port", port)->capture_default_str();
  serve->add_option("--spool", spool, "Also write finished runs here");

  CLI11_PARSE(app, argc, argv);

  if (*allocate) return groupopt::cmd_allocate(alloc, std::cout, std::cerr);
  if (*evaluate) return groupopt::cmd_evaluate(eval, std::cout, std::cerr);
  if (*bench_cmd) return groupopt::cmd_bench(bench, std::cout, std::cerr);

  groupopt::Service service(groupopt::ServiceOptions{spool, {}});
  httplib::Server server;
  service.register_routes(server);
  g_server = &server;
  std::signal(SIGINT, [](int) { g_server->stop(); });
  std::signal(SIGTERM, [](int) { g_server->stop(); });
  std::cerr << "listening on " << host << ":" << port << "\n";
  if (!server.listen(host, port)) {
    std::cerr << "error: cannot listen on " << host << ":" << port << "\n";
    return groupopt::kExitFailure;
  }
  return groupopt::kExitOk;
}
