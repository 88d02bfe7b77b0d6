// nbx: run neighborhood-expression graph algorithms and report their cost.
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "nbx/error.hpp"
#include "nbx/runner.hpp"

namespace {

enum Exit { kOk = 0, kUsage = 1, kIngest = 2, kRun = 3, kVerifyFail = 4 };

struct PolicyNames {
  std::string activation = "auto";
  std::string sync = "critical";
  std::string store = "disk";
};

void add_run_options(CLI::App& cmd, nbx::RunConfig& cfg, PolicyNames& names) {
  cmd.add_option("-i,--input", cfg.input, "edge list or adjacency file")->required()->check(CLI::ExistingFile);
  cmd.add_option("-a,--algo", cfg.algo, "algorithm")->required()->check(CLI::IsMember(nbx::algo::algorithm_names()));
  cmd.add_flag("--undirected", cfg.undirected, "symmetrize the input");
  cmd.add_option("-k,--workers", cfg.workers, "worker count")->check(CLI::PositiveNumber);
  auto* theta = cmd.add_option("--theta", cfg.theta, "activation threshold (absolute)");
  cmd.add_option("--theta-frac", cfg.theta_frac, "threshold as n / value")->excludes(theta)->check(CLI::PositiveNumber);
  cmd.add_option("--activation", names.activation, "auto, neighbor or all")
      ->check(CLI::IsMember({"auto", "neighbor", "all"}));
  cmd.add_option("--sync", names.sync, "critical or full")->check(CLI::IsMember({"critical", "full"}));
  cmd.add_option("--store", names.store, "disk or memory")->check(CLI::IsMember({"disk", "memory"}));
  cmd.add_option("--seed", cfg.seed);
  cmd.add_option("-s,--source", cfg.source, "source vertex (bfs, ppr)");
  cmd.add_option("--damping", cfg.damping)->check(CLI::Range(0.0, 1.0));
  cmd.add_option("--iterations", cfg.iterations, "sweeps for pr/ppr")->check(CLI::PositiveNumber);
  cmd.add_option("--max-supersteps", cfg.max_supersteps);
  cmd.add_option("--work-dir", cfg.work_dir, "directory for segment files");
  cmd.add_flag("--audit", cfg.audit, "record disk index reads");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Neighborhood-expression graph engine"};
  app.require_subcommand(1);

  nbx::RunConfig cfg;
  PolicyNames names;
  auto* run = app.add_subcommand("run", "run an algorithm");
  add_run_options(*run, cfg, names);
  run->add_option("-o,--results", cfg.results, "results file (default stdout)");
  run->add_option("-m,--metrics", cfg.metrics, "metrics file, JSON lines");

  auto* verify = app.add_subcommand("verify", "run an algorithm and compare it with the reference");
  add_run_options(*verify, cfg, names);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }
  cfg.activation = names.activation == "all"        ? nbx::ActivationPolicy::All
                   : names.activation == "neighbor" ? nbx::ActivationPolicy::Neighbor
                                                    : nbx::ActivationPolicy::Auto;
  cfg.sync = names.sync == "full" ? nbx::SyncPolicy::Full : nbx::SyncPolicy::Critical;
  cfg.store = names.store == "memory" ? nbx::StoreMode::Memory : nbx::StoreMode::Disk;

  nbx::Execution ex;
  try {
    ex = nbx::execute(cfg);
  } catch (const nbx::IngestError& e) {
    std::cerr << "ingest: " << e.what() << '\n';
    return kIngest;
  } catch (const nbx::ParameterError& e) {
    std::cerr << "usage: " << e.what() << '\n';
    return kUsage;
  } catch (const nbx::ConfigError& e) {
    std::cerr << "usage: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "run: " << e.what() << '\n';
    return kRun;
  }

  if (verify->parsed()) {
    nbx::oracle::OracleParams op{cfg.source, cfg.damping, cfg.iterations};
    if (auto diff = nbx::check_result(ex.spec, ex.result, ex.raw, op)) {
      std::cout << "FAIL " << cfg.algo << ": " << *diff << '\n';
      return kVerifyFail;
    }
    std::cout << "PASS " << cfg.algo << " (" << ex.meta.n << " vertices, " << cfg.workers << " workers)\n";
    return kOk;
  }

  try {
    if (cfg.results.empty()) {
      nbx::write_results(ex, std::cout);
    } else {
      std::ofstream out(cfg.results);
      if (!out) throw nbx::StorageError("cannot write " + cfg.results.string());
      nbx::write_results(ex, out);
    }
    if (!cfg.metrics.empty()) {
      std::ofstream out(cfg.metrics);
      if (!out) throw nbx::StorageError("cannot write " + cfg.metrics.string());
      nbx::write_metrics(ex, cfg, out);
    }
  } catch (const std::exception& e) {
    std::cerr << "run: " << e.what() << '\n';
    return kRun;
  }
  return kOk;
}
