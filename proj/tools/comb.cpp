// Command-line front end for the comb-lattice toolkit: exact solvers,
// Monte Carlo experiments, calibration, and reproducible CSV/JSONL output.

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "comb/harness.hpp"

namespace {

int run_one(comb::ExperimentConfig cfg, bool verbose) {
  try {
    comb::ExperimentResult res = comb::run_experiment(cfg);
    if (verbose) std::cout << res.summary.dump(2) << "\n";
    else
      std::cout << cfg.kind << ": " << (res.hard_pass ? "ok" : "HARD ASSERTION FAILED") << "  ("
                << comb::config_hash(cfg) << ")\n";
    if (!res.hard_pass) {
      std::cerr << cfg.kind << ": hard assertion failed; see "
                << (res.files.empty() ? "summary" : res.files.back()) << "\n";
      return 1;
    }
    return 0;
  } catch (const std::exception& e) {
    std::cerr << cfg.kind << ": error: " << e.what() << "\n";
    return 2;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"comb: internal DLA and divisible sandpile toolkit on the comb lattice"};
  app.require_subcommand(1);
  app.fallthrough();  // global flags may follow the subcommand

  std::uint64_t seed = 1;
  std::int64_t replicas = 0;
  std::string out_dir = "out";
  std::string config_file;
  int threads = 0;
  bool verbose = false;
  app.add_option("--seed", seed, "master seed (default 1)");
  app.add_option("--replicas", replicas, "replica count (0 = experiment default)");
  app.add_option("--out", out_dir, "output directory (default ./out)");
  app.add_option("--config", config_file, "JSON file with per-experiment parameters");
  app.add_option("--threads", threads, "worker threads (0 = hardware)");
  app.add_flag("--verbose", verbose, "print the full JSON summary");

  const std::vector<std::string> kinds{"green",   "exit-dist", "hitting",  "flash",
                                       "idla",    "sandpile",  "tentacle", "crossing",
                                       "mu",      "bernoulli", "calibrate"};
  for (const std::string& k : kinds) app.add_subcommand(k, "run the " + k + " experiment");
  app.add_subcommand("all", "run every experiment in sequence");

  CLI11_PARSE(app, argc, argv);

  comb::json params = comb::json::object();
  if (!config_file.empty()) {
    std::ifstream in(config_file);
    if (!in) {
      std::cerr << "cannot read config file " << config_file << "\n";
      return 2;
    }
    in >> params;
  }

  auto make_cfg = [&](const std::string& kind) {
    comb::ExperimentConfig cfg;
    cfg.kind = kind;
    cfg.seed = seed;
    cfg.replicas = replicas;
    cfg.threads = threads;
    cfg.out_dir = out_dir;
    if (params.contains(kind)) cfg.params = params[kind];
    else if (!params.empty() && params.is_object() && !params.contains(kind)) cfg.params = params;
    return cfg;
  };

  int rc = 0;
  for (const std::string& k : kinds)
    if (app.got_subcommand(k)) rc = run_one(make_cfg(k), verbose);
  if (app.got_subcommand("all")) {
    for (const std::string& k : kinds) {
      int one = run_one(make_cfg(k), verbose);
      rc = std::max(rc, one);
    }
  }
  return rc;
}
