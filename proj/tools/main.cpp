#include <CLI11.hpp>
#include <iostream>

#include "evmc/run_config.hpp"
#include "evmc/runner.hpp"

namespace {

struct CommonOpts {
  std::string config_path;
  std::string out_dir;
  uint64_t seed = 0;
  bool seed_set = false;
  int workers = 1;
};

void add_common(CLI::App* cmd, CommonOpts& opts) {
  cmd->add_option("-c,--config", opts.config_path, "run config JSON file")
      ->required()
      ->check(CLI::ExistingFile);
  cmd->add_option("-o,--out", opts.out_dir, "output directory (overrides config)");
  cmd->add_option("-s,--seed", opts.seed, "seed override")
      ->each([&opts](const std::string&) { opts.seed_set = true; });
  cmd->add_option("-w,--workers", opts.workers, "worker count")
      ->check(CLI::PositiveNumber);
}

int execute(const CommonOpts& opts, evmc::RunMode expected) {
  evmc::RunConfig cfg = evmc::RunConfig::from_json_file(opts.config_path);
  if (cfg.mode != expected)
    throw evmc::ConfigError(
        "config: mode in the file does not match the requested subcommand");
  evmc::RunOptions ropts;
  if (!opts.out_dir.empty()) ropts.output_dir = opts.out_dir;
  if (opts.seed_set) ropts.seed = opts.seed;
  ropts.workers = opts.workers;
  return evmc::run(std::move(cfg), ropts, std::cout);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ensemble variational Monte Carlo engine"};
  app.require_subcommand(1);

  CommonOpts train_opts, eval_opts, chi_opts, oracle_opts;
  auto* train = app.add_subcommand("train", "optimize a wavefunction over an ensemble");
  add_common(train, train_opts);
  auto* eval = app.add_subcommand("evaluate", "measure observables from a checkpoint");
  add_common(eval, eval_opts);
  auto* chi = app.add_subcommand("chi-sweep",
                                 "fidelity susceptibility over a coupling grid");
  add_common(chi, chi_opts);
  auto* oracle = app.add_subcommand("oracle", "exact baselines for small systems");
  add_common(oracle, oracle_opts);
  bool quick = false;
  auto* verify = app.add_subcommand("verify", "run the oracle-equivalence suite");
  verify->add_flag("--quick", quick, "smaller instances");

  CLI11_PARSE(app, argc, argv);

  try {
    if (train->parsed()) return execute(train_opts, evmc::RunMode::Train);
    if (eval->parsed()) return execute(eval_opts, evmc::RunMode::Evaluate);
    if (chi->parsed()) return execute(chi_opts, evmc::RunMode::ChiSweep);
    if (oracle->parsed()) return execute(oracle_opts, evmc::RunMode::Oracle);
    if (verify->parsed()) return evmc::run_verify(std::cout, quick);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
