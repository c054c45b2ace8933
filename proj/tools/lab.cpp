#include <CLI11.hpp>

#include <iostream>
#include <string>

#include "moolab/experiments.hpp"

namespace {

int run_command(const std::string& config_path, const std::string& out_dir,
                long long seed, double tol, bool have_seed, bool have_tol) {
  auto cfg = moolab::lab::ExperimentConfig::from_json_file(config_path);
  if (!out_dir.empty()) cfg.output_dir = out_dir;
  if (have_seed) cfg.seed = static_cast<std::uint64_t>(seed);
  if (have_tol) cfg.tol = tol;

  const auto report = moolab::lab::run_experiment(cfg);
  std::cout << "experiment: " << report.experiment << '\n'
            << "output:     " << cfg.output_dir << '\n'
            << "runtime:    " << report.runtime_ms << " ms\n";
  if (report.violations.empty()) {
    std::cout << "all bounds hold\n";
  } else {
    std::cout << report.violations.size() << " bound violation(s):\n";
    for (const auto& v : report.violations) {
      std::cout << "  " << v.quantity;
      if (v.t >= 0) std::cout << " at t=" << v.t;
      std::cout << ": measured " << v.measured << " vs bound " << v.bound << '\n';
    }
  }
  return report.exit_code();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"lab: hard-instance experiments for Pareto stationarity rates"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  long long seed = 0;
  double tol = 0.0;
  auto* run = app.add_subcommand("run", "run an experiment from a JSON config");
  run->add_option("config", config_path, "experiment config (JSON)")->required();
  run->add_option("--out", out_dir, "output directory override");
  auto* seed_opt = run->add_option("--seed", seed, "seed override");
  auto* tol_opt = run->add_option("--tol", tol, "stationarity tolerance override");

  int trials = 100;
  auto* verify = app.add_subcommand("verify-appendix",
                                    "run the polynomial extremal property suites");
  verify->add_option("--trials", trials, "trials per property (default 100)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (app.got_subcommand(run))
      return run_command(config_path, out_dir, seed, tol, seed_opt->count() > 0,
                         tol_opt->count() > 0);
    return moolab::lab::verify_appendix(trials, std::cout);
  } catch (const moolab::lab::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 4;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 4;
  } catch (const moolab::SolverFailure& e) {
    std::cerr << "solver failure: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
}
