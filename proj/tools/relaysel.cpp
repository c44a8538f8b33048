#include <CLI11.hpp>

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "relaysel/cli.hpp"

namespace fs = std::filesystem;
using namespace relaysel;
using namespace relaysel::cli;

namespace {

struct Args {
  Common common;
  std::uint64_t seed = 0;
  std::string policy = "standard";
  std::string policies = "standard,optimized";
  fs::path out;
  fs::path steady_out;
  fs::path gamma_out;
  fs::path trace_out;
  std::string param = "sigma";
  std::string values;
  std::string speeds;
  std::string sigmas;
  double target = 0.05;
  double gamma = 1.05;
  double tau_max = 1e3;
  fs::path a, b;
  SimOverrides sim;
  std::size_t replications = 0;
  double duration = 0.0, warmup = -1.0, interval = 0.0;
  bool periodic = false;
};

void add_common(CLI::App* cmd, Args& a, bool with_out = true) {
  cmd->add_option("--scenario", a.common.scenario, "Scenario INI file")->required();
  cmd->add_option("--jobs", a.common.jobs, "Concurrent solves, sweep cells or replications (default from RELAYSEL_JOBS)")
      ->check(CLI::PositiveNumber);
  if (with_out) cmd->add_option("--out", a.out, "Output CSV path")->required();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Location-based relay selection: steady-state model, policy optimisation and simulation"};
  app.require_subcommand(1);
  Args a;

  auto* solve = app.add_subcommand("solve", "Solve the chain for one policy and write its metrics");
  add_common(solve, a);
  solve->add_option("--policy", a.policy,
                    "standard|inverse|optimized|always-direct|always-relay|heuristic|file:PATH");
  solve->add_option("--steady-out", a.steady_out, "Per-point steady-state summary CSV");

  auto* optimize = app.add_subcommand("optimize", "Compute the optimal policy and expected-throughput tables");
  add_common(optimize, a);
  optimize->add_option("--gamma-out", a.gamma_out, "Gamma table CSV (default: <out>_gamma.csv)");

  auto* sweep = app.add_subcommand("sweep", "Metrics over a range of sigma, speed or tau");
  add_common(sweep, a);
  sweep->add_option("--param", a.param, "sigma|speed|tau")->check(CLI::IsMember({"sigma", "speed", "tau", "sigma_m",
                                                                               "speed_mps", "tau_hz"}));
  sweep->add_option("--values", a.values, "a:step:b or comma-separated list")->required();
  sweep->add_option("--policy", a.policies, "Comma-separated policies");

  auto* rtau = app.add_subcommand("required-tau", "Smallest update rate meeting a lost-throughput target");
  add_common(rtau, a);
  rtau->add_option("--target", a.target, "Target lost-throughput fraction in (0, 1]");
  rtau->add_option("--speeds", a.speeds, "Speeds in m/s: a:step:b or comma-separated list")->required();
  rtau->add_option("--tau-max", a.tau_max, "Upper end of the search range in 1/s")->check(CLI::PositiveNumber);

  auto* btau = app.add_subcommand("benefit-tau", "Smallest update rate for which location-based selection pays off");
  add_common(btau, a);
  btau->add_option("--gamma", a.gamma, "Benefit threshold (> 1)");
  btau->add_option("--sigmas", a.sigmas, "Location errors in m: a:step:b or comma-separated list")->required();
  btau->add_option("--policy", a.policies, "standard and/or optimized, comma-separated");
  btau->add_option("--tau-max", a.tau_max, "Upper end of the search range in 1/s")->check(CLI::PositiveNumber);

  auto* simulate = app.add_subcommand("simulate", "Event-driven simulation of the system under a policy");
  add_common(simulate, a);
  simulate->add_option("--policy", a.policy,
                       "standard|inverse|optimized|always-direct|always-relay|heuristic|file:PATH");
  simulate->add_option("--seed", a.seed, "Base seed; replication r uses seed + r");
  simulate->add_option("--replications", a.replications, "Override the scenario's replication count")
      ->check(CLI::PositiveNumber);
  simulate->add_option("--duration", a.duration, "Override the simulated time per replication in s")
      ->check(CLI::PositiveNumber);
  simulate->add_option("--warmup", a.warmup, "Override the warm-up time in s")->check(CLI::NonNegativeNumber);
  simulate->add_option("--interval", a.interval, "Override the decision-epoch spacing in s")
      ->check(CLI::PositiveNumber);
  simulate->add_flag("--periodic", a.periodic, "Deterministic update timer instead of exponential");
  simulate->add_option("--trace", a.trace_out, "Event trace CSV of the first replication");

  auto* diff = app.add_subcommand("diff", "Compare two policy CSV files");
  add_common(diff, a);
  diff->add_option("a", a.a, "First policy CSV")->required();
  diff->add_option("b", a.b, "Second policy CSV")->required();

  auto* validate = app.add_subcommand("validate", "Check a scenario and its steady state");
  add_common(validate, a, false);

  auto* export_map = app.add_subcommand("export-map", "Write the radio model's throughput map CSV");
  add_common(export_map, a);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  if (simulate->count("--seed")) a.common.seed = a.seed;
  if (simulate->count("--replications")) a.sim.replications = a.replications;
  if (simulate->count("--duration")) a.sim.duration_s = a.duration;
  if (simulate->count("--warmup")) a.sim.warmup_s = a.warmup;
  if (simulate->count("--interval")) a.sim.data_tx_interval_s = a.interval;
  if (a.periodic) a.sim.periodic_updates = true;

  auto opt_path = [](const fs::path& p) { return p.empty() ? std::nullopt : std::optional<fs::path>(p); };

  const auto result = run_guarded([&]() -> CommandResult {
    if (*solve) return cmd_solve(a.common, a.policy, a.out, opt_path(a.steady_out));
    if (*optimize) return cmd_optimize(a.common, a.out, opt_path(a.gamma_out));
    if (*sweep) return cmd_sweep(a.common, a.param, a.values, a.policies, a.out);
    if (*rtau) return cmd_required_tau(a.common, a.target, a.speeds, a.out, a.tau_max);
    if (*btau) return cmd_benefit_tau(a.common, a.gamma, a.sigmas, a.policies, a.out, a.tau_max);
    if (*simulate) return cmd_simulate(a.common, a.policy, a.out, a.sim, opt_path(a.trace_out));
    if (*diff) return cmd_diff(a.common, a.a, a.b, a.out);
    if (*validate) return cmd_validate(a.common);
    return cmd_export_map(a.common, a.out);
  });
  if (result.exit_code == kOk) {
    std::cout << result.message << "\n";
    for (const auto& f : result.artifacts) std::cout << "wrote " << f.string() << "\n";
  }
  return result.exit_code;
}
