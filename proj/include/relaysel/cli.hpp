#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <system_error>
#include <utility>
#include <vector>

#include "relaysel/analysis.hpp"
#include "relaysel/config.hpp"
#include "relaysel/errors.hpp"
#include "relaysel/model.hpp"
#include "relaysel/montecarlo.hpp"
#include "relaysel/parallel.hpp"
#include "relaysel/policy.hpp"

// Command implementations behind the relaysel tool. Argument parsing lives in
// tools/; these take parsed values, buffer every output in memory and write
// files only once the whole command has succeeded.
namespace relaysel::cli {

enum ExitCode : int { kOk = 0, kUsage = 1, kValidation = 2, kNumeric = 3 };

struct CommandResult {
  int exit_code = kOk;
  std::vector<std::filesystem::path> artifacts;
  std::string message;
};

class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Pending output files, committed together at the end of a command.
class Outputs {
 public:
  void add(std::filesystem::path path, std::string content) { files_.emplace_back(std::move(path), std::move(content)); }

  // Writes each file to a sibling temporary and renames it into place.
  std::vector<std::filesystem::path> commit() const {
    std::vector<std::filesystem::path> tmp;
    try {
      for (const auto& [path, content] : files_) {
        auto t = path;
        t += ".tmp";
        std::ofstream os(t, std::ios::binary);
        if (!os) throw ParseError(path.string(), 0, "", "cannot open output file");
        tmp.push_back(t);
        os << content;
        os.close();
        if (!os) throw ParseError(path.string(), 0, "", "failed writing output file");
      }
    } catch (...) {
      std::error_code ec;
      for (const auto& t : tmp) std::filesystem::remove(t, ec);
      throw;
    }
    std::vector<std::filesystem::path> done;
    for (std::size_t i = 0; i < files_.size(); ++i) {
      std::filesystem::rename(tmp[i], files_[i].first);
      done.push_back(files_[i].first);
    }
    return done;
  }

 private:
  std::vector<std::pair<std::filesystem::path, std::string>> files_;
};

inline double parse_number(const std::string& text) {
  const auto v = detail::to_double(detail::trim(text));
  if (!v) throw UsageError("not a number: '" + text + "'");
  return *v;
}

// "a:step:b" (inclusive) or a comma-separated list.
inline std::vector<double> parse_values(const std::string& text) {
  const auto parts = detail::split(text, ':');
  std::vector<double> out;
  if (parts.size() == 3) {
    const double a = parse_number(parts[0]);
    const double step = parse_number(parts[1]);
    const double b = parse_number(parts[2]);
    if (!(step > 0.0) || b < a) throw UsageError("range must be a:step:b with step > 0 and b >= a");
    const auto count = static_cast<std::size_t>(std::floor((b - a) / step + 1e-9)) + 1;
    if (count > 100000) throw UsageError("range has too many values");
    for (std::size_t k = 0; k < count; ++k) out.push_back(a + step * static_cast<double>(k));
    return out;
  }
  if (parts.size() != 1) throw UsageError("cannot parse value list '" + text + "'");
  for (const auto& v : detail::split(text, ',')) {
    if (!detail::trim(v).empty()) out.push_back(parse_number(v));
  }
  if (out.empty()) throw UsageError("empty value list");
  return out;
}

inline PolicySpec parse_policy_arg(const std::string& text) {
  try {
    return parse_policy_spec(detail::trim(text));
  } catch (const DomainError& e) {
    throw UsageError(e.what());
  }
}

inline std::vector<PolicySpec> parse_policy_list(const std::string& text) {
  std::vector<PolicySpec> out;
  for (const auto& v : detail::split(text, ',')) {
    const auto s = detail::trim(v);
    if (s.empty()) continue;
    out.push_back(parse_policy_arg(s));
  }
  if (out.empty()) throw UsageError("empty policy list");
  return out;
}

struct Common {
  std::filesystem::path scenario;
  std::optional<std::uint64_t> seed;
  std::size_t jobs = default_jobs();
};

inline ScenarioConfig load(const Common& c) {
  auto cfg = load_scenario(c.scenario);
  if (c.seed) cfg.sim.seed = *c.seed;
  return cfg;
}

inline std::string csv_line(std::ostringstream& os) {
  auto s = os.str();
  os.str({});
  return s;
}

// Metrics row for one policy plus a per-point steady-state summary.
inline CommandResult cmd_solve(const Common& c, const std::string& policy, const std::filesystem::path& out,
                               const std::optional<std::filesystem::path>& steady_out = std::nullopt) {
  const auto spec = parse_policy_arg(policy);
  const Model model = build_model(load(c));
  const RelayPolicy p = make_policy(model, spec, c.jobs);
  const auto ev = evaluate_policy(model, p);

  std::ostringstream os;
  os.precision(12);
  os << "scenario,policy,states,residual," << metric_csv_header() << "\n";
  os << model.config.name << ',' << to_string(spec) << ',' << ev.steady.p.size() << ',' << ev.steady.residual << ',';
  write_metric_csv(os, ev.report);
  os << "\n";
  Outputs files;
  files.add(out, os.str());

  if (steady_out) {
    std::ostringstream ss;
    ss.precision(12);
    const auto marg = ev.steady.grid_marginal();
    const auto d = ev.steady.mass_on(model.sets.d_view);
    const auto r = ev.steady.mass_on(model.sets.r_view);
    ss << "m,x_m,y_m,p_mob,p_d_view,p_r_view,decision\n";
    for (std::size_t m = 0; m < model.size(); ++m) {
      const auto i = static_cast<Eigen::Index>(m);
      const Vec2 x = model.config.grid.index_to_coord(StateIndex::from_zero_based(m));
      ss << m + 1 << ',' << x.x << ',' << x.y << ',' << marg(i) << ',' << d(i) << ',' << r(i) << ','
         << static_cast<int>(p[m]) << "\n";
    }
    files.add(*steady_out, ss.str());
  }
  std::ostringstream msg;
  msg << "s_loc=" << ev.report.s_loc << " s_ideal=" << ev.report.s_ideal << " lost_fraction=" << ev.report.lost_fraction;
  return {kOk, files.commit(), msg.str()};
}

// Policy CSV plus the K+1 expected-throughput (gamma) tables.
inline CommandResult cmd_optimize(const Common& c, const std::filesystem::path& out_policy,
                                  std::optional<std::filesystem::path> out_gamma = std::nullopt) {
  const Model model = build_model(load(c));
  if (!out_gamma) {
    out_gamma = out_policy;
    out_gamma->replace_extension();
    *out_gamma += "_gamma.csv";
  }
  const auto cond = scenario_conditional(model, c.jobs);
  Outputs files;
  std::ostringstream os;
  os.precision(12);
  std::string msg;
  if (model.config.grid.mobility_role == MobilityRole::MobileRelay) {
    const auto k = model.tables.relay_count();
    const auto dt = optimize_mobile_relay(std::vector<ConditionalMatrix>(k, cond), model.tables);
    if (k == 1) {
      const auto p = dt.single_relay_policy();
      write_policy_csv(os, p);
      files.add(out_policy, csv_line(os));
      msg = "relay points: " + std::to_string(p.relay_points());
    } else {
      msg = "decision tables only: " + std::to_string(k) + " mobile relays";
    }
    write_gamma_csv(os, dt);
  } else {
    const auto p = optimize_mobile_destination(cond, model.tables);
    write_policy_csv(os, p);
    files.add(out_policy, csv_line(os));
    ThroughputDecisionTables dt;
    dt.gamma = expected_option_throughput(cond, model.tables);
    write_gamma_csv(os, dt);
    msg = "relay points: " + std::to_string(p.relay_points());
  }
  files.add(*out_gamma, csv_line(os));
  return {kOk, files.commit(), msg};
}

inline CommandResult cmd_sweep(const Common& c, const std::string& parameter, const std::string& values,
                               const std::string& policies, const std::filesystem::path& out) {
  SweepSpec spec;
  try {
    spec.parameter = parse_sweep_parameter(parameter);
  } catch (const DomainError& e) {
    throw UsageError(e.what());
  }
  spec.values = parse_values(values);
  spec.policies = parse_policy_list(policies);
  spec.scenario = load(c);
  const auto rows = run_sweep(spec, c.jobs);
  std::ostringstream os;
  os.precision(12);
  write_sweep_csv(os, rows);
  std::size_t failed = 0;
  for (const auto& r : rows) failed += r.ok ? 0 : 1;
  Outputs files;
  files.add(out, os.str());
  return {kOk, files.commit(),
          std::to_string(rows.size()) + " rows, " + std::to_string(failed) + " failed cells"};
}

inline std::string tau_cell(const TauSearchResult& r) {
  std::ostringstream os;
  os.precision(8);
  if (r.tau) os << *r.tau << ",ok";
  else os << "nan,unreachable";
  os << ',' << (r.monotone ? "yes" : "no");
  return os.str();
}

inline CommandResult cmd_required_tau(const Common& c, double target, const std::string& speeds,
                                      const std::filesystem::path& out, double tau_max = 1e3) {
  if (!(target > 0.0 && target <= 1.0)) throw UsageError("--target must lie in (0, 1]");
  const auto cfg = load(c);
  const auto v = parse_values(speeds);
  TauSearchOptions opt;
  opt.tau_max = tau_max;
  std::vector<std::string> cells(v.size());
  parallel_for(v.size(), c.jobs, [&](std::size_t i) { cells[i] = tau_cell(required_tau(cfg, target, v[i], opt)); });
  std::ostringstream os;
  os << "speed_mps,target_lost_fraction,tau_hz,status,monotone\n";
  for (std::size_t i = 0; i < v.size(); ++i) os << v[i] << ',' << target << ',' << cells[i] << "\n";
  Outputs files;
  files.add(out, os.str());
  return {kOk, files.commit(), std::to_string(v.size()) + " speeds"};
}

inline CommandResult cmd_benefit_tau(const Common& c, double gamma, const std::string& sigmas,
                                     const std::string& policies, const std::filesystem::path& out,
                                     double tau_max = 1e3) {
  if (!(gamma > 1.0)) throw UsageError("--gamma must be > 1");
  const auto cfg = load(c);
  const auto s = parse_values(sigmas);
  const auto pols = parse_policy_list(policies);
  for (const auto& p : pols) {
    if (p.kind != PolicyKind::Standard && p.kind != PolicyKind::Optimized) {
      throw UsageError("benefit-tau supports the standard and optimized policies");
    }
  }
  TauSearchOptions opt;
  opt.tau_max = tau_max;
  const std::size_t cells_n = s.size() * pols.size();
  std::vector<std::string> cells(cells_n);
  const std::size_t inner = std::max<std::size_t>(1, c.jobs / cells_n);
  parallel_for(cells_n, c.jobs, [&](std::size_t k) {
    const auto& p = pols[k % pols.size()];
    cells[k] = tau_cell(required_tau_for_benefit(cfg, gamma, s[k / pols.size()], p.kind, opt, inner));
  });
  std::ostringstream os;
  os << "sigma_m,policy,gamma_benefit,tau_hz,status,monotone\n";
  for (std::size_t k = 0; k < cells_n; ++k) {
    os << s[k / pols.size()] << ',' << to_string(pols[k % pols.size()]) << ',' << gamma << ',' << cells[k] << "\n";
  }
  Outputs files;
  files.add(out, os.str());
  return {kOk, files.commit(), std::to_string(cells_n) + " cells"};
}

struct SimOverrides {
  std::optional<std::size_t> replications;
  std::optional<double> duration_s;
  std::optional<double> warmup_s;
  std::optional<double> data_tx_interval_s;
  std::optional<bool> periodic_updates;
};

inline CommandResult cmd_simulate(const Common& c, const std::string& policy, const std::filesystem::path& out,
                                  const SimOverrides& ov = {},
                                  const std::optional<std::filesystem::path>& trace_out = std::nullopt) {
  const auto spec = parse_policy_arg(policy);
  auto cfg = load(c);
  if (ov.replications) cfg.sim.replications = *ov.replications;
  if (ov.duration_s) cfg.sim.duration_s = *ov.duration_s;
  if (ov.warmup_s) cfg.sim.warmup_s = *ov.warmup_s;
  if (ov.data_tx_interval_s) cfg.sim.data_tx_interval_s = *ov.data_tx_interval_s;
  if (ov.periodic_updates) cfg.sim.periodic_updates = *ov.periodic_updates;
  const Model model = build_model(cfg);
  const RelayPolicy p = make_policy(model, spec, c.jobs);

  std::ostringstream trace;
  const auto res = simulate(model, p, cfg.sim, c.jobs, trace_out ? &trace : nullptr);
  std::optional<double> model_s_loc;
  if (p.max_decision() <= 1) model_s_loc = evaluate_policy(model, p).report.s_loc;

  std::size_t epochs = 0;
  for (const auto& r : res.replications) epochs += r.epochs;
  std::ostringstream os;
  os.precision(12);
  os << "scenario,policy,mean_mbps,ci95_half_width_mbps,replications,epochs,delivered,dropped,max_queue,"
        "model_s_loc_mbps\n";
  os << model.config.name << ',' << to_string(spec) << ',' << res.mean_mbps << ',' << res.ci_half_width << ','
     << res.replications.size() << ',' << epochs << ',' << res.delivered << ',' << res.dropped << ',' << res.max_queue
     << ',';
  if (model_s_loc) os << *model_s_loc;
  else os << "nan";
  os << "\n";
  Outputs files;
  files.add(out, os.str());
  if (trace_out) files.add(*trace_out, trace.str());
  std::ostringstream msg;
  msg << "mean=" << res.mean_mbps << " +/- " << res.ci_half_width;
  if (model_s_loc) msg << " model=" << *model_s_loc;
  return {kOk, files.commit(), msg.str()};
}

inline RelayPolicy read_policy_file(const std::filesystem::path& path, std::size_t n2) {
  std::ifstream in(path);
  if (!in) throw ParseError(path.string(), 0, "", "cannot open policy file");
  return read_policy_csv(in, n2, path.string());
}

inline CommandResult cmd_diff(const Common& c, const std::filesystem::path& a, const std::filesystem::path& b,
                              const std::filesystem::path& out) {
  const auto cfg = load(c);
  cfg.grid.validate();
  const auto pa = read_policy_file(a, cfg.grid.size());
  const auto pb = read_policy_file(b, cfg.grid.size());
  const auto d = policy_diff(cfg.grid, pa, pb);
  std::ostringstream os;
  write_diff_csv(os, d);
  Outputs files;
  files.add(out, os.str());
  return {kOk, files.commit(),
          "added=" + std::to_string(d.added) + " removed=" + std::to_string(d.removed) +
              " reassigned=" + std::to_string(d.reassigned)};
}

// Parses the scenario, builds every model input and checks the standard
// policy's steady state.
inline CommandResult cmd_validate(const Common& c) {
  const Model model = build_model(load(c));
  const auto ev = evaluate_policy(model, standard_policy(model.tables));
  const double mass = ev.steady.p.sum();
  const double marg = (ev.steady.grid_marginal() - model.mobility.p_mob).cwiseAbs().maxCoeff();
  if (ev.steady.residual > 1e-10 || std::abs(mass - 1.0) > 1e-12 || marg > 1e-10) {
    throw NumericError("steady state check failed: residual " + std::to_string(ev.steady.residual));
  }
  std::ostringstream msg;
  msg << model.config.name << ": " << model.size() << " grid points, " << model.tmpl.states.size()
      << " forwarding states, " << ev.steady.p.size() << " chain states, residual " << ev.steady.residual;
  return {kOk, {}, msg.str()};
}

// Writes the radio model's throughput tables in the map format.
inline CommandResult cmd_export_map(const Common& c, const std::filesystem::path& out) {
  auto cfg = load(c);
  cfg.grid.validate();
  const auto tables = build_tables(cfg.grid, cfg.radio);
  std::ostringstream os;
  os.precision(10);
  write_throughput_map(os, cfg.grid, tables);
  Outputs files;
  files.add(out, os.str());
  return {kOk, files.commit(), std::to_string(tables.size()) + " rows"};
}

// Runs a command and maps failures onto exit codes.
template <typename F>
CommandResult run_guarded(F&& f, std::ostream& err = std::cerr) {
  try {
    return f();
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return {kUsage, {}, e.what()};
  } catch (const NumericError& e) {
    err << "numeric failure: " << e.what() << "\n";
    return {kNumeric, {}, e.what()};
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return {kValidation, {}, e.what()};
  }
}

}  // namespace relaysel::cli
