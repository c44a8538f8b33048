#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "relaysel/config.hpp"
#include "relaysel/errors.hpp"
#include "relaysel/metrics.hpp"
#include "relaysel/model.hpp"
#include "relaysel/parallel.hpp"
#include "relaysel/policy.hpp"

namespace relaysel {

enum class SweepParameter { SigmaM, SpeedMps, TauHz };

inline std::string to_string(SweepParameter p) {
  switch (p) {
    case SweepParameter::SigmaM: return "sigma_m";
    case SweepParameter::SpeedMps: return "speed_mps";
    case SweepParameter::TauHz: return "tau_hz";
  }
  return "sigma_m";
}

inline SweepParameter parse_sweep_parameter(const std::string& s) {
  if (s == "sigma" || s == "sigma_m") return SweepParameter::SigmaM;
  if (s == "speed" || s == "speed_mps") return SweepParameter::SpeedMps;
  if (s == "tau" || s == "tau_hz") return SweepParameter::TauHz;
  throw DomainError("unknown sweep parameter '" + s + "'");
}

inline ScenarioConfig with_parameter(ScenarioConfig cfg, SweepParameter p, double value) {
  switch (p) {
    case SweepParameter::SigmaM:
      if (!(value >= 0.0)) throw DomainError("sigma must be >= 0");
      cfg.error.sigma_m = value;
      break;
    case SweepParameter::SpeedMps:
      if (!(value > 0.0)) throw DomainError("speed must be > 0");
      cfg.speed_mps = value;
      break;
    case SweepParameter::TauHz:
      if (!(value > 0.0)) throw DomainError("tau must be > 0");
      cfg.updates.tau_hz = value;
      break;
  }
  return cfg;
}

struct SweepSpec {
  SweepParameter parameter = SweepParameter::SigmaM;
  std::vector<double> values;
  std::vector<PolicySpec> policies;
  ScenarioConfig scenario;
};

struct SweepRow {
  SweepParameter parameter = SweepParameter::SigmaM;
  double value = 0.0;
  PolicySpec policy;
  std::size_t policy_id = 0;
  RelayPolicy decisions;
  MetricReport report;
  bool ok = true;
  std::string error;
};

// One row per (value, policy) in that order. A failing cell is flagged and the
// sweep carries on. Policy IDs are assigned in row order.
inline std::vector<SweepRow> run_sweep(const SweepSpec& spec, std::size_t jobs = default_jobs(),
                                       PolicyRegistry* registry = nullptr) {
  if (spec.values.empty()) throw DomainError("sweep needs at least one value");
  if (spec.policies.empty()) throw DomainError("sweep needs at least one policy");
  const std::size_t np = spec.policies.size();
  std::vector<SweepRow> rows(spec.values.size() * np);
  const std::size_t inner_jobs = std::max<std::size_t>(1, jobs / spec.values.size());
  parallel_for_with<StationarySolver>(spec.values.size(), jobs, [&](std::size_t v, StationarySolver& solver) {
    const double value = spec.values[v];
    std::optional<Model> model;
    std::string model_error;
    try {
      model = build_model(with_parameter(spec.scenario, spec.parameter, value));
    } catch (const std::exception& e) {
      model_error = e.what();
    }
    for (std::size_t k = 0; k < np; ++k) {
      auto& row = rows[v * np + k];
      row.parameter = spec.parameter;
      row.value = value;
      row.policy = spec.policies[k];
      if (!model) {
        row.ok = false;
        row.error = model_error;
        continue;
      }
      try {
        row.decisions = make_policy(*model, row.policy, inner_jobs);
        row.report = evaluate_policy(*model, row.decisions, solver).report;
      } catch (const std::exception& e) {
        row.ok = false;
        row.error = e.what();
      }
    }
  });
  PolicyRegistry local;
  PolicyRegistry& reg = registry ? *registry : local;
  for (auto& row : rows) {
    if (row.ok) row.policy_id = reg.id(row.decisions);
  }
  return rows;
}

inline const char* sweep_csv_header() {
  return "param_name,param_value,policy,policy_id,s_ideal,s_loc,s_dir,s_rel,s_lost,s_lost_prime,lost_fraction,"
         "relay_fraction";
}

inline void write_sweep_csv(std::ostream& os, const std::vector<SweepRow>& rows) {
  os << sweep_csv_header() << "\n";
  for (const auto& r : rows) {
    os << to_string(r.parameter) << ',' << r.value << ',' << to_string(r.policy) << ',';
    if (r.ok) {
      os << r.policy_id << ',';
      write_metric_csv(os, r.report);
    } else {
      os << "0,nan,nan,nan,nan,nan,nan,nan,nan";
    }
    os << "\n";
  }
}

struct TauSearchOptions {
  double tau_min = 1e-3;
  double tau_max = 1e3;
  // Log-spaced scan points used to bracket the answer and check monotonicity.
  std::size_t scan_points = 13;
  double rel_tol = 0.01;
};

struct TauCheck {
  bool satisfied = false;
  // Distance from the target, expected to be non-increasing in tau.
  double excess = 0.0;
};

struct TauSearchResult {
  std::optional<double> tau;
  bool monotone = true;
  std::size_t evaluations = 0;
};

// Smallest tau in [tau_min, tau_max] (to rel_tol) whose check is satisfied.
inline TauSearchResult search_min_tau(const std::function<TauCheck(double)>& check, const TauSearchOptions& opt = {}) {
  if (!(opt.tau_min > 0.0 && opt.tau_max > opt.tau_min) || opt.scan_points < 2 || !(opt.rel_tol > 0.0)) {
    throw DomainError("invalid tau search options");
  }
  TauSearchResult result;
  std::vector<double> grid(opt.scan_points);
  const double ratio = std::log(opt.tau_max / opt.tau_min);
  for (std::size_t k = 0; k < grid.size(); ++k) {
    grid[k] = opt.tau_min * std::exp(ratio * static_cast<double>(k) / static_cast<double>(grid.size() - 1));
  }
  grid.back() = opt.tau_max;

  std::optional<std::size_t> first;
  double prev_excess = 0.0;
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const auto c = check(grid[k]);
    ++result.evaluations;
    if (k > 0 && c.excess > prev_excess + 1e-9 * std::max(1.0, std::abs(prev_excess))) result.monotone = false;
    prev_excess = c.excess;
    if (c.satisfied && !first) first = k;
  }
  if (!first) return result;
  if (*first == 0) {
    result.tau = grid[0];
    return result;
  }
  double lo = grid[*first - 1];
  double hi = grid[*first];
  while (hi / lo > 1.0 + opt.rel_tol) {
    const double mid = std::sqrt(lo * hi);
    ++result.evaluations;
    (check(mid).satisfied ? hi : lo) = mid;
  }
  result.tau = hi;
  return result;
}

// Smallest tau for which the standard policy loses at most `target` of the
// ideal throughput, without location error.
inline TauSearchResult required_tau(const ScenarioConfig& scenario, double target_lost_fraction, double speed_mps,
                                    const TauSearchOptions& opt = {}) {
  if (!(target_lost_fraction > 0.0 && target_lost_fraction <= 1.0)) throw DomainError("target must lie in (0, 1]");
  ScenarioConfig base = with_parameter(scenario, SweepParameter::SpeedMps, speed_mps);
  base.error.sigma_m = 0.0;
  base.error.bias = {};
  const Model ref = build_model(base);
  const RelayPolicy policy = standard_policy(ref.tables);
  StationarySolver solver;
  return search_min_tau(
      [&](double tau) {
        const Model m = build_model(with_parameter(base, SweepParameter::TauHz, tau), ref.tables);
        const double lost = evaluate_policy(m, policy, solver).report.lost_fraction;
        return TauCheck{lost <= target_lost_fraction, lost - target_lost_fraction};
      },
      opt);
}

// Smallest tau for which a location-based policy beats the best fixed policy
// by the factor gamma_benefit.
inline TauSearchResult required_tau_for_benefit(const ScenarioConfig& scenario, double gamma_benefit, double sigma_m,
                                                PolicyKind policy_kind, const TauSearchOptions& opt = {},
                                                std::size_t jobs = default_jobs()) {
  if (!(gamma_benefit > 1.0)) throw DomainError("benefit threshold must be > 1");
  if (policy_kind != PolicyKind::Standard && policy_kind != PolicyKind::Optimized) {
    throw DomainError("benefit search supports the standard and optimized policies");
  }
  const ScenarioConfig base = with_parameter(scenario, SweepParameter::SigmaM, sigma_m);
  const Model ref = build_model(base);
  StationarySolver solver;
  return search_min_tau(
      [&](double tau) {
        const Model m = build_model(with_parameter(base, SweepParameter::TauHz, tau), ref.tables);
        const RelayPolicy policy =
            policy_kind == PolicyKind::Standard ? standard_policy(m.tables) : optimized_policy(m, jobs);
        const auto r = evaluate_policy(m, policy, solver).report;
        const double ratio = r.s_loc / std::max(r.s_dir, r.s_rel);
        return TauCheck{ratio > gamma_benefit, gamma_benefit - ratio};
      },
      opt);
}

enum class PolicyChange { Added, Removed, Reassigned };

inline std::string to_string(PolicyChange c) {
  switch (c) {
    case PolicyChange::Added: return "added";
    case PolicyChange::Removed: return "removed";
    case PolicyChange::Reassigned: return "reassigned";
  }
  return "added";
}

struct PolicyDiffEntry {
  StateIndex m;
  Vec2 coord;
  PolicyChange change = PolicyChange::Added;
};

struct PolicyDiff {
  std::vector<PolicyDiffEntry> entries;
  std::size_t added = 0;
  std::size_t removed = 0;
  std::size_t reassigned = 0;

  bool empty() const { return entries.empty(); }
};

// Relaying points added, removed or moved to another relay going from a to b.
inline PolicyDiff policy_diff(const GridScenario& scn, const RelayPolicy& a, const RelayPolicy& b) {
  if (a.size() != b.size() || a.size() != scn.size()) throw DomainError("policies differ in size");
  PolicyDiff d;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] == b[i]) continue;
    PolicyChange c = PolicyChange::Reassigned;
    if (a[i] == 0) c = PolicyChange::Added;
    else if (b[i] == 0) c = PolicyChange::Removed;
    const auto m = StateIndex::from_zero_based(i);
    d.entries.push_back({m, scn.index_to_coord(m), c});
    (c == PolicyChange::Added ? d.added : c == PolicyChange::Removed ? d.removed : d.reassigned)++;
  }
  return d;
}

inline void write_diff_csv(std::ostream& os, const PolicyDiff& d) {
  os << "m,x,y,change\n";
  for (const auto& e : d.entries) {
    os << e.m.value() << ',' << e.coord.x << ',' << e.coord.y << ',' << to_string(e.change) << "\n";
  }
}

}  // namespace relaysel
