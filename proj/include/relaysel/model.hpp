#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>

#include "relaysel/chain.hpp"
#include "relaysel/config.hpp"
#include "relaysel/errors.hpp"
#include "relaysel/info_forwarding.hpp"
#include "relaysel/location_error.hpp"
#include "relaysel/metrics.hpp"
#include "relaysel/mobility.hpp"
#include "relaysel/parallel.hpp"
#include "relaysel/policy.hpp"
#include "relaysel/radio.hpp"
#include "relaysel/relay_policy.hpp"

namespace relaysel {

// Everything derived from a scenario that does not depend on the policy.
struct Model {
  ScenarioConfig config;
  MobilityModel mobility;
  InfoForwardTemplate tmpl;
  ErrorMatrix error;
  ThroughputTableSet tables;
  StateSets sets;

  std::size_t size() const { return mobility.size(); }
};

inline ThroughputTableSet scenario_tables(const ScenarioConfig& cfg) {
  if (cfg.throughput_map.empty()) return build_tables(cfg.grid, cfg.radio);
  auto t = load_throughput_map(cfg.throughput_map_path(), cfg.grid);
  if (t.relay_count() != cfg.grid.relay_count()) {
    throw DomainError("throughput map has " + std::to_string(t.relay_count()) + " relay columns, scenario has " +
                      std::to_string(cfg.grid.relay_count()) + " relays");
  }
  return t;
}

// Builds the model; tables can be passed in to skip the radio model or map.
inline Model build_model(const ScenarioConfig& cfg, std::optional<ThroughputTableSet> tables = std::nullopt) {
  cfg.grid.validate();
  Model m;
  m.config = cfg;
  m.mobility = cfg.grid.walls.empty() ? build_open_grid(cfg.grid, cfg.speed_mps) : build_walled_grid(cfg.grid, cfg.speed_mps);
  m.tmpl = build_template(cfg.updates.queue_size, cfg.updates.tau_hz, cfg.updates.mu_hz, cfg.updates.p_loss);
  m.error = gaussian_error(cfg.grid, cfg.error.sigma_m, cfg.error.bias);
  m.tables = tables ? std::move(*tables) : scenario_tables(cfg);
  m.tables.validate();
  if (m.tables.size() != cfg.grid.size()) throw DomainError("throughput tables do not cover the grid");
  m.sets = state_sets(m.tmpl);
  return m;
}

struct Evaluation {
  SteadyState steady;
  MetricReport report;
};

// Solves the full chain under a single-relay policy and reports all metrics.
inline Evaluation evaluate_policy(const Model& model, const RelayPolicy& policy, StationarySolver& solver) {
  if (policy.size() != model.size()) throw DomainError("policy does not cover the grid");
  if (policy.max_decision() > 1 || model.tables.relay_count() < 1) {
    throw DomainError("chain evaluation needs a single-relay policy");
  }
  const auto w = fold_policy(model.error, policy);
  Evaluation ev;
  ev.steady = solve_steady_state(assemble(model.mobility, model.tmpl, w.w_r, w.w_d), solver);
  ev.report = make_report(model.mobility.p_mob, model.tables, policy, s_loc(ev.steady, model.tables, model.sets));
  return ev;
}

inline Evaluation evaluate_policy(const Model& model, const RelayPolicy& policy) {
  StationarySolver solver;
  return evaluate_policy(model, policy, solver);
}

enum class PolicyKind { Standard, Inverse, Optimized, AlwaysDirect, AlwaysRelay, Heuristic, File };

inline std::string to_string(PolicyKind k) {
  switch (k) {
    case PolicyKind::Standard: return "standard";
    case PolicyKind::Inverse: return "inverse";
    case PolicyKind::Optimized: return "optimized";
    case PolicyKind::AlwaysDirect: return "always-direct";
    case PolicyKind::AlwaysRelay: return "always-relay";
    case PolicyKind::Heuristic: return "heuristic";
    case PolicyKind::File: return "file";
  }
  return "standard";
}

struct PolicySpec {
  PolicyKind kind = PolicyKind::Standard;
  std::filesystem::path file;

  friend bool operator==(const PolicySpec&, const PolicySpec&) = default;
};

// Parses standard|inverse|optimized|always-direct|always-relay|heuristic|file:PATH
inline PolicySpec parse_policy_spec(const std::string& s) {
  if (s.rfind("file:", 0) == 0) {
    if (s.size() == 5) throw DomainError("file: policy needs a path");
    return {PolicyKind::File, s.substr(5)};
  }
  for (auto k : {PolicyKind::Standard, PolicyKind::Inverse, PolicyKind::Optimized, PolicyKind::AlwaysDirect,
                 PolicyKind::AlwaysRelay, PolicyKind::Heuristic}) {
    if (s == to_string(k)) return {k, {}};
  }
  throw DomainError("unknown policy '" + s + "'");
}

inline std::string to_string(const PolicySpec& p) {
  return p.kind == PolicyKind::File ? "file:" + p.file.string() : to_string(p.kind);
}

// Conditional belief matrix of the scenario's (first) mobile node.
inline ConditionalMatrix scenario_conditional(const Model& model, std::size_t jobs = default_jobs()) {
  return conditional_matrix(model.mobility, model.tmpl, model.error, jobs);
}

inline RelayPolicy optimized_policy(const Model& model, std::size_t jobs = default_jobs()) {
  const auto c = scenario_conditional(model, jobs);
  if (model.config.grid.mobility_role == MobilityRole::MobileRelay) {
    if (model.tables.relay_count() != 1) {
      throw DomainError("a single policy vector needs one mobile relay; use decision tables for several");
    }
    return optimize_mobile_relay({c}, model.tables).single_relay_policy();
  }
  return optimize_mobile_destination(c, model.tables);
}

inline RelayPolicy make_policy(const Model& model, const PolicySpec& spec, std::size_t jobs = default_jobs()) {
  const std::size_t n2 = model.size();
  switch (spec.kind) {
    case PolicyKind::Standard: return standard_policy(model.tables);
    case PolicyKind::Inverse: return inverse_policy(standard_policy(model.tables));
    case PolicyKind::Optimized: return optimized_policy(model, jobs);
    case PolicyKind::AlwaysDirect: return always_direct(n2);
    case PolicyKind::AlwaysRelay: return always_relay(n2);
    case PolicyKind::Heuristic: {
      if (!model.config.heuristic_rect) throw DomainError("scenario defines no heuristic rectangle");
      return heuristic_rect_policy(model.config.grid, model.config.heuristic_rect->lo, model.config.heuristic_rect->hi);
    }
    case PolicyKind::File: {
      std::ifstream in(spec.file);
      if (!in) throw ParseError(spec.file.string(), 0, "", "cannot open policy file");
      return read_policy_csv(in, n2, spec.file.string());
    }
  }
  throw DomainError("unknown policy kind");
}

}  // namespace relaysel
