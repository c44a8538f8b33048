#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <ostream>
#include <string>

#include "relaysel/chain.hpp"
#include "relaysel/errors.hpp"
#include "relaysel/info_forwarding.hpp"
#include "relaysel/relay_policy.hpp"
#include "relaysel/tables.hpp"

namespace relaysel {

// All throughputs in Mbit/s.
struct MetricReport {
  double s_ideal = 0.0;
  double s_loc = 0.0;
  double s_dir = 0.0;
  double s_rel = 0.0;
  double s_lost = 0.0;
  double s_lost_prime = 0.0;
  double lost_fraction = 0.0;
  double relay_fraction = 0.0;
};

namespace detail {

inline void check_dims(const Eigen::VectorXd& p_mob, const ThroughputTableSet& tables) {
  if (static_cast<std::size_t>(p_mob.size()) != tables.size()) {
    throw DomainError("steady state and throughput tables differ in grid size");
  }
}

}  // namespace detail

// Perfect, instantaneous information with the pointwise best option.
inline double s_ideal(const Eigen::VectorXd& p_mob, const ThroughputTableSet& tables) {
  detail::check_dims(p_mob, tables);
  return p_mob.dot(tables.best());
}

// Perfect, instantaneous information applied to a given policy.
inline double s_ideal(const Eigen::VectorXd& p_mob, const ThroughputTableSet& tables, const RelayPolicy& policy) {
  detail::check_dims(p_mob, tables);
  if (policy.size() != tables.size()) throw DomainError("policy size does not match tables");
  double s = 0.0;
  for (std::size_t m = 0; m < policy.size(); ++m) {
    s += p_mob(static_cast<Eigen::Index>(m)) * tables.option(policy[m])(static_cast<Eigen::Index>(m));
  }
  return s;
}

inline double s_dir(const Eigen::VectorXd& p_mob, const ThroughputTableSet& tables) {
  detail::check_dims(p_mob, tables);
  return p_mob.dot(tables.t_direct);
}

inline double s_rel(const Eigen::VectorXd& p_mob, const ThroughputTableSet& tables, std::size_t relay = 1) {
  detail::check_dims(p_mob, tables);
  return p_mob.dot(tables.option(relay));
}

// Throughput of the single-relay chain: D-view mass earns T_D, R-view mass T_R.
inline double s_loc(const SteadyState& steady, const ThroughputTableSet& tables, const StateSets& sets) {
  if (steady.n2 != tables.size()) throw DomainError("steady state and throughput tables differ in grid size");
  if (tables.relay_count() < 1) throw DomainError("s_loc needs a relay throughput table");
  const Eigen::VectorXd d_mass = steady.mass_on(sets.d_view);
  const Eigen::VectorXd r_mass = steady.mass_on(sets.r_view);
  return d_mass.dot(tables.t_direct) + r_mass.dot(tables.t_relay.front());
}

inline double s_lost(double s_ideal_opt, double s_loc_pi) { return s_ideal_opt - s_loc_pi; }

// May be negative for poor policies.
inline double s_lost_prime(double s_ideal_pi, double s_loc_pi) { return s_ideal_pi - s_loc_pi; }

inline double relay_fraction(const RelayPolicy& policy) {
  return policy.size() == 0 ? 0.0 : static_cast<double>(policy.relay_points()) / static_cast<double>(policy.size());
}

// Full report for a policy given the chain solved under that policy.
inline MetricReport make_report(const Eigen::VectorXd& p_mob, const ThroughputTableSet& tables,
                                const RelayPolicy& policy, double s_loc_value) {
  MetricReport r;
  r.s_ideal = s_ideal(p_mob, tables);
  r.s_loc = s_loc_value;
  r.s_dir = s_dir(p_mob, tables);
  r.s_rel = s_rel(p_mob, tables);
  r.s_lost = s_lost(r.s_ideal, r.s_loc);
  r.s_lost_prime = s_lost_prime(s_ideal(p_mob, tables, policy), r.s_loc);
  r.lost_fraction = r.s_ideal > 0.0 ? r.s_lost / r.s_ideal : 0.0;
  r.relay_fraction = relay_fraction(policy);
  return r;
}

inline const char* metric_csv_header() {
  return "s_ideal,s_loc,s_dir,s_rel,s_lost,s_lost_prime,lost_fraction,relay_fraction";
}

inline void write_metric_csv(std::ostream& os, const MetricReport& r) {
  os << r.s_ideal << ',' << r.s_loc << ',' << r.s_dir << ',' << r.s_rel << ',' << r.s_lost << ',' << r.s_lost_prime
     << ',' << r.lost_fraction << ',' << r.relay_fraction;
}

}  // namespace relaysel
