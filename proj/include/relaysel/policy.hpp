#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <ostream>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "relaysel/chain.hpp"
#include "relaysel/config.hpp"
#include "relaysel/errors.hpp"
#include "relaysel/info_forwarding.hpp"
#include "relaysel/location_error.hpp"
#include "relaysel/mobility.hpp"
#include "relaysel/parallel.hpp"
#include "relaysel/relay_policy.hpp"
#include "relaysel/scenario.hpp"
#include "relaysel/tables.hpp"

namespace relaysel {

inline constexpr double kUnsupportedBelief = 1e-12;

inline RelayPolicy always_direct(std::size_t n2) { return RelayPolicy(n2, 0); }
inline RelayPolicy always_relay(std::size_t n2, RelayPolicy::Decision relay = 1) { return RelayPolicy(n2, relay); }

// Pointwise best option for the believed position; ties prefer direct, then
// the lowest relay index.
inline RelayPolicy standard_policy(const ThroughputTableSet& tables) {
  RelayPolicy p(tables.size());
  for (std::size_t m = 0; m < tables.size(); ++m) {
    const auto i = static_cast<Eigen::Index>(m);
    double best = tables.t_direct(i);
    for (std::size_t n = 1; n < tables.option_count(); ++n) {
      if (tables.option(n)(i) > best) {
        best = tables.option(n)(i);
        p[m] = static_cast<RelayPolicy::Decision>(n);
      }
    }
  }
  return p;
}

inline RelayPolicy inverse_policy(const RelayPolicy& p) {
  if (p.max_decision() > 1) throw DomainError("inverse policy is only defined for a single relay");
  RelayPolicy out = p;
  for (auto& d : out.decisions) d = d == 0 ? 1 : 0;
  return out;
}

// Relay inside the closed rectangle [lo, hi] (metres), direct elsewhere.
inline RelayPolicy heuristic_rect_policy(const GridScenario& scn, Vec2 lo, Vec2 hi) {
  const Vec2 glo = scn.lower_corner();
  const Vec2 ghi = scn.upper_corner();
  const auto inside = [](Vec2 p, Vec2 a, Vec2 b, double eps) {
    return p.x >= a.x - eps && p.x <= b.x + eps && p.y >= a.y - eps && p.y <= b.y + eps;
  };
  if (!(lo.x <= hi.x && lo.y <= hi.y)) throw DomainError("rectangle corners are not ordered");
  if (!inside(lo, glo, ghi, 1e-9) || !inside(hi, glo, ghi, 1e-9)) {
    throw DomainError("rectangle corners outside the grid");
  }
  RelayPolicy p(scn.size());
  const double eps = 1e-9 * scn.spacing_m;
  for (std::size_t m = 0; m < scn.size(); ++m) {
    if (inside(scn.index_to_coord(StateIndex::from_zero_based(m)), lo, hi, eps)) p[m] = 1;
  }
  return p;
}

inline RelayPolicy singleton_policy(StateIndex i, std::size_t n2) {
  if (i.value() < 1 || i.value() > n2) throw DomainError("singleton index out of range");
  RelayPolicy p(n2);
  p[i.zero_based()] = 1;
  return p;
}

// joint(i, j) = Pr[X = x_j, X^ = x_i]; c(i, j) = Pr[X = x_j | X^ = x_i] for
// supported rows (support > kUnsupportedBelief), zero otherwise.
struct ConditionalMatrix {
  Eigen::MatrixXd c;
  Eigen::MatrixXd joint;
  Eigen::VectorXd support;

  std::size_t size() const { return static_cast<std::size_t>(c.rows()); }
  bool supported(std::size_t i) const { return support(static_cast<Eigen::Index>(i)) > kUnsupportedBelief; }
};

inline ConditionalMatrix normalise_joint(Eigen::MatrixXd joint) {
  ConditionalMatrix out;
  out.support = joint.rowwise().sum();
  out.c = Eigen::MatrixXd::Zero(joint.rows(), joint.cols());
  for (Eigen::Index i = 0; i < joint.rows(); ++i) {
    if (out.support(i) > kUnsupportedBelief) out.c.row(i) = joint.row(i) / out.support(i);
  }
  out.joint = std::move(joint);
  return out;
}

// For each believed point i, relays only at x_i and reads the R-view mass per
// true point off the steady state. The reported-position process does not
// depend on the policy, so each solve isolates one belief value.
inline ConditionalMatrix conditional_matrix(const MobilityModel& mob, const InfoForwardTemplate& tmpl,
                                            const ErrorMatrix& err, std::size_t jobs = default_jobs()) {
  const std::size_t n2 = mob.size();
  if (err.size() != n2) throw DomainError("error matrix does not match the mobility model");
  const StateSets sets = state_sets(tmpl);
  Eigen::MatrixXd joint = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n2), static_cast<Eigen::Index>(n2));
  parallel_for_with<StationarySolver>(n2, jobs, [&](std::size_t i, StationarySolver& solver) {
    const auto w = fold_policy(err, singleton_policy(StateIndex::from_zero_based(i), n2));
    const auto steady = solve_steady_state(assemble(mob, tmpl, w.w_r, w.w_d), solver);
    joint.row(static_cast<Eigen::Index>(i)) = steady.mass_on(sets.r_view).transpose();
  });
  return normalise_joint(std::move(joint));
}

// Expected throughput of each option for every believed point:
// gamma(n, i) = sum_j T_n(x_j) c(i, j). Unsupported beliefs fall back to
// T_n(x_i).
inline Eigen::MatrixXd expected_option_throughput(const ConditionalMatrix& c, const ThroughputTableSet& tables) {
  if (c.size() != tables.size()) throw DomainError("conditional matrix does not match the tables");
  const auto n2 = static_cast<Eigen::Index>(tables.size());
  Eigen::MatrixXd gamma(static_cast<Eigen::Index>(tables.option_count()), n2);
  for (std::size_t n = 0; n < tables.option_count(); ++n) {
    gamma.row(static_cast<Eigen::Index>(n)) = (c.c * tables.option(n)).transpose();
  }
  for (Eigen::Index i = 0; i < n2; ++i) {
    if (c.supported(static_cast<std::size_t>(i))) continue;
    for (std::size_t n = 0; n < tables.option_count(); ++n) {
      gamma(static_cast<Eigen::Index>(n), i) = tables.option(n)(i);
    }
  }
  return gamma;
}

inline std::size_t argmax_prefer_low(const Eigen::VectorXd& v) {
  std::size_t best = 0;
  for (Eigen::Index n = 1; n < v.size(); ++n) {
    if (v(n) > v(static_cast<Eigen::Index>(best))) best = static_cast<std::size_t>(n);
  }
  return best;
}

// Per believed point, the option with the highest conditional expected
// throughput.
inline RelayPolicy optimize_mobile_destination(const ConditionalMatrix& c, const ThroughputTableSet& tables) {
  const Eigen::MatrixXd gamma = expected_option_throughput(c, tables);
  RelayPolicy p(tables.size());
  for (Eigen::Index i = 0; i < gamma.cols(); ++i) {
    p[static_cast<std::size_t>(i)] = static_cast<RelayPolicy::Decision>(argmax_prefer_low(gamma.col(i)));
  }
  return p;
}

// Row 0 is direct transmission; row r the expected throughput via mobile relay
// r when that relay is believed at x_i.
struct ThroughputDecisionTables {
  Eigen::MatrixXd gamma;

  std::size_t relay_count() const { return static_cast<std::size_t>(gamma.rows()) - 1; }

  // believed[r - 1] is the believed grid point (zero-based) of relay r. Direct
  // uses the value at the first relay's belief (constant when D is static).
  std::size_t select(std::span<const std::size_t> believed) const {
    if (believed.size() != relay_count()) throw DomainError("need one believed position per relay");
    std::size_t best = 0;
    double best_v = gamma(0, static_cast<Eigen::Index>(believed.empty() ? 0 : believed[0]));
    for (std::size_t r = 1; r <= relay_count(); ++r) {
      const double v = gamma(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(believed[r - 1]));
      if (v > best_v) {
        best_v = v;
        best = r;
      }
    }
    return best;
  }

  // Binary policy for a single mobile relay.
  RelayPolicy single_relay_policy() const {
    if (relay_count() != 1) throw DomainError("single_relay_policy needs exactly one relay");
    RelayPolicy p(static_cast<std::size_t>(gamma.cols()));
    for (Eigen::Index i = 0; i < gamma.cols(); ++i) p[static_cast<std::size_t>(i)] = gamma(1, i) > gamma(0, i) ? 1 : 0;
    return p;
  }
};

inline ThroughputDecisionTables optimize_mobile_relay(const std::vector<ConditionalMatrix>& c_per_relay,
                                                      const ThroughputTableSet& tables) {
  if (c_per_relay.size() != tables.relay_count() || c_per_relay.empty()) {
    throw DomainError("need one conditional matrix per mobile relay");
  }
  ThroughputDecisionTables out;
  const auto n2 = static_cast<Eigen::Index>(tables.size());
  out.gamma.resize(static_cast<Eigen::Index>(tables.option_count()), n2);
  for (std::size_t r = 0; r <= tables.relay_count(); ++r) {
    const auto& c = c_per_relay[r == 0 ? 0 : r - 1];
    if (c.size() != tables.size()) throw DomainError("conditional matrix does not match the tables");
    const Eigen::VectorXd& t = tables.option(r);
    Eigen::VectorXd row = c.c * t;
    for (Eigen::Index i = 0; i < n2; ++i) {
      if (!c.supported(static_cast<std::size_t>(i))) row(i) = t(i);
    }
    out.gamma.row(static_cast<Eigen::Index>(r)) = row.transpose();
  }
  return out;
}

// Mean throughput of any policy (including multi-relay ones) from the joint
// belief/truth distribution.
inline double expected_throughput(const ConditionalMatrix& c, const ThroughputTableSet& tables,
                                  const RelayPolicy& policy) {
  if (policy.size() != tables.size() || c.size() != tables.size()) throw DomainError("size mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < policy.size(); ++i) {
    s += c.joint.row(static_cast<Eigen::Index>(i)).dot(tables.option(policy[i]));
  }
  return s;
}

// Assigns consecutive IDs from 1 in order of first registration.
class PolicyRegistry {
 public:
  std::size_t id(const RelayPolicy& p) {
    const auto [it, inserted] = ids_.try_emplace(p, ids_.size() + 1);
    if (inserted) order_.push_back(p);
    return it->second;
  }

  std::size_t size() const { return order_.size(); }
  const RelayPolicy& policy(std::size_t id) const { return order_.at(id - 1); }

 private:
  std::unordered_map<RelayPolicy, std::size_t, RelayPolicyHash> ids_;
  std::vector<RelayPolicy> order_;
};

inline void write_policy_csv(std::ostream& os, const RelayPolicy& p) {
  os << "m,decision\n";
  for (std::size_t m = 0; m < p.size(); ++m) os << m + 1 << ',' << static_cast<int>(p[m]) << '\n';
}

inline RelayPolicy read_policy_csv(std::istream& in, std::size_t n2, const std::string& source = "<policy>") {
  std::string line;
  std::size_t line_no = 1;
  if (!std::getline(in, line) || detail::trim(line) != "m,decision") {
    throw ParseError(source, 1, "header", "expected 'm,decision'");
  }
  RelayPolicy p(n2);
  std::vector<bool> seen(n2, false);
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::trim(line).empty()) continue;
    const auto cols = detail::split(line, ',');
    if (cols.size() != 2) throw ParseError(source, line_no, "", "expected 2 columns");
    const auto m = detail::to_uint(cols[0]);
    const auto d = detail::to_uint(cols[1]);
    if (!m || *m < 1 || *m > n2) throw ParseError(source, line_no, "m", "grid index out of range");
    if (!d || *d > 255) throw ParseError(source, line_no, "decision", "invalid decision");
    if (seen[*m - 1]) throw ParseError(source, line_no, "m", "duplicate grid point");
    seen[*m - 1] = true;
    p[*m - 1] = static_cast<RelayPolicy::Decision>(*d);
  }
  for (std::size_t i = 0; i < n2; ++i) {
    if (!seen[i]) throw ParseError(source, line_no, "m", "missing grid point " + std::to_string(i + 1));
  }
  return p;
}

inline void write_gamma_csv(std::ostream& os, const ThroughputDecisionTables& t) {
  os << "r,m,gamma_mbps\n";
  for (Eigen::Index r = 0; r < t.gamma.rows(); ++r) {
    for (Eigen::Index m = 0; m < t.gamma.cols(); ++m) os << r << ',' << m + 1 << ',' << t.gamma(r, m) << '\n';
  }
}

}  // namespace relaysel
