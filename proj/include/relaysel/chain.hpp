#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include "relaysel/errors.hpp"
#include "relaysel/info_forwarding.hpp"
#include "relaysel/mobility.hpp"
#include "relaysel/stationary.hpp"

namespace relaysel {

// Product-space generator over (grid point m, forwarding state s) with flat
// index m * L + s (both zero-based).
struct FullChain {
  SparseGenerator q;
  std::size_t n2 = 0;
  std::size_t l = 0;

  std::size_t size() const { return n2 * l; }
  std::size_t flat(std::size_t m, std::size_t s) const { return m * l + s; }
  std::size_t grid_of(std::size_t flat_index) const { return flat_index / l; }
  std::size_t state_of(std::size_t flat_index) const { return flat_index % l; }
};

struct SteadyState {
  Eigen::VectorXd p;
  double residual = 0.0;
  std::size_t n2 = 0;
  std::size_t l = 0;

  double at(std::size_t m, std::size_t s) const { return p(static_cast<Eigen::Index>(m * l + s)); }

  // Sum over forwarding states per grid point.
  Eigen::VectorXd grid_marginal() const {
    Eigen::VectorXd out = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n2));
    for (std::size_t m = 0; m < n2; ++m) {
      for (std::size_t s = 0; s < l; ++s) out(static_cast<Eigen::Index>(m)) += at(m, s);
    }
    return out;
  }

  // Per grid point, mass on the given forwarding states.
  Eigen::VectorXd mass_on(const std::vector<std::size_t>& states) const {
    Eigen::VectorXd out = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n2));
    for (std::size_t m = 0; m < n2; ++m) {
      for (auto s : states) out(static_cast<Eigen::Index>(m)) += at(m, s);
    }
    return out;
  }
};

// Forwarding templates that replace the shared one at selected grid points.
using TemplateOverrides = std::map<std::size_t, InfoForwardTemplate>;

// Q = Q_mob (x) I_L + blockdiag_m(Q_info(w_D(m), w_R(m))). Mobility moves keep
// the forwarding state; forwarding moves keep the grid point. Zero-valued
// weight arcs stay in the sparsity pattern so successive assemblies share it.
inline FullChain assemble(const MobilityModel& mob, const InfoForwardTemplate& tmpl,
                          const Eigen::VectorXd& w_r, const Eigen::VectorXd& w_d,
                          const TemplateOverrides& overrides = {}) {
  const std::size_t n2 = mob.size();
  const std::size_t l = tmpl.size();
  if (static_cast<std::size_t>(w_r.size()) != n2 || static_cast<std::size_t>(w_d.size()) != n2) {
    throw DomainError("weight vectors must have one entry per grid point");
  }
  for (std::size_t m = 0; m < n2; ++m) {
    const double r = w_r(static_cast<Eigen::Index>(m));
    const double d = w_d(static_cast<Eigen::Index>(m));
    if (!(r >= -1e-12 && r <= 1.0 + 1e-12 && d >= -1e-12 && d <= 1.0 + 1e-12)) {
      throw DomainError("weight at grid point " + std::to_string(m + 1) + " outside [0, 1]");
    }
    if (std::abs(r + d - 1.0) > 1e-9) {
      throw DomainError("w_R + w_D != 1 at grid point " + std::to_string(m + 1));
    }
  }
  for (const auto& [m, t] : overrides) {
    if (m >= n2 || t.size() != l) throw DomainError("template override does not fit the chain");
  }

  FullChain chain;
  chain.n2 = n2;
  chain.l = l;
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(static_cast<std::size_t>(mob.q_mob.nonZeros()) * l + n2 * tmpl.entries.size());

  for (Eigen::Index m = 0; m < mob.q_mob.outerSize(); ++m) {
    for (SparseGenerator::InnerIterator it(mob.q_mob, m); it; ++it) {
      const auto from = static_cast<std::size_t>(it.row());
      const auto to = static_cast<std::size_t>(it.col());
      for (std::size_t s = 0; s < l; ++s) {
        trips.emplace_back(static_cast<Eigen::Index>(chain.flat(from, s)),
                           static_cast<Eigen::Index>(chain.flat(to, s)), it.value());
      }
    }
  }
  for (std::size_t m = 0; m < n2; ++m) {
    const auto found = overrides.find(m);
    const InfoForwardTemplate& t = found == overrides.end() ? tmpl : found->second;
    const double wd = std::clamp(w_d(static_cast<Eigen::Index>(m)), 0.0, 1.0);
    const double wr = std::clamp(w_r(static_cast<Eigen::Index>(m)), 0.0, 1.0);
    for (const auto& e : t.entries) {
      trips.emplace_back(static_cast<Eigen::Index>(chain.flat(m, e.from)),
                         static_cast<Eigen::Index>(chain.flat(m, e.to)), e.rate(wd, wr));
    }
  }
  const auto n = static_cast<Eigen::Index>(chain.size());
  chain.q.resize(n, n);
  chain.q.setFromTriplets(trips.begin(), trips.end());
  chain.q.makeCompressed();
  return chain;
}

inline SteadyState solve_steady_state(const FullChain& chain, StationarySolver& solver) {
  auto result = solver.solve(chain.q);
  return {std::move(result.p), result.residual, chain.n2, chain.l};
}

inline SteadyState solve_steady_state(const FullChain& chain) {
  StationarySolver solver;
  return solve_steady_state(chain, solver);
}

}  // namespace relaysel
