#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <cstddef>
#include <ostream>
#include <vector>

#include "relaysel/errors.hpp"
#include "relaysel/scenario.hpp"
#include "relaysel/stationary.hpp"

namespace relaysel {

// Spatial CTMC of the mobile node. Every state leaves at rate mu_m, split
// equally among its reachable 4-neighbours.
struct MobilityModel {
  SparseGenerator q_mob;
  double mu_m = 0.0;
  Eigen::VectorXd p_mob;

  std::size_t size() const { return static_cast<std::size_t>(q_mob.rows()); }

  double leaving_rate(std::size_t m) const { return -q_mob.coeff(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m)); }
};

// Mean holding time 1/mu_m per hop of length d gives speed d * mu_m.
inline double mobility_rate(double avg_speed_mps, double spacing_m) {
  return avg_speed_mps / spacing_m;
}

namespace detail {

inline MobilityModel build_mobility(const GridScenario& scn, double avg_speed_mps) {
  if (!(avg_speed_mps > 0.0)) throw DomainError("average speed must be > 0");
  if (scn.size() < 2) throw DomainError("mobility needs at least 2 grid points");
  if (!(scn.spacing_m > 0.0)) throw DomainError("spacing_m must be > 0");

  MobilityModel mob;
  mob.mu_m = mobility_rate(avg_speed_mps, scn.spacing_m);
  const std::size_t n = scn.size();
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(5 * n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto m = StateIndex::from_zero_based(i);
    const auto nb = scn.neighbours(m);
    if (nb.empty()) {
      throw DomainError("grid point " + std::to_string(m.value()) + " has no reachable neighbour");
    }
    const double share = mob.mu_m / static_cast<double>(nb.size());
    for (const auto& t : nb) {
      trips.emplace_back(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(t.zero_based()), share);
    }
    trips.emplace_back(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i), -mob.mu_m);
  }
  mob.q_mob.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  mob.q_mob.setFromTriplets(trips.begin(), trips.end());
  mob.q_mob.makeCompressed();

  const auto closed = closed_classes(mob.q_mob);
  if (closed.size() != 1) {
    // Undirected moves: any split means some state cannot be reached.
    const std::size_t s = closed.size() > 1 ? closed[1] : 0;
    throw ReducibleChainError(s, "grid is disconnected; state " + std::to_string(s + 1) +
                                     " is unreachable from state 1");
  }
  mob.p_mob = stationary_distribution(mob.q_mob).p;
  return mob;
}

}  // namespace detail

inline MobilityModel build_open_grid(GridScenario scn, double avg_speed_mps) {
  scn.walls.clear();
  return detail::build_mobility(scn, avg_speed_mps);
}

inline MobilityModel build_walled_grid(const GridScenario& scn, double avg_speed_mps) {
  return detail::build_mobility(scn, avg_speed_mps);
}

// Coordinate-list dump, 1-based indices.
inline void dump_generator(std::ostream& os, const SparseGenerator& q) {
  os << "row,col,rate\n";
  for (Eigen::Index i = 0; i < q.outerSize(); ++i) {
    for (SparseGenerator::InnerIterator it(q, i); it; ++it) {
      os << it.row() + 1 << ',' << it.col() + 1 << ',' << it.value() << '\n';
    }
  }
}

}  // namespace relaysel
