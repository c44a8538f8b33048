#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "relaysel/relaysel.hpp"

namespace testsupport {

inline std::filesystem::path scenario_path(const std::string& name) {
  return std::filesystem::path(RELAYSEL_SCENARIO_DIR) / name;
}

// Small hand-rolled generators for property tests.
class Gen {
 public:
  explicit Gen(std::uint64_t seed) : rng_(seed) {}

  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
  std::size_t index(std::size_t lo, std::size_t hi) { return std::uniform_int_distribution<std::size_t>(lo, hi)(rng_); }
  bool coin(double p = 0.5) { return uniform(0.0, 1.0) < p; }

  relaysel::GridScenario grid(std::size_t max_side = 5) {
    relaysel::GridScenario g;
    do {
      g.nx = index(1, max_side);
      g.ny = index(1, max_side);
    } while (g.nx * g.ny < 2);
    g.spacing_m = uniform(0.5, 20.0);
    g.origin = {uniform(-50.0, 50.0), uniform(-50.0, 50.0)};
    g.ap_coord = g.lower_corner();
    g.dest_coord = g.upper_corner();
    return g;
  }

  relaysel::RelayPolicy policy(std::size_t n2, std::uint8_t max_decision = 1) {
    relaysel::RelayPolicy p(n2);
    for (auto& d : p.decisions) d = static_cast<std::uint8_t>(index(0, max_decision));
    return p;
  }

  // Non-negative tables with one relay column per relay.
  relaysel::ThroughputTableSet tables(std::size_t n2, std::size_t relays = 1, bool constant_direct = false) {
    relaysel::ThroughputTableSet t;
    t.t_direct.resize(static_cast<Eigen::Index>(n2));
    const double c = uniform(0.5, 10.0);
    for (Eigen::Index i = 0; i < t.t_direct.size(); ++i) t.t_direct(i) = constant_direct ? c : uniform(0.0, 10.0);
    for (std::size_t r = 0; r < relays; ++r) {
      Eigen::VectorXd v(static_cast<Eigen::Index>(n2));
      for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = uniform(0.0, 10.0);
      t.t_relay.push_back(v);
    }
    return t;
  }

  std::mt19937_64& engine() { return rng_; }

 private:
  std::mt19937_64 rng_;
};

// Stationary vector of a small dense generator via the null space of Q^T.
inline Eigen::VectorXd dense_stationary(const Eigen::MatrixXd& q) {
  Eigen::FullPivLU<Eigen::MatrixXd> lu(q.transpose());
  const Eigen::MatrixXd ns = lu.kernel();
  Eigen::VectorXd p = ns.col(0);
  p /= p.sum();
  return p;
}

inline Eigen::MatrixXd to_dense(const relaysel::SparseGenerator& q) { return Eigen::MatrixXd(q); }

}  // namespace testsupport
