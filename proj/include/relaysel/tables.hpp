#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <vector>

#include "relaysel/errors.hpp"

namespace relaysel {

// Expected throughput (Mbit/s) per grid point of the mobile node, for direct
// transmission (option 0) and via each relay candidate (options 1..K).
struct ThroughputTableSet {
  Eigen::VectorXd t_direct;
  std::vector<Eigen::VectorXd> t_relay;

  std::size_t size() const { return static_cast<std::size_t>(t_direct.size()); }
  std::size_t relay_count() const { return t_relay.size(); }
  std::size_t option_count() const { return 1 + t_relay.size(); }

  const Eigen::VectorXd& option(std::size_t n) const {
    if (n > t_relay.size()) throw DomainError("throughput option out of range");
    return n == 0 ? t_direct : t_relay[n - 1];
  }

  // Pointwise maximum over all options.
  Eigen::VectorXd best() const {
    Eigen::VectorXd out = t_direct;
    for (const auto& t : t_relay) out = out.cwiseMax(t);
    return out;
  }

  void validate() const {
    for (std::size_t n = 0; n < option_count(); ++n) {
      const auto& t = option(n);
      if (static_cast<std::size_t>(t.size()) != size()) throw DomainError("throughput tables differ in length");
      for (Eigen::Index m = 0; m < t.size(); ++m) {
        if (!std::isfinite(t(m)) || t(m) < 0.0) throw DomainError("throughput values must be finite and >= 0");
      }
    }
  }
};

}  // namespace relaysel
