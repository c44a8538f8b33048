#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <ostream>

#include "relaysel/errors.hpp"
#include "relaysel/relay_policy.hpp"
#include "relaysel/scenario.hpp"

namespace relaysel {

// e(i, j) = Pr[positioning system reports x_j | true coordinate x_i].
struct ErrorMatrix {
  Eigen::MatrixXd e;
  double sigma_m = 0.0;
  Vec2 bias{};

  std::size_t size() const { return static_cast<std::size_t>(e.rows()); }
};

inline ErrorMatrix identity_error(std::size_t n2) {
  if (n2 < 1) throw DomainError("error matrix needs at least one state");
  const auto n = static_cast<Eigen::Index>(n2);
  return {Eigen::MatrixXd::Identity(n, n), 0.0, {}};
}

// Truncated isotropic Gaussian evaluated at grid centres; rows renormalised so
// that mass falling outside the region is discarded.
inline ErrorMatrix gaussian_error(const GridScenario& scn, double sigma_m, Vec2 bias = {}) {
  if (!(sigma_m >= 0.0) || !std::isfinite(sigma_m)) throw DomainError("sigma must be >= 0");
  const std::size_t n2 = scn.size();
  if (sigma_m == 0.0) {
    if (bias.x != 0.0 || bias.y != 0.0) {
      // Degenerate Gaussian centred at x_i + bias: report the nearest grid point.
      ErrorMatrix out{Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n2), static_cast<Eigen::Index>(n2)), 0.0, bias};
      for (std::size_t i = 0; i < n2; ++i) {
        const Vec2 c = scn.index_to_coord(StateIndex::from_zero_based(i));
        const Vec2 lo = scn.lower_corner(), hi = scn.upper_corner();
        const Vec2 shifted{std::clamp(c.x + bias.x, lo.x, hi.x), std::clamp(c.y + bias.y, lo.y, hi.y)};
        out.e(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(scn.coord_to_index(shifted).zero_based())) = 1.0;
      }
      return out;
    }
    return identity_error(n2);
  }

  ErrorMatrix out{Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n2), static_cast<Eigen::Index>(n2)), sigma_m, bias};
  Eigen::VectorXd log_density(static_cast<Eigen::Index>(n2));
  const double two_var = 2.0 * sigma_m * sigma_m;
  for (std::size_t i = 0; i < n2; ++i) {
    const Vec2 c = scn.index_to_coord(StateIndex::from_zero_based(i));
    const Vec2 mean{c.x + bias.x, c.y + bias.y};
    for (std::size_t j = 0; j < n2; ++j) {
      const Vec2 x = scn.index_to_coord(StateIndex::from_zero_based(j));
      const double dx = x.x - mean.x, dy = x.y - mean.y;
      log_density(static_cast<Eigen::Index>(j)) = -(dx * dx + dy * dy) / two_var;
    }
    // Shift by the row maximum so the closest centre has weight 1.
    const double top = log_density.maxCoeff();
    auto row = out.e.row(static_cast<Eigen::Index>(i));
    row = (log_density.array() - top).exp().matrix().transpose();
    const double total = row.sum();
    if (!(total > 0.0)) throw NumericError("location error row " + std::to_string(i + 1) + " is empty");
    row /= total;
  }
  return out;
}

struct PolicyWeights {
  Eigen::VectorXd w_r;
  Eigen::VectorXd w_d;
};

// w_R(x_i) = sum of e(i, j) over the points j where the policy relays.
inline PolicyWeights fold_policy(const ErrorMatrix& err, const RelayPolicy& policy) {
  if (policy.size() != err.size()) throw DomainError("policy size does not match error matrix");
  const auto n = static_cast<Eigen::Index>(err.size());
  Eigen::VectorXd indicator(n);
  for (Eigen::Index j = 0; j < n; ++j) indicator(j) = policy.relays_at(static_cast<std::size_t>(j)) ? 1.0 : 0.0;
  PolicyWeights w;
  w.w_r = (err.e * indicator).cwiseMax(0.0).cwiseMin(1.0);
  w.w_d = (Eigen::VectorXd::Ones(n) - w.w_r);
  return w;
}

inline void write_error_csv(std::ostream& os, const ErrorMatrix& err) {
  os << "i,j,probability\n";
  for (Eigen::Index i = 0; i < err.e.rows(); ++i) {
    for (Eigen::Index j = 0; j < err.e.cols(); ++j) {
      if (err.e(i, j) != 0.0) os << i + 1 << ',' << j + 1 << ',' << err.e(i, j) << '\n';
    }
  }
}

}  // namespace relaysel
