#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "relaysel/errors.hpp"
#include "relaysel/scenario.hpp"
#include "relaysel/tables.hpp"

namespace relaysel {

struct RateEntry {
  double phy_rate_mbps = 6.0;
  double snr_threshold_db = 4.0;
  double overhead_us = 0.0;

  friend bool operator==(const RateEntry&, const RateEntry&) = default;
};

// How the fallback attempt of each relay hop picks its rate.
enum class SecondaryRate { Robust, Same, NextLower };

inline std::string to_string(SecondaryRate s) {
  switch (s) {
    case SecondaryRate::Robust: return "robust";
    case SecondaryRate::Same: return "same";
    case SecondaryRate::NextLower: return "next_lower";
  }
  return "robust";
}

// The eight OFDM rates of 802.11a/g. Thresholds follow the receiver
// sensitivity steps between rates; overheads are DIFS + mean backoff +
// preamble + SIFS + ACK plus the MAC header at the data rate.
inline std::vector<RateEntry> default_rate_table() {
  return {{6, 4, 219},   {9, 5, 207},   {12, 7, 201},  {18, 9, 194},
          {24, 12, 191}, {36, 16, 188}, {48, 20, 187}, {54, 21, 186}};
}

struct LinkModelParams {
  double pl_d0_db = 47.0;
  double d0_m = 1.0;
  double n_exp = 2.9;
  double tx_power_dbm = 4.0;
  double noise_floor_dbm = -95.0;
  // Informational; fading enters through snr_scale_db.
  double ricean_k = 6.0;
  int b_msdu_bytes = 1500;
  // Width of the logistic frame-success curve around each threshold.
  double snr_scale_db = 1.0;
  // Extra attenuation per wall crossed by a link.
  double wall_loss_db = 0.0;
  std::vector<RateEntry> rate_table = default_rate_table();
  SecondaryRate secondary = SecondaryRate::Robust;

  friend bool operator==(const LinkModelParams&, const LinkModelParams&) = default;

  void validate() const {
    if (!(d0_m > 0.0)) throw DomainError("d0_m must be > 0");
    if (!(n_exp > 0.0)) throw DomainError("path loss exponent must be > 0");
    if (!(ricean_k >= 0.0)) throw DomainError("ricean_k must be >= 0");
    if (b_msdu_bytes <= 0) throw DomainError("b_msdu_bytes must be > 0");
    if (!(snr_scale_db > 0.0)) throw DomainError("snr_scale_db must be > 0");
    if (!(wall_loss_db >= 0.0)) throw DomainError("wall_loss_db must be >= 0");
    if (rate_table.empty()) throw DomainError("rate table is empty");
    for (std::size_t i = 0; i < rate_table.size(); ++i) {
      const auto& r = rate_table[i];
      if (!(r.phy_rate_mbps > 0.0) || !(r.overhead_us >= 0.0)) throw DomainError("invalid rate table entry");
      if (i > 0 && !(r.phy_rate_mbps > rate_table[i - 1].phy_rate_mbps)) {
        throw DomainError("rate table must be sorted by ascending rate");
      }
      if (i > 0 && !(r.snr_threshold_db > rate_table[i - 1].snr_threshold_db)) {
        throw DomainError("SNR thresholds must increase with rate");
      }
    }
  }
};

// Log-distance path loss in dB.
inline double path_loss_db(const LinkModelParams& params, double d_m) {
  if (!(d_m > 0.0)) throw DomainError("link distance must be > 0");
  return params.pl_d0_db + 10.0 * params.n_exp * std::log10(d_m / params.d0_m);
}

struct LinkAttempt {
  double p_suc = 0.0;
  double e_t_tx_s = 0.0;
};

inline LinkAttempt link_success(const LinkModelParams& params, double pl_db, std::size_t rate_index) {
  if (rate_index >= params.rate_table.size()) throw DomainError("rate index out of range");
  const auto& rate = params.rate_table[rate_index];
  const double snr = params.tx_power_dbm - pl_db - params.noise_floor_dbm;
  double p = 1.0 / (1.0 + std::exp(-(snr - rate.snr_threshold_db) / params.snr_scale_db));
  if (!std::isfinite(p)) p = snr > rate.snr_threshold_db ? 1.0 : 0.0;
  const double bits = 8.0 * params.b_msdu_bytes;
  return {std::clamp(p, 0.0, 1.0), bits / (rate.phy_rate_mbps * 1e6) + rate.overhead_us * 1e-6};
}

// Mbit/s delivered by one attempt at the given rate.
inline double attempt_throughput(const LinkModelParams& params, double pl_db, std::size_t rate_index) {
  const auto a = link_success(params, pl_db, rate_index);
  return a.p_suc * 8.0 * params.b_msdu_bytes / a.e_t_tx_s / 1e6;
}

// Rate maximising the single-attempt throughput; ties go to the robust rate.
inline std::size_t best_rate(const LinkModelParams& params, double pl_db) {
  std::size_t best = 0;
  double best_s = attempt_throughput(params, pl_db, 0);
  for (std::size_t i = 1; i < params.rate_table.size(); ++i) {
    const double s = attempt_throughput(params, pl_db, i);
    if (s > best_s) {
      best_s = s;
      best = i;
    }
  }
  return best;
}

inline double direct_throughput(const LinkModelParams& params, double pl_db) {
  return attempt_throughput(params, pl_db, best_rate(params, pl_db));
}

inline std::size_t secondary_rate(const LinkModelParams& params, std::size_t primary) {
  switch (params.secondary) {
    case SecondaryRate::Robust: return 0;
    case SecondaryRate::Same: return primary;
    case SecondaryRate::NextLower: return primary == 0 ? 0 : primary - 1;
  }
  return 0;
}

// Two-hop store-and-forward throughput. Each hop makes a primary attempt at
// its best rate and a secondary attempt at the fallback rate; hop 1 is AP->R,
// hop 2 is R->D.
inline double relay_throughput(const LinkModelParams& params, double pl1_db, double pl2_db) {
  const std::size_t pri1 = best_rate(params, pl1_db);
  const std::size_t pri2 = best_rate(params, pl2_db);
  const auto a_pri1 = link_success(params, pl1_db, pri1);
  const auto a_pri2 = link_success(params, pl2_db, pri2);
  const auto a_sec1 = link_success(params, pl1_db, secondary_rate(params, pri1));
  const auto a_sec2 = link_success(params, pl2_db, secondary_rate(params, pri2));
  const double delivered = (a_pri1.p_suc * a_pri2.p_suc + a_sec1.p_suc * a_sec2.p_suc) * 8.0 * params.b_msdu_bytes;
  const double duration = a_pri1.e_t_tx_s + a_pri2.e_t_tx_s + a_sec1.e_t_tx_s + a_sec2.e_t_tx_s;
  return delivered / duration / 1e6;
}

namespace detail {

inline double cross(Vec2 o, Vec2 a, Vec2 b) { return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x); }

// Link pq strictly crosses the line through rs within the half-open segment
// [r, s), r being the lexicographically smaller end. Collinear wall pieces that
// share an end point are then counted once.
inline bool segments_intersect(Vec2 p, Vec2 q, Vec2 r, Vec2 s) {
  if (s.x < r.x || (s.x == r.x && s.y < r.y)) std::swap(r, s);
  const double d1 = cross(r, s, p), d2 = cross(r, s, q);
  const double d3 = cross(p, q, r), d4 = cross(p, q, s);
  return d1 * d2 < 0.0 && (d3 * d4 < 0.0 || (d3 == 0.0 && d4 != 0.0));
}

}  // namespace detail

// Walls crossed by the straight link a-b. A blocked edge between adjacent grid
// points is a wall segment of length `spacing` on their perpendicular bisector.
inline std::size_t walls_crossed(const GridScenario& scn, Vec2 a, Vec2 b) {
  std::size_t count = 0;
  for (const auto& w : scn.walls) {
    const Vec2 pa = scn.index_to_coord(w.a);
    const Vec2 pb = scn.index_to_coord(w.b);
    const Vec2 mid{(pa.x + pb.x) / 2.0, (pa.y + pb.y) / 2.0};
    const Vec2 half{-(pb.y - pa.y) / 2.0, (pb.x - pa.x) / 2.0};
    if (detail::segments_intersect(a, b, {mid.x - half.x, mid.y - half.y}, {mid.x + half.x, mid.y + half.y})) {
      ++count;
    }
  }
  return count;
}

// Path loss of a link between two positions; distances below d0 are clamped
// to d0.
inline double link_path_loss(const GridScenario& scn, const LinkModelParams& params, Vec2 a, Vec2 b) {
  double pl = path_loss_db(params, std::max(distance(a, b), params.d0_m));
  if (params.wall_loss_db > 0.0) pl += params.wall_loss_db * static_cast<double>(walls_crossed(scn, a, b));
  return pl;
}

inline ThroughputTableSet build_tables(const GridScenario& scn, const LinkModelParams& params) {
  params.validate();
  const std::size_t n2 = scn.size();
  const auto n = static_cast<Eigen::Index>(n2);
  ThroughputTableSet out;
  out.t_direct = Eigen::VectorXd::Zero(n);
  if (scn.mobility_role == MobilityRole::MobileRelay) {
    const double direct = direct_throughput(params, link_path_loss(scn, params, scn.ap_coord, scn.dest_coord));
    out.t_direct.setConstant(direct);
    Eigen::VectorXd relay(n);
    for (std::size_t m = 0; m < n2; ++m) {
      const Vec2 x = scn.index_to_coord(StateIndex::from_zero_based(m));
      relay(static_cast<Eigen::Index>(m)) = relay_throughput(
          params, link_path_loss(scn, params, scn.ap_coord, x), link_path_loss(scn, params, x, scn.dest_coord));
    }
    out.t_relay.assign(scn.mobile_relays, relay);
  } else {
    out.t_relay.assign(scn.relay_coords.size(), Eigen::VectorXd::Zero(n));
    for (std::size_t m = 0; m < n2; ++m) {
      const Vec2 x = scn.index_to_coord(StateIndex::from_zero_based(m));
      const auto i = static_cast<Eigen::Index>(m);
      out.t_direct(i) = direct_throughput(params, link_path_loss(scn, params, scn.ap_coord, x));
      for (std::size_t r = 0; r < scn.relay_coords.size(); ++r) {
        const Vec2 rc = scn.relay_coords[r];
        out.t_relay[r](i) = relay_throughput(params, link_path_loss(scn, params, scn.ap_coord, rc),
                                             link_path_loss(scn, params, rc, x));
      }
    }
  }
  return out;
}

}  // namespace relaysel
