#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <deque>
#include <limits>
#include <ostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "relaysel/config.hpp"
#include "relaysel/errors.hpp"
#include "relaysel/model.hpp"
#include "relaysel/parallel.hpp"
#include "relaysel/policy.hpp"
#include "relaysel/relay_policy.hpp"

namespace relaysel {

inline void validate_simulation(const SimulationParams& sim) {
  if (!(sim.warmup_s >= 0.0)) throw DomainError("warmup_s must be >= 0");
  if (!(sim.duration_s > sim.warmup_s)) throw DomainError("duration_s must exceed warmup_s");
  if (!(sim.data_tx_interval_s > 0.0)) throw DomainError("data_tx_interval_s must be > 0");
  if (sim.replications < 1) throw DomainError("replications must be >= 1");
}

struct ReplicationResult {
  double mean_mbps = 0.0;
  std::size_t epochs = 0;
  std::size_t generated = 0;
  std::size_t dropped = 0;
  std::size_t lost = 0;
  std::size_t delivered = 0;
  std::size_t max_queue = 0;
  // counts(i, j): epochs with AP belief x_i while the node was at x_j.
  Eigen::MatrixXd joint_counts;
  // Time spent at each grid point after warm-up.
  Eigen::VectorXd occupancy_s;
};

struct SimResult {
  double mean_mbps = 0.0;
  double ci_half_width = 0.0;
  std::vector<ReplicationResult> replications;
  Eigen::MatrixXd joint_counts;
  // Fraction of post-warm-up time at each grid point, pooled over replications.
  Eigen::VectorXd occupancy;
  std::size_t dropped = 0;
  std::size_t delivered = 0;
  std::size_t max_queue = 0;
};

namespace detail {

// Two-sided 95% Student t quantiles for 1..30 degrees of freedom.
inline double t_quantile_975(std::size_t dof) {
  static constexpr double table[] = {12.706, 4.303, 3.182, 2.776, 2.571, 2.447, 2.365, 2.306, 2.262, 2.228,
                                     2.201,  2.179, 2.160, 2.145, 2.131, 2.120, 2.110, 2.101, 2.093, 2.086,
                                     2.080,  2.074, 2.069, 2.064, 2.060, 2.056, 2.052, 2.048, 2.045, 2.042};
  if (dof == 0) return std::numeric_limits<double>::infinity();
  return dof <= 30 ? table[dof - 1] : 1.96;
}

class Reporter {
 public:
  Reporter(const Model& model, bool continuous) : model_(model), continuous_(continuous) {
    const auto n = static_cast<Eigen::Index>(model.size());
    rows_.reserve(model.size());
    std::vector<double> w(model.size());
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = 0; j < n; ++j) w[static_cast<std::size_t>(j)] = model.error.e(i, j);
      rows_.emplace_back(w.begin(), w.end());
    }
  }

  std::size_t operator()(std::size_t truth, std::mt19937_64& rng) {
    if (!continuous_) return rows_[truth](rng);
    const auto& scn = model_.config.grid;
    const Vec2 c = scn.index_to_coord(StateIndex::from_zero_based(truth));
    const Vec2 mean{c.x + model_.error.bias.x, c.y + model_.error.bias.y};
    const double sigma = model_.error.sigma_m;
    const double half = scn.spacing_m / 2.0;
    const Vec2 lo{scn.lower_corner().x - half, scn.lower_corner().y - half};
    const Vec2 hi{scn.upper_corner().x + half, scn.upper_corner().y + half};
    Vec2 x = mean;
    if (sigma > 0.0) {
      std::normal_distribution<double> g(0.0, sigma);
      for (int attempt = 0; attempt < 1000; ++attempt) {
        x = {mean.x + g(rng), mean.y + g(rng)};
        if (x.x >= lo.x && x.x <= hi.x && x.y >= lo.y && x.y <= hi.y) break;
      }
    }
    x = {std::clamp(x.x, lo.x, hi.x), std::clamp(x.y, lo.y, hi.y)};
    return scn.coord_to_index(x).zero_based();
  }

 private:
  const Model& model_;
  bool continuous_;
  // Sampling table per error-matrix row.
  std::vector<std::discrete_distribution<std::size_t>> rows_;
};

}  // namespace detail

// One replication of the event-driven system. The optional trace receives
// `t_s,event,state_m,ap_view_m,queue_len` rows without a header.
inline ReplicationResult simulate_replication(const Model& model, const RelayPolicy& policy,
                                              const SimulationParams& sim, std::uint64_t seed,
                                              std::ostream* trace = nullptr) {
  validate_simulation(sim);
  const std::size_t n2 = model.size();
  if (policy.size() != n2) throw DomainError("policy does not cover the grid");
  if (policy.max_decision() > model.tables.relay_count()) throw DomainError("policy uses an unknown relay");
  const auto& scn = model.config.grid;
  const auto& up = model.config.updates;

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  detail::Reporter report(model, sim.continuous_error);

  std::vector<std::vector<std::size_t>> nbrs(n2);
  for (std::size_t i = 0; i < n2; ++i) {
    for (const auto& t : scn.neighbours(StateIndex::from_zero_based(i))) nbrs[i].push_back(t.zero_based());
  }

  const auto n = static_cast<Eigen::Index>(n2);
  ReplicationResult out;
  out.joint_counts = Eigen::MatrixXd::Zero(n, n);
  out.occupancy_s = Eigen::VectorXd::Zero(n);

  std::size_t pos = std::uniform_int_distribution<std::size_t>(0, n2 - 1)(rng);
  std::size_t belief = report(pos, rng);
  std::deque<std::size_t> queue;

  const double inf = std::numeric_limits<double>::infinity();
  auto next_interval = [&]() {
    if (!(up.tau_hz > 0.0)) return inf;
    if (sim.periodic_updates) return 1.0 / up.tau_hz;
    return std::exponential_distribution<double>(up.tau_hz)(rng);
  };
  double t = 0.0;
  double next_update = sim.periodic_updates && up.tau_hz > 0.0 ? unif(rng) / up.tau_hz : next_interval();
  double next_epoch = sim.warmup_s;
  double sum = 0.0;

  auto log = [&](const char* event) {
    if (trace) *trace << t << ',' << event << ',' << pos + 1 << ',' << belief + 1 << ',' << queue.size() << '\n';
  };

  for (;;) {
    const double rate_mob = model.mobility.mu_m;
    const double rate_srv = queue.empty() ? 0.0 : up.mu_hz;
    const double total = rate_mob + rate_srv;
    const double t_random = t + std::exponential_distribution<double>(total)(rng);
    const double t_next = std::min({t_random, next_update, next_epoch, sim.duration_s});

    const double from = std::max(t, sim.warmup_s);
    if (t_next > from) out.occupancy_s(static_cast<Eigen::Index>(pos)) += t_next - from;
    t = t_next;
    if (t >= sim.duration_s) break;

    // Exponential clocks are memoryless, so redrawing after a scheduled event is exact.
    if (t == next_epoch) {
      const auto choice = policy[belief];
      sum += model.tables.option(choice)(static_cast<Eigen::Index>(pos));
      out.joint_counts(static_cast<Eigen::Index>(belief), static_cast<Eigen::Index>(pos)) += 1.0;
      ++out.epochs;
      next_epoch += sim.data_tx_interval_s;
      log("decide");
    } else if (t == next_update) {
      ++out.generated;
      if (queue.size() < up.queue_size) {
        queue.push_back(report(pos, rng));
        out.max_queue = std::max(out.max_queue, queue.size());
        log("generate");
      } else {
        ++out.dropped;
        log("drop");
      }
      next_update = t + next_interval();
    } else if (unif(rng) * total < rate_mob) {
      const auto& nb = nbrs[pos];
      pos = nb[std::uniform_int_distribution<std::size_t>(0, nb.size() - 1)(rng)];
      log("move");
    } else {
      const std::size_t head = queue.front();
      queue.pop_front();
      if (unif(rng) < up.p_loss) {
        ++out.lost;
        log("lose");
      } else {
        belief = head;
        ++out.delivered;
        log("deliver");
      }
    }
  }
  out.mean_mbps = out.epochs ? sum / static_cast<double>(out.epochs) : 0.0;
  return out;
}

inline const char* trace_csv_header() { return "t_s,event,state_m,ap_view_m,queue_len"; }

// Replication r uses seed sim.seed + r; the trace, if requested, covers replication 0.
inline SimResult simulate(const Model& model, const RelayPolicy& policy, const SimulationParams& sim,
                          std::size_t jobs = default_jobs(), std::ostream* trace = nullptr) {
  validate_simulation(sim);
  if (!(model.config.updates.p_loss < 1.0)) throw DomainError("p_loss must be < 1");
  SimResult res;
  res.replications.resize(sim.replications);
  std::ostringstream trace_buf;
  parallel_for(sim.replications, jobs, [&](std::size_t r) {
    res.replications[r] =
        simulate_replication(model, policy, sim, sim.seed + r, (trace && r == 0) ? &trace_buf : nullptr);
  });
  if (trace) *trace << trace_csv_header() << '\n' << trace_buf.str();

  const auto n = static_cast<Eigen::Index>(model.size());
  res.joint_counts = Eigen::MatrixXd::Zero(n, n);
  res.occupancy = Eigen::VectorXd::Zero(n);
  double s = 0.0, s2 = 0.0;
  for (const auto& rep : res.replications) {
    s += rep.mean_mbps;
    s2 += rep.mean_mbps * rep.mean_mbps;
    res.joint_counts += rep.joint_counts;
    res.occupancy += rep.occupancy_s;
    res.dropped += rep.dropped;
    res.delivered += rep.delivered;
    res.max_queue = std::max(res.max_queue, rep.max_queue);
  }
  const auto r = static_cast<double>(sim.replications);
  res.mean_mbps = s / r;
  if (sim.replications > 1) {
    const double var = std::max(0.0, (s2 - r * res.mean_mbps * res.mean_mbps) / (r - 1.0));
    res.ci_half_width = detail::t_quantile_975(sim.replications - 1) * std::sqrt(var / r);
  } else {
    res.ci_half_width = std::numeric_limits<double>::infinity();
  }
  const double total = res.occupancy.sum();
  if (total > 0.0) res.occupancy /= total;
  return res;
}

struct EmpiricalConditional {
  // Row-normalised Pr[X = x_j | belief = x_i]; undersampled rows are zero.
  Eigen::MatrixXd c;
  Eigen::VectorXd row_counts;
  std::vector<bool> undersampled;
  std::size_t samples = 0;
  std::size_t delivered = 0;
};

// Bins (belief, truth) pairs at the decision epochs of the simulation.
inline EmpiricalConditional estimate_conditional(const Model& model, const SimulationParams& sim,
                                                 double min_row_samples = 1000.0,
                                                 std::size_t jobs = default_jobs()) {
  const auto res = simulate(model, always_direct(model.size()), sim, jobs);
  EmpiricalConditional out;
  out.c = res.joint_counts;
  out.row_counts = res.joint_counts.rowwise().sum();
  out.undersampled.assign(model.size(), false);
  for (Eigen::Index i = 0; i < out.c.rows(); ++i) {
    if (out.row_counts(i) < min_row_samples) {
      out.undersampled[static_cast<std::size_t>(i)] = true;
      out.c.row(i).setZero();
    } else {
      out.c.row(i) /= out.row_counts(i);
    }
  }
  out.samples = static_cast<std::size_t>(out.row_counts.sum());
  out.delivered = res.delivered;
  return out;
}

// Largest total-variation distance over rows that are sampled on both sides.
inline double max_row_tv(const EmpiricalConditional& empirical, const ConditionalMatrix& analytic) {
  if (analytic.c.rows() != empirical.c.rows() || analytic.c.cols() != empirical.c.cols()) {
    throw DomainError("conditional matrices differ in size");
  }
  double worst = 0.0;
  for (Eigen::Index i = 0; i < analytic.c.rows(); ++i) {
    const auto k = static_cast<std::size_t>(i);
    if (empirical.undersampled[k] || !analytic.supported(k)) continue;
    worst = std::max(worst, 0.5 * (empirical.c.row(i) - analytic.c.row(i)).cwiseAbs().sum());
  }
  return worst;
}

}  // namespace relaysel
