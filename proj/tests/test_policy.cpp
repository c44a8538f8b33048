#include <gtest/gtest.h>

#include <sstream>

#include "test_support.hpp"

using namespace relaysel;

namespace {

ScenarioConfig destination_config(testsupport::Gen& gen, std::size_t nx, std::size_t ny) {
  ScenarioConfig c;
  c.grid.nx = nx;
  c.grid.ny = ny;
  c.grid.spacing_m = 10.0;
  c.grid.origin = {0, 0};
  c.grid.ap_coord = {0, 0};
  c.grid.dest_coord = {10, 10};
  c.grid.mobility_role = MobilityRole::MobileDestination;
  c.grid.relay_coords = {{10, 0}};
  c.speed_mps = gen.uniform(1.0, 20.0);
  c.updates.tau_hz = gen.uniform(0.05, 2.0);
  c.updates.mu_hz = gen.uniform(1.0, 10.0);
  c.updates.p_loss = gen.uniform(0.0, 0.3);
  c.updates.queue_size = 1;
  c.error.sigma_m = gen.uniform(2.0, 12.0);
  return c;
}

// Joint law of (believed point, true point) from an explicit chain over
// (true point, AP belief, queued report) for a queue of one. Reports are
// drawn from the error row of the true point at generation time.
Eigen::MatrixXd brute_force_joint(const Model& m) {
  const auto n = static_cast<Eigen::Index>(m.size());
  const Eigen::MatrixXd qm = testsupport::to_dense(m.mobility.q_mob);
  const Eigen::MatrixXd& e = m.error.e;
  const auto& u = m.config.updates;
  const Eigen::Index slots = n + 1;  // slot n = empty queue
  auto idx = [&](Eigen::Index x, Eigen::Index b, Eigen::Index q) { return (x * n + b) * slots + q; };
  const Eigen::Index total = n * n * slots;
  Eigen::MatrixXd q = Eigen::MatrixXd::Zero(total, total);
  for (Eigen::Index x = 0; x < n; ++x) {
    for (Eigen::Index b = 0; b < n; ++b) {
      for (Eigen::Index k = 0; k < slots; ++k) {
        const auto from = idx(x, b, k);
        for (Eigen::Index y = 0; y < n; ++y) {
          if (y != x) q(from, idx(y, b, k)) += qm(x, y);
        }
        if (k == n) {
          for (Eigen::Index r = 0; r < n; ++r) q(from, idx(x, b, r)) += u.tau_hz * e(x, r);
        } else {
          q(from, idx(x, k, n)) += u.mu_hz * (1.0 - u.p_loss);
          q(from, idx(x, b, n)) += u.mu_hz * u.p_loss;
        }
      }
    }
  }
  for (Eigen::Index i = 0; i < total; ++i) q(i, i) = -(q.row(i).sum() - q(i, i));
  const Eigen::VectorXd p = testsupport::dense_stationary(q);
  Eigen::MatrixXd joint = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index x = 0; x < n; ++x) {
    for (Eigen::Index b = 0; b < n; ++b) {
      for (Eigen::Index k = 0; k < slots; ++k) joint(b, x) += p(idx(x, b, k));
    }
  }
  return joint;
}

}  // namespace

TEST(Policy, StandardPrefersDirectOnTies) {
  ThroughputTableSet t;
  t.t_direct = Eigen::Vector3d(2.0, 2.0, 1.0);
  t.t_relay = {Eigen::Vector3d(2.0, 3.0, 0.5), Eigen::Vector3d(1.0, 3.0, 4.0)};
  const auto p = standard_policy(t);
  EXPECT_EQ(p.key(), "012");
}

TEST(Policy, InverseAndHeuristic) {
  const RelayPolicy p(std::vector<RelayPolicy::Decision>{0, 1, 1, 0});
  EXPECT_EQ(inverse_policy(p).key(), "1001");
  EXPECT_THROW(inverse_policy(RelayPolicy(std::vector<RelayPolicy::Decision>{2})), DomainError);

  GridScenario g;
  g.nx = 3;
  g.ny = 2;
  g.spacing_m = 1.0;
  g.origin = {0, 0};
  g.ap_coord = {0, 0};
  g.dest_coord = {2, 1};
  EXPECT_EQ(heuristic_rect_policy(g, {1, 0}, {2, 0}).key(), "011000");
  EXPECT_THROW(heuristic_rect_policy(g, {1, 0}, {5, 0}), DomainError);
}

TEST(Policy, FourPointJointMatchesBruteForce) {
  testsupport::Gen gen(71);
  for (int trial = 0; trial < 5; ++trial) {
    auto cfg = destination_config(gen, 2, 2);
    const Model m = build_model(cfg, gen.tables(4));
    const auto c = scenario_conditional(m, 1);
    const Eigen::MatrixXd oracle = brute_force_joint(m);
    ASSERT_LT((c.joint - oracle).cwiseAbs().maxCoeff(), 1e-10);
    // Row sums give the belief marginal, column sums the mobility law.
    ASSERT_LT((c.joint.colwise().sum().transpose() - m.mobility.p_mob).cwiseAbs().maxCoeff(), 1e-10);
  }
}

TEST(PolicyProperty, ExpectedThroughputEqualsChain) {
  testsupport::Gen gen(72);
  StationarySolver solver;
  for (int trial = 0; trial < 8; ++trial) {
    auto cfg = destination_config(gen, 3, 3);
    cfg.updates.queue_size = gen.index(1, 3);
    const Model m = build_model(cfg, gen.tables(9));
    const auto c = scenario_conditional(m, 1);
    for (int k = 0; k < 5; ++k) {
      const auto p = gen.policy(9);
      ASSERT_NEAR(expected_throughput(c, m.tables, p), evaluate_policy(m, p, solver).report.s_loc, 1e-10);
    }
  }
}

TEST(Policy, OptimumOverAllPoliciesOnThreeByThree) {
  testsupport::Gen gen(73);
  auto cfg = destination_config(gen, 3, 3);
  const Model m = build_model(cfg, gen.tables(9));
  StationarySolver solver;
  double best = -1.0;
  for (unsigned bits = 0; bits < 512; ++bits) {
    RelayPolicy p(9);
    for (std::size_t i = 0; i < 9; ++i) p[i] = (bits >> i) & 1U;
    best = std::max(best, evaluate_policy(m, p, solver).report.s_loc);
  }
  const auto opt = optimized_policy(m, 1);
  EXPECT_NEAR(evaluate_policy(m, opt, solver).report.s_loc, best, 1e-9);
}

TEST(Policy, MobileRelayDecisionTables) {
  ConditionalMatrix c = normalise_joint((Eigen::Matrix2d() << 0.3, 0.1, 0.0, 0.6).finished());
  ThroughputTableSet t;
  t.t_direct = Eigen::Vector2d(2.0, 2.0);
  t.t_relay = {Eigen::Vector2d(1.0, 4.0), Eigen::Vector2d(5.0, 0.0)};
  const auto dt = optimize_mobile_relay({c, c}, t);
  EXPECT_NEAR(dt.gamma(1, 0), 0.75 * 1.0 + 0.25 * 4.0, 1e-15);
  EXPECT_NEAR(dt.gamma(2, 1), 0.0, 1e-15);
  const std::size_t believed[] = {0, 0};
  EXPECT_EQ(dt.select(believed), 2u);
  const std::size_t believed2[] = {1, 1};
  EXPECT_EQ(dt.select(believed2), 1u);
  EXPECT_THROW(dt.single_relay_policy(), DomainError);
}

TEST(Policy, UnsupportedBeliefFallsBackToPointValue) {
  ConditionalMatrix c = normalise_joint((Eigen::Matrix2d() << 0.0, 0.0, 0.5, 0.5).finished());
  ThroughputTableSet t;
  t.t_direct = Eigen::Vector2d(2.0, 1.0);
  t.t_relay = {Eigen::Vector2d(3.0, 0.0)};
  const auto p = optimize_mobile_destination(c, t);
  EXPECT_EQ(p[0], 1);
  EXPECT_EQ(p[1], 0);
}

TEST(Policy, CsvRoundTripAndErrors) {
  testsupport::Gen gen(74);
  const auto p = gen.policy(12, 3);
  std::stringstream ss;
  write_policy_csv(ss, p);
  EXPECT_EQ(read_policy_csv(ss, 12), p);
  std::istringstream bad("m,decision\n1,0\n1,1\n");
  EXPECT_THROW(read_policy_csv(bad, 2), ParseError);
  std::istringstream missing("m,decision\n1,0\n");
  EXPECT_THROW(read_policy_csv(missing, 2), ParseError);
}

TEST(Policy, RegistryAssignsIdsInOrder) {
  PolicyRegistry reg;
  EXPECT_EQ(reg.id(always_direct(4)), 1u);
  EXPECT_EQ(reg.id(always_relay(4)), 2u);
  EXPECT_EQ(reg.id(always_direct(4)), 1u);
  EXPECT_EQ(reg.size(), 2u);
  EXPECT_EQ(reg.policy(2), always_relay(4));
}
