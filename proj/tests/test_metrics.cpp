#include <gtest/gtest.h>

#include "test_support.hpp"

using namespace relaysel;

namespace {

ScenarioConfig small_config(testsupport::Gen& gen) {
  ScenarioConfig c;
  c.grid.nx = 3;
  c.grid.ny = 3;
  c.grid.spacing_m = 10.0;
  c.grid.origin = {0, 0};
  c.grid.ap_coord = {0, 10};
  c.grid.dest_coord = {20, 10};
  c.speed_mps = gen.uniform(0.5, 10.0);
  c.updates.tau_hz = gen.uniform(0.05, 5.0);
  c.updates.mu_hz = gen.uniform(1.0, 20.0);
  c.updates.queue_size = gen.index(1, 3);
  c.error.sigma_m = gen.uniform(0.0, 15.0);
  return c;
}

}  // namespace

TEST(Metrics, HandComputedReport) {
  ThroughputTableSet t;
  t.t_direct = Eigen::Vector3d(2.0, 2.0, 2.0);
  t.t_relay = {Eigen::Vector3d(1.0, 3.0, 4.0)};
  const Eigen::Vector3d p(0.5, 0.25, 0.25);
  EXPECT_DOUBLE_EQ(s_ideal(p, t), 1.0 + 0.75 + 1.0);
  EXPECT_DOUBLE_EQ(s_dir(p, t), 2.0);
  EXPECT_DOUBLE_EQ(s_rel(p, t), 0.5 + 0.75 + 1.0);
  const RelayPolicy pol(std::vector<RelayPolicy::Decision>{0, 0, 1});
  const auto r = make_report(p, t, pol, 2.5);
  EXPECT_DOUBLE_EQ(r.s_lost, 0.25);
  EXPECT_DOUBLE_EQ(r.s_lost_prime, (1.0 + 0.5 + 1.0) - 2.5);
  EXPECT_DOUBLE_EQ(r.lost_fraction, 0.25 / 2.75);
  EXPECT_DOUBLE_EQ(r.relay_fraction, 1.0 / 3.0);
}

// Fixed policies ignore the position information entirely.
TEST(MetricsProperty, FixedPoliciesMatchFixedThroughput) {
  testsupport::Gen gen(61);
  StationarySolver solver;
  for (int trial = 0; trial < 30; ++trial) {
    const auto cfg = small_config(gen);
    const Model m = build_model(cfg, gen.tables(9));
    const auto d = evaluate_policy(m, always_direct(9), solver).report;
    const auto r = evaluate_policy(m, always_relay(9), solver).report;
    ASSERT_NEAR(d.s_loc, d.s_dir, 1e-10);
    ASSERT_NEAR(r.s_loc, r.s_rel, 1e-10);
    ASSERT_GE(d.s_lost, -1e-12);
    ASSERT_NEAR(d.s_lost_prime, 0.0, 1e-10);
  }
}

TEST(MetricsProperty, LocationPolicyNeverBeatsIdeal) {
  testsupport::Gen gen(62);
  StationarySolver solver;
  for (int trial = 0; trial < 30; ++trial) {
    const auto cfg = small_config(gen);
    const Model m = build_model(cfg, gen.tables(9));
    const auto r = evaluate_policy(m, gen.policy(9), solver).report;
    ASSERT_LE(r.s_loc, r.s_ideal + 1e-10);
    ASSERT_GE(r.lost_fraction, -1e-12);
    ASSERT_LE(r.lost_fraction, 1.0 + 1e-12);
  }
}
