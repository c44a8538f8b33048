#include <gtest/gtest.h>

#include <cmath>

#include "test_support.hpp"

using namespace relaysel;

TEST(Radio, PathLossLogDistance) {
  LinkModelParams p;
  EXPECT_DOUBLE_EQ(path_loss_db(p, 1.0), 47.0);
  EXPECT_NEAR(path_loss_db(p, 10.0), 47.0 + 29.0, 1e-12);
  EXPECT_THROW(path_loss_db(p, 0.0), DomainError);
}

TEST(Radio, LogisticSuccessAtThreshold) {
  LinkModelParams p;
  // SNR = tx - pl - noise; put it exactly on the 6 Mbit/s threshold.
  const double pl = p.tx_power_dbm - p.noise_floor_dbm - p.rate_table[0].snr_threshold_db;
  const auto a = link_success(p, pl, 0);
  EXPECT_NEAR(a.p_suc, 0.5, 1e-15);
  EXPECT_NEAR(a.e_t_tx_s, 12000.0 / 6e6 + 219e-6, 1e-15);
}

TEST(Radio, DirectThroughputDecreasesWithLoss) {
  LinkModelParams p;
  double prev = direct_throughput(p, 40.0);
  for (double pl = 41.0; pl < 130.0; pl += 1.0) {
    const double s = direct_throughput(p, pl);
    ASSERT_LE(s, prev + 1e-12);
    prev = s;
  }
  EXPECT_LT(prev, 1e-6);
}

// Two-hop throughput written out with the robust fallback on both hops.
TEST(Radio, RelayThroughputFormula) {
  LinkModelParams p;
  const double pl1 = 80.0, pl2 = 85.0;
  const auto b1 = best_rate(p, pl1), b2 = best_rate(p, pl2);
  const auto x1 = link_success(p, pl1, b1), x2 = link_success(p, pl2, b2);
  const auto y1 = link_success(p, pl1, 0), y2 = link_success(p, pl2, 0);
  const double expect = (x1.p_suc * x2.p_suc + y1.p_suc * y2.p_suc) * 12000.0 /
                        (x1.e_t_tx_s + x2.e_t_tx_s + y1.e_t_tx_s + y2.e_t_tx_s) / 1e6;
  EXPECT_NEAR(relay_throughput(p, pl1, pl2), expect, 1e-12);
}

TEST(Radio, WallCrossings) {
  GridScenario g;
  g.nx = 4;
  g.ny = 3;
  g.spacing_m = 1.0;
  g.origin = {0, 0};
  g.ap_coord = {0, 0};
  g.dest_coord = {3, 2};
  // A vertical wall between columns 1 and 2 covering all three rows.
  g.walls = {{g.at(1, 0), g.at(2, 0)}, {g.at(1, 1), g.at(2, 1)}, {g.at(1, 2), g.at(2, 2)}};
  EXPECT_EQ(walls_crossed(g, {0, 1}, {3, 1}), 1u);
  // Passing exactly through the joint of two wall pieces still counts once.
  EXPECT_EQ(walls_crossed(g, {0, 0}, {3, 1}), 1u);
  EXPECT_EQ(walls_crossed(g, {0, 0}, {0, 2}), 0u);
  EXPECT_EQ(walls_crossed(g, {2, 0}, {3, 2}), 0u);

  LinkModelParams p;
  p.wall_loss_db = 5.0;
  EXPECT_NEAR(link_path_loss(g, p, {0, 1}, {3, 1}) - path_loss_db(p, 3.0), 5.0, 1e-12);
  // Short links are clamped to the reference distance.
  EXPECT_DOUBLE_EQ(link_path_loss(GridScenario{}, p, {1, 1}, {1.2, 1}), p.pl_d0_db);
}

TEST(Radio, TablesForMobileRelay) {
  const GridScenario g;
  const auto t = build_tables(g, LinkModelParams{});
  EXPECT_EQ(t.relay_count(), 1u);
  EXPECT_EQ(t.t_direct.minCoeff(), t.t_direct.maxCoeff());
  // Relaying is best somewhere between AP and destination.
  const auto mid = g.coord_to_index({40, 40}).zero_based();
  EXPECT_GT(t.t_relay[0](static_cast<Eigen::Index>(mid)), t.t_direct(0));
  EXPECT_NO_THROW(t.validate());
}

TEST(Radio, TablesForMobileDestination) {
  GridScenario g;
  g.mobility_role = MobilityRole::MobileDestination;
  g.relay_coords = {{40, 40}, {60, 60}};
  const auto t = build_tables(g, LinkModelParams{});
  EXPECT_EQ(t.relay_count(), 2u);
  EXPECT_GT(t.t_direct.maxCoeff(), t.t_direct.minCoeff());
}

TEST(Radio, ValidateRateTable) {
  LinkModelParams p;
  p.rate_table = {{12, 7, 200}, {6, 4, 200}};
  EXPECT_THROW(p.validate(), DomainError);
  p.rate_table.clear();
  EXPECT_THROW(p.validate(), DomainError);
}
