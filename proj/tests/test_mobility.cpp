#include <gtest/gtest.h>

#include "test_support.hpp"

using namespace relaysel;

TEST(Mobility, RateIsSpeedOverSpacing) {
  EXPECT_DOUBLE_EQ(mobility_rate(1.0, 8.0), 0.125);
  const auto mob = build_open_grid(GridScenario{}, 5.0);
  for (std::size_t m = 0; m < mob.size(); ++m) EXPECT_DOUBLE_EQ(mob.leaving_rate(m), 5.0 / 8.0);
}

TEST(Mobility, CornerEdgeInteriorSplits) {
  GridScenario g;
  g.nx = 3;
  g.ny = 3;
  const auto mob = build_open_grid(g, 1.0);
  const double mu = 1.0 / 8.0;
  EXPECT_DOUBLE_EQ(mob.q_mob.coeff(0, 1), mu / 2);
  EXPECT_DOUBLE_EQ(mob.q_mob.coeff(1, 4), mu / 3);
  EXPECT_DOUBLE_EQ(mob.q_mob.coeff(4, 7), mu / 4);
  EXPECT_DOUBLE_EQ(mob.q_mob.coeff(0, 4), 0.0);
}

// Equal leaving rates split evenly over an undirected graph give a reversible
// chain with stationary mass proportional to degree.
TEST(MobilityProperty, StationaryProportionalToDegree) {
  testsupport::Gen gen(21);
  for (int trial = 0; trial < 60; ++trial) {
    auto g = gen.grid(7);
    const auto mob = build_open_grid(g, gen.uniform(0.1, 10.0));
    Eigen::VectorXd deg(static_cast<Eigen::Index>(g.size()));
    for (std::size_t i = 0; i < g.size(); ++i) {
      deg(static_cast<Eigen::Index>(i)) = static_cast<double>(g.neighbours(StateIndex::from_zero_based(i)).size());
    }
    deg /= deg.sum();
    ASSERT_LT((mob.p_mob - deg).cwiseAbs().maxCoeff(), 1e-12);
    const Eigen::VectorXd rows = testsupport::to_dense(mob.q_mob).rowwise().sum();
    ASSERT_LT(rows.cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(Mobility, WallsRemoveMovesAndKeepRowsZero) {
  GridScenario g;
  g.nx = 3;
  g.ny = 2;
  g.walls = {{StateIndex(2), StateIndex(3)}, {StateIndex(2), StateIndex(5)}};
  const auto mob = build_walled_grid(g, 2.0);
  EXPECT_DOUBLE_EQ(mob.q_mob.coeff(1, 2), 0.0);
  EXPECT_DOUBLE_EQ(mob.q_mob.coeff(1, 0), 2.0 / 8.0);
  const Eigen::VectorXd rows = testsupport::to_dense(mob.q_mob).rowwise().sum();
  EXPECT_LT(rows.cwiseAbs().maxCoeff(), 1e-15);
  // Walls do not change the open grid builder.
  const auto open = build_open_grid(g, 2.0);
  EXPECT_GT(open.q_mob.coeff(1, 2), 0.0);
}

TEST(Mobility, DisconnectedGridIsRejected) {
  GridScenario g;
  g.nx = 3;
  g.ny = 1;
  g.walls = {{StateIndex(2), StateIndex(3)}};
  EXPECT_THROW(build_walled_grid(g, 1.0), DomainError);  // state 3 has no neighbour

  GridScenario h;
  h.nx = 2;
  h.ny = 2;
  h.walls = {{StateIndex(1), StateIndex(2)}, {StateIndex(3), StateIndex(4)}};
  EXPECT_THROW(build_walled_grid(h, 1.0), ReducibleChainError);
}

TEST(Mobility, BadSpeed) {
  EXPECT_THROW(build_open_grid(GridScenario{}, 0.0), DomainError);
  EXPECT_THROW(build_open_grid(GridScenario{}, -1.0), DomainError);
}
