#include <gtest/gtest.h>

#include <cmath>

#include "test_support.hpp"

using namespace relaysel;

TEST(LocationError, ZeroSigmaIsIdentity) {
  const auto e = gaussian_error(GridScenario{}, 0.0);
  EXPECT_TRUE(e.e.isIdentity());
}

// Row of a 3x1 grid computed directly from the Gaussian density.
TEST(LocationError, RowFromDensity) {
  GridScenario g;
  g.nx = 3;
  g.ny = 1;
  g.spacing_m = 2.0;
  g.origin = {0, 0};
  g.ap_coord = {0, 0};
  g.dest_coord = {4, 0};
  const double sigma = 1.5;
  const auto e = gaussian_error(g, sigma);
  const double w1 = std::exp(-4.0 / (2 * sigma * sigma));
  const double w2 = std::exp(-16.0 / (2 * sigma * sigma));
  const double total = 1 + w1 + w2;
  EXPECT_NEAR(e.e(0, 0), 1 / total, 1e-15);
  EXPECT_NEAR(e.e(0, 1), w1 / total, 1e-15);
  EXPECT_NEAR(e.e(0, 2), w2 / total, 1e-15);
  EXPECT_NEAR(e.e(1, 0), e.e(1, 2), 1e-15);
}

TEST(LocationErrorProperty, RowsStochasticAndSymmetricWithoutBias) {
  testsupport::Gen gen(51);
  for (int trial = 0; trial < 50; ++trial) {
    const auto g = gen.grid(6);
    const double sigma = gen.uniform(0.01, 3.0) * g.spacing_m;
    const auto e = gaussian_error(g, sigma);
    ASSERT_LT((e.e.rowwise().sum().array() - 1.0).abs().maxCoeff(), 1e-12);
    ASSERT_GE(e.e.minCoeff(), 0.0);
    // Unnormalised kernel is symmetric, so e(i,j) * Z_i = e(j,i) * Z_j.
    for (std::size_t i = 0; i < g.size(); ++i) {
      for (std::size_t j = 0; j < g.size(); ++j) {
        const auto a = static_cast<Eigen::Index>(i), b = static_cast<Eigen::Index>(j);
        const double d = distance(g.index_to_coord(StateIndex::from_zero_based(i)),
                                  g.index_to_coord(StateIndex::from_zero_based(j)));
        const double k = std::exp(-d * d / (2 * sigma * sigma));
        if (k < 1e-200) continue;
        ASSERT_NEAR(e.e(a, b) / e.e(a, a), k, 1e-9 * std::max(1.0, k));
      }
    }
  }
}

TEST(LocationError, DegenerateBiasShiftsReport) {
  GridScenario g;
  g.nx = 4;
  g.ny = 1;
  g.spacing_m = 1.0;
  g.origin = {0, 0};
  g.ap_coord = {0, 0};
  g.dest_coord = {3, 0};
  const auto e = gaussian_error(g, 0.0, {1.0, 0.0});
  EXPECT_EQ(e.e(0, 1), 1.0);
  EXPECT_EQ(e.e(2, 3), 1.0);
  EXPECT_EQ(e.e(3, 3), 1.0);  // clamped at the border
}

TEST(LocationError, FoldPolicy) {
  Eigen::MatrixXd m(3, 3);
  m << 0.5, 0.3, 0.2, 0.1, 0.8, 0.1, 0.0, 0.4, 0.6;
  const ErrorMatrix e{m, 1.0, {}};
  const auto w = fold_policy(e, RelayPolicy(std::vector<RelayPolicy::Decision>{0, 1, 1}));
  EXPECT_NEAR(w.w_r(0), 0.5, 1e-15);
  EXPECT_NEAR(w.w_r(1), 0.9, 1e-15);
  EXPECT_NEAR(w.w_r(2), 1.0, 1e-15);
  EXPECT_NEAR(w.w_d(0), 0.5, 1e-15);
  EXPECT_THROW(fold_policy(e, RelayPolicy(2)), DomainError);
}

TEST(LocationError, NegativeSigmaRejected) {
  EXPECT_THROW(gaussian_error(GridScenario{}, -1.0), DomainError);
}
