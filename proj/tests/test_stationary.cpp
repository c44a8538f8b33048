#include <gtest/gtest.h>

#include "test_support.hpp"

using namespace relaysel;

namespace {

SparseGenerator sparse(const Eigen::MatrixXd& d) { return d.sparseView(); }

Eigen::MatrixXd random_generator(testsupport::Gen& gen, Eigen::Index n, double density) {
  Eigen::MatrixXd q = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    q(i, (i + 1) % n) = gen.uniform(0.1, 5.0);  // ring keeps it irreducible
    for (Eigen::Index j = 0; j < n; ++j) {
      if (i != j && gen.coin(density)) q(i, j) += gen.uniform(0.0, 5.0);
    }
    q(i, i) = -q.row(i).sum();
  }
  return q;
}

}  // namespace

TEST(Stationary, TwoStateClosedForm) {
  Eigen::MatrixXd q(2, 2);
  q << -2.0, 2.0, 3.0, -3.0;
  const auto r = stationary_distribution(sparse(q));
  EXPECT_NEAR(r.p(0), 0.6, 1e-15);
  EXPECT_NEAR(r.p(1), 0.4, 1e-15);
}

TEST(StationaryProperty, MatchesDenseKernel) {
  testsupport::Gen gen(31);
  StationarySolver solver;
  for (int trial = 0; trial < 100; ++trial) {
    const auto n = static_cast<Eigen::Index>(gen.index(2, 40));
    const auto q = random_generator(gen, n, 0.2);
    const auto r = solver.solve(sparse(q));
    ASSERT_LT((r.p - testsupport::dense_stationary(q)).cwiseAbs().maxCoeff(), 1e-10);
    ASSERT_NEAR(r.p.sum(), 1.0, 1e-12);
    ASSERT_LE(r.residual, 1e-10);
  }
}

TEST(Stationary, TransientStatesGetZeroMass) {
  // State 0 leaks into the closed pair {1, 2}.
  Eigen::MatrixXd q(3, 3);
  q << -1, 1, 0, 0, -2, 2, 0, 1, -1;
  const auto r = stationary_distribution(sparse(q));
  EXPECT_NEAR(r.p(0), 0.0, 1e-15);
  EXPECT_NEAR(r.p(1), 1.0 / 3.0, 1e-14);
  EXPECT_EQ(require_unique_stationary(sparse(q)), 1u);
}

TEST(Stationary, TwoClosedClassesRejected) {
  Eigen::MatrixXd q(4, 4);
  q << -1, 1, 0, 0, 1, -1, 0, 0, 0, 0, -1, 1, 0, 0, 1, -1;
  EXPECT_THROW(stationary_distribution(sparse(q)), ReducibleChainError);
  EXPECT_EQ(closed_classes(sparse(q)).size(), 2u);
}

TEST(Stationary, SolverReuseAcrossPatterns) {
  testsupport::Gen gen(32);
  StationarySolver solver;
  const auto a = random_generator(gen, 12, 0.3);
  auto b = a;
  b.diagonal().setZero();
  b *= 2.0;
  for (Eigen::Index i = 0; i < 12; ++i) b(i, i) = -b.row(i).sum();
  const auto c = random_generator(gen, 15, 0.3);
  for (const Eigen::MatrixXd* m : std::vector<const Eigen::MatrixXd*>{&a, &b, &c, &a}) {
    ASSERT_LT((solver.solve(sparse(*m)).p - testsupport::dense_stationary(*m)).cwiseAbs().maxCoeff(), 1e-11);
  }
}
