#include <gtest/gtest.h>

#include "delaymarket/availability.hpp"
#include "delaymarket/instances.hpp"
#include "delaymarket/stability.hpp"
#include "oracles.hpp"

using namespace delaymarket;

TEST(Stability, BoundIsSumOfSquaredPowerNorms) {
  // diagonal A: ||A^j||_2 = max |a_ii|^j
  const Problem p = instances::example1();
  double ref = 0.0;
  for (int j = 0; j < 5; ++j) ref += std::pow(1.01, 2 * j) * 3.0;
  EXPECT_NEAR(error_bound(p.model, 5), ref, 1e-12 * ref);
}

TEST(Stability, BoundDominatesEveryErrorCovariance) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const Problem p = instances::random_problem(seed, 12, 4, 3, 1);
    Problem q = p;
    q.model.Sigma0 = q.model.W;  // steady-state error statistics
    const double bound = error_bound(q.model, 4);
    for (int d = 1; d <= 4; ++d) {
      const auto cov = error_covariances(compute_b(SwitchingSchedule::constant(12, 4, d)), q.model);
      for (const auto& M : cov.M) EXPECT_LE(M.trace(), bound * (1 + 1e-12));
    }
  }
}

TEST(Stability, ExampleTwoIsMeanSquareStable) {
  const StabilityReport rep = analyze(instances::example2());
  EXPECT_TRUE(rep.riccatiConverged);
  EXPECT_TRUE(rep.lmss);
  EXPECT_LT(rep.spectralRadius, 1.0);
  EXPECT_LT(rep.riccatiResidual, 1e-8);
  EXPECT_NE(rep.to_text().find("lmss=true"), std::string::npos);
}

TEST(Stability, NonConvergenceIsReportedNotThrown) {
  const Problem p = oracle::scalar_problem(1.5, 0, 1, 1, 1, 1, 1, 4, {2, 1});
  const StabilityReport rep = analyze(p, 1e-10, 200);
  EXPECT_FALSE(rep.riccatiConverged);
  EXPECT_FALSE(rep.lmss);
  EXPECT_FALSE(rep.reason.empty());
}

TEST(Stability, EmpiricalSupWithinBound) {
  Problem p = instances::example2();
  p.model.Sigma0 = p.model.W;
  const RiccatiSolution ric = solve_finite_horizon(p);
  const auto out = empirical_error_sup(p, SwitchingSchedule::constant(100, 5, 5), ric, 4, 1000);
  EXPECT_LE(out.sup, out.bound + 5 * out.se);
  EXPECT_GT(out.sup, 0.0);
}

TEST(Stability, BoundSpecialCases) {
  Problem p = instances::example2();
  p.model.W = MatrixXd::Identity(2, 2);
  p.model.A.setZero();
  EXPECT_DOUBLE_EQ(error_bound(p.model, 4), 2.0);
  p.model.A = MatrixXd::Identity(2, 2);
  EXPECT_DOUBLE_EQ(error_bound(p.model, 5), 10.0);
  EXPECT_GE(error_bound(instances::random_problem(3, 4, 3).model, 1),
            instances::random_problem(3, 4, 3).model.W.trace() * (1 - 1e-15));
}

TEST(Stability, ValidInstancesAreStable) {
  int checked = 0;
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    const Problem p = instances::random_problem(seed, 5, 3);
    if (!validate(p).ok()) continue;
    ++checked;
    const StabilityReport rep = analyze(p);
    EXPECT_TRUE(rep.lmss) << seed << " " << rep.reason;
  }
  EXPECT_GT(checked, 20);
}
