#include <gtest/gtest.h>

#include <cstdlib>

#include "delaymarket/availability.hpp"
#include "delaymarket/instances.hpp"
#include "delaymarket/riccati.hpp"
#include "delaymarket/rng.hpp"
#include "delaymarket/simulator.hpp"
#include "delaymarket/switching.hpp"
#include "oracles.hpp"

using namespace delaymarket;

namespace {

class ThreadsEnv {
 public:
  explicit ThreadsEnv(const char* value) { setenv("DELAYMARKET_THREADS", value, 1); }
  ~ThreadsEnv() { unsetenv("DELAYMARKET_THREADS"); }
};

}  // namespace

TEST(Rng, IsAPureFunctionOfTheCounter) {
  const CounterRng a(42), b(42), c(43);
  EXPECT_EQ(a.bits(1, 2, 3, 0), b.bits(1, 2, 3, 0));
  EXPECT_NE(a.bits(1, 2, 3, 0), c.bits(1, 2, 3, 0));
  EXPECT_NE(a.bits(1, 2, 3, 0), a.bits(1, 2, 3, 1));
  EXPECT_NE(a.bits(1, 2, 3, 0), a.bits(2, 1, 3, 0));
}

TEST(Rng, NormalMoments) {
  const CounterRng rng(7);
  const int N = 200000;
  double s1 = 0, s2 = 0, s4 = 0;
  for (int i = 0; i < N; ++i) {
    const double z = rng.normal(i, 0, 0);
    s1 += z;
    s2 += z * z;
    s4 += z * z * z * z;
  }
  EXPECT_NEAR(s1 / N, 0.0, 5.0 / std::sqrt(N));
  EXPECT_NEAR(s2 / N, 1.0, 5.0 * std::sqrt(2.0 / N));
  EXPECT_NEAR(s4 / N, 3.0, 5.0 * std::sqrt(96.0 / N));
}

TEST(Simulator, EstimatorRollsForwardFreshestSample) {
  const Problem p = instances::random_problem(3, 6, 3, 2, 1);
  const auto& s = p.model;
  instances::RandomInstance gen(99);
  const MatrixXd x = gen.matrix(7, 2, -1, 1);
  const MatrixXd u = gen.matrix(6, 1, -1, 1);
  for (int k = 0; k < 6; ++k) {
    for (int age = 1; age <= k + 1; ++age) {
      VectorXd ref;
      if (age == k + 1) {
        ref = VectorXd::Zero(2);
        for (int j = 0; j < k; ++j) ref = s.A * ref + s.B * u.row(j).transpose();
      } else {
        ref = x.row(k - age).transpose();
        for (int j = k - age; j < k; ++j) ref = s.A * ref + s.B * u.row(j).transpose();
      }
      const VectorXd got = estimator_update(s, x, u, age, k);
      EXPECT_LT((got - ref).norm(), 1e-12) << k << " " << age;
    }
  }
  EXPECT_THROW(estimator_update(s, x, u, 0, 2), InputError);
  EXPECT_THROW(estimator_update(s, x, u, 4, 2), InputError);
}

TEST(Simulator, EstimatorIgnoresUnavailableRows) {
  const Problem p = instances::random_problem(3, 6, 3, 2, 1);
  instances::RandomInstance gen(5);
  MatrixXd x = gen.matrix(7, 2, -1, 1);
  const MatrixXd u = gen.matrix(6, 1, -1, 1);
  const VectorXd before = estimator_update(p.model, x, u, 2, 4);
  x.row(3).setConstant(1e6);
  x.row(4).setConstant(1e6);
  EXPECT_EQ(before, estimator_update(p.model, x, u, 2, 4));
}

TEST(Simulator, RunSatisfiesClosedLoopEquations) {
  const Problem p = instances::random_problem(11, 12, 3, 2, 1);
  const auto& s = p.model;
  const RiccatiSolution ric = solve_finite_horizon(p);
  const auto sched = SwitchingSchedule::from_delays({3, 1, 2, 2, 1, 3, 3, 3, 1, 2, 1, 1}, 3);
  const auto ages = compute_b(sched).age;
  const SimulationRun run = simulate_run(p, ric, sched, 5, 2);
  double J = 0.0;
  for (int k = 0; k < 12; ++k) {
    const VectorXd xk = run.x.row(k).transpose();
    const VectorXd uk = run.u.row(k).transpose();
    const VectorXd next = s.A * xk + s.B * uk + run.w.row(k).transpose();
    EXPECT_LT((next - run.x.row(k + 1).transpose()).norm(), 1e-12);
    EXPECT_LT((uk + ric.L[k] * run.xhat.row(k).transpose()).norm(), 1e-12);
    EXPECT_LT((run.e.row(k) - (run.x.row(k) - run.xhat.row(k))).norm(), 1e-12);
    // e_k depends only on noise: A^k x0 (prior) or sum_{j<=a} A^{j-1} w_{k-j}
    VectorXd e = VectorXd::Zero(2);
    MatrixXd Aj = MatrixXd::Identity(2, 2);
    for (int j = 1; j <= ages[k]; ++j) {
      const VectorXd src = k - j == -1 ? VectorXd(run.x.row(0).transpose())
                                       : VectorXd(run.w.row(k - j).transpose());
      e += Aj * src;
      Aj = s.A * Aj;
    }
    EXPECT_LT((e - run.e.row(k).transpose()).norm(), 1e-9 * (1 + e.norm()));
    J += xk.dot(s.Q1 * xk) + uk.dot(s.R * uk);
  }
  const VectorXd xT = run.x.row(12).transpose();
  J += xT.dot(s.Q2 * xT);
  EXPECT_NEAR(run.realizedLqg, J, 1e-9 * J);
  EXPECT_DOUBLE_EQ(run.commCost, comm_cost(build_switching_problem(p, ric), sched));
}

TEST(Simulator, SameSeedSameRun) {
  const Problem p = instances::example2();
  const RiccatiSolution ric = solve_finite_horizon(p);
  const auto sched = SwitchingSchedule::constant(100, 5, 2);
  const SimulationRun a = simulate_run(p, ric, sched, 1, 3);
  const SimulationRun b = simulate_run(p, ric, sched, 1, 3);
  const SimulationRun c = simulate_run(p, ric, sched, 2, 3);
  EXPECT_EQ(a.x, b.x);
  EXPECT_NE(a.x, c.x);
}

TEST(Simulator, MonteCarloIndependentOfThreadCount) {
  const Problem p = instances::example1();
  const RiccatiSolution ric = solve_finite_horizon(p);
  const auto sched = SwitchingSchedule::constant(100, 5, 3);
  MonteCarloReport one, many;
  {
    ThreadsEnv env("1");
    one = simulate(p, ric, sched, 9, 300);
  }
  {
    ThreadsEnv env("4");
    many = simulate(p, ric, sched, 9, 300);
  }
  EXPECT_EQ(one.meanLqg, many.meanLqg);
  EXPECT_EQ(one.seLqg, many.seLqg);
  for (int k = 0; k < 100; ++k) EXPECT_EQ(one.empiricalErrorCov[k], many.empiricalErrorCov[k]);
}

TEST(Simulator, MonteCarloMeanNearExpectedCost) {
  const Problem p = instances::example2();
  const RiccatiSolution ric = solve_finite_horizon(p);
  const SwitchingProblem sp = build_switching_problem(p, ric);
  const auto sched = SwitchingSchedule::constant(100, 5, 4);
  const MonteCarloReport mc = simulate(p, ric, sched, 3, 2000);
  const double expected = evaluate_schedule(sp, sched).lqgCost;
  EXPECT_LT(std::abs(mc.meanLqg - expected), 4.0 * mc.seLqg)
      << mc.meanLqg << " vs " << expected << " se " << mc.seLqg;
}

TEST(Simulator, UtilizationIsRunningShare) {
  const auto rho = utilization({1, 3, 3, 2}, 3);
  ASSERT_EQ(rho.size(), 4u);
  EXPECT_EQ(rho[0], (std::vector<double>{1, 0, 0}));
  EXPECT_EQ(rho[2], (std::vector<double>{1.0 / 3, 0, 2.0 / 3}));
  EXPECT_EQ(rho[3], (std::vector<double>{0.25, 0.25, 0.5}));
  for (const auto& row : rho) {
    double sum = 0;
    for (double v : row) sum += v;
    EXPECT_NEAR(sum, 1.0, 1e-15);
  }
}

TEST(Simulator, RejectsMultiLinkAndMismatchedSchedules) {
  const Problem p = instances::random_problem(1, 4, 2);
  const RiccatiSolution ric = solve_finite_horizon(p);
  SwitchingSchedule multi(4, 2, true);
  for (int k = 0; k < 4; ++k) {
    multi.set(k, 1, true);
    multi.set(k, 2, true);
  }
  EXPECT_THROW(simulate(p, ric, multi, 0, 10), InputError);
  EXPECT_THROW(simulate(p, ric, SwitchingSchedule::constant(5, 2, 1), 0, 10), StructuralError);
  EXPECT_THROW(simulate(p, ric, SwitchingSchedule::constant(4, 2, 1), 0, 0), InputError);
}

TEST(Simulator, ScalarEstimatorByHand) {
  const Problem p = oracle::scalar_problem(2, 1, 1, 1, 1, 1, 1, 4, {2, 1});
  MatrixXd x = MatrixXd::Zero(4, 1), u = MatrixXd::Zero(3, 1);
  x(1, 0) = 1.0;
  u(1, 0) = 0.5;
  u(2, 0) = 0.25;
  EXPECT_DOUBLE_EQ(estimator_update(p.model, x, u, 2, 3)(0), 5.25);
  EXPECT_DOUBLE_EQ(estimator_update(p.model, x, u, 1, 2)(0), 2.0 + 0.5);
}

TEST(Simulator, NoiseFreeRunsAreExact) {
  Problem p = instances::example2();
  p.model.W.setZero();
  p.model.Sigma0.setZero();
  const RiccatiSolution ric = solve_finite_horizon(p);
  const auto sched = SwitchingSchedule::constant(100, 5, 3);
  const SimulationRun a = simulate_run(p, ric, sched, 1, 0), b = simulate_run(p, ric, sched, 2, 7);
  EXPECT_EQ(a.e.norm(), 0.0);
  EXPECT_EQ(a.xhat, a.x.topRows(100));
  EXPECT_EQ(a.realizedLqg, 0.0);
  EXPECT_EQ(a.realizedLqg, b.realizedLqg);
}

TEST(Simulator, UtilizationExamples) {
  const auto rho = utilization(SwitchingSchedule::from_delays({1, 5, 1, 5, 1}, 5));
  EXPECT_DOUBLE_EQ(rho[3][0], 0.5);
  EXPECT_DOUBLE_EQ(rho[3][4], 0.5);
  for (const auto& row : utilization(SwitchingSchedule::constant(6, 3, 1))) EXPECT_EQ(row[0], 1.0);
}
