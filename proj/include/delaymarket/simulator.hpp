#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "delaymarket/availability.hpp"
#include "delaymarket/errors.hpp"
#include "delaymarket/linalg.hpp"
#include "delaymarket/model.hpp"
#include "delaymarket/parallel.hpp"
#include "delaymarket/riccati.hpp"
#include "delaymarket/rng.hpp"

namespace delaymarket {

/// One closed-loop realisation. Rows are time steps.
struct SimulationRun {
  std::uint64_t seed = 0;
  int run = 0;
  MatrixXd x;     // (T+1) x n
  MatrixXd u;     // T x m
  MatrixXd xhat;  // T x n
  MatrixXd e;     // T x n, x - xhat
  MatrixXd w;     // T x n, process noise w_0 .. w_{T-1}
  double realizedLqg = 0.0;
  double commCost = 0.0;
};

/// rho[t-1][i-1] = share of steps s < t that used link i, t = 1..T.
using UtilizationTable = std::vector<std::vector<double>>;

inline UtilizationTable utilization(const std::vector<int>& delays, int D) {
  const int T = static_cast<int>(delays.size());
  UtilizationTable rho(T, std::vector<double>(D, 0.0));
  std::vector<int> counts(D, 0);
  for (int t = 1; t <= T; ++t) {
    ++counts[delays[t - 1] - 1];
    for (int i = 0; i < D; ++i)
      rho[t - 1][i] = static_cast<double>(counts[i]) / t;
  }
  return rho;
}

inline UtilizationTable utilization(const SwitchingSchedule& schedule) {
  schedule.check();
  if (schedule.multi_link())
    for (int k = 0; k < schedule.T(); ++k)
      if (schedule.row_count(k) != 1)
        throw InputError("utilization needs a single-link schedule");
  return utilization(schedule.fastest_delays(), schedule.D());
}

/// sum_{t<T} x_t'Q1x_t + u_t'Ru_t + x_T'Q2x_T on stored rows.
inline double realized_lqg(const SystemModel& s, const MatrixXd& x, const MatrixXd& u) {
  const Eigen::Index T = u.rows();
  double cost = 0.0;
  for (Eigen::Index t = 0; t < T; ++t) {
    const VectorXd xt = x.row(t).transpose();
    const VectorXd ut = u.row(t).transpose();
    cost += xt.dot(s.Q1 * xt) + ut.dot(s.R * ut);
  }
  const VectorXd xT = x.row(T).transpose();
  return cost + xT.dot(s.Q2 * xT);
}

/// Controller-side estimate of x_k from the freshest sample x_{k-age}
/// rolled forward with the applied inputs. When age == k+1 no sample has
/// arrived and the zero prior mean is propagated instead. Only rows
/// x[k-age] and u[k-age .. k-1] are read.
inline VectorXd estimator_update(const SystemModel& s, const MatrixXd& x,
                                 const MatrixXd& u, int age, int k) {
  if (k < 0 || age < 1 || age > k + 1)
    throw InputError("estimator: age " + std::to_string(age) + " invalid at step " +
                     std::to_string(k));
  const int origin = k - age;  // -1 means prior
  if (origin >= 0 && x.rows() <= origin)
    throw InputError("estimator: missing x_" + std::to_string(origin));
  if (k > 0 && u.rows() < k)
    throw InputError("estimator: missing u_" + std::to_string(k - 1));
  const int steps = origin >= 0 ? age : k;
  VectorXd xhat = origin >= 0 ? VectorXd(x.row(origin).transpose())
                              : VectorXd::Zero(s.n());
  for (int j = k - steps; j < k; ++j) xhat = s.A * xhat + s.B * u.row(j).transpose();
  return xhat;
}

inline VectorXd estimator_update(const SystemModel& s, const MatrixXd& x,
                                 const MatrixXd& u, const SwitchingSchedule& schedule,
                                 int k) {
  if (k < 0 || k >= schedule.T())
    throw InputError("estimator: step " + std::to_string(k) + " outside the horizon");
  return estimator_update(s, x, u, compute_b(schedule).age[k], k);
}

namespace detail {

inline std::vector<int> single_link_delays(const SwitchingSchedule& schedule) {
  schedule.check();
  for (int k = 0; k < schedule.T(); ++k)
    if (schedule.row_count(k) != 1)
      throw InputError("simulation needs a single-link schedule; reduce row " +
                       std::to_string(k) + " first");
  return schedule.fastest_delays();
}

/// Schedule-independent quantities shared by all runs.
struct SimulationSetup {
  const Problem& problem;
  const RiccatiSolution& ric;
  std::vector<int> age;
  MatrixXd sigma0_factor;
  MatrixXd w_factor;
  double comm = 0.0;

  SimulationSetup(const Problem& p, const RiccatiSolution& r,
                  const SwitchingSchedule& schedule)
      : problem(p), ric(r) {
    if (r.horizon() != p.horizon.T || schedule.T() != p.horizon.T ||
        schedule.D() != p.pricing.D)
      throw StructuralError("schedule, Riccati solution and problem disagree on T or D");
    const std::vector<int> delays = single_link_delays(schedule);
    age = compute_b(schedule).age;
    sigma0_factor = linalg::psd_factor(p.model.Sigma0);
    w_factor = linalg::psd_factor(p.model.W);
    for (int d : delays) comm += p.pricing.price(d);
  }
};

inline SimulationRun run_once(const SimulationSetup& setup, const CounterRng& rng,
                              int run) {
  const SystemModel& s = setup.problem.model;
  const int T = setup.problem.horizon.T;
  const Eigen::Index n = s.n(), m = s.m();
  SimulationRun out;
  out.seed = rng.seed();
  out.run = run;
  out.x.resize(T + 1, n);
  out.u.resize(T, m);
  out.xhat.resize(T, n);
  out.e.resize(T, n);
  out.w.resize(T, n);

  VectorXd z(n);
  for (Eigen::Index c = 0; c < n; ++c) z(c) = rng.normal(run, 0, c);
  out.x.row(0) = (setup.sigma0_factor * z).transpose();
  for (int k = 0; k < T; ++k) {
    const VectorXd xhat = estimator_update(s, out.x, out.u, setup.age[k], k);
    const VectorXd uk = -setup.ric.L[k] * xhat;
    for (Eigen::Index c = 0; c < n; ++c) z(c) = rng.normal(run, k + 1, c);
    const VectorXd wk = setup.w_factor * z;
    out.xhat.row(k) = xhat.transpose();
    out.e.row(k) = out.x.row(k) - xhat.transpose();
    out.u.row(k) = uk.transpose();
    out.w.row(k) = wk.transpose();
    out.x.row(k + 1) = (s.A * out.x.row(k).transpose() + s.B * uk + wk).transpose();
  }
  out.realizedLqg = realized_lqg(s, out.x, out.u);
  out.commCost = setup.comm;
  return out;
}

}  // namespace detail

/// A single seeded closed-loop run under u_k = -L_k xhat_k.
inline SimulationRun simulate_run(const Problem& p, const RiccatiSolution& ric,
                                  const SwitchingSchedule& schedule, std::uint64_t seed,
                                  int run = 0) {
  const detail::SimulationSetup setup(p, ric, schedule);
  return detail::run_once(setup, CounterRng(seed), run);
}

struct MonteCarloReport {
  int runs = 0;
  double meanLqg = 0.0;
  double seLqg = 0.0;  // sample std / sqrt(runs)
  double commCost = 0.0;
  double meanTotal = 0.0;
  // Per step k = 0..T-1, moments of e_k about its known zero mean.
  std::vector<VectorXd> errorMean;
  std::vector<VectorXd> errorMeanSe;
  std::vector<MatrixXd> empiricalErrorCov;  // (1/N) sum e e'
  std::vector<MatrixXd> errorCovSe;         // standard error of each entry
  std::vector<double> errorSqNorm;          // (1/N) sum |e|^2
  std::vector<double> errorSqNormSe;
  UtilizationTable utilization;
};

namespace detail {

struct MomentBlock {
  double lqg = 0.0, lqg2 = 0.0;
  std::vector<VectorXd> e1;
  std::vector<MatrixXd> e2, e4;
  std::vector<double> sq, sq2;

  MomentBlock(int T, Eigen::Index n)
      : e1(T, VectorXd::Zero(n)),
        e2(T, MatrixXd::Zero(n, n)),
        e4(T, MatrixXd::Zero(n, n)),
        sq(T, 0.0),
        sq2(T, 0.0) {}

  void add(const SimulationRun& r) {
    lqg += r.realizedLqg;
    lqg2 += r.realizedLqg * r.realizedLqg;
    for (std::size_t k = 0; k < e1.size(); ++k) {
      const VectorXd ek = r.e.row(k).transpose();
      const MatrixXd outer = ek * ek.transpose();
      e1[k] += ek;
      e2[k] += outer;
      e4[k] += outer.cwiseProduct(outer);
      const double s = ek.squaredNorm();
      sq[k] += s;
      sq2[k] += s * s;
    }
  }

  void merge(const MomentBlock& o) {
    lqg += o.lqg;
    lqg2 += o.lqg2;
    for (std::size_t k = 0; k < e1.size(); ++k) {
      e1[k] += o.e1[k];
      e2[k] += o.e2[k];
      e4[k] += o.e4[k];
      sq[k] += o.sq[k];
      sq2[k] += o.sq2[k];
    }
  }
};

inline double standard_error(double sum, double sum_sq, int n) {
  if (n < 2) return 0.0;
  const double mean = sum / n;
  const double var = std::max(0.0, (sum_sq - n * mean * mean) / (n - 1));
  return std::sqrt(var / n);
}

inline constexpr int kRunsPerBlock = 64;

}  // namespace detail

/// Seeded Monte Carlo over `runs` realisations. Runs are grouped in fixed
/// blocks that are merged in block order, so the report does not depend on
/// the number of worker threads.
inline MonteCarloReport simulate(const Problem& p, const RiccatiSolution& ric,
                                 const SwitchingSchedule& schedule, std::uint64_t seed,
                                 int runs) {
  if (runs < 1) throw InputError("runs must be at least 1");
  const detail::SimulationSetup setup(p, ric, schedule);
  const CounterRng rng(seed);
  const int T = p.horizon.T;
  const Eigen::Index n = p.model.n();
  const int blocks = (runs + detail::kRunsPerBlock - 1) / detail::kRunsPerBlock;
  std::vector<detail::MomentBlock> partial(blocks, detail::MomentBlock(T, n));
  parallel_for(blocks, [&](int b) {
    const int end = std::min(runs, (b + 1) * detail::kRunsPerBlock);
    for (int r = b * detail::kRunsPerBlock; r < end; ++r)
      partial[b].add(detail::run_once(setup, rng, r));
  });
  detail::MomentBlock total(T, n);
  for (const auto& blk : partial) total.merge(blk);

  MonteCarloReport rep;
  rep.runs = runs;
  rep.meanLqg = total.lqg / runs;
  rep.seLqg = detail::standard_error(total.lqg, total.lqg2, runs);
  rep.commCost = setup.comm;
  rep.meanTotal = rep.meanLqg + rep.commCost;
  rep.errorMean.resize(T);
  rep.errorMeanSe.resize(T);
  rep.empiricalErrorCov.resize(T);
  rep.errorCovSe.resize(T);
  rep.errorSqNorm.resize(T);
  rep.errorSqNormSe.resize(T);
  for (int k = 0; k < T; ++k) {
    rep.errorMean[k] = total.e1[k] / runs;
    rep.empiricalErrorCov[k] = total.e2[k] / runs;
    rep.errorMeanSe[k].resize(n);
    rep.errorCovSe[k].resize(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
      rep.errorMeanSe[k](i) = detail::standard_error(total.e1[k](i), total.e2[k](i, i), runs);
      for (Eigen::Index j = 0; j < n; ++j)
        rep.errorCovSe[k](i, j) =
            detail::standard_error(total.e2[k](i, j), total.e4[k](i, j), runs);
    }
    rep.errorSqNorm[k] = total.sq[k] / runs;
    rep.errorSqNormSe[k] = detail::standard_error(total.sq[k], total.sq2[k], runs);
  }
  rep.utilization = utilization(detail::single_link_delays(schedule), p.pricing.D);
  return rep;
}

}  // namespace delaymarket
