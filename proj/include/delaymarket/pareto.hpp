#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "delaymarket/errors.hpp"
#include "delaymarket/parallel.hpp"
#include "delaymarket/switching.hpp"

namespace delaymarket {

/// f1 is the expected LQG cost, f2 the communication spend.
struct ParetoPoint {
  double alpha = 0.0;
  double f1 = 0.0;
  double f2 = 0.0;
  std::vector<int> delays;
};

struct ParetoSweep {
  std::vector<ParetoPoint> raw;    // one point per alpha, in grid order
  std::vector<ParetoPoint> front;  // nondominated subset, sorted by f2
};

inline std::vector<double> uniform_alpha_grid(int points = 101) {
  if (points < 2) throw InputError("alpha grid needs at least 2 points");
  std::vector<double> grid(points);
  for (int i = 0; i < points; ++i)
    grid[i] = static_cast<double>(i) / (points - 1);
  return grid;
}

/// True when a is at least as good as b in both objectives and better in one.
inline bool dominates(const ParetoPoint& a, const ParetoPoint& b) {
  return a.f1 <= b.f1 && a.f2 <= b.f2 && (a.f1 < b.f1 || a.f2 < b.f2);
}

/// Nondominated subset, duplicates of (f1, f2) collapsed, sorted by f2 then f1.
inline std::vector<ParetoPoint> nondominated(std::vector<ParetoPoint> pts) {
  std::stable_sort(pts.begin(), pts.end(), [](const ParetoPoint& a, const ParetoPoint& b) {
    return a.f2 != b.f2 ? a.f2 < b.f2 : a.f1 < b.f1;
  });
  std::vector<ParetoPoint> out;
  double best_f1 = std::numeric_limits<double>::infinity();
  for (auto& p : pts) {
    if (p.f1 < best_f1) {
      best_f1 = p.f1;
      out.push_back(std::move(p));
    }
  }
  return out;
}

/// (f1, f2) of a single-link schedule on the unscaled problem.
inline ParetoPoint objectives(const SwitchingProblem& sp, const std::vector<int>& delays,
                              double alpha = 0.0) {
  const OptimalSwitching ev =
      evaluate_schedule(sp, SwitchingSchedule::from_delays(delays, sp.D));
  return {alpha, ev.lqgCost, ev.commCost, delays};
}

/// Weighted-sum sweep: for each alpha minimise alpha*f1 + (1-alpha)*f2 and
/// record the unscaled objectives of the optimiser. Ties in the weighted sum
/// go to the lower unscaled spend.
inline ParetoSweep sweep(const SwitchingProblem& sp, std::span<const double> alpha_grid) {
  if (alpha_grid.empty()) throw InputError("alpha grid is empty");
  for (double a : alpha_grid)
    if (!(a >= 0.0 && a <= 1.0)) throw InputError("alpha outside [0, 1]");
  ParetoSweep out;
  out.raw.resize(alpha_grid.size());
  parallel_for(static_cast<int>(alpha_grid.size()), [&](int idx) {
    const double alpha = alpha_grid[idx];
    SwitchingProblem scaled = sp;
    scaled.r = alpha * sp.r;
    scaled.constantTerm = alpha * sp.constantTerm;
    scaled.lambda = (1.0 - alpha) * sp.lambda;
    const OptimalSwitching opt = solve_dp(scaled, sp.lambda);
    out.raw[idx] = objectives(sp, opt.delays, alpha);
  });
  out.front = nondominated(out.raw);
  return out;
}

inline ParetoSweep sweep(const Problem& p, const RiccatiSolution& ric,
                         std::span<const double> alpha_grid) {
  return sweep(build_switching_problem(p, ric), alpha_grid);
}

/// Result of the budget-constrained variant. `point` is empty when the
/// budget is below the smallest possible spend T * lambda_D.
struct BudgetOutcome {
  std::optional<ParetoPoint> point;
  double minimumSpend = 0.0;

  bool feasible() const { return point.has_value(); }
};

inline BudgetOutcome budget_solve(const SwitchingProblem& sp, double budget,
                                  std::span<const double> alpha_grid) {
  if (!(budget >= 0.0)) throw InputError("budget must be non-negative");
  BudgetOutcome out;
  out.minimumSpend =
      comm_cost(sp, SwitchingSchedule::constant(sp.T, sp.D, sp.D));
  if (budget < out.minimumSpend) return out;
  const ParetoSweep sw = sweep(sp, alpha_grid);
  for (const auto& pt : sw.raw) {
    if (pt.f2 > budget) continue;
    if (!out.point || pt.f1 < out.point->f1) out.point = pt;
  }
  return out;
}

inline BudgetOutcome budget_solve(const Problem& p, const RiccatiSolution& ric,
                                  double budget, std::span<const double> alpha_grid) {
  return budget_solve(build_switching_problem(p, ric), budget, alpha_grid);
}

/// Exact front by enumerating every single-link schedule; desk-scale only.
inline std::vector<ParetoPoint> exact_front(const SwitchingProblem& sp) {
  const double count = bruteforce_count(sp.T, sp.D, false);
  if (count > kBruteForceLimit)
    throw InstanceTooLargeError("exact front would enumerate too many schedules", count);
  std::vector<ParetoPoint> all;
  std::vector<int> d(sp.T, 1);
  while (true) {
    all.push_back(objectives(sp, d));
    int k = sp.T - 1;
    while (k >= 0 && d[k] == sp.D) d[k--] = 1;
    if (k < 0) break;
    ++d[k];
  }
  return nondominated(std::move(all));
}

/// Exact front points no weighted-sum sweep point reproduces (nonsupported
/// points or grid gaps), compared on (f1, f2) with relative tolerance tol.
inline std::vector<ParetoPoint> unsupported_points(const std::vector<ParetoPoint>& exact,
                                                   const std::vector<ParetoPoint>& swept,
                                                   double tol = 1e-9) {
  std::vector<ParetoPoint> gaps;
  for (const auto& e : exact) {
    const bool hit = std::any_of(swept.begin(), swept.end(), [&](const ParetoPoint& s) {
      return std::abs(s.f1 - e.f1) <= tol * (1 + std::abs(e.f1)) &&
             std::abs(s.f2 - e.f2) <= tol * (1 + std::abs(e.f2));
    });
    if (!hit) gaps.push_back(e);
  }
  return gaps;
}

}  // namespace delaymarket
