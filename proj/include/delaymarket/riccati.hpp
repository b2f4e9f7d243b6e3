#pragma once

#include <string>
#include <vector>

#include "delaymarket/availability.hpp"
#include "delaymarket/errors.hpp"
#include "delaymarket/linalg.hpp"
#include "delaymarket/model.hpp"

namespace delaymarket {

/// Backward Riccati solution over a horizon T.
///   P[k]      k = 0..T, P[T] = Q2
///   L[k]      k = 0..T-1, u_k = -L[k] xhat_k
///   Ptilde[k] k = 0..T-1, Q1 + A'P[k+1]A - P[k]
///   traceW[t-1] = tr(P[t] W), t = 1..T
struct RiccatiSolution {
  std::vector<MatrixXd> P;
  std::vector<MatrixXd> L;
  std::vector<MatrixXd> Ptilde;
  std::vector<double> traceW;

  int horizon() const { return static_cast<int>(L.size()); }
};

namespace detail {

struct RiccatiStep {
  MatrixXd P;       // Q1 + A'PA - Ptilde
  MatrixXd L;       // (R + B'PB)^{-1} B'PA
  MatrixXd Ptilde;  // A'PB (R + B'PB)^{-1} B'PA
};

/// One backward step from P_{k+1}. Returns false when R + B'PB is not
/// numerically positive definite.
inline bool riccati_step(const SystemModel& s, const MatrixXd& Pnext,
                         RiccatiStep& out) {
  const MatrixXd PB = Pnext * s.B;
  const MatrixXd gram = linalg::symmetrized(s.R + s.B.transpose() * PB);
  Eigen::LLT<MatrixXd> llt(gram);
  if (llt.info() != Eigen::Success) return false;
  const MatrixXd BtPA = PB.transpose() * s.A;
  out.L = llt.solve(BtPA);
  out.Ptilde = linalg::symmetrized(BtPA.transpose() * out.L);
  out.P = linalg::symmetrized(s.Q1 + s.A.transpose() * Pnext * s.A - out.Ptilde);
  return true;
}

}  // namespace detail

inline RiccatiSolution solve_finite_horizon(const SystemModel& s, int T) {
  if (T < 1) throw StructuralError("horizon must be at least 1");
  RiccatiSolution sol;
  sol.P.resize(T + 1);
  sol.L.resize(T);
  sol.Ptilde.resize(T);
  sol.traceW.resize(T);
  sol.P[T] = s.Q2;
  detail::RiccatiStep step;
  for (int k = T - 1; k >= 0; --k) {
    if (!detail::riccati_step(s, sol.P[k + 1], step))
      throw IllPosedError("R + B'P_{k+1}B is not positive definite at k = " +
                              std::to_string(k),
                          k);
    sol.P[k] = std::move(step.P);
    sol.L[k] = std::move(step.L);
    sol.Ptilde[k] = std::move(step.Ptilde);
  }
  for (int t = 1; t <= T; ++t) sol.traceW[t - 1] = (sol.P[t] * s.W).trace();
  return sol;
}

inline RiccatiSolution solve_finite_horizon(const Problem& p) {
  return solve_finite_horizon(p.model, p.horizon.T);
}

struct SteadyState {
  MatrixXd Pinf;
  MatrixXd Linf;
  int iterations = 0;
  double residual = 0.0;  // ||Ric(Pinf) - Pinf||_2
};

inline constexpr double kSteadyStateTolerance = 1e-10;
inline constexpr int kSteadyStateMaxIterations = 100000;

/// Value iteration of the Riccati map starting from P = Q2 until the
/// operator-norm change of one step drops below tol.
inline SteadyState steady_state(const SystemModel& s,
                                double tol = kSteadyStateTolerance,
                                int max_iter = kSteadyStateMaxIterations) {
  SteadyState out;
  MatrixXd P = s.Q2;
  detail::RiccatiStep step;
  double residual = 0.0;
  for (int it = 1; it <= max_iter; ++it) {
    if (!detail::riccati_step(s, P, step))
      throw IllPosedError("R + B'PB is not positive definite during iteration", it);
    residual = linalg::spectral_norm(step.P - P);
    P = std::move(step.P);
    if (!std::isfinite(residual)) break;
    if (residual < tol) {
      out.Pinf = P;
      out.Linf = step.L;
      out.iterations = it;
      // defect of the returned iterate, one more map application
      detail::RiccatiStep check;
      if (!detail::riccati_step(s, P, check))
        throw IllPosedError("R + B'PB is not positive definite at the limit", it);
      out.residual = linalg::spectral_norm(check.P - P);
      out.Linf = check.L;
      return out;
    }
  }
  throw ConvergenceError("Riccati iteration did not converge in " +
                             std::to_string(max_iter) + " iterations (residual " +
                             std::to_string(residual) + ")",
                         residual);
}

/// Defect ||Q1 + A'(P - PB(R+B'PB)^{-1}B'P)A - P||_2 of the algebraic equation.
inline double are_residual(const SystemModel& s, const MatrixXd& P) {
  const MatrixXd gram = s.R + s.B.transpose() * P * s.B;
  const MatrixXd inner =
      P - P * s.B * gram.ldlt().solve(s.B.transpose() * P);
  return linalg::spectral_norm(s.Q1 + s.A.transpose() * inner * s.A - P);
}

/// Expected optimal LQG cost for a fixed schedule with zero prior mean:
///   tr(M_0 P_0) + sum_{t=1}^T tr(P_t W) + sum_{t=0}^{T-1} tr(Ptilde_t M_t).
inline double value_constant(const Problem& p, const RiccatiSolution& ric,
                             const AvailabilityProfile& prof) {
  const int T = p.horizon.T;
  if (ric.horizon() != T || prof.T != T)
    throw StructuralError("horizon mismatch between problem, Riccati solution and schedule");
  const ErrorCovariances cov = error_covariances(prof, p.model);
  double value = (cov.M[0] * ric.P[0]).trace();
  for (int t = 1; t <= T; ++t) value += ric.traceW[t - 1];
  for (int t = 0; t < T; ++t) value += (ric.Ptilde[t] * cov.M[t]).trace();
  return value;
}

}  // namespace delaymarket
