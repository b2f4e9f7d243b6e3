#pragma once

#include <cmath>
#include <cstdint>
#include <sstream>
#include <string>

#include "delaymarket/linalg.hpp"
#include "delaymarket/model.hpp"
#include "delaymarket/riccati.hpp"
#include "delaymarket/simulator.hpp"

namespace delaymarket {

struct StabilityReport {
  double spectralRadius = std::numeric_limits<double>::quiet_NaN();  // rho(A - B Linf)
  double errorBound = 0.0;  // sum_{j=1}^D ||A^{j-1}||_2^2 tr(W)
  bool riccatiConverged = false;
  double riccatiResidual = std::numeric_limits<double>::quiet_NaN();
  int riccatiIterations = 0;
  bool lmss = false;
  std::string reason;

  /// Flat key=value block, one entry per line.
  std::string to_text() const {
    std::ostringstream os;
    os.precision(12);
    os << "spectral_radius=" << spectralRadius << '\n'
       << "error_bound=" << errorBound << '\n'
       << "riccati_converged=" << (riccatiConverged ? "true" : "false") << '\n'
       << "riccati_residual=" << riccatiResidual << '\n'
       << "riccati_iterations=" << riccatiIterations << '\n'
       << "lmss=" << (lmss ? "true" : "false") << '\n'
       << "reason=" << reason << '\n';
    return os.str();
  }
};

/// Worst-case mean-square estimation error over D-1 steps without an update.
inline double error_bound(const SystemModel& s, int D) {
  const double trW = s.W.trace();
  double bound = 0.0;
  for (const MatrixXd& Aj : linalg::matrix_powers(s.A, D)) {
    const double nrm = linalg::spectral_norm(Aj);
    bound += nrm * nrm * trW;
  }
  return bound;
}

inline StabilityReport analyze(const Problem& p, double tol = kSteadyStateTolerance,
                               int max_iter = kSteadyStateMaxIterations) {
  StabilityReport rep;
  rep.errorBound = error_bound(p.model, p.pricing.D);
  try {
    const SteadyState ss = steady_state(p.model, tol, max_iter);
    rep.riccatiConverged = true;
    rep.riccatiResidual = ss.residual;
    rep.riccatiIterations = ss.iterations;
    rep.spectralRadius = linalg::spectral_radius(p.model.A - p.model.B * ss.Linf);
  } catch (const ConvergenceError& e) {
    rep.riccatiResidual = e.residual();
    rep.reason = "steady-state Riccati iteration did not converge";
    return rep;
  } catch (const IllPosedError& e) {
    rep.reason = e.what();
    return rep;
  }
  const bool contracting = rep.spectralRadius < 1.0;
  const bool bounded = std::isfinite(rep.errorBound);
  rep.lmss = contracting && bounded;
  if (!contracting)
    rep.reason = "closed-loop spectral radius >= 1";
  else if (!bounded)
    rep.reason = "error bound is not finite";
  else
    rep.reason = "converged Riccati limit, stable closed loop, bounded estimation error";
  return rep;
}

struct EmpiricalErrorSup {
  double sup = 0.0;  // max_k mean |e_k|^2
  double se = 0.0;   // standard error at the maximising k
  int step = 0;
  double bound = 0.0;
};

inline EmpiricalErrorSup empirical_error_sup(const Problem& p,
                                             const SwitchingSchedule& schedule,
                                             const RiccatiSolution& ric,
                                             std::uint64_t seed, int runs) {
  const MonteCarloReport mc = simulate(p, ric, schedule, seed, runs);
  EmpiricalErrorSup out;
  out.bound = error_bound(p.model, p.pricing.D);
  for (int k = 0; k < static_cast<int>(mc.errorSqNorm.size()); ++k) {
    if (k == 0 || mc.errorSqNorm[k] > out.sup) {
      out.sup = mc.errorSqNorm[k];
      out.se = mc.errorSqNormSe[k];
      out.step = k;
    }
  }
  return out;
}

}  // namespace delaymarket
