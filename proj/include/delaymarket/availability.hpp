#pragma once

#include <algorithm>
#include <cstdint>
#include <string>
#include <vector>

#include "delaymarket/errors.hpp"
#include "delaymarket/linalg.hpp"
#include "delaymarket/model.hpp"

namespace delaymarket {

/// Binary link-selection matrix theta (T rows, D columns). Row k marks the
/// links carrying x_k; column i-1 is the link with delay i.
class SwitchingSchedule {
 public:
  SwitchingSchedule() = default;
  SwitchingSchedule(int T, int D, bool multi_link = false)
      : T_(T), D_(D), multi_link_(multi_link),
        theta_(static_cast<std::size_t>(T) * D, 0) {}

  /// Single-link schedule from per-step delays d_k in {1..D}.
  static SwitchingSchedule from_delays(const std::vector<int>& delays, int D) {
    SwitchingSchedule s(static_cast<int>(delays.size()), D, false);
    for (int k = 0; k < s.T_; ++k) {
      if (delays[k] < 1 || delays[k] > D)
        throw InputError("delay " + std::to_string(delays[k]) + " at step " +
                         std::to_string(k) + " outside 1.." + std::to_string(D));
      s.set(k, delays[k], true);
    }
    return s;
  }

  static SwitchingSchedule constant(int T, int D, int delay) {
    return from_delays(std::vector<int>(T, delay), D);
  }

  int T() const { return T_; }
  int D() const { return D_; }
  bool multi_link() const { return multi_link_; }

  bool selected(int k, int delay) const {
    return theta_[static_cast<std::size_t>(k) * D_ + (delay - 1)] != 0;
  }
  void set(int k, int delay, bool on) {
    theta_[static_cast<std::size_t>(k) * D_ + (delay - 1)] = on ? 1 : 0;
  }

  int row_count(int k) const {
    int c = 0;
    for (int i = 1; i <= D_; ++i) c += selected(k, i) ? 1 : 0;
    return c;
  }

  /// Throws InputError unless every row selects at least one link (exactly
  /// one when the schedule is not multi-link).
  void check() const {
    for (int k = 0; k < T_; ++k) {
      const int c = row_count(k);
      if (c < 1)
        throw InputError("schedule row " + std::to_string(k) + " selects no link");
      if (!multi_link_ && c != 1)
        throw InputError("schedule row " + std::to_string(k) +
                         " selects several links in a single-link schedule");
    }
  }

  /// Fastest selected delay per row.
  std::vector<int> fastest_delays() const {
    std::vector<int> d(T_, 0);
    for (int k = 0; k < T_; ++k)
      for (int i = 1; i <= D_; ++i)
        if (selected(k, i)) {
          d[k] = i;
          break;
        }
    return d;
  }

  /// Single-link schedule keeping only each row's fastest selected link.
  SwitchingSchedule reduced() const { return from_delays(fastest_delays(), D_); }

  bool operator==(const SwitchingSchedule& o) const {
    return T_ == o.T_ && D_ == o.D_ && theta_ == o.theta_;
  }

 private:
  int T_ = 0;
  int D_ = 0;
  bool multi_link_ = false;
  std::vector<std::uint8_t> theta_;
};

/// Freshness indicators derived from a schedule. All tables are indexed
/// [k][i-1] for step k and delay/age i.
struct AvailabilityProfile {
  int T = 0;
  int D = 0;
  std::vector<std::vector<int>> b;  // one-hot in i: the freshest sample is x_{k-i}
  std::vector<std::vector<int>> c;  // c[k][i-1] = sum_{j>=i} b[k][j-1]; gamma_k
  std::vector<int> age;             // a_k, with b[k][a_k-1] = 1
  std::vector<int> tau;             // min(D, k+1)

  const std::vector<int>& gamma(int k) const { return c[k]; }
};

/// Evaluates the product/OR availability formula directly on theta. For
/// k < D the term i = k+1 stands for "prior only" (no sample yet).
inline AvailabilityProfile compute_b(const SwitchingSchedule& schedule) {
  schedule.check();
  const int T = schedule.T(), D = schedule.D();
  AvailabilityProfile prof;
  prof.T = T;
  prof.D = D;
  prof.b.assign(T, std::vector<int>(D, 0));
  prof.c.assign(T, std::vector<int>(D, 0));
  prof.age.assign(T, 0);
  prof.tau.assign(T, 0);

  auto theta = [&](int k, int j) { return schedule.selected(k, j) ? 1 : 0; };
  // prod_{d=1}^{i-1} prod_{j=1}^{d} (1 - theta^j_{k-d})
  auto nothing_newer = [&](int k, int i) {
    int prod = 1;
    for (int d = 1; d <= i - 1; ++d)
      for (int j = 1; j <= d; ++j) prod *= 1 - theta(k - d, j);
    return prod;
  };
  auto arrived = [&](int k, int i) {
    int any = 0;
    for (int l = 1; l <= i; ++l) any |= theta(k - i, l);
    return any;
  };

  for (int k = 0; k < T; ++k) {
    const int tau = std::min(D, k + 1);
    prof.tau[k] = tau;
    for (int i = 1; i <= tau; ++i) {
      if (i <= k)
        prof.b[k][i - 1] = nothing_newer(k, i) * arrived(k, i);
      else  // i == k + 1 <= D: prior statistics of x_0
        prof.b[k][i - 1] = nothing_newer(k, i);
    }
    int sum = 0;
    for (int i = D; i >= 1; --i) {
      sum += prof.b[k][i - 1];
      prof.c[k][i - 1] = sum;
      if (prof.b[k][i - 1]) prof.age[k] = i;
    }
  }
  return prof;
}

struct ErrorCovariances {
  std::vector<MatrixXd> M;  // M_k = Cov(e_k), k = 0..T-1
};

/// Noise covariance W_s with the prior convention W_{-1} = Sigma0.
inline const MatrixXd& noise_covariance(const SystemModel& model, int s) {
  return s == -1 ? model.Sigma0 : model.W;
}

/// M_k = sum_i c_{i,k} A^{i-1} W_{k-i} (A^{i-1})'.
inline ErrorCovariances error_covariances(const AvailabilityProfile& prof,
                                          const SystemModel& model) {
  const auto powers = linalg::matrix_powers(model.A, prof.D);
  ErrorCovariances out;
  out.M.reserve(prof.T);
  for (int k = 0; k < prof.T; ++k) {
    MatrixXd M = MatrixXd::Zero(model.n(), model.n());
    for (int i = 1; i <= prof.tau[k]; ++i) {
      if (!prof.c[k][i - 1]) continue;
      const MatrixXd& Ai = powers[i - 1];
      M += Ai * noise_covariance(model, k - i) * Ai.transpose();
    }
    out.M.push_back(linalg::symmetrized(M));
  }
  return out;
}

/// r_t[i-1] = tr(Ptilde_t A^{i-1} W_{t-i} (A^{i-1})') for i = 1..D; entries
/// that would reach before the prior (t - i < -1) are zero.
inline VectorXd stage_weight_vector(const MatrixXd& Ptilde_t, int t,
                                    const SystemModel& model, int D) {
  if (t < 0) throw InputError("stage index " + std::to_string(t) + " is negative");
  VectorXd r = VectorXd::Zero(D);
  MatrixXd Ai = MatrixXd::Identity(model.n(), model.n());
  for (int i = 1; i <= D; ++i) {
    if (t - i < -1) break;
    r(i - 1) = (Ptilde_t * Ai * noise_covariance(model, t - i) * Ai.transpose()).trace();
    Ai = Ai * model.A;
  }
  return r;
}

}  // namespace delaymarket
