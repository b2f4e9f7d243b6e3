#pragma once

#include <algorithm>
#include <cstdint>
#include <random>
#include <vector>

#include "delaymarket/model.hpp"

namespace delaymarket::instances {

/// Unstable two-state plant with a five-link menu; unit weights.
inline Problem example1() {
  Problem p;
  auto& s = p.model;
  s.A.resize(2, 2);
  s.A << 1.01, 0, 0, 1;
  s.B.resize(2, 2);
  s.B << 0.1, 0, 0, 0.15;
  s.Q1 = MatrixXd::Identity(2, 2);
  s.Q2 = MatrixXd::Identity(2, 2);
  s.R = MatrixXd::Identity(2, 2);
  s.W = 1.5 * MatrixXd::Identity(2, 2);
  s.Sigma0 = MatrixXd::Identity(2, 2);
  p.pricing.D = 5;
  p.pricing.lambda.resize(5);
  p.pricing.lambda << 20, 13, 8, 2, 1;
  p.horizon.T = 100;
  return p;
}

/// Stable coupled two-state plant; unit weights, W = 1.5 I.
inline Problem example2() {
  Problem p;
  auto& s = p.model;
  s.A.resize(2, 2);
  s.A << 0.5, 0.05, 0.5, 0.9;
  s.B.resize(2, 2);
  s.B << 0.1, 0.01, 0.05, 0.15;
  s.Q1 = MatrixXd::Identity(2, 2);
  s.Q2 = MatrixXd::Identity(2, 2);
  s.R = MatrixXd::Identity(2, 2);
  s.W = 1.5 * MatrixXd::Identity(2, 2);
  s.Sigma0 = 1.5 * MatrixXd::Identity(2, 2);
  p.pricing.D = 5;
  p.pricing.lambda.resize(5);
  p.pricing.lambda << 10, 8, 2.5, 1.5, 1;
  p.horizon.T = 100;
  return p;
}

/// Small random instance: random A, B, PSD weights and covariances, R
/// positive definite, strictly decreasing positive prices. Deterministic in
/// seed on every platform (no std distributions).
class RandomInstance {
 public:
  explicit RandomInstance(std::uint64_t seed) : gen_(seed) {}

  double uniform(double lo, double hi) {
    const double u = static_cast<double>(gen_() >> 11) * 0x1.0p-53;
    return lo + (hi - lo) * u;
  }

  MatrixXd matrix(Eigen::Index rows, Eigen::Index cols, double lo, double hi) {
    MatrixXd M(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
      for (Eigen::Index j = 0; j < cols; ++j) M(i, j) = uniform(lo, hi);
    return M;
  }

  MatrixXd psd(Eigen::Index n, double scale = 1.0) {
    const MatrixXd G = matrix(n, n, -scale, scale);
    return G * G.transpose();
  }

  VectorXd prices(int D, double hi = 10.0) {
    std::vector<double> v(D);
    for (auto& x : v) x = uniform(0.05, hi);
    std::sort(v.begin(), v.end(), std::greater<>());
    VectorXd lam(D);
    for (int i = 0; i < D; ++i) lam(i) = v[i] + 0.01 * (D - i);  // strict
    return lam;
  }

  Problem problem(int T, int D, Eigen::Index n = 2, Eigen::Index m = 1) {
    Problem p;
    auto& s = p.model;
    s.A = matrix(n, n, -1.1, 1.1);
    s.B = matrix(n, m, -1.0, 1.0);
    s.Q1 = psd(n);
    s.Q2 = psd(n);
    s.R = psd(m, 0.5) + 0.2 * MatrixXd::Identity(m, m);
    s.W = psd(n);
    s.Sigma0 = psd(n);
    p.pricing.D = D;
    p.pricing.lambda = prices(D);
    p.horizon.T = T;
    return p;
  }

 private:
  std::mt19937_64 gen_;
};

inline Problem random_problem(std::uint64_t seed, int T, int D, Eigen::Index n = 2,
                              Eigen::Index m = 1) {
  return RandomInstance(seed).problem(T, D, n, m);
}

}  // namespace delaymarket::instances
