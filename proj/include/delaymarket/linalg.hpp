#pragma once

#include <cmath>
#include <complex>
#include <vector>

#include <Eigen/Dense>

namespace delaymarket {

using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace linalg {

inline MatrixXd symmetrized(const MatrixXd& M) {
  return 0.5 * (M + M.transpose());
}

/// Smallest eigenvalue of the symmetric part of M.
inline double min_eigenvalue(const MatrixXd& M) {
  if (M.size() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(symmetrized(M),
                                             Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

inline bool is_symmetric(const MatrixXd& M, double tol) {
  return M.rows() == M.cols() && (M - M.transpose()).cwiseAbs().maxCoeff() <= tol;
}

inline bool is_psd(const MatrixXd& M, double tol = 1e-9) {
  return min_eigenvalue(M) >= -tol;
}

/// Largest singular value.
inline double spectral_norm(const MatrixXd& M) {
  if (M.size() == 0) return 0.0;
  Eigen::JacobiSVD<MatrixXd> svd(M);
  return svd.singularValues()(0);
}

inline double spectral_radius(const MatrixXd& M) {
  if (M.size() == 0) return 0.0;
  Eigen::EigenSolver<MatrixXd> es(M, false);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

/// A^0 ... A^{count-1}.
inline std::vector<MatrixXd> matrix_powers(const MatrixXd& A, int count) {
  std::vector<MatrixXd> powers;
  powers.reserve(count > 0 ? count : 0);
  if (count <= 0) return powers;
  powers.push_back(MatrixXd::Identity(A.rows(), A.cols()));
  for (int j = 1; j < count; ++j) powers.push_back(powers.back() * A);
  return powers;
}

/// Factor S = F F' for a symmetric PSD S; tolerates singular S.
inline MatrixXd psd_factor(const MatrixXd& S) {
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(symmetrized(S));
  VectorXd roots = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * roots.asDiagonal();
}

inline MatrixXd psd_sqrt(const MatrixXd& S) {
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(symmetrized(S));
  VectorXd roots = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * roots.asDiagonal() * es.eigenvectors().transpose();
}

inline Eigen::Index numerical_rank(const Eigen::MatrixXcd& M) {
  if (M.size() == 0) return 0;
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(M);
  const auto& s = svd.singularValues();
  const double tol = std::max(M.rows(), M.cols()) * s(0) *
                     Eigen::NumTraits<double>::epsilon() * 16;
  Eigen::Index rank = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i)
    if (s(i) > tol) ++rank;
  return rank;
}

inline bool all_finite(const MatrixXd& M) { return M.allFinite(); }

}  // namespace linalg
}  // namespace delaymarket
