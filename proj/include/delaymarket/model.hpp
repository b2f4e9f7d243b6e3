#pragma once

#include <cmath>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "delaymarket/errors.hpp"
#include "delaymarket/linalg.hpp"

namespace delaymarket {

/// Stochastic LTI plant x_{k+1} = A x_k + B u_k + w_k with quadratic cost
/// weights. W and Sigma0 are covariances of w_k and x_0 (both zero mean).
struct SystemModel {
  MatrixXd A;
  MatrixXd B;
  MatrixXd Q1;      // stage state weight
  MatrixXd Q2;      // terminal weight
  MatrixXd R;       // input weight
  MatrixXd W;       // process-noise covariance
  MatrixXd Sigma0;  // initial-state covariance

  Eigen::Index n() const { return A.rows(); }
  Eigen::Index m() const { return B.cols(); }
};

/// Link menu: link i (1-based) delivers a state sample i steps later at
/// price lambda(i-1). Prices must strictly decrease with delay.
struct PricingScheme {
  int D = 1;
  VectorXd lambda;

  double price(int delay) const { return lambda(delay - 1); }
};

struct Horizon {
  int T = 1;
};

struct Problem {
  SystemModel model;
  PricingScheme pricing;
  Horizon horizon;

  int T() const { return horizon.T; }
  int D() const { return pricing.D; }
};

inline constexpr double kPsdTolerance = 1e-9;
inline constexpr double kPdTolerance = 1e-12;

struct ValidationCheck {
  std::string name;
  bool passed = true;
  std::string detail;
};

struct ValidationReport {
  std::vector<ValidationCheck> checks;

  bool ok() const {
    for (const auto& c : checks)
      if (!c.passed) return false;
    return true;
  }

  std::vector<std::string> violations() const {
    std::vector<std::string> out;
    for (const auto& c : checks)
      if (!c.passed) out.push_back(c.name + ": " + c.detail);
    return out;
  }

  const ValidationCheck* find(std::string_view name) const {
    for (const auto& c : checks)
      if (c.name == name) return &c;
    return nullptr;
  }

  std::string to_text() const {
    std::ostringstream os;
    for (const auto& c : checks) {
      os << (c.passed ? "PASS " : "FAIL ") << c.name;
      if (!c.detail.empty()) os << " (" << c.detail << ")";
      os << '\n';
    }
    os << (ok() ? "valid" : "invalid") << '\n';
    return os.str();
  }
};

namespace detail {

inline void require_shape(const MatrixXd& M, Eigen::Index rows,
                          Eigen::Index cols, const char* name) {
  if (M.rows() != rows || M.cols() != cols) {
    std::ostringstream os;
    os << name << " is " << M.rows() << "x" << M.cols() << ", expected "
       << rows << "x" << cols;
    throw StructuralError(os.str());
  }
}

inline void require_finite(const MatrixXd& M, const char* name) {
  if (!M.allFinite()) throw InputError(std::string(name) + " has non-finite entries");
}

inline std::string format_double(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

inline ValidationCheck psd_check(const MatrixXd& M, const char* name) {
  ValidationCheck c{std::string(name) + " symmetric PSD", true, {}};
  if (!linalg::is_symmetric(M, kPsdTolerance)) {
    c.passed = false;
    c.detail = "not symmetric";
    return c;
  }
  const double lo = linalg::min_eigenvalue(M);
  if (lo < -kPsdTolerance) {
    c.passed = false;
    c.detail = "min eigenvalue " + format_double(lo);
  }
  return c;
}

/// Controllability matrix [B AB ... A^{n-1}B].
inline MatrixXd controllability_matrix(const MatrixXd& A, const MatrixXd& B) {
  const Eigen::Index n = A.rows(), m = B.cols();
  MatrixXd C(n, n * m);
  MatrixXd block = B;
  for (Eigen::Index k = 0; k < n; ++k) {
    C.middleCols(k * m, m) = block;
    block = A * block;
  }
  return C;
}

/// Every mode of A with |lambda| >= 1 must be observable through C
/// (Hautus test: rank [A - lambda I; C] = n).
inline bool is_detectable(const MatrixXd& A, const MatrixXd& C) {
  const Eigen::Index n = A.rows();
  Eigen::EigenSolver<MatrixXd> es(A, false);
  for (Eigen::Index i = 0; i < n; ++i) {
    const std::complex<double> ev = es.eigenvalues()(i);
    if (std::abs(ev) < 1.0) continue;
    Eigen::MatrixXcd stacked(n + C.rows(), n);
    stacked.topRows(n) = A.cast<std::complex<double>>() -
                         ev * Eigen::MatrixXcd::Identity(n, n);
    stacked.bottomRows(C.rows()) = C.cast<std::complex<double>>();
    if (linalg::numerical_rank(stacked) < n) return false;
  }
  return true;
}

}  // namespace detail

/// Throws StructuralError on inconsistent dimensions and InputError on
/// non-finite data; otherwise returns every modelling check, passed or not.
/// Never modifies the problem.
inline ValidationReport validate(const Problem& p) {
  const auto& s = p.model;
  const Eigen::Index n = s.A.rows();
  if (n == 0) throw StructuralError("A is empty");
  detail::require_shape(s.A, n, n, "A");
  if (s.B.rows() != n || s.B.cols() == 0)
    throw StructuralError("B must have " + std::to_string(n) +
                          " rows and at least one column");
  const Eigen::Index m = s.B.cols();
  detail::require_shape(s.Q1, n, n, "Q1");
  detail::require_shape(s.Q2, n, n, "Q2");
  detail::require_shape(s.R, m, m, "R");
  detail::require_shape(s.W, n, n, "W");
  detail::require_shape(s.Sigma0, n, n, "Sigma0");
  if (p.pricing.D < 1) throw StructuralError("D must be at least 1");
  if (p.pricing.lambda.size() != p.pricing.D)
    throw StructuralError("lambda has " + std::to_string(p.pricing.lambda.size()) +
                          " entries, expected D = " + std::to_string(p.pricing.D));
  if (p.horizon.T < 1) throw StructuralError("T must be at least 1");

  detail::require_finite(s.A, "A");
  detail::require_finite(s.B, "B");
  detail::require_finite(s.Q1, "Q1");
  detail::require_finite(s.Q2, "Q2");
  detail::require_finite(s.R, "R");
  detail::require_finite(s.W, "W");
  detail::require_finite(s.Sigma0, "Sigma0");
  if (!p.pricing.lambda.allFinite()) throw InputError("lambda has non-finite entries");

  ValidationReport report;
  report.checks.push_back(detail::psd_check(s.Q1, "Q1"));
  report.checks.push_back(detail::psd_check(s.Q2, "Q2"));
  report.checks.push_back(detail::psd_check(s.W, "W"));
  report.checks.push_back(detail::psd_check(s.Sigma0, "Sigma0"));

  {
    ValidationCheck c{"R positive definite", true, {}};
    if (!linalg::is_symmetric(s.R, kPsdTolerance)) {
      c.passed = false;
      c.detail = "not symmetric";
    } else {
      const double lo = linalg::min_eigenvalue(s.R);
      if (!(lo > kPdTolerance)) {
        c.passed = false;
        c.detail = "min eigenvalue " + detail::format_double(lo);
      }
    }
    report.checks.push_back(c);
  }

  {
    ValidationCheck c{"(A,B) controllable", true, {}};
    const MatrixXd C = detail::controllability_matrix(s.A, s.B);
    const auto rank = linalg::numerical_rank(C.cast<std::complex<double>>());
    if (rank < n) {
      c.passed = false;
      c.detail = "controllability rank " + std::to_string(rank) + " < " +
                 std::to_string(n);
    }
    report.checks.push_back(c);
  }

  {
    ValidationCheck c{"(A,Q1^1/2) detectable", true, {}};
    if (!detail::is_detectable(s.A, linalg::psd_sqrt(s.Q1))) {
      c.passed = false;
      c.detail = "an eigenvalue with modulus >= 1 is unobservable through Q1";
    }
    report.checks.push_back(c);
  }

  {
    ValidationCheck c{"prices strictly decreasing and positive", true, {}};
    const auto& lam = p.pricing.lambda;
    for (Eigen::Index i = 0; i < lam.size(); ++i) {
      if (!(lam(i) > 0.0)) {
        c.passed = false;
        c.detail = "lambda_" + std::to_string(i + 1) + " <= 0";
        break;
      }
      if (i + 1 < lam.size() && !(lam(i) > lam(i + 1))) {
        c.passed = false;
        c.detail = "lambda_" + std::to_string(i + 1) + " <= lambda_" +
                   std::to_string(i + 2);
        break;
      }
    }
    report.checks.push_back(c);
  }
  return report;
}

namespace detail {

using nlohmann::json;

inline const json& require_key(const json& obj, const std::string& key,
                               const std::string& path) {
  if (!obj.is_object())
    throw InputError("schema: " + path + " must be an object");
  auto it = obj.find(key);
  if (it == obj.end())
    throw InputError("schema: missing field " + path + "." + key);
  return *it;
}

inline double number_at(const json& v, const std::string& field) {
  if (!v.is_number())
    throw InputError("schema: " + field + " must be a number");
  return v.get<double>();
}

inline MatrixXd matrix_from_json(const json& v, const std::string& field) {
  if (!v.is_array() || v.empty())
    throw InputError("schema: " + field + " must be a non-empty array of rows");
  const std::size_t rows = v.size();
  if (!v[0].is_array() || v[0].empty())
    throw InputError("schema: " + field + "[0] must be a non-empty array");
  const std::size_t cols = v[0].size();
  MatrixXd M(rows, cols);
  for (std::size_t i = 0; i < rows; ++i) {
    const std::string row_name = field + "[" + std::to_string(i) + "]";
    if (!v[i].is_array() || v[i].size() != cols)
      throw InputError("schema: " + row_name + " must have " +
                       std::to_string(cols) + " entries");
    for (std::size_t j = 0; j < cols; ++j)
      M(i, j) = number_at(v[i][j], row_name + "[" + std::to_string(j) + "]");
  }
  return M;
}

inline json matrix_to_json(const MatrixXd& M) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < M.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < M.cols(); ++j) row.push_back(M(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

inline int positive_int(const json& v, const std::string& field) {
  if (!v.is_number_integer() || v.get<long long>() < 1)
    throw InputError("schema: " + field + " must be a positive integer");
  return static_cast<int>(v.get<long long>());
}

inline std::string line_col(std::string_view text, std::size_t byte) {
  std::size_t line = 1, col = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

}  // namespace detail

/// Parses the JSON config and applies defaults (Sigma0 = W) without
/// checking modelling assumptions.
inline Problem parse_problem(std::string_view text) {
  using detail::json;
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw InputError("parse error at " + detail::line_col(text, e.byte) +
                     ": " + e.what());
  }
  if (!doc.is_object()) throw InputError("schema: top level must be an object");

  Problem p;
  const json& sys = detail::require_key(doc, "system", "$");
  auto mat = [&](const char* key) {
    return detail::matrix_from_json(detail::require_key(sys, key, "system"),
                                    std::string("system.") + key);
  };
  p.model.A = mat("A");
  p.model.B = mat("B");
  p.model.Q1 = mat("Q1");
  p.model.Q2 = mat("Q2");
  p.model.R = mat("R");
  p.model.W = mat("W");
  if (auto it = sys.find("Sigma0"); it != sys.end())
    p.model.Sigma0 = detail::matrix_from_json(*it, "system.Sigma0");
  else
    p.model.Sigma0 = p.model.W;

  const json& pricing = detail::require_key(doc, "pricing", "$");
  p.pricing.D = detail::positive_int(detail::require_key(pricing, "D", "pricing"),
                                     "pricing.D");
  const json& lam = detail::require_key(pricing, "lambda", "pricing");
  if (!lam.is_array())
    throw InputError("schema: pricing.lambda must be an array");
  if (lam.size() != static_cast<std::size_t>(p.pricing.D))
    throw InputError("schema: pricing.lambda has " + std::to_string(lam.size()) +
                     " entries but pricing.D = " + std::to_string(p.pricing.D));
  p.pricing.lambda.resize(p.pricing.D);
  for (int i = 0; i < p.pricing.D; ++i)
    p.pricing.lambda(i) =
        detail::number_at(lam[i], "pricing.lambda[" + std::to_string(i) + "]");

  const json& horizon = detail::require_key(doc, "horizon", "$");
  p.horizon.T = detail::positive_int(detail::require_key(horizon, "T", "horizon"),
                                     "horizon.T");

  return p;
}

/// parse_problem followed by validate(); throws ValidationError listing
/// every violated condition.
inline Problem load_problem(std::string_view text) {
  Problem p = parse_problem(text);
  const ValidationReport report = validate(p);
  if (!report.ok()) {
    std::string msg = "validation failed:";
    for (const auto& v : report.violations()) msg += "\n  " + v;
    throw ValidationError(msg);
  }
  return p;
}

inline std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline Problem load_problem_file(const std::string& path) {
  return load_problem(read_text_file(path));
}

/// Canonical config document; load_problem(serialize_problem(p)) reproduces
/// p bit-exactly (doubles are written in shortest round-trip form).
inline std::string serialize_problem(const Problem& p) {
  using detail::json;
  json doc;
  doc["system"]["A"] = detail::matrix_to_json(p.model.A);
  doc["system"]["B"] = detail::matrix_to_json(p.model.B);
  doc["system"]["Q1"] = detail::matrix_to_json(p.model.Q1);
  doc["system"]["Q2"] = detail::matrix_to_json(p.model.Q2);
  doc["system"]["R"] = detail::matrix_to_json(p.model.R);
  doc["system"]["W"] = detail::matrix_to_json(p.model.W);
  doc["system"]["Sigma0"] = detail::matrix_to_json(p.model.Sigma0);
  doc["pricing"]["D"] = p.pricing.D;
  json lam = json::array();
  for (Eigen::Index i = 0; i < p.pricing.lambda.size(); ++i)
    lam.push_back(p.pricing.lambda(i));
  doc["pricing"]["lambda"] = lam;
  doc["horizon"]["T"] = p.horizon.T;
  return doc.dump(2) + "\n";
}

}  // namespace delaymarket
