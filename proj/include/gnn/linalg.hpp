#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace gnn {

/// Raised when a linear system or training step cannot produce finite output.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class SolveMethod { cholesky, jittered_cholesky, truncated_eigen };

inline std::string to_string(SolveMethod m) {
  switch (m) {
    case SolveMethod::cholesky: return "cholesky";
    case SolveMethod::jittered_cholesky: return "jittered_cholesky";
    case SolveMethod::truncated_eigen: return "truncated_eigen";
  }
  return "unknown";
}

struct SpdSolveResult {
  Eigen::VectorXd x;
  SolveMethod method = SolveMethod::cholesky;
  Eigen::Index discarded = 0;  // eigenpairs dropped by the truncated solve
};

/// Solve K x = F for symmetric positive (semi)definite K.
///
/// Cholesky first; on failure Cholesky of K + (1e-12 trace/m) I; on failure a
/// truncated eigen-solve that drops eigenvalues below 1e-12 lambda_max.
inline SpdSolveResult spd_solve(const Eigen::MatrixXd& K, const Eigen::VectorXd& F) {
  if (K.rows() != K.cols() || K.rows() != F.size()) throw std::invalid_argument("spd_solve: dimension mismatch");
  const Eigen::Index m = K.rows();
  SpdSolveResult out;
  if (m == 0) return out;
  const auto finite_ok = [&](const Eigen::VectorXd& x) { return x.allFinite(); };

  Eigen::LLT<Eigen::MatrixXd> llt(K);
  if (llt.info() == Eigen::Success) {
    out.x = llt.solve(F);
    if (finite_ok(out.x)) return out;
  }

  const double jitter = 1e-12 * K.trace() / static_cast<double>(m);
  if (jitter > 0.0) {
    Eigen::MatrixXd Kj = K;
    Kj.diagonal().array() += jitter;
    llt.compute(Kj);
    if (llt.info() == Eigen::Success) {
      out.x = llt.solve(F);
      out.method = SolveMethod::jittered_cholesky;
      if (finite_ok(out.x)) return out;
    }
  }

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(K);
  if (eig.info() != Eigen::Success) throw NumericalError("spd_solve: eigen-decomposition failed");
  const Eigen::VectorXd& lam = eig.eigenvalues();
  const double cutoff = 1e-12 * lam.maxCoeff();
  if (!(lam.maxCoeff() > 0.0)) throw NumericalError("spd_solve: matrix has no positive eigenvalues");
  const Eigen::VectorXd proj = eig.eigenvectors().transpose() * F;
  Eigen::VectorXd scaled = Eigen::VectorXd::Zero(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    if (lam[i] > cutoff) {
      scaled[i] = proj[i] / lam[i];
    } else {
      ++out.discarded;
    }
  }
  out.x = eig.eigenvectors() * scaled;
  out.method = SolveMethod::truncated_eigen;
  if (!finite_ok(out.x)) throw NumericalError("spd_solve: all fallbacks produced non-finite output");
  return out;
}

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations, stopping
/// once the off-diagonal Frobenius norm is below 1e-12 ||K||_F.
inline Eigen::VectorXd symmetric_eigenvalues_jacobi(Eigen::MatrixXd A) {
  const Eigen::Index m = A.rows();
  if (A.cols() != m) throw std::invalid_argument("jacobi: matrix must be square");
  const double total = A.norm();
  const auto off_norm = [&]() {
    double s = 0.0;
    for (Eigen::Index i = 0; i < m; ++i)
      for (Eigen::Index j = 0; j < m; ++j)
        if (i != j) s += A(i, j) * A(i, j);
    return std::sqrt(s);
  };
  for (int sweep = 0; sweep < 100 && off_norm() > 1e-12 * total; ++sweep) {
    for (Eigen::Index p = 0; p < m - 1; ++p) {
      for (Eigen::Index q = p + 1; q < m; ++q) {
        const double apq = A(p, q);
        if (apq == 0.0) continue;
        const double theta = (A(q, q) - A(p, p)) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (Eigen::Index k = 0; k < m; ++k) {
          const double akp = A(k, p);
          const double akq = A(k, q);
          A(k, p) = c * akp - s * akq;
          A(k, q) = s * akp + c * akq;
        }
        for (Eigen::Index k = 0; k < m; ++k) {
          const double apk = A(p, k);
          const double aqk = A(q, k);
          A(p, k) = c * apk - s * aqk;
          A(q, k) = s * apk + c * aqk;
        }
      }
    }
  }
  return A.diagonal();
}

struct ConditionNumber {
  double value = 1.0;
  bool positive_definite = true;
};

/// lambda_max / lambda_min; reported as +inf (flagged) when lambda_min <= 0.
inline ConditionNumber condition_number(const Eigen::MatrixXd& K) {
  if (K.rows() == 0) return {};
  const Eigen::VectorXd lam = symmetric_eigenvalues_jacobi(K);
  const double mn = lam.minCoeff();
  const double mx = lam.maxCoeff();
  if (!(mn > 0.0)) return {std::numeric_limits<double>::infinity(), false};
  return {mx / mn, true};
}

}  // namespace gnn
