#pragma once

#include <Eigen/Dense>

namespace resclf {

/// Eigen-decomposition of a symmetric matrix.
struct SymEig {
  Eigen::VectorXd values;   ///< ascending
  Eigen::MatrixXd vectors;  ///< orthonormal, column i pairs with values(i)
};

/// Cyclic Jacobi rotations until the off-diagonal Frobenius norm drops below
/// 1e-12 (relative to the Frobenius norm of A, absolute when A = 0).
/// Throws std::invalid_argument if A is not square or not symmetric to
/// within 1e-12 (scaled by max(1, max|A_ij|)).
SymEig sym_eig(const Eigen::MatrixXd& A);

double lambda_min(const Eigen::MatrixXd& A);
double lambda_max(const Eigen::MatrixXd& A);

/// Largest singular value, via sym_eig of A^T A.
double max_singular_value(const Eigen::MatrixXd& A);

/// Solves A^T X + X A = -C by vectorizing into an n^2 x n^2 system
///   (I kron A^T + A^T kron I) vec(X) = -vec(C).
/// Intended for n up to a few dozen. Throws std::runtime_error if the
/// Kronecker system is singular (A and -A share an eigenvalue).
Eigen::MatrixXd solve_lyapunov(const Eigen::MatrixXd& A,
                               const Eigen::MatrixXd& C);

/// True if every eigenvalue of A has negative real part.
bool is_hurwitz(const Eigen::MatrixXd& A);

inline Eigen::MatrixXd symmetrize(const Eigen::MatrixXd& A) {
  return 0.5 * (A + A.transpose());
}

}  // namespace resclf
