#include "resclf/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace resclf {

namespace {

constexpr int kMaxSweeps = 100;

double off_diagonal_norm(const Eigen::MatrixXd& A) {
  double sum = 0.0;
  for (Eigen::Index i = 0; i < A.rows(); ++i) {
    for (Eigen::Index j = 0; j < A.cols(); ++j) {
      if (i != j) sum += A(i, j) * A(i, j);
    }
  }
  return std::sqrt(sum);
}

}  // namespace

SymEig sym_eig(const Eigen::MatrixXd& A) {
  if (A.rows() != A.cols()) {
    throw std::invalid_argument("sym_eig: matrix is not square");
  }
  const Eigen::Index n = A.rows();
  const double scale = std::max(1.0, A.cwiseAbs().maxCoeff());
  if (n > 0 && (A - A.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
    throw std::invalid_argument("sym_eig: matrix is not symmetric");
  }

  Eigen::MatrixXd a = symmetrize(A);
  Eigen::MatrixXd v = Eigen::MatrixXd::Identity(n, n);
  const double tol = 1e-12 * (a.norm() > 0.0 ? a.norm() : 1.0);

  for (int sweep = 0; sweep < kMaxSweeps && off_diagonal_norm(a) > tol;
       ++sweep) {
    for (Eigen::Index p = 0; p < n - 1; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        // Rotation angle zeroing a(p, q); t is the smaller root of
        // t^2 + 2 theta t - 1 = 0.
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = std::copysign(1.0, theta) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;

        for (Eigen::Index k = 0; k < n; ++k) {
          const double akp = a(k, p);
          const double akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (Eigen::Index k = 0; k < n; ++k) {
          const double apk = a(p, k);
          const double aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        for (Eigen::Index k = 0; k < n; ++k) {
          const double vkp = v(k, p);
          const double vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }

  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index i, Eigen::Index j) {
                     return a(i, i) < a(j, j);
                   });

  SymEig out{Eigen::VectorXd(n), Eigen::MatrixXd(n, n)};
  for (Eigen::Index i = 0; i < n; ++i) {
    out.values(i) = a(order[i], order[i]);
    out.vectors.col(i) = v.col(order[i]);
  }
  return out;
}

double lambda_min(const Eigen::MatrixXd& A) { return sym_eig(A).values(0); }

double lambda_max(const Eigen::MatrixXd& A) {
  const SymEig e = sym_eig(A);
  return e.values(e.values.size() - 1);
}

double max_singular_value(const Eigen::MatrixXd& A) {
  if (A.size() == 0) return 0.0;
  return std::sqrt(std::max(0.0, lambda_max(A.transpose() * A)));
}

Eigen::MatrixXd solve_lyapunov(const Eigen::MatrixXd& A,
                               const Eigen::MatrixXd& C) {
  const Eigen::Index n = A.rows();
  if (A.cols() != n || C.rows() != n || C.cols() != n) {
    throw std::invalid_argument("solve_lyapunov: dimension mismatch");
  }
  const Eigen::MatrixXd At = A.transpose();
  const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(n, n);

  // Column-major vec: vec(A^T X) = (I kron A^T) vec X,
  // vec(X A) = (A^T kron I) vec X.
  Eigen::MatrixXd K = Eigen::MatrixXd::Zero(n * n, n * n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      K.block(i * n, j * n, n, n) += I(i, j) * At;
      K.block(i * n, j * n, n, n) += At(i, j) * I;
    }
  }
  const Eigen::VectorXd rhs =
      -Eigen::Map<const Eigen::VectorXd>(C.data(), n * n);

  Eigen::FullPivLU<Eigen::MatrixXd> lu(K);
  if (!lu.isInvertible()) {
    throw std::runtime_error("solve_lyapunov: singular Kronecker system");
  }
  Eigen::VectorXd x = lu.solve(rhs);
  // One step of iterative refinement; the Kronecker matrix can be mildly
  // ill-conditioned when A has eigenvalues near the imaginary axis.
  x += lu.solve(rhs - K * x);
  return Eigen::Map<Eigen::MatrixXd>(x.data(), n, n);
}

bool is_hurwitz(const Eigen::MatrixXd& A) {
  if (A.size() == 0) return true;
  Eigen::EigenSolver<Eigen::MatrixXd> es(A, false);
  return (es.eigenvalues().real().array() < 0.0).all();
}

}  // namespace resclf
