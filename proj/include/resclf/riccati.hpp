#pragma once

#include <vector>

#include <Eigen/Dense>

#include "resclf/output_dynamics.hpp"

namespace resclf {

struct CareOptions {
  int max_iterations = 100;
  /// Stop once the Frobenius CARE residual falls below this. The default
  /// iterates until the residual stops decreasing.
  double residual_tolerance = 0.0;
};

/// Newton-Kleinman solution of  F^T P + P F - P G G^T P + Q = 0.
struct CareSolution {
  Eigen::MatrixXd P;
  int iterations = 0;
  double residual = 0.0;
  /// trace(P_k) for every iterate, starting with the seed.
  std::vector<double> trace_history;
};

/// Closed-form stabilizing solution for Q = I. Block diagonal (after the
/// eta permutation) with 1 on every y1 entry and [[sqrt3, 1], [1, sqrt3]] on
/// every (y2_i, dy2_i) pair. Used as the Newton-Kleinman seed.
Eigen::MatrixXd identity_care_solution(const OutputDims& dims);

/// Throws std::invalid_argument if Q is not symmetric positive definite or
/// has the wrong size, std::runtime_error if the iteration does not reach a
/// residual of 1e-10 within options.max_iterations.
CareSolution solve_care(const OutputDynamics& dyn, const Eigen::MatrixXd& Q,
                        const CareOptions& options = {});

/// ||F^T P + P F - P G G^T P + Q||_F
double care_residual(const OutputDynamics& dyn, const Eigen::MatrixXd& P,
                     const Eigen::MatrixXd& Q);

/// ||F^T Pe + Pe F - (1/eps) Pe G G^T Pe + (1/eps) Qe||_F
double scaled_care_residual(const OutputDynamics& dyn,
                            const Eigen::MatrixXd& P_eps,
                            const Eigen::MatrixXd& Q_eps, double eps);

struct EpsilonScaling {
  Eigen::MatrixXd M;
  Eigen::MatrixXd P_eps;
  Eigen::MatrixXd Q_eps;
};

/// M = diag(I_k1, (1/eps) I_k2, I_k2), P_eps = M P M, Q_eps = M Q M.
/// Only the y2 block is scaled: M^{-1} F M = eps F and M^{-1} G = G, which is
/// what turns the CARE into its eps-scaled form exactly.
/// Throws std::invalid_argument unless 0 < eps <= 1.
EpsilonScaling scale_epsilon(const Eigen::MatrixXd& P, const Eigen::MatrixXd& Q,
                             const OutputDims& dims, double eps);

/// Rapidly exponentially stabilizing CLF certificate.
///
/// V_eps(eta) = eta^T P_eps eta satisfies
///   c1 |eta|^2 <= V_eps <= (c2 / eps^2) |eta|^2
/// and admits inputs with V_eps_dot <= -(gamma / eps) V_eps.
struct ResClfCertificate {
  OutputDims dims;
  Eigen::MatrixXd P;
  Eigen::MatrixXd Q;
  double eps = 1.0;
  Eigen::MatrixXd M;
  Eigen::MatrixXd P_eps;
  Eigen::MatrixXd Q_eps;
  double gamma = 0.0;  ///< lambda_min(Q) / lambda_max(P)
  double c1 = 0.0;     ///< lambda_min(P)
  double c2 = 0.0;     ///< lambda_max(P)
  double c3 = 0.0;     ///< gamma
  double care_residual = 0.0;
  double scaled_care_residual = 0.0;
  int newton_iterations = 0;

  /// Convergence rate gamma / eps of V_eps.
  double rate() const { return gamma / eps; }
};

ResClfCertificate certificate(const OutputDynamics& dyn,
                              const Eigen::MatrixXd& Q, double eps,
                              const CareOptions& options = {});

}  // namespace resclf
