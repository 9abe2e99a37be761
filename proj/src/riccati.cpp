#include "resclf/riccati.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "resclf/linalg.hpp"

namespace resclf {

namespace {

constexpr double kAcceptResidual = 1e-10;

void require_spd(const Eigen::MatrixXd& Q, int n) {
  if (Q.rows() != n || Q.cols() != n) {
    throw std::invalid_argument("Q must be " + std::to_string(n) + "x" +
                                std::to_string(n));
  }
  const double scale = std::max(1.0, Q.cwiseAbs().maxCoeff());
  if ((Q - Q.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
    throw std::invalid_argument("Q must be symmetric");
  }
  if (lambda_min(Q) <= 0.0) {
    throw std::invalid_argument("Q must be positive definite");
  }
}

using MatrixXld = Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>;

// F^T P + P F - (1/eps) P G G^T P + (1/eps) Q in extended precision, so the
// result reflects the stored P rather than rounding in its evaluation.
Eigen::MatrixXd riccati_map(const OutputDynamics& dyn, const Eigen::MatrixXd& P,
                            const Eigen::MatrixXd& Q, long double inv_eps) {
  const MatrixXld F = dyn.F.cast<long double>();
  const MatrixXld G = dyn.G.cast<long double>();
  const MatrixXld Pl = P.cast<long double>();
  const MatrixXld PG = Pl * G;
  const MatrixXld R = F.transpose() * Pl + Pl * F - inv_eps * PG * PG.transpose() +
                      inv_eps * Q.cast<long double>();
  return R.cast<double>();
}

}  // namespace

Eigen::MatrixXd identity_care_solution(const OutputDims& dims) {
  validate(dims);
  const double sqrt3 = std::sqrt(3.0);
  Eigen::MatrixXd P = Eigen::MatrixXd::Zero(dims.eta_size(), dims.eta_size());
  for (int i = 0; i < dims.k1; ++i) P(i, i) = 1.0;
  for (int i = 0; i < dims.k2; ++i) {
    const int a = dims.y2_offset() + i;
    const int b = dims.dy2_offset() + i;
    P(a, a) = sqrt3;
    P(b, b) = sqrt3;
    P(a, b) = 1.0;
    P(b, a) = 1.0;
  }
  return P;
}

double care_residual(const OutputDynamics& dyn, const Eigen::MatrixXd& P,
                     const Eigen::MatrixXd& Q) {
  return riccati_map(dyn, P, Q, 1.0L).norm();
}

double scaled_care_residual(const OutputDynamics& dyn,
                            const Eigen::MatrixXd& P_eps,
                            const Eigen::MatrixXd& Q_eps, double eps) {
  return riccati_map(dyn, P_eps, Q_eps, 1.0L / eps).norm();
}

CareSolution solve_care(const OutputDynamics& dyn, const Eigen::MatrixXd& Q,
                        const CareOptions& options) {
  const int n = dyn.dims.eta_size();
  require_spd(Q, n);

  const Eigen::MatrixXd GGt = dyn.G * dyn.G.transpose();
  CareSolution sol;
  sol.P = identity_care_solution(dyn.dims);
  sol.trace_history.push_back(sol.P.trace());
  sol.residual = care_residual(dyn, sol.P, Q);

  // Kleinman: with A_k = F - G G^T P_k, solve
  //   A_k^T P_{k+1} + P_{k+1} A_k = -(Q + P_k G G^T P_k).
  while (sol.residual > options.residual_tolerance &&
         sol.iterations < options.max_iterations) {
    const Eigen::MatrixXd A = dyn.F - GGt * sol.P;
    const Eigen::MatrixXd C = Q + sol.P * GGt * sol.P;
    Eigen::MatrixXd next = symmetrize(solve_lyapunov(A, C));
    const double next_residual = care_residual(dyn, next, Q);
    ++sol.iterations;
    sol.trace_history.push_back(next.trace());
    // Past quadratic convergence the residual sits at rounding level and
    // further iterates only shuffle the last bits.
    const bool stalled = next_residual >= sol.residual;
    if (!stalled || sol.residual > kAcceptResidual) {
      sol.P = std::move(next);
      sol.residual = next_residual;
    }
    if (stalled && sol.residual <= kAcceptResidual) break;
  }

  // Newton steps in correction form A^T dP + dP A = -R(P) with R in extended
  // precision recover the last digits the Kleinman form loses.
  for (int k = 0; k < 3 && sol.residual > options.residual_tolerance; ++k) {
    const Eigen::MatrixXd A = dyn.F - GGt * sol.P;
    const Eigen::MatrixXd next =
        symmetrize(sol.P + solve_lyapunov(A, riccati_map(dyn, sol.P, Q, 1.0L)));
    const double next_residual = care_residual(dyn, next, Q);
    if (!(next_residual < sol.residual)) break;
    sol.P = next;
    sol.residual = next_residual;
    ++sol.iterations;
    sol.trace_history.push_back(sol.P.trace());
  }

  if (!(sol.residual <= kAcceptResidual)) {
    throw std::runtime_error("solve_care: Newton-Kleinman did not converge in " +
                             std::to_string(sol.iterations) +
                             " iterations (residual " +
                             std::to_string(sol.residual) + ")");
  }
  return sol;
}

EpsilonScaling scale_epsilon(const Eigen::MatrixXd& P, const Eigen::MatrixXd& Q,
                             const OutputDims& dims, double eps) {
  if (!(eps > 0.0 && eps <= 1.0)) {
    throw std::invalid_argument("eps must lie in (0, 1]");
  }
  Eigen::VectorXd diag = Eigen::VectorXd::Ones(dims.eta_size());
  diag.segment(dims.y2_offset(), dims.k2).setConstant(1.0 / eps);
  const auto M = diag.asDiagonal();
  EpsilonScaling s;
  s.M = Eigen::MatrixXd(M);
  s.P_eps = M * P * M;
  s.Q_eps = M * Q * M;
  return s;
}

ResClfCertificate certificate(const OutputDynamics& dyn,
                              const Eigen::MatrixXd& Q, double eps,
                              const CareOptions& options) {
  if (!(eps > 0.0 && eps <= 1.0)) {
    throw std::invalid_argument("eps must lie in (0, 1]");
  }
  const CareSolution sol = solve_care(dyn, Q, options);
  EpsilonScaling scaled = scale_epsilon(sol.P, Q, dyn.dims, eps);

  const SymEig eigP = sym_eig(sol.P);
  ResClfCertificate cert;
  cert.dims = dyn.dims;
  cert.P = sol.P;
  cert.Q = Q;
  cert.eps = eps;
  cert.M = std::move(scaled.M);
  cert.P_eps = std::move(scaled.P_eps);
  cert.Q_eps = std::move(scaled.Q_eps);
  cert.c1 = eigP.values(0);
  cert.c2 = eigP.values(eigP.values.size() - 1);
  cert.gamma = lambda_min(Q) / cert.c2;
  cert.c3 = cert.gamma;
  cert.care_residual = sol.residual;
  cert.scaled_care_residual =
      scaled_care_residual(dyn, cert.P_eps, cert.Q_eps, eps);
  cert.newton_iterations = sol.iterations;
  return cert;
}

}  // namespace resclf
