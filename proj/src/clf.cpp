#include "resclf/clf.hpp"

#include <stdexcept>

namespace resclf {

namespace {

void check_eta(const ResClfCertificate& cert, const OutputDynamics& dyn,
               const Eigen::VectorXd& eta) {
  if (!(cert.dims == dyn.dims) || eta.size() != dyn.dims.eta_size()) {
    throw std::invalid_argument("eta / certificate / dynamics size mismatch");
  }
}

}  // namespace

ClfEvaluation evaluate_clf(const ResClfCertificate& cert,
                           const OutputDynamics& dyn,
                           const Eigen::VectorXd& eta) {
  check_eta(cert, dyn, eta);
  const Eigen::VectorXd Pe = cert.P_eps * eta;
  ClfEvaluation out;
  out.V = eta.dot(Pe);
  // eta^T (F^T P + P F) eta = 2 (F eta) . (P eta)
  out.LF_V = 2.0 * (dyn.F * eta).dot(Pe);
  out.LG_V = 2.0 * (dyn.G.transpose() * Pe).transpose();
  return out;
}

Eigen::VectorXd min_norm_mu(const ResClfCertificate& cert,
                            const OutputDynamics& dyn,
                            const Eigen::VectorXd& eta) {
  const ClfEvaluation e = evaluate_clf(cert, dyn, eta);
  const double psi0 = e.LF_V + cert.rate() * e.V;
  if (psi0 <= 0.0) return Eigen::VectorXd::Zero(dyn.dims.input_size());
  const double psi1_sq = e.LG_V.squaredNorm();
  if (psi1_sq == 0.0) {
    throw ClfInfeasible("min_norm_mu: L_G V = 0 with positive psi0");
  }
  return -(psi0 / psi1_sq) * e.LG_V.transpose();
}

Membership membership(const ResClfCertificate& cert, const OutputDynamics& dyn,
                      const Eigen::VectorXd& eta, const Eigen::VectorXd& mu,
                      ClfRate rate) {
  if (mu.size() != dyn.dims.input_size()) {
    throw std::invalid_argument("membership: mu has the wrong size");
  }
  const ClfEvaluation e = evaluate_clf(cert, dyn, eta);
  const double slack = e.LF_V + e.LG_V.dot(mu) + rate.value(cert) * e.V;
  return {slack <= 0.0, slack};
}

Eigen::VectorXd u_s_damping(const ResClfCertificate& cert,
                            const OutputDynamics& dyn,
                            const Eigen::VectorXd& eta, double eps_bar) {
  if (!(eps_bar > 0.0 && eps_bar <= 1.0)) {
    throw std::invalid_argument("eps_bar must lie in (0, 1]");
  }
  check_eta(cert, dyn, eta);
  return -(0.5 / eps_bar) * (dyn.G.transpose() * (cert.P_eps * eta));
}

Eigen::VectorXd auxiliary_input(const ResClfCertificate& cert,
                                const OutputDynamics& dyn,
                                const Eigen::VectorXd& eta,
                                ControllerMode mode, double eps_bar) {
  Eigen::VectorXd mu = min_norm_mu(cert, dyn, eta);
  if (mode == ControllerMode::kMinNormPlusUs) {
    mu += u_s_damping(cert, dyn, eta, eps_bar);
  }
  return mu;
}

}  // namespace resclf
