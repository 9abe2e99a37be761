#pragma once

#include <stdexcept>

#include <Eigen/Dense>

#include "resclf/output_dynamics.hpp"
#include "resclf/riccati.hpp"

namespace resclf {

/// V_eps = eta^T P_eps eta and its Lie derivatives along (F, G).
struct ClfEvaluation {
  double V = 0.0;
  double LF_V = 0.0;        ///< eta^T (F^T P_eps + P_eps F) eta
  Eigen::RowVectorXd LG_V;  ///< 2 eta^T P_eps G
};

ClfEvaluation evaluate_clf(const ResClfCertificate& cert,
                           const OutputDynamics& dyn,
                           const Eigen::VectorXd& eta);

/// Raised when psi1 = 0 while psi0 > 0. This cannot happen when the scaled
/// CARE holds and gamma P <= Q, so it signals a broken certificate.
class ClfInfeasible : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Minimum-norm element of
///   K_eps(eta) = { mu : LF_V + LG_V mu + (gamma/eps) V <= 0 }.
/// With psi0 = LF_V + (gamma/eps) V and psi1 = LG_V^T:
///   mu = 0 if psi0 <= 0, otherwise mu = -(psi0 / |psi1|^2) psi1.
Eigen::VectorXd min_norm_mu(const ResClfCertificate& cert,
                            const OutputDynamics& dyn,
                            const Eigen::VectorXd& eta);

/// Exponential rate demanded by a controller set.
struct ClfRate {
  enum class Kind { kEsClf, kResClf };
  Kind kind = Kind::kResClf;
  double c = 0.0;  ///< used for kEsClf only

  static ClfRate es_clf(double c) { return {Kind::kEsClf, c}; }
  static ClfRate res_clf() { return {Kind::kResClf, 0.0}; }

  double value(const ResClfCertificate& cert) const {
    return kind == Kind::kEsClf ? c : cert.rate();
  }
};

struct Membership {
  bool member = false;
  /// LF_V + LG_V mu + rate V; member iff slack <= 0.
  double slack = 0.0;
};

/// Controller-set membership test. Time-based sets use the same call with the
/// time-parameterized eta_t in place of eta.
Membership membership(const ResClfCertificate& cert, const OutputDynamics& dyn,
                      const Eigen::VectorXd& eta, const Eigen::VectorXd& mu,
                      ClfRate rate = ClfRate::res_clf());

/// State-based damping appended to the auxiliary input:
///   u_s = -(1 / (2 eps_bar)) G^T P_eps eta,
/// contributing -(1/eps_bar) |G^T P_eps eta|^2 to V_eps_dot.
/// Throws std::invalid_argument unless 0 < eps_bar <= 1.
Eigen::VectorXd u_s_damping(const ResClfCertificate& cert,
                            const OutputDynamics& dyn,
                            const Eigen::VectorXd& eta, double eps_bar);

enum class ControllerMode { kMinNorm, kMinNormPlusUs };

/// Total auxiliary input mu(eta) [+ u_s(eta)] for the chosen mode.
Eigen::VectorXd auxiliary_input(const ResClfCertificate& cert,
                                const OutputDynamics& dyn,
                                const Eigen::VectorXd& eta,
                                ControllerMode mode, double eps_bar);

}  // namespace resclf
