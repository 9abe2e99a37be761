#pragma once

#include <Eigen/Dense>

#include "resclf/output_dynamics.hpp"

namespace resclf {

struct HopfParams {
  double omega = 1.0;     ///< angular speed on the orbit [rad/s]
  double lambda_h = 1.0;  ///< radial contraction gain [1/s]
  double r0 = 1.0;        ///< limit-cycle radius
  /// Entry used to fill the 2 x (k1 + 2 k2) coupling matrix when no explicit
  /// matrix is supplied.
  double coupling = 0.2;
  /// y1 contraction rate on the partial zero dynamics (k1 > 0 only).
  double y1_rate = 1.0;
  /// Half-width r of the analysis annulus |z| in [r0 - r, r0 + r]; r < r0.
  double annulus_halfwidth = 0.5;
};

/// (eta, z) plant whose zero dynamics is a planar Hopf oscillator:
///   eta_dot = F eta + G mu_eff
///   z_dot   = Psi0(z) + C eta,
///   Psi0(z) = (-w z2 + l z1 (r0^2 - |z|^2),  w z1 + l z2 (r0^2 - |z|^2)).
/// With eta = 0 the circle |z| = r0 is an exponentially stable orbit of
/// period 2 pi / omega, and the partial zero dynamics orbit sits at y1 = 0.
struct HopfPlant {
  HopfParams params;
  OutputDynamics dyn;
  Eigen::MatrixXd C;  ///< 2 x (k1 + 2 k2)

  double period() const;
};

/// Uniform coupling matrix filled with params.coupling.
HopfPlant make_hopf_plant(const OutputDims& dims, const HopfParams& params = {});
/// Explicit coupling matrix; throws std::invalid_argument on shape mismatch.
HopfPlant make_hopf_plant(const OutputDims& dims, const HopfParams& params,
                          const Eigen::MatrixXd& C);

Eigen::Vector2d hopf_psi0(const HopfPlant& plant, const Eigen::Vector2d& z);

struct HopfDerivative {
  Eigen::VectorXd eta_dot;
  Eigen::Vector2d z_dot;
};

/// mu_effective is everything entering through G (mu + d + u_s).
HopfDerivative hopf_vector_field(const HopfPlant& plant,
                                 const Eigen::VectorXd& eta,
                                 const Eigen::Vector2d& z,
                                 const Eigen::VectorXd& mu_effective);

/// Distance to the embedded orbit in the block 1-norm
///   |(eta, z)| = |y1| + |eta2| + |z|:
///   | |z| - r0 | + |y1| + |eta2|.
double orbit_distance(const HopfPlant& plant, const Eigen::VectorXd& eta,
                      const Eigen::Vector2d& z);

/// Distance of (y1, z) to the partial zero dynamics orbit: | |z| - r0 | + |y1|.
double zero_dynamics_distance(const HopfPlant& plant, const Eigen::VectorXd& y1,
                              const Eigen::Vector2d& z);

/// Lipschitz constant of Psi in eta: the largest singular value of C.
double coupling_lipschitz(const HopfPlant& plant);

/// Constants of the converse-Lyapunov inequalities on the annulus
///   c4 d^2 <= V_Z <= c5 d^2
///   dV_Z/dz Psi(y1, 0, z) + dV_Z/dy1 y1_dot <= -c6 d^2
///   |dV_Z/d(y1, z)| <= c7 d
/// with d the zero-dynamics distance.
struct ConverseConstants {
  double c4 = 0.0;
  double c5 = 0.0;
  double c6 = 0.0;
  double c7 = 0.0;
};

/// Throws std::invalid_argument unless lambda_h > 0 and 0 < r < r0, and
/// std::domain_error if the y1 / z cross-coupling defeats the y1 contraction.
ConverseConstants converse_constants(const HopfPlant& plant);

/// V_Z = (|z|^2 - r0^2)^2 + |y1|^2 and its gradient. Defined everywhere.
struct VzEvaluation {
  double V = 0.0;
  Eigen::VectorXd grad_y1;
  Eigen::Vector2d grad_z;
};

VzEvaluation vz_value(const HopfPlant& plant, const Eigen::VectorXd& y1,
                      const Eigen::Vector2d& z);

/// Time derivative of V_Z along the partial zero dynamics
///   z_dot = Psi(y1, 0, z), y1_dot = -y1_rate y1.
double vz_zero_dynamics_derivative(const HopfPlant& plant,
                                   const Eigen::VectorXd& y1,
                                   const Eigen::Vector2d& z);

struct VzCertificate {
  VzEvaluation value;
  ConverseConstants constants;
};

/// V_Z with its constants; throws std::out_of_range outside the annulus.
VzCertificate vz_converse_lyapunov(const HopfPlant& plant,
                                   const Eigen::VectorXd& y1,
                                   const Eigen::Vector2d& z);

bool in_annulus(const HopfPlant& plant, const Eigen::Vector2d& z);

}  // namespace resclf
