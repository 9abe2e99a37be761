#pragma once

#include <array>

#include <Eigen/Dense>

#include "resclf/clf.hpp"
#include "resclf/output_dynamics.hpp"
#include "resclf/riccati.hpp"

namespace resclf {

/// Degree-5 Bezier polynomial on [0, 1] and its first two derivatives.
struct Bezier5 {
  std::array<double, 6> alpha{};

  double value(double s) const;
  double d1(double s) const;
  double d2(double s) const;
};

struct MechParams {
  double q1_minus = -0.2;  ///< q1 at tau = 0
  double q1_plus = 0.2;    ///< q1 at tau = 1
  /// Desired q1 velocity. Also the nominal forward speed: on the zero
  /// dynamics surface q1_dot == v_d.
  double v_d = 0.4;
  std::array<double, 6> alpha{0.0, 0.05, 0.2, 0.15, -0.05, 0.0};
};

/// Unit-inertia planar 2-DOF system  q_ddot = B u,  no gravity.
///
/// x = (q1, q2, q1_dot, q2_dot). The phase variable
///   tau(q) = (q1 - q1_minus) / (q1_plus - q1_minus)
/// drives the pose output y2 = q2 - y2d(tau). Two layouts are supported:
///   k1 = 0, k2 = 1: only q2 is actuated (B = e2), z = (q1, q1_dot);
///   k1 = 1, k2 = 1: both joints actuated (B = I), y1 = q1_dot - v_d, z = q1.
struct MechPlant {
  MechParams params;
  OutputDynamics dyn;
  Bezier5 desired;

  double span() const { return params.q1_plus - params.q1_minus; }
  int input_size() const { return dyn.dims.input_size(); }
  int z_size() const { return dyn.dims.k1 == 0 ? 2 : 1; }
};

/// Throws std::invalid_argument unless dims is (0, 1) or (1, 1) and
/// q1_plus > q1_minus.
MechPlant make_mech_plant(const OutputDims& dims, const MechParams& params = {});

/// Phase value with its first two time derivatives.
struct PhaseSignal {
  double tau = 0.0;
  double dtau = 0.0;
  double ddtau = 0.0;
};

double phase(const MechPlant& plant, const Eigen::Vector4d& x);

/// State-based phase. q1_ddot = u1 when q1 is actuated, 0 otherwise.
PhaseSignal state_phase(const MechPlant& plant, const Eigen::Vector4d& x,
                        double q1_ddot = 0.0);

/// eta parameterized by the supplied phase (time-based outputs). With
/// tau = phase(x) this is the state-based eta.
Eigen::VectorXd mech_outputs(const MechPlant& plant, const Eigen::Vector4d& x,
                             const PhaseSignal& tau);
Eigen::VectorXd mech_outputs(const MechPlant& plant, const Eigen::Vector4d& x);

/// x -> (eta, z) and back.
FullState mech_phi(const MechPlant& plant, const Eigen::Vector4d& x);
Eigen::Vector4d mech_phi_inverse(const MechPlant& plant, const FullState& s);

/// Decoupling matrix [L_g y1; L_g L_f y2] for the state-based outputs.
Eigen::MatrixXd decoupling_matrix(const MechPlant& plant,
                                  const Eigen::Vector4d& x);

enum class LinearizationMode { kState, kTime };

/// Input that renders eta_dot = F eta + G mu (state mode, phase from q) or
/// eta_t_dot = F eta_t + G mu (time mode, phase supplied as tau_input).
/// tau_input is ignored in state mode. Throws std::runtime_error if the
/// decoupling matrix is singular.
Eigen::VectorXd mech_feedback_linearize(const MechPlant& plant,
                                        const Eigen::Vector4d& x,
                                        const Eigen::VectorXd& mu,
                                        LinearizationMode mode,
                                        const PhaseSignal& tau_input = {});

/// x_dot for input u.
Eigen::Vector4d mech_vector_field(const MechPlant& plant,
                                  const Eigen::Vector4d& x,
                                  const Eigen::VectorXd& u);

/// Time derivative of the state-based eta under input u.
Eigen::VectorXd mech_eta_dot(const MechPlant& plant, const Eigen::Vector4d& x,
                             const Eigen::VectorXd& u);

/// Controller used on the mechanical plant: certificate + min-norm selection.
struct MechController {
  ResClfCertificate cert;
  ControllerMode mode = ControllerMode::kMinNorm;
  double eps_bar = 0.5;
};

/// Input applied by the time-based controller when the phase estimate is
/// tau(q) + e. The estimate carries the true phase rates.
Eigen::VectorXd mech_time_based_input(const MechPlant& plant,
                                      const MechController& ctrl,
                                      const Eigen::Vector4d& x, double e);

/// Input applied by the state-based controller.
Eigen::VectorXd mech_state_based_input(const MechPlant& plant,
                                       const MechController& ctrl,
                                       const Eigen::Vector4d& x);

/// Disturbance seen by the state-based output dynamics when the time-based
/// controller runs with phase error e:
///   d = G^+ (eta_dot(x; u_time(e)) - eta_dot(x; u_state)),
/// so that eta_dot = F eta + G mu(eta) + G d. Zero when e = 0.
/// Throws std::out_of_range unless tau(q) + e lies in [0, 1].
Eigen::VectorXd derive_phase_disturbance(const MechPlant& plant,
                                         const MechController& ctrl,
                                         const Eigen::Vector4d& x, double e);

/// Zero-dynamics state at phase tau moving forward at speed v_d.
Eigen::Vector4d mech_zero_dynamics_state(const MechPlant& plant, double tau);

/// Duration of one nominal step, tau from margin to 1 - margin.
double mech_nominal_step_time(const MechPlant& plant, double margin);

/// Nominal zero-dynamics state at time t: tau sweeps [margin, 1 - margin] at
/// speed v_d and restarts every step (no impact map, just a phase reset).
Eigen::Vector4d mech_nominal_state(const MechPlant& plant, double t,
                                   double margin);

}  // namespace resclf
