#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Dense>

#include "resclf/clf.hpp"
#include "resclf/disturbance.hpp"
#include "resclf/hopf_plant.hpp"
#include "resclf/mech_plant.hpp"
#include "resclf/riccati.hpp"

namespace resclf {

/// One classical fourth-order Runge-Kutta step of x_dot = f(t, x).
template <class Rhs>
Eigen::VectorXd rk4_step(Rhs&& f, double t, const Eigen::VectorXd& x,
                         double dt) {
  const Eigen::VectorXd k1 = f(t, x);
  const Eigen::VectorXd k2 = f(t + 0.5 * dt, x + 0.5 * dt * k1);
  const Eigen::VectorXd k3 = f(t + 0.5 * dt, x + 0.5 * dt * k2);
  const Eigen::VectorXd k4 = f(t + dt, x + dt * k3);
  return x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

/// Hopf plant under mu(eta) [+ u_s(eta)] with an exogenous disturbance:
///   eta_dot = F eta + G mu(eta) + G d(t) + G u_s(eta)
///   z_dot   = Psi(eta, z).
struct HopfClosedLoop {
  HopfPlant plant;
  ResClfCertificate cert;
  ControllerMode mode = ControllerMode::kMinNorm;
  double eps_bar = 0.5;  ///< used only with kMinNormPlusUs
  DisturbanceSignal disturbance{DisturbanceSpec{}, 1};
  double sigma = 1.0;  ///< weight of V_Z in V_c = sigma V_Z + V_eps

  /// Packed right-hand side over x = (eta, z).
  Eigen::VectorXd rhs(double t, const Eigen::VectorXd& x) const;
};

/// Time series on a uniform grid. Scalar traces are NaN where a quantity is
/// undefined for the plant (V_Z, V_c and dist on the mechanical plant).
struct TrajectoryRecord {
  OutputDims dims;
  double dt = 0.0;
  double sigma = 1.0;
  std::vector<double> t;
  std::vector<Eigen::VectorXd> eta;
  std::vector<Eigen::VectorXd> z;
  std::vector<Eigen::VectorXd> d;
  std::vector<Eigen::VectorXd> mu;   ///< min-norm part
  std::vector<Eigen::VectorXd> u_s;  ///< damping part (zero if inactive)
  std::vector<double> V_eps;
  std::vector<double> V_Z;
  std::vector<double> V_c;
  std::vector<double> dist;

  std::size_t size() const { return t.size(); }
  bool empty() const { return t.empty(); }
};

struct IntegrationOptions {
  double horizon = 50.0;
  double dt = 1e-3;
};

/// Fixed-step RK4 from x0 over [0, horizon]. Records round(horizon/dt) + 1
/// samples. Throws std::invalid_argument for bad step settings and
/// std::runtime_error if the state becomes non-finite.
TrajectoryRecord integrate(const HopfClosedLoop& loop, const FullState& x0,
                           const IntegrationOptions& options);

/// Mechanical plant under the time-based controller whose phase estimate is
/// tau(q) + e(t), e(t) = phase_amplitude sin(2 pi f t). The recorded d is
/// the induced disturbance on the state-based output dynamics. Integration
/// stops early (record truncated) once the phase estimate would leave [0, 1].
struct MechSimulation {
  TrajectoryRecord record;
  Eigen::Vector4d x_final;
  bool truncated = false;
};

MechSimulation integrate_mech(const MechPlant& plant,
                              const MechController& controller,
                              const Eigen::Vector4d& x0, double phase_amplitude,
                              double phase_frequency,
                              const IntegrationOptions& options);

/// max |eta(t)| over t >= settle_fraction * t_end. Throws
/// std::invalid_argument for an empty record or a fraction outside (0, 1).
double ultimate_bound(const TrajectoryRecord& record,
                      double settle_fraction = 0.5);

/// Same window, applied to the orbit distance trace.
double ultimate_distance(const TrajectoryRecord& record,
                         double settle_fraction = 0.5);

}  // namespace resclf
