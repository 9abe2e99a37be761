#include "resclf/mech_plant.hpp"

#include <cmath>
#include <stdexcept>

namespace resclf {

namespace {

constexpr std::array<double, 6> kBinom5{1, 5, 10, 10, 5, 1};
constexpr std::array<double, 5> kBinom4{1, 4, 6, 4, 1};
constexpr std::array<double, 4> kBinom3{1, 3, 3, 1};

template <std::size_t N>
double bernstein_sum(const std::array<double, N>& coeffs,
                     const std::array<double, N>& binom, double s) {
  const int degree = static_cast<int>(N) - 1;
  double sum = 0.0;
  for (int i = 0; i <= degree; ++i) {
    sum += coeffs[i] * binom[i] * std::pow(s, i) * std::pow(1.0 - s, degree - i);
  }
  return sum;
}

bool actuated_q1(const MechPlant& plant) { return plant.dyn.dims.k1 == 1; }

}  // namespace

double Bezier5::value(double s) const {
  return bernstein_sum(alpha, kBinom5, s);
}

double Bezier5::d1(double s) const {
  std::array<double, 5> diff{};
  for (int i = 0; i < 5; ++i) diff[i] = 5.0 * (alpha[i + 1] - alpha[i]);
  return bernstein_sum(diff, kBinom4, s);
}

double Bezier5::d2(double s) const {
  std::array<double, 4> diff{};
  for (int i = 0; i < 4; ++i) {
    diff[i] = 20.0 * (alpha[i + 2] - 2.0 * alpha[i + 1] + alpha[i]);
  }
  return bernstein_sum(diff, kBinom3, s);
}

MechPlant make_mech_plant(const OutputDims& dims, const MechParams& params) {
  validate(dims);
  if (dims.k2 != 1 || dims.k1 > 1) {
    throw std::invalid_argument(
        "mech plant supports (k1, k2) = (0, 1) or (1, 1)");
  }
  if (!(params.q1_plus > params.q1_minus)) {
    throw std::invalid_argument("mech plant needs q1_plus > q1_minus");
  }
  return {params, build_fg(dims), Bezier5{params.alpha}};
}

double phase(const MechPlant& plant, const Eigen::Vector4d& x) {
  return (x(0) - plant.params.q1_minus) / plant.span();
}

PhaseSignal state_phase(const MechPlant& plant, const Eigen::Vector4d& x,
                        double q1_ddot) {
  return {phase(plant, x), x(2) / plant.span(), q1_ddot / plant.span()};
}

Eigen::VectorXd mech_outputs(const MechPlant& plant, const Eigen::Vector4d& x,
                             const PhaseSignal& tau) {
  const OutputDims& d = plant.dyn.dims;
  Eigen::VectorXd eta(d.eta_size());
  if (d.k1 == 1) eta(d.y1_offset()) = x(2) - plant.params.v_d;
  eta(d.y2_offset()) = x(1) - plant.desired.value(tau.tau);
  eta(d.dy2_offset()) = x(3) - plant.desired.d1(tau.tau) * tau.dtau;
  return eta;
}

Eigen::VectorXd mech_outputs(const MechPlant& plant, const Eigen::Vector4d& x) {
  return mech_outputs(plant, x, state_phase(plant, x));
}

FullState mech_phi(const MechPlant& plant, const Eigen::Vector4d& x) {
  Eigen::VectorXd z(plant.z_size());
  if (actuated_q1(plant)) {
    z << x(0);
  } else {
    z << x(0), x(2);
  }
  return {mech_outputs(plant, x), z};
}

Eigen::Vector4d mech_phi_inverse(const MechPlant& plant, const FullState& s) {
  const OutputDims& d = plant.dyn.dims;
  if (s.eta.size() != d.eta_size() || s.z.size() != plant.z_size()) {
    throw std::invalid_argument("mech_phi_inverse: size mismatch");
  }
  const double q1 = s.z(0);
  const double dq1 =
      actuated_q1(plant) ? s.eta(d.y1_offset()) + plant.params.v_d : s.z(1);
  const double tau = (q1 - plant.params.q1_minus) / plant.span();
  const double q2 = s.eta(d.y2_offset()) + plant.desired.value(tau);
  const double dq2 =
      s.eta(d.dy2_offset()) + plant.desired.d1(tau) * dq1 / plant.span();
  return {q1, q2, dq1, dq2};
}

Eigen::MatrixXd decoupling_matrix(const MechPlant& plant,
                                  const Eigen::Vector4d& x) {
  if (!actuated_q1(plant)) return Eigen::MatrixXd::Identity(1, 1);
  Eigen::MatrixXd A(2, 2);
  A << 1.0, 0.0, -plant.desired.d1(phase(plant, x)) / plant.span(), 1.0;
  return A;
}

Eigen::VectorXd mech_feedback_linearize(const MechPlant& plant,
                                        const Eigen::Vector4d& x,
                                        const Eigen::VectorXd& mu,
                                        LinearizationMode mode,
                                        const PhaseSignal& tau_input) {
  if (mu.size() != plant.input_size()) {
    throw std::invalid_argument("mech_feedback_linearize: mu has wrong size");
  }
  const int last = plant.input_size() - 1;

  if (mode == LinearizationMode::kState) {
    // [y1_dot; y2_ddot] = A(x) u + b(x), b = (0, -h'' tau_dot^2).
    const Eigen::MatrixXd A = decoupling_matrix(plant, x);
    const double det = A.determinant();
    if (std::abs(det) < 1e-12) {
      throw std::runtime_error("singular decoupling matrix");
    }
    const PhaseSignal s = state_phase(plant, x);
    Eigen::VectorXd rhs = mu;
    rhs(last) += plant.desired.d2(s.tau) * s.dtau * s.dtau;
    return A.partialPivLu().solve(rhs);
  }

  // Time-based outputs: y2_t = q2 - h(tau(t)); the decoupling matrix is the
  // identity and the desired accelerations enter as feedforward.
  const PhaseSignal& s = tau_input;
  Eigen::VectorXd u = mu;
  u(last) += plant.desired.d2(s.tau) * s.dtau * s.dtau +
             plant.desired.d1(s.tau) * s.ddtau;
  return u;
}

Eigen::Vector4d mech_vector_field(const MechPlant& plant,
                                  const Eigen::Vector4d& x,
                                  const Eigen::VectorXd& u) {
  if (u.size() != plant.input_size()) {
    throw std::invalid_argument("mech_vector_field: u has wrong size");
  }
  const double q1_ddot = actuated_q1(plant) ? u(0) : 0.0;
  return {x(2), x(3), q1_ddot, u(plant.input_size() - 1)};
}

Eigen::VectorXd mech_eta_dot(const MechPlant& plant, const Eigen::Vector4d& x,
                             const Eigen::VectorXd& u) {
  const OutputDims& d = plant.dyn.dims;
  const Eigen::Vector4d xd = mech_vector_field(plant, x, u);
  const PhaseSignal s = state_phase(plant, x, xd(2));
  const Eigen::VectorXd eta = mech_outputs(plant, x, s);

  Eigen::VectorXd out(d.eta_size());
  if (d.k1 == 1) out(d.y1_offset()) = xd(2);
  out(d.y2_offset()) = eta(d.dy2_offset());
  out(d.dy2_offset()) = xd(3) - plant.desired.d2(s.tau) * s.dtau * s.dtau -
                        plant.desired.d1(s.tau) * s.ddtau;
  return out;
}

Eigen::VectorXd mech_state_based_input(const MechPlant& plant,
                                       const MechController& ctrl,
                                       const Eigen::Vector4d& x) {
  const Eigen::VectorXd eta = mech_outputs(plant, x);
  const Eigen::VectorXd mu =
      auxiliary_input(ctrl.cert, plant.dyn, eta, ctrl.mode, ctrl.eps_bar);
  return mech_feedback_linearize(plant, x, mu, LinearizationMode::kState);
}

Eigen::VectorXd mech_time_based_input(const MechPlant& plant,
                                      const MechController& ctrl,
                                      const Eigen::Vector4d& x, double e) {
  PhaseSignal estimate = state_phase(plant, x);
  estimate.tau += e;
  if (!(estimate.tau >= 0.0 && estimate.tau <= 1.0)) {
    throw std::out_of_range("phase estimate leaves [0, 1]");
  }
  const Eigen::VectorXd eta_t = mech_outputs(plant, x, estimate);
  const Eigen::VectorXd mu_t =
      auxiliary_input(ctrl.cert, plant.dyn, eta_t, ctrl.mode, ctrl.eps_bar);
  // The velocity output carries no phase, so u1 = mu_t1 is known before the
  // pose channel needs tau_ddot.
  if (actuated_q1(plant)) estimate.ddtau = mu_t(0) / plant.span();
  return mech_feedback_linearize(plant, x, mu_t, LinearizationMode::kTime,
                                 estimate);
}

Eigen::VectorXd derive_phase_disturbance(const MechPlant& plant,
                                         const MechController& ctrl,
                                         const Eigen::Vector4d& x, double e) {
  const Eigen::VectorXd u_time = mech_time_based_input(plant, ctrl, x, e);
  const Eigen::VectorXd u_state = mech_state_based_input(plant, ctrl, x);
  return plant.dyn.G.transpose() *
         (mech_eta_dot(plant, x, u_time) - mech_eta_dot(plant, x, u_state));
}

Eigen::Vector4d mech_zero_dynamics_state(const MechPlant& plant, double tau) {
  const double dtau = plant.params.v_d / plant.span();
  return {plant.params.q1_minus + plant.span() * tau, plant.desired.value(tau),
          plant.params.v_d, plant.desired.d1(tau) * dtau};
}

double mech_nominal_step_time(const MechPlant& plant, double margin) {
  if (!(margin >= 0.0 && margin < 0.5)) {
    throw std::invalid_argument("phase margin must lie in [0, 0.5)");
  }
  if (!(plant.params.v_d > 0.0)) {
    throw std::invalid_argument("nominal speed must be positive");
  }
  return plant.span() * (1.0 - 2.0 * margin) / plant.params.v_d;
}

Eigen::Vector4d mech_nominal_state(const MechPlant& plant, double t,
                                   double margin) {
  const double step_time = mech_nominal_step_time(plant, margin);
  const double frac = std::fmod(t, step_time) / step_time;
  return mech_zero_dynamics_state(plant,
                                  margin + (1.0 - 2.0 * margin) * frac);
}

}  // namespace resclf
