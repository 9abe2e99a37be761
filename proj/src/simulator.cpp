#include "resclf/simulator.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace resclf {

namespace {

std::size_t step_count(const IntegrationOptions& options) {
  if (!(options.dt > 0.0) || !(options.horizon >= options.dt)) {
    throw std::invalid_argument("need dt > 0 and horizon >= dt");
  }
  const double ratio = options.horizon / options.dt;
  if (ratio > 1e7) throw std::invalid_argument("horizon / dt exceeds 1e7");
  return static_cast<std::size_t>(std::llround(ratio));
}

void require_finite(const Eigen::VectorXd& x, double t) {
  if (!x.allFinite()) {
    std::ostringstream msg;
    msg << "non-finite state at t = " << t << ": [" << x.transpose() << "]";
    throw std::runtime_error(msg.str());
  }
}

void reserve(TrajectoryRecord& r, std::size_t n) {
  r.t.reserve(n);
  r.eta.reserve(n);
  r.z.reserve(n);
  r.d.reserve(n);
  r.mu.reserve(n);
  r.u_s.reserve(n);
  r.V_eps.reserve(n);
  r.V_Z.reserve(n);
  r.V_c.reserve(n);
  r.dist.reserve(n);
}

void record_hopf(const HopfClosedLoop& loop, double t,
                 const Eigen::VectorXd& x, TrajectoryRecord& r) {
  const OutputDims& dims = loop.plant.dyn.dims;
  const int n = dims.eta_size();
  const Eigen::VectorXd eta = x.head(n);
  const Eigen::Vector2d z = x.tail<2>();

  Eigen::VectorXd mu = min_norm_mu(loop.cert, loop.plant.dyn, eta);
  Eigen::VectorXd us = Eigen::VectorXd::Zero(dims.input_size());
  if (loop.mode == ControllerMode::kMinNormPlusUs) {
    us = u_s_damping(loop.cert, loop.plant.dyn, eta, loop.eps_bar);
  }
  const double v_eps = eta.dot(loop.cert.P_eps * eta);
  const double v_z = vz_value(loop.plant, eta.head(dims.k1), z).V;

  r.t.push_back(t);
  r.eta.push_back(eta);
  r.z.push_back(z);
  r.d.push_back(loop.disturbance.sample(t));
  r.mu.push_back(std::move(mu));
  r.u_s.push_back(std::move(us));
  r.V_eps.push_back(v_eps);
  r.V_Z.push_back(v_z);
  r.V_c.push_back(loop.sigma * v_z + v_eps);
  r.dist.push_back(orbit_distance(loop.plant, eta, z));
}

double window_max(const TrajectoryRecord& record, double settle_fraction,
                  auto&& value) {
  if (record.empty()) throw std::invalid_argument("empty trajectory record");
  if (!(settle_fraction > 0.0 && settle_fraction < 1.0)) {
    throw std::invalid_argument("settle fraction must lie in (0, 1)");
  }
  const double start = settle_fraction * record.t.back();
  double best = 0.0;
  for (std::size_t i = 0; i < record.size(); ++i) {
    if (record.t[i] >= start) best = std::max(best, value(i));
  }
  return best;
}

}  // namespace

Eigen::VectorXd HopfClosedLoop::rhs(double t, const Eigen::VectorXd& x) const {
  const int n = plant.dyn.dims.eta_size();
  const Eigen::VectorXd eta = x.head(n);
  const Eigen::Vector2d z = x.tail<2>();
  const Eigen::VectorXd mu_eff =
      auxiliary_input(cert, plant.dyn, eta, mode, eps_bar) +
      disturbance.sample(t);
  const HopfDerivative dx = hopf_vector_field(plant, eta, z, mu_eff);
  Eigen::VectorXd out(n + 2);
  out << dx.eta_dot, dx.z_dot;
  return out;
}

TrajectoryRecord integrate(const HopfClosedLoop& loop, const FullState& x0,
                           const IntegrationOptions& options) {
  const OutputDims& dims = loop.plant.dyn.dims;
  if (x0.eta.size() != dims.eta_size() || x0.z.size() != 2) {
    throw std::invalid_argument("initial state has the wrong size");
  }
  if (loop.disturbance.dim() != dims.input_size()) {
    throw std::invalid_argument("disturbance dimension differs from k1 + k2");
  }
  const std::size_t steps = step_count(options);

  TrajectoryRecord r;
  r.dims = dims;
  r.dt = options.dt;
  r.sigma = loop.sigma;
  reserve(r, steps + 1);

  Eigen::VectorXd x(dims.eta_size() + 2);
  x << x0.eta, x0.z;
  require_finite(x, 0.0);
  record_hopf(loop, 0.0, x, r);

  auto f = [&loop](double t, const Eigen::VectorXd& s) { return loop.rhs(t, s); };
  for (std::size_t k = 0; k < steps; ++k) {
    const double t = double(k) * options.dt;
    x = rk4_step(f, t, x, options.dt);
    const double t_next = double(k + 1) * options.dt;
    require_finite(x, t_next);
    record_hopf(loop, t_next, x, r);
  }
  return r;
}

MechSimulation integrate_mech(const MechPlant& plant,
                              const MechController& controller,
                              const Eigen::Vector4d& x0, double phase_amplitude,
                              double phase_frequency,
                              const IntegrationOptions& options) {
  const std::size_t steps = step_count(options);
  const OutputDims& dims = plant.dyn.dims;
  const double nan = std::numeric_limits<double>::quiet_NaN();

  auto phase_error = [&](double t) {
    return phase_amplitude *
           std::sin(2.0 * std::numbers::pi * phase_frequency * t);
  };
  auto admissible = [&](const Eigen::Vector4d& x) {
    const double tau = phase(plant, x);
    return tau - std::abs(phase_amplitude) >= 0.0 &&
           tau + std::abs(phase_amplitude) <= 1.0;
  };

  MechSimulation sim;
  TrajectoryRecord& r = sim.record;
  r.dims = dims;
  r.dt = options.dt;
  reserve(r, steps + 1);

  auto record = [&](double t, const Eigen::Vector4d& x) {
    const FullState s = mech_phi(plant, x);
    const double e = phase_error(t);
    r.t.push_back(t);
    r.eta.push_back(s.eta);
    r.z.push_back(s.z);
    r.d.push_back(derive_phase_disturbance(plant, controller, x, e));
    r.mu.push_back(min_norm_mu(controller.cert, plant.dyn, s.eta));
    r.u_s.push_back(controller.mode == ControllerMode::kMinNormPlusUs
                        ? u_s_damping(controller.cert, plant.dyn, s.eta,
                                      controller.eps_bar)
                        : Eigen::VectorXd::Zero(dims.input_size()));
    r.V_eps.push_back(s.eta.dot(controller.cert.P_eps * s.eta));
    r.V_Z.push_back(nan);
    r.V_c.push_back(nan);
    r.dist.push_back(nan);
  };

  auto f = [&](double t, const Eigen::VectorXd& xv) -> Eigen::VectorXd {
    const Eigen::Vector4d x = xv;
    const Eigen::VectorXd u =
        mech_time_based_input(plant, controller, x, phase_error(t));
    return mech_vector_field(plant, x, u);
  };

  Eigen::VectorXd x = x0;
  if (!admissible(x0)) {
    throw std::out_of_range("initial phase outside the admissible band");
  }
  record(0.0, x0);
  for (std::size_t k = 0; k < steps; ++k) {
    const double t = double(k) * options.dt;
    // Stages evaluate the phase at intermediate states; stop one step early
    // so none of them can leave the band.
    const Eigen::Vector4d xk = x;
    const double reach = std::abs(xk(2)) * options.dt / plant.span();
    if (phase(plant, xk) + std::abs(phase_amplitude) + 2.0 * reach > 1.0 ||
        phase(plant, xk) - std::abs(phase_amplitude) - 2.0 * reach < 0.0) {
      sim.truncated = true;
      break;
    }
    x = rk4_step(f, t, x, options.dt);
    require_finite(x, t + options.dt);
    record(double(k + 1) * options.dt, x);
  }
  sim.x_final = x;
  return sim;
}

double ultimate_bound(const TrajectoryRecord& record, double settle_fraction) {
  return window_max(record, settle_fraction,
                    [&](std::size_t i) { return record.eta[i].norm(); });
}

double ultimate_distance(const TrajectoryRecord& record,
                         double settle_fraction) {
  return window_max(record, settle_fraction,
                    [&](std::size_t i) { return record.dist[i]; });
}

}  // namespace resclf
