#include "resclf/mech_plant.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "resclf/simulator.hpp"

namespace resclf {
namespace {

using testing_oracles::central_difference;

MechController make_controller(const MechPlant& p, double eps = 0.2) {
  const int n = p.dyn.dims.eta_size();
  return {certificate(p.dyn, Eigen::MatrixXd::Identity(n, n), eps),
          ControllerMode::kMinNorm, 0.5};
}

Eigen::Vector4d random_state(const MechPlant& p, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double tau = 0.15 + 0.7 * u(rng);
  return {p.params.q1_minus + p.span() * tau, 0.3 * (2 * u(rng) - 1),
          0.2 + 0.5 * u(rng), 0.5 * (2 * u(rng) - 1)};
}

TEST(Bezier5, EndpointsAndDerivatives) {
  const Bezier5 b{{0.1, -0.3, 0.7, 0.2, 0.5, -0.4}};
  EXPECT_NEAR(b.value(0.0), 0.1, 1e-15);
  EXPECT_NEAR(b.value(1.0), -0.4, 1e-15);
  EXPECT_NEAR(b.d1(0.0), 5.0 * (-0.3 - 0.1), 1e-14);
  for (double s : {0.1, 0.37, 0.5, 0.82}) {
    EXPECT_NEAR(b.d1(s), central_difference([&](double x) { return b.value(x); }, s, 1e-5),
                1e-8);
    EXPECT_NEAR(b.d2(s), central_difference([&](double x) { return b.d1(x); }, s, 1e-5),
                1e-8);
  }
}

TEST(MechPlant, RejectsUnsupportedLayouts) {
  EXPECT_THROW(make_mech_plant({2, 1}), std::invalid_argument);
  EXPECT_THROW(make_mech_plant({0, 2}), std::invalid_argument);
  MechParams bad;
  bad.q1_plus = bad.q1_minus;
  EXPECT_THROW(make_mech_plant({0, 1}, bad), std::invalid_argument);
}

TEST(MechPlant, PhiRoundTrip) {
  std::mt19937_64 rng(1);
  for (const OutputDims dims : {OutputDims{0, 1}, OutputDims{1, 1}}) {
    const MechPlant p = make_mech_plant(dims);
    for (int i = 0; i < 500; ++i) {
      const Eigen::Vector4d x = random_state(p, rng);
      const Eigen::Vector4d back = mech_phi_inverse(p, mech_phi(p, x));
      EXPECT_LE((back - x).cwiseAbs().maxCoeff(), 1e-10);
      const FullState s = mech_phi(p, x);
      const FullState again = mech_phi(p, mech_phi_inverse(p, s));
      EXPECT_LE((again.eta - s.eta).cwiseAbs().maxCoeff(), 1e-10);
    }
  }
}

TEST(MechPlant, NominalStateLiesOnZeroDynamics) {
  const MechPlant p = make_mech_plant({1, 1});
  for (double t : {0.0, 0.13, 0.5, 1.7}) {
    const Eigen::Vector4d x = mech_nominal_state(p, t, 0.1);
    EXPECT_LE(mech_outputs(p, x).norm(), 1e-14);
    EXPECT_GE(phase(p, x), 0.1 - 1e-12);
    EXPECT_LE(phase(p, x), 0.9 + 1e-12);
  }
}

TEST(MechPlant, StateModeLinearizesOutputs) {
  // Finite difference of eta along the flow with u held fixed must equal
  // F eta + G mu.
  std::mt19937_64 rng(2);
  std::normal_distribution<double> normal;
  for (const OutputDims dims : {OutputDims{0, 1}, OutputDims{1, 1}}) {
    const MechPlant p = make_mech_plant(dims);
    for (int i = 0; i < 100; ++i) {
      const Eigen::Vector4d x = random_state(p, rng);
      Eigen::VectorXd mu(p.input_size());
      for (auto& m : mu) m = normal(rng);
      const Eigen::VectorXd u =
          mech_feedback_linearize(p, x, mu, LinearizationMode::kState);
      auto f = [&](double, const Eigen::VectorXd& s) -> Eigen::VectorXd {
        return mech_vector_field(p, s, u);
      };
      const double h = 1e-5;
      const Eigen::Vector4d xp = rk4_step(f, 0.0, x, h);
      const Eigen::Vector4d xm = rk4_step(f, 0.0, x, -h);
      const Eigen::VectorXd fd =
          (mech_outputs(p, xp) - mech_outputs(p, xm)) / (2.0 * h);
      const Eigen::VectorXd eta = mech_outputs(p, x);
      EXPECT_LE((fd - (p.dyn.F * eta + p.dyn.G * mu)).norm(), 1e-7);
      EXPECT_LE((mech_eta_dot(p, x, u) - (p.dyn.F * eta + p.dyn.G * mu)).norm(),
                1e-12);
    }
  }
}

TEST(MechPlant, TimeModeMatchesStateModeWithExactPhase) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> normal;
  for (const OutputDims dims : {OutputDims{0, 1}, OutputDims{1, 1}}) {
    const MechPlant p = make_mech_plant(dims);
    for (int i = 0; i < 200; ++i) {
      const Eigen::Vector4d x = random_state(p, rng);
      Eigen::VectorXd mu(p.input_size());
      for (auto& m : mu) m = normal(rng);
      const double q1_ddot = dims.k1 == 1 ? mu(0) : 0.0;
      const Eigen::VectorXd us =
          mech_feedback_linearize(p, x, mu, LinearizationMode::kState);
      const Eigen::VectorXd ut = mech_feedback_linearize(
          p, x, mu, LinearizationMode::kTime, state_phase(p, x, q1_ddot));
      EXPECT_LE((us - ut).cwiseAbs().maxCoeff(), 1e-12);
    }
    // Full controllers, zero phase error.
    const MechController ctrl = make_controller(p);
    for (int i = 0; i < 200; ++i) {
      const Eigen::Vector4d x = random_state(p, rng);
      EXPECT_LE((mech_time_based_input(p, ctrl, x, 0.0) -
                 mech_state_based_input(p, ctrl, x))
                    .cwiseAbs()
                    .maxCoeff(),
                1e-12);
    }
  }
}

TEST(MechPlant, ZeroDynamicsSurfaceIsInvariant) {
  const MechPlant p = make_mech_plant({0, 1});
  auto f = [&](double, const Eigen::VectorXd& s) -> Eigen::VectorXd {
    const Eigen::Vector4d x = s;
    return mech_vector_field(
        p, x,
        mech_feedback_linearize(p, x, Eigen::VectorXd::Zero(1),
                                LinearizationMode::kState));
  };
  Eigen::VectorXd x = mech_nominal_state(p, 0.0, 0.05);
  double worst = 0.0;
  for (int k = 0; k < 800; ++k) {  // 0.8 s, still inside the step
    x = rk4_step(f, 0.0, x, 1e-3);
    worst = std::max(worst, mech_outputs(p, Eigen::Vector4d(x)).norm());
  }
  EXPECT_LE(worst, 1e-9);
}

TEST(MechPlant, PartialZeroDynamicsInvariantWithRelaxedY1) {
  // eta = (y1, 0, 0): with Q = I the pose block of the min-norm input stays
  // zero, so y2 = dy2 = 0 persists while y1 evolves.
  const MechPlant p = make_mech_plant({1, 1});
  const MechController ctrl = make_controller(p, 0.5);
  FullState s{Eigen::Vector3d(0.15, 0.0, 0.0), Eigen::VectorXd::Constant(1, -0.15)};
  Eigen::VectorXd x = mech_phi_inverse(p, s);
  auto f = [&](double, const Eigen::VectorXd& xv) -> Eigen::VectorXd {
    const Eigen::Vector4d xs = xv;
    return mech_vector_field(p, xs, mech_state_based_input(p, ctrl, xs));
  };
  double worst = 0.0;
  for (int k = 0; k < 400; ++k) {
    x = rk4_step(f, 0.0, x, 1e-3);
    const Eigen::VectorXd eta = mech_outputs(p, Eigen::Vector4d(x));
    worst = std::max(worst, eta.tail(2).norm());
  }
  EXPECT_LE(worst, 1e-9);
  EXPECT_LT(std::abs(mech_outputs(p, Eigen::Vector4d(x))(0)), 0.15);
}

TEST(PhaseDisturbance, ZeroErrorGivesZero) {
  const MechPlant p = make_mech_plant({0, 1});
  const MechController ctrl = make_controller(p);
  std::mt19937_64 rng(5);
  for (int i = 0; i < 50; ++i) {
    EXPECT_TRUE(derive_phase_disturbance(p, ctrl, random_state(p, rng), 0.0).isZero());
  }
}

TEST(PhaseDisturbance, BoundedBySampledLipschitzConstant) {
  const MechPlant p = make_mech_plant({0, 1});
  const MechController ctrl = make_controller(p);
  std::mt19937_64 rng(6);
  for (int i = 0; i < 50; ++i) {
    const Eigen::Vector4d x = mech_nominal_state(p, 0.8 * i / 50.0, 0.1);
    // Oracle: sample |dd/de| over the segment [-0.04, 0.04].
    double lff = 0.0;
    for (int j = -40; j <= 40; ++j) {
      const double e = 1e-3 * j;
      const double h = 1e-6;
      lff = std::max(lff, (derive_phase_disturbance(p, ctrl, x, e + h) -
                           derive_phase_disturbance(p, ctrl, x, e - h))
                                  .norm() /
                              (2 * h));
    }
    for (double e : {0.01, -0.02, 0.04}) {
      EXPECT_LE(derive_phase_disturbance(p, ctrl, x, e).norm(),
                1.05 * lff * std::abs(e) + 1e-12);
    }
  }
}

TEST(PhaseDisturbance, OddToFirstOrder) {
  const MechPlant p = make_mech_plant({0, 1});
  const MechController ctrl = make_controller(p);
  const Eigen::Vector4d x = mech_nominal_state(p, 0.3, 0.1);
  auto even_part = [&](double e) {
    return (derive_phase_disturbance(p, ctrl, x, e) +
            derive_phase_disturbance(p, ctrl, x, -e))
        .norm();
  };
  const double s1 = even_part(0.02);
  const double s2 = even_part(0.01);
  const double odd = derive_phase_disturbance(p, ctrl, x, 0.01).norm();
  EXPECT_LE(s2, 0.1 * odd);
  if (s2 > 1e-12) {
    EXPECT_NEAR(s1 / s2, 4.0, 0.5);
  }
}

TEST(PhaseDisturbance, RejectsPhaseOutsideUnitInterval) {
  const MechPlant p = make_mech_plant({0, 1});
  const MechController ctrl = make_controller(p);
  const Eigen::Vector4d x = mech_nominal_state(p, 0.0, 0.02);
  EXPECT_THROW(derive_phase_disturbance(p, ctrl, x, -0.05), std::out_of_range);
}

TEST(MechSimulation, ZeroPhaseErrorMeansZeroDisturbance) {
  const MechPlant p = make_mech_plant({0, 1});
  const MechController ctrl = make_controller(p);
  Eigen::Vector4d x0 = mech_nominal_state(p, 0.0, 0.1);
  x0(1) += 0.05;
  const MechSimulation sim =
      integrate_mech(p, ctrl, x0, 0.0, 1.0, {.horizon = 0.5, .dt = 1e-3});
  ASSERT_EQ(sim.record.size(), 501u);
  EXPECT_FALSE(sim.truncated);
  for (const auto& d : sim.record.d) EXPECT_TRUE(d.isZero());
  // V_eps decays at least at the certified rate.
  const double rate = ctrl.cert.rate();
  for (std::size_t i = 0; i < sim.record.size(); i += 25) {
    EXPECT_LE(sim.record.V_eps[i],
              sim.record.V_eps[0] * std::exp(-rate * sim.record.t[i]) * (1 + 1e-6));
  }
  EXPECT_LT(sim.record.V_eps.back(), 0.5 * sim.record.V_eps.front());
}

TEST(MechSimulation, TruncatesAtEndOfStep) {
  const MechPlant p = make_mech_plant({0, 1});
  const MechController ctrl = make_controller(p);
  const MechSimulation sim = integrate_mech(
      p, ctrl, mech_nominal_state(p, 0.0, 0.1), 0.02, 1.0, {.horizon = 5.0, .dt = 1e-3});
  EXPECT_TRUE(sim.truncated);
  EXPECT_LT(sim.record.t.back(), 1.0);
  EXPECT_LE(phase(p, sim.x_final) + 0.02, 1.0);
}

}  // namespace
}  // namespace resclf
