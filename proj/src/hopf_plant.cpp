#include "resclf/hopf_plant.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "resclf/linalg.hpp"

namespace resclf {

double HopfPlant::period() const {
  return 2.0 * std::numbers::pi / std::abs(params.omega);
}

HopfPlant make_hopf_plant(const OutputDims& dims, const HopfParams& params) {
  return make_hopf_plant(
      dims, params,
      Eigen::MatrixXd::Constant(2, dims.eta_size(), params.coupling));
}

HopfPlant make_hopf_plant(const OutputDims& dims, const HopfParams& params,
                          const Eigen::MatrixXd& C) {
  validate(dims);
  if (!(params.r0 > 0.0)) {
    throw std::invalid_argument("hopf: r0 must be positive");
  }
  if (C.rows() != 2 || C.cols() != dims.eta_size()) {
    throw std::invalid_argument("hopf: coupling matrix must be 2 x (k1+2k2)");
  }
  return {params, build_fg(dims), C};
}

Eigen::Vector2d hopf_psi0(const HopfPlant& plant, const Eigen::Vector2d& z) {
  const auto& p = plant.params;
  const double radial = p.lambda_h * (p.r0 * p.r0 - z.squaredNorm());
  return {-p.omega * z(1) + radial * z(0), p.omega * z(0) + radial * z(1)};
}

HopfDerivative hopf_vector_field(const HopfPlant& plant,
                                 const Eigen::VectorXd& eta,
                                 const Eigen::Vector2d& z,
                                 const Eigen::VectorXd& mu_effective) {
  return {plant.dyn.F * eta + plant.dyn.G * mu_effective,
          hopf_psi0(plant, z) + plant.C * eta};
}

double zero_dynamics_distance(const HopfPlant& plant, const Eigen::VectorXd& y1,
                              const Eigen::Vector2d& z) {
  return std::abs(z.norm() - plant.params.r0) + y1.norm();
}

double orbit_distance(const HopfPlant& plant, const Eigen::VectorXd& eta,
                      const Eigen::Vector2d& z) {
  const EtaState s = split_eta(eta, plant.dyn.dims);
  return zero_dynamics_distance(plant, s.y1, z) + s.eta2.norm();
}

double coupling_lipschitz(const HopfPlant& plant) {
  return max_singular_value(plant.C);
}

ConverseConstants converse_constants(const HopfPlant& plant) {
  const auto& p = plant.params;
  const double r = p.annulus_halfwidth;
  if (!(p.lambda_h > 0.0)) {
    throw std::invalid_argument("converse constants need lambda_h > 0");
  }
  if (!(r > 0.0 && r < p.r0)) {
    throw std::invalid_argument("annulus half-width must lie in (0, r0)");
  }

  const double inner = 2.0 * p.r0 - r;  // lower bound on |z| + r0
  const double outer = 2.0 * p.r0 + r;  // upper bound on |z| + r0
  // |z|^2 - r0^2 = (|z| - r0)(|z| + r0), so s^2 >= inner^2 (|z| - r0)^2.
  const double radial_gain = 4.0 * p.lambda_h * (p.r0 - r) * (p.r0 - r);

  ConverseConstants c;
  c.c5 = std::max(outer * outer, 1.0);
  c.c7 = std::max(4.0 * (p.r0 + r) * outer, 2.0);

  const int k1 = plant.dyn.dims.k1;
  if (k1 == 0) {
    c.c4 = std::min(inner * inner, 1.0);
    c.c6 = radial_gain * c.c4;
    return c;
  }

  // With y1 present the distance is a + b (a radial, b = |y1|), and
  // (a + b)^2 <= 2 (a^2 + b^2) costs a factor two in the lower bounds.
  c.c4 = 0.5 * std::min(inner * inner, 1.0);
  if (!(p.y1_rate > 0.0)) {
    throw std::invalid_argument("y1_rate must be positive when k1 > 0");
  }
  // -V_Z_dot >= A s^2 - B |s| b + 2 y1_rate b^2 where the cross term comes
  // from the y1 columns of C.
  const double cross = 4.0 * (p.r0 + r) *
                       max_singular_value(plant.C.leftCols(k1));
  Eigen::Matrix2d form;
  form << radial_gain, -0.5 * cross, -0.5 * cross, 2.0 * p.y1_rate;
  const double lam = lambda_min(form);
  if (!(lam > 0.0)) {
    throw std::domain_error(
        "y1 coupling too strong for a quadratic converse Lyapunov bound");
  }
  c.c6 = lam * c.c4;
  return c;
}

VzEvaluation vz_value(const HopfPlant& plant, const Eigen::VectorXd& y1,
                      const Eigen::Vector2d& z) {
  const double s = z.squaredNorm() - plant.params.r0 * plant.params.r0;
  return {s * s + y1.squaredNorm(), 2.0 * y1, 4.0 * s * z};
}

double vz_zero_dynamics_derivative(const HopfPlant& plant,
                                   const Eigen::VectorXd& y1,
                                   const Eigen::Vector2d& z) {
  const int k1 = plant.dyn.dims.k1;
  const VzEvaluation v = vz_value(plant, y1, z);
  const Eigen::Vector2d z_dot =
      hopf_psi0(plant, z) + plant.C.leftCols(k1) * y1;
  return v.grad_z.dot(z_dot) - plant.params.y1_rate * v.grad_y1.dot(y1);
}

bool in_annulus(const HopfPlant& plant, const Eigen::Vector2d& z) {
  const double rho = z.norm();
  const double r = plant.params.annulus_halfwidth;
  return rho >= plant.params.r0 - r && rho <= plant.params.r0 + r;
}

VzCertificate vz_converse_lyapunov(const HopfPlant& plant,
                                   const Eigen::VectorXd& y1,
                                   const Eigen::Vector2d& z) {
  if (y1.size() != plant.dyn.dims.k1) {
    throw std::invalid_argument("y1 length does not match k1");
  }
  if (!in_annulus(plant, z)) {
    throw std::out_of_range("point lies outside the analysis annulus");
  }
  return {vz_value(plant, y1, z), converse_constants(plant)};
}

}  // namespace resclf
