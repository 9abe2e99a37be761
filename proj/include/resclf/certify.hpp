#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "resclf/disturbance.hpp"
#include "resclf/hopf_plant.hpp"
#include "resclf/riccati.hpp"
#include "resclf/simulator.hpp"

namespace resclf {

enum class Execution { kSerial, kParallel };

/// Ultimate-bound coefficients multiplying |d|_inf.
///   min-norm:          4 c2 / (gamma c1 eps)
///   min-norm + u_s:    2 eps_bar c2 / (c1^2 eps^2)
double lemma3_coefficient(const ResClfCertificate& cert);
double lemma4_coefficient(const ResClfCertificate& cert, double eps_bar);

/// Zero stability from a d = 0 record. The envelope E(t) = max_{s >= t}
/// dist(s) is fitted as log E = log(delta1 E(0)) - rate t above the
/// round-off floor.
struct ZeroStability {
  bool zs_ok = false;
  double decay_rate = 0.0;     ///< NaN when the run starts on the orbit (dist <= 1e-12)
  double envelope_gain = 1.0;  ///< delta1 of |x(t)|_O <= delta1 e^{-rate t} |x(0)|_O
  double initial_distance = 0.0;
  double final_distance = 0.0;
};

/// Throws std::invalid_argument for fewer than 3 samples or a record without
/// an orbit-distance trace.
ZeroStability check_zero_stability(const TrajectoryRecord& record,
                                   double decay_threshold = 1e-6);

/// Ordinary least squares y = intercept + gain x.
struct GainFit {
  double gain = 0.0;
  double intercept = 0.0;
  /// max over x > 0 of |y / (gain x) - 1|.
  double max_relative_deviation = 0.0;
};

GainFit fit_linear_gain(const std::vector<double>& x, const std::vector<double>& y);

struct AsymptoticGain {
  GainFit distance;  ///< ultimate orbit distance vs |d|_inf
  GainFit eta;       ///< ultimate |eta| vs |d|_inf
  double eta_gain_limit = 0.0;
  bool ok = false;
};

/// Requires at least 3 runs; throws std::invalid_argument otherwise. ok needs
/// |intercepts| <= 1e-4, a positive finite distance gain, every run inside
/// gain |d| (1 +- 25%) and the eta gain below eta_gain_limit.
AsymptoticGain check_asymptotic_gain(const std::vector<double>& d_inf,
                                     const std::vector<double>& ultimate_distance,
                                     const std::vector<double>& ultimate_eta,
                                     double eta_gain_limit);

/// Dissipation checks on a recorded trace, evaluated over each window
/// [t_{i-1}, t_{i+1}]: the central difference of V is the window average of
/// V_dot, and the right-hand sides are averaged with Simpson's rule.
///   V_c:   at samples with |eta| >= eta_threshold, dV_c <= 1e-6 max V_c
///   V_eps: dV_eps <= -(gamma/eps) V_eps + 2 |eta| |P_eps G| |d|_inf
///          + 1e-6 max V_eps
struct IssLyapunov {
  bool vc_decrease_ok = false;
  bool e_iss_ok = false;
  double eta_threshold = 0.0;
  std::size_t samples_in_region = 0;
  double worst_vc_rate = 0.0;      ///< max dV_c over the region / max V_c
  double worst_e_iss_excess = 0.0; ///< max violation of the V_eps form / max V_eps
};

/// Throws std::invalid_argument if the record has no positive finite sigma or
/// fewer than 3 samples.
IssLyapunov check_iss_lyapunov(const TrajectoryRecord& record,
                               const ResClfCertificate& cert,
                               const OutputDynamics& dyn, double d_inf,
                               double eta_threshold);

/// sigma = 0.5 * 4 c6 c1 gamma / (eps c7^2 L_q^2); 1 when L_q = 0.
double choose_sigma(const ResClfCertificate& cert, const ConverseConstants& zc,
                    double coupling_lipschitz);

/// c6 c1 gamma / eps - sigma c7^2 L_q^2 / 4 > 0 with margin ratio 0.5.
bool sigma_condition(const ResClfCertificate& cert, const ConverseConstants& zc,
                     double coupling_lipschitz, double sigma);

struct CompositeBounds {
  double lower = 0.0;  ///< min(sigma c4, c1)
  double upper = 0.0;  ///< max(sigma c5, c2 / eps^2)
};

CompositeBounds composite_bounds(const ResClfCertificate& cert, double sigma,
                                 const ConverseConstants& zc);

/// lower (d_Z^2 + |eta|^2) <= V_c <= upper (d_Z^2 + |eta|^2) samplewise.
/// Samples with z outside the analysis annulus are counted and skipped.
struct SandwichCheck {
  bool ok = false;
  std::size_t samples = 0;
  std::size_t skipped = 0;
  double min_lower_slack = 0.0;  ///< min (V_c - lower n2) / max V_c
  double min_upper_slack = 0.0;  ///< min (upper n2 - V_c) / max V_c
};

SandwichCheck check_composite_sandwich(const TrajectoryRecord& record,
                                       const HopfPlant& plant,
                                       const CompositeBounds& bounds);

/// Converse-Lyapunov inequalities on a deterministic annulus grid. Margins are
/// the minima over the grid of
///   V_Z - c4 d^2,  c5 d^2 - V_Z,  -c6 d^2 - V_Z_dot,  c7 d - |grad V_Z|.
struct AnnulusGridCheck {
  bool ok = false;
  std::size_t points = 0;
  double lower_margin = 0.0;
  double upper_margin = 0.0;
  double decrease_margin = 0.0;
  double gradient_margin = 0.0;
};

AnnulusGridCheck check_converse_grid(const HopfPlant& plant,
                                     const ConverseConstants& zc,
                                     std::size_t points, Execution execution);

/// One closed-loop run of a sweep over (eps, amplitude).
struct SweepPoint {
  double eps = 0.0;
  double amplitude = 0.0;
  double d_inf = 0.0;
  double eta_ultimate = 0.0;
  double distance_ultimate = 0.0;
  double lemma3_bound = 0.0;
  double lemma4_bound = 0.0;
  bool lemma3_ok = false;
  bool lemma4_ok = false;
};

struct SweepInputs {
  HopfPlant plant;
  Eigen::MatrixXd Q;
  ControllerMode mode = ControllerMode::kMinNorm;
  double eps_bar = 0.5;
  DisturbanceSpec disturbance;  ///< amplitude overridden per point
  std::shared_ptr<const PhaseErrorModel> phase_model;
  FullState x0;
  IntegrationOptions integrator;
  double settle_fraction = 0.5;
  std::vector<double> eps_grid;
  std::vector<double> amplitudes;
};

/// Runs every (eps, amplitude) pair. The result is sorted by (eps, amplitude)
/// whatever the execution order.
std::vector<SweepPoint> run_sweep(const SweepInputs& inputs, Execution execution);

/// Strictly decreasing ultimate |eta| as eps decreases, per amplitude > 0.
bool sweep_monotone_in_eps(const std::vector<SweepPoint>& points);

struct IssReport {
  double eps = 0.0;
  double eps_bar = 0.0;
  double d_inf = 0.0;
  double eta_ultimate_measured = 0.0;
  double eta_bound_lemma3 = 0.0;
  double eta_bound_lemma4 = 0.0;
  double sigma = 0.0;
  bool sigma_condition_ok = false;
  bool zs_ok = false;
  double ag_gain_estimate = 0.0;
  bool vc_decrease_ok = false;
  double e_iss_rate_measured = 0.0;

  ConverseConstants converse;
  double coupling_lipschitz = 0.0;
  CompositeBounds composite;
  ZeroStability zero_stability;
  AsymptoticGain asymptotic_gain;
  IssLyapunov iss_nominal;
  IssLyapunov iss_disturbed;
  SandwichCheck sandwich;
  AnnulusGridCheck annulus;
  std::vector<SweepPoint> ag_runs;
  bool lemma3_ok = false;
  bool lemma4_ok = false;

  /// Named mandatory checks in report order.
  std::vector<std::pair<std::string, bool>> checks() const;
  bool pass() const;
};

struct CertifyInputs {
  HopfPlant plant;
  Eigen::MatrixXd Q;
  double eps = 0.2;
  double eps_bar = 0.5;
  ControllerMode mode = ControllerMode::kMinNorm;
  DisturbanceSpec disturbance;
  std::shared_ptr<const PhaseErrorModel> phase_model;
  FullState x0;
  IntegrationOptions integrator;
  double settle_fraction = 0.5;
  std::optional<double> sigma;  ///< choose_sigma when empty
  std::vector<double> ag_amplitudes;
  std::size_t annulus_points = 10000;
  Execution execution = Execution::kParallel;
};

struct CertifyOutcome {
  ResClfCertificate cert;
  IssReport report;
  TrajectoryRecord nominal;    ///< d = 0
  TrajectoryRecord disturbed;  ///< configured disturbance
};

/// Full phase-to-state stability workflow on the Hopf plant. Throws
/// std::invalid_argument if the horizon is shorter than 20 eps / gamma.
CertifyOutcome certify_hopf(const CertifyInputs& inputs);

/// Time-based vs state-based controller on the mechanical plant.
struct PhaseEquivalence {
  double max_controller_gap = 0.0;  ///< zero phase error
  std::vector<double> amplitudes;
  std::vector<double> d_inf;
  GainFit fit;
  bool equivalence_ok = false;  ///< gap <= 1e-12
  bool linear_ok = false;       ///< every nonzero amplitude within 25%
};

PhaseEquivalence check_phase_equivalence(const PhaseErrorModel& model,
                                         const std::vector<double>& amplitudes,
                                         double frequency, double horizon,
                                         int states = 200);

}  // namespace resclf
