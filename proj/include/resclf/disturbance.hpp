#pragma once

#include <cstdint>
#include <memory>
#include <string>

#include <Eigen/Dense>

#include "resclf/mech_plant.hpp"

namespace resclf {

enum class DisturbanceKind {
  kZero,
  kConstant,
  kSinusoid,
  kPiecewiseConstantRandom,
  kPhaseErrorDriven,
};

std::string to_string(DisturbanceKind kind);
/// Throws std::invalid_argument for unknown names.
DisturbanceKind parse_disturbance_kind(const std::string& name);

struct DisturbanceSpec {
  DisturbanceKind kind = DisturbanceKind::kZero;
  /// |d(t)| bound for the analytic kinds; phase-error amplitude (in units of
  /// tau) for kPhaseErrorDriven.
  double amplitude = 0.0;
  double frequency = 0.5;  ///< [Hz] sinusoid and phase-error oscillation
  double dwell = 0.5;      ///< [s] hold time of the random kind
  std::uint64_t seed = 1;
};

/// Phase offset applied to the nominal mechanical trajectory. tau stays in
/// [margin, 1 - margin], so phase errors up to `margin` are admissible.
struct PhaseErrorModel {
  MechPlant plant;
  MechController controller;
  double margin = 0.1;
};

/// d(t) in R^m. Analytic kinds act along the fixed unit direction
/// (1, ..., 1) / sqrt(m), except the random kind, which draws a fresh unit
/// direction per dwell interval. kPhaseErrorDriven evaluates the disturbance
/// induced by a phase error e(t) = amplitude sin(2 pi f t) on the nominal
/// mechanical trajectory.
class DisturbanceSignal {
 public:
  DisturbanceSignal(DisturbanceSpec spec, int dim);
  DisturbanceSignal(DisturbanceSpec spec, int dim,
                    std::shared_ptr<const PhaseErrorModel> phase_model);

  /// Throws std::invalid_argument for t < 0.
  Eigen::VectorXd sample(double t) const;

  const DisturbanceSpec& spec() const { return spec_; }
  int dim() const { return dim_; }
  const std::shared_ptr<const PhaseErrorModel>& phase_model() const {
    return phase_model_;
  }

 private:
  DisturbanceSpec spec_;
  int dim_;
  std::shared_ptr<const PhaseErrorModel> phase_model_;
};

/// ess sup over [0, horizon] of |d(t)|. Exact for the analytic kinds; for
/// kPhaseErrorDriven a uniform grid on each nominal step (closed at the phase
/// reset) is doubled until the maximum changes by less than 1e-6.
double sup_norm(const DisturbanceSignal& signal, double horizon);

/// SplitMix64 finalizer applied to seed + counter * golden ratio. Stateless,
/// so random streams can be evaluated at arbitrary indices.
std::uint64_t counter_hash(std::uint64_t seed, std::uint64_t counter);
/// Uniform double in [0, 1) with 53 random bits.
double counter_uniform(std::uint64_t seed, std::uint64_t counter);

}  // namespace resclf
