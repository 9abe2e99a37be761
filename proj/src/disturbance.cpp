#include "resclf/disturbance.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace resclf {

namespace {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

Eigen::VectorXd unit_diagonal(int dim) {
  return Eigen::VectorXd::Constant(dim, 1.0 / std::sqrt(double(dim)));
}

// Random unit vector for dwell interval k. Components are uniform in [-1, 1];
// near-zero draws are rejected and redrawn from the next counter block.
Eigen::VectorXd random_direction(std::uint64_t seed, std::uint64_t k, int dim) {
  Eigen::VectorXd v(dim);
  for (std::uint64_t attempt = 0;; ++attempt) {
    const std::uint64_t base = (k * 16 + attempt) * std::uint64_t(dim);
    for (int i = 0; i < dim; ++i) {
      v(i) = 2.0 * counter_uniform(seed, base + std::uint64_t(i)) - 1.0;
    }
    const double n = v.norm();
    if (n > 1e-3) return v / n;
  }
}

double phase_error(const DisturbanceSpec& spec, double t) {
  return spec.amplitude * std::sin(2.0 * std::numbers::pi * spec.frequency * t);
}

// |d| on one nominal step: local time s in [0, length] of a step that
// started at t0. The closed interval gives the left limit at the reset.
double phase_segment_sup(const PhaseErrorModel& m, const DisturbanceSpec& spec,
                         double t0, double length, double step_time) {
  const double width = 1.0 - 2.0 * m.margin;
  auto value = [&](double s) {
    const Eigen::Vector4d x =
        mech_zero_dynamics_state(m.plant, m.margin + width * s / step_time);
    return derive_phase_disturbance(m.plant, m.controller, x,
                                    phase_error(spec, t0 + s))
        .norm();
  };
  auto grid_max = [&](long n) {
    double best = 0.0;
    for (long i = 0; i <= n; ++i) {
      best = std::max(best, value(length * double(i) / double(n)));
    }
    return best;
  };
  long n = 256;
  double prev = grid_max(n);
  constexpr long kMaxPoints = 1L << 20;
  while (n < kMaxPoints) {
    n *= 2;
    const double next = grid_max(n);
    const bool stable = std::abs(next - prev) <= 1e-6;
    prev = std::max(prev, next);
    if (stable) break;
  }
  return prev;
}

}  // namespace

std::uint64_t counter_hash(std::uint64_t seed, std::uint64_t counter) {
  std::uint64_t z = seed + (counter + 1) * kGolden;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

double counter_uniform(std::uint64_t seed, std::uint64_t counter) {
  return double(counter_hash(seed, counter) >> 11) * 0x1.0p-53;
}

std::string to_string(DisturbanceKind kind) {
  switch (kind) {
    case DisturbanceKind::kZero:
      return "zero";
    case DisturbanceKind::kConstant:
      return "constant";
    case DisturbanceKind::kSinusoid:
      return "sinusoid";
    case DisturbanceKind::kPiecewiseConstantRandom:
      return "piecewise_constant_random";
    case DisturbanceKind::kPhaseErrorDriven:
      return "phase_error_driven";
  }
  return "unknown";
}

DisturbanceKind parse_disturbance_kind(const std::string& name) {
  for (auto kind :
       {DisturbanceKind::kZero, DisturbanceKind::kConstant,
        DisturbanceKind::kSinusoid, DisturbanceKind::kPiecewiseConstantRandom,
        DisturbanceKind::kPhaseErrorDriven}) {
    if (to_string(kind) == name) return kind;
  }
  throw std::invalid_argument("unknown disturbance kind '" + name + "'");
}

DisturbanceSignal::DisturbanceSignal(DisturbanceSpec spec, int dim)
    : DisturbanceSignal(spec, dim, nullptr) {}

DisturbanceSignal::DisturbanceSignal(
    DisturbanceSpec spec, int dim,
    std::shared_ptr<const PhaseErrorModel> phase_model)
    : spec_(spec), dim_(dim), phase_model_(std::move(phase_model)) {
  if (dim_ < 1) throw std::invalid_argument("disturbance dimension must be >= 1");
  if (!(spec_.amplitude >= 0.0) || !std::isfinite(spec_.amplitude)) {
    throw std::invalid_argument("disturbance amplitude must be finite and >= 0");
  }
  if (spec_.kind == DisturbanceKind::kPiecewiseConstantRandom &&
      !(spec_.dwell > 0.0)) {
    throw std::invalid_argument("dwell time must be positive");
  }
  if (spec_.kind == DisturbanceKind::kPhaseErrorDriven) {
    if (!phase_model_) {
      throw std::invalid_argument("phase_error_driven needs a phase model");
    }
    if (phase_model_->plant.input_size() != dim_) {
      throw std::invalid_argument(
          "phase model input size differs from disturbance dimension");
    }
    if (std::abs(spec_.amplitude) > phase_model_->margin) {
      throw std::invalid_argument("phase error amplitude exceeds phase margin");
    }
  }
}

Eigen::VectorXd DisturbanceSignal::sample(double t) const {
  if (!(t >= 0.0)) throw std::invalid_argument("disturbance time must be >= 0");
  const double a = spec_.amplitude;
  switch (spec_.kind) {
    case DisturbanceKind::kZero:
      return Eigen::VectorXd::Zero(dim_);
    case DisturbanceKind::kConstant:
      return a * unit_diagonal(dim_);
    case DisturbanceKind::kSinusoid:
      return a * std::sin(2.0 * std::numbers::pi * spec_.frequency * t) *
             unit_diagonal(dim_);
    case DisturbanceKind::kPiecewiseConstantRandom: {
      const auto k = static_cast<std::uint64_t>(std::floor(t / spec_.dwell));
      return a * random_direction(spec_.seed, k, dim_);
    }
    case DisturbanceKind::kPhaseErrorDriven: {
      const PhaseErrorModel& m = *phase_model_;
      return derive_phase_disturbance(m.plant, m.controller,
                                      mech_nominal_state(m.plant, t, m.margin),
                                      phase_error(spec_, t));
    }
  }
  return Eigen::VectorXd::Zero(dim_);
}

double sup_norm(const DisturbanceSignal& signal, double horizon) {
  if (!(horizon > 0.0)) throw std::invalid_argument("horizon must be positive");
  const DisturbanceSpec& s = signal.spec();
  const double a = std::abs(s.amplitude);
  switch (s.kind) {
    case DisturbanceKind::kZero:
      return 0.0;
    case DisturbanceKind::kConstant:
    case DisturbanceKind::kPiecewiseConstantRandom:
      return a;
    case DisturbanceKind::kSinusoid: {
      if (s.frequency == 0.0) return 0.0;
      const double first_peak = 0.25 / std::abs(s.frequency);
      if (horizon >= first_peak) return a;
      return a * std::sin(2.0 * std::numbers::pi * std::abs(s.frequency) *
                          horizon);
    }
    case DisturbanceKind::kPhaseErrorDriven:
      break;
  }

  // Smooth between phase resets: refine each step separately.
  const PhaseErrorModel& m = *signal.phase_model();
  const double step_time = mech_nominal_step_time(m.plant, m.margin);
  double best = 0.0;
  for (long k = 0; double(k) * step_time < horizon; ++k) {
    const double t0 = double(k) * step_time;
    best = std::max(best, phase_segment_sup(m, s, t0,
                                            std::min(step_time, horizon - t0),
                                            step_time));
  }
  return best;
}

}  // namespace resclf
