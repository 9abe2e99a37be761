#include "resclf/certify.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <tuple>

#include "resclf/linalg.hpp"

namespace resclf {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kOrbitRoundoff = 1e-12;
// Absolute slack on ultimate-bound comparisons; covers the decayed
// transient when |d|_inf = 0.
constexpr double kUltimateSlack = 1e-6;

double max_of(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

// Simpson average of a sampled quantity over [t_{i-1}, t_{i+1}].
template <class Fn>
double window_average(Fn&& f, std::size_t i) {
  return (f(i - 1) + 4.0 * f(i) + f(i + 1)) / 6.0;
}

}  // namespace

double lemma3_coefficient(const ResClfCertificate& cert) {
  return 4.0 * cert.c2 / (cert.gamma * cert.c1 * cert.eps);
}

double lemma4_coefficient(const ResClfCertificate& cert, double eps_bar) {
  return 2.0 * eps_bar * cert.c2 / (cert.c1 * cert.c1 * cert.eps * cert.eps);
}

ZeroStability check_zero_stability(const TrajectoryRecord& record,
                                   double decay_threshold) {
  const std::size_t n = record.size();
  if (n < 3) throw std::invalid_argument("zero stability needs >= 3 samples");
  if (record.dist.size() != n || !std::isfinite(record.dist.front())) {
    throw std::invalid_argument("record carries no orbit distance trace");
  }
  std::vector<double> envelope(n);
  double running = 0.0;
  for (std::size_t i = n; i-- > 0;) {
    running = std::max(running, record.dist[i]);
    envelope[i] = running;
  }

  ZeroStability zs;
  zs.initial_distance = record.dist.front();
  zs.final_distance = record.dist.back();
  const double e0 = envelope.front();
  if (e0 <= kOrbitRoundoff) {
    zs.zs_ok = true;
    zs.decay_rate = kNaN;
    return zs;
  }

  const double floor = std::max(1e-10 * e0, 1e-13);
  double st = 0, sy = 0, stt = 0, sty = 0;
  std::size_t m = 0;
  for (std::size_t i = 0; i < n && envelope[i] >= floor; ++i) {
    const double y = std::log(envelope[i]);
    st += record.t[i];
    sy += y;
    stt += record.t[i] * record.t[i];
    sty += record.t[i] * y;
    ++m;
  }
  if (m >= 2) {
    const double denom = double(m) * stt - st * st;
    zs.decay_rate = -(double(m) * sty - st * sy) / denom;
    double gain = 1.0;
    for (std::size_t i = 0; i < m; ++i) {
      gain = std::max(gain, envelope[i] * std::exp(zs.decay_rate * record.t[i]) / e0);
    }
    zs.envelope_gain = gain;
  }
  zs.zs_ok = envelope.back() <= decay_threshold * zs.initial_distance &&
             zs.decay_rate > 0.0;
  return zs;
}

GainFit fit_linear_gain(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.empty()) {
    throw std::invalid_argument("gain fit needs matching non-empty samples");
  }
  const double n = double(x.size());
  double sx = 0, sy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
  }
  const double mx = sx / n, my = sy / n;
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  GainFit fit;
  fit.gain = sxx > 0.0 ? sxy / sxx : 0.0;
  fit.intercept = my - fit.gain * mx;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] > 0.0 && fit.gain > 0.0) {
      fit.max_relative_deviation = std::max(
          fit.max_relative_deviation, std::abs(y[i] / (fit.gain * x[i]) - 1.0));
    }
  }
  return fit;
}

AsymptoticGain check_asymptotic_gain(const std::vector<double>& d_inf,
                                     const std::vector<double>& ultimate_distance,
                                     const std::vector<double>& ultimate_eta,
                                     double eta_gain_limit) {
  if (d_inf.size() < 3) {
    throw std::invalid_argument("asymptotic gain needs at least 3 runs");
  }
  AsymptoticGain ag;
  ag.distance = fit_linear_gain(d_inf, ultimate_distance);
  ag.eta = fit_linear_gain(d_inf, ultimate_eta);
  ag.eta_gain_limit = eta_gain_limit;
  ag.ok = std::abs(ag.distance.intercept) <= 1e-4 &&
          std::abs(ag.eta.intercept) <= 1e-4 && std::isfinite(ag.distance.gain) &&
          ag.distance.gain > 0.0 && ag.distance.max_relative_deviation <= 0.25 &&
          ag.eta.gain <= eta_gain_limit;
  return ag;
}

IssLyapunov check_iss_lyapunov(const TrajectoryRecord& record,
                               const ResClfCertificate& cert,
                               const OutputDynamics& dyn, double d_inf,
                               double eta_threshold) {
  const std::size_t n = record.size();
  if (n < 3) throw std::invalid_argument("dissipation check needs >= 3 samples");
  if (!(record.sigma > 0.0) || !std::isfinite(record.sigma) ||
      !std::isfinite(record.V_c.front())) {
    throw std::invalid_argument("record carries no composite weight sigma");
  }
  const double max_vc = max_of(record.V_c);
  const double max_ve = max_of(record.V_eps);
  const double tol_vc = 1e-6 * max_vc;
  const double tol_ve = 1e-6 * max_ve;
  const double rate = cert.rate();
  const double pg = max_singular_value(cert.P_eps * dyn.G);
  const double two_dt = 2.0 * record.dt;

  IssLyapunov out;
  out.eta_threshold = eta_threshold;
  double worst_vc = -std::numeric_limits<double>::infinity();
  double worst_ve = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i + 1 < n; ++i) {
    if (record.eta[i].norm() >= eta_threshold) {
      ++out.samples_in_region;
      worst_vc = std::max(worst_vc, (record.V_c[i + 1] - record.V_c[i - 1]) / two_dt);
    }
    const double dve = (record.V_eps[i + 1] - record.V_eps[i - 1]) / two_dt;
    const double bound =
        window_average([&](std::size_t k) {
          return -rate * record.V_eps[k] + 2.0 * record.eta[k].norm() * pg * d_inf;
        }, i);
    worst_ve = std::max(worst_ve, dve - bound);
  }
  out.vc_decrease_ok = out.samples_in_region == 0 || worst_vc <= tol_vc;
  out.e_iss_ok = worst_ve <= tol_ve;
  out.worst_vc_rate = out.samples_in_region == 0 || max_vc == 0.0
                          ? 0.0
                          : worst_vc / max_vc;
  out.worst_e_iss_excess = max_ve == 0.0 ? 0.0 : worst_ve / max_ve;
  return out;
}

double choose_sigma(const ResClfCertificate& cert, const ConverseConstants& zc,
                    double coupling_lipschitz) {
  if (!(zc.c6 > 0.0 && zc.c7 > 0.0 && cert.c1 > 0.0 && cert.gamma > 0.0)) {
    throw std::invalid_argument("sigma rule needs positive constants");
  }
  if (coupling_lipschitz == 0.0) return 1.0;
  const double lq2 = coupling_lipschitz * coupling_lipschitz;
  return 0.5 * 4.0 * zc.c6 * cert.c1 * cert.gamma /
         (cert.eps * zc.c7 * zc.c7 * lq2);
}

bool sigma_condition(const ResClfCertificate& cert, const ConverseConstants& zc,
                     double coupling_lipschitz, double sigma) {
  if (!(sigma > 0.0)) return false;
  const double lhs = zc.c6 * cert.c1 * cert.gamma / cert.eps;
  const double coupling = sigma * zc.c7 * zc.c7 * coupling_lipschitz *
                          coupling_lipschitz / 4.0;
  return coupling <= 0.5 * lhs * (1.0 + 1e-12);
}

CompositeBounds composite_bounds(const ResClfCertificate& cert, double sigma,
                                 const ConverseConstants& zc) {
  return {std::min(sigma * zc.c4, cert.c1),
          std::max(sigma * zc.c5, cert.c2 / (cert.eps * cert.eps))};
}

SandwichCheck check_composite_sandwich(const TrajectoryRecord& record,
                                       const HopfPlant& plant,
                                       const CompositeBounds& bounds) {
  SandwichCheck out;
  const int k1 = plant.dyn.dims.k1;
  const double scale = std::max(max_of(record.V_c), 1e-300);
  out.min_lower_slack = std::numeric_limits<double>::infinity();
  out.min_upper_slack = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < record.size(); ++i) {
    const Eigen::Vector2d z = record.z[i];
    if (!in_annulus(plant, z)) {
      ++out.skipped;
      continue;
    }
    ++out.samples;
    const double dz = zero_dynamics_distance(plant, record.eta[i].head(k1), z);
    const double n2 = dz * dz + record.eta[i].squaredNorm();
    out.min_lower_slack =
        std::min(out.min_lower_slack, (record.V_c[i] - bounds.lower * n2) / scale);
    out.min_upper_slack =
        std::min(out.min_upper_slack, (bounds.upper * n2 - record.V_c[i]) / scale);
  }
  out.ok = out.samples > 0 && out.min_lower_slack >= -1e-12 &&
           out.min_upper_slack >= -1e-12;
  return out;
}

namespace {

struct GridLayout {
  std::size_t radii = 0;
  std::size_t angles = 0;
  std::size_t y1_samples = 1;
  std::size_t size() const { return radii * angles * y1_samples; }
};

GridLayout grid_layout(int k1, std::size_t points) {
  GridLayout g;
  g.y1_samples = k1 == 0 ? 1 : 10;
  const double per = std::ceil(double(points) / double(g.y1_samples));
  g.radii = std::max<std::size_t>(2, std::size_t(std::ceil(std::sqrt(per))));
  g.angles = std::max<std::size_t>(1, std::size_t(std::ceil(per / double(g.radii))));
  return g;
}

struct Margins {
  double lower, upper, decrease, gradient;
};

Margins grid_point(const HopfPlant& plant, const ConverseConstants& zc,
                   const GridLayout& g, std::size_t index) {
  const int k1 = plant.dyn.dims.k1;
  const double r = plant.params.annulus_halfwidth;
  const std::size_t a = index % g.radii;
  const std::size_t b = (index / g.radii) % g.angles;
  const std::size_t j = index / (g.radii * g.angles);

  const double rho = plant.params.r0 - r + 2.0 * r * double(a) / double(g.radii - 1);
  const double th = 2.0 * std::numbers::pi * double(b) / double(g.angles);
  const Eigen::Vector2d z(rho * std::cos(th), rho * std::sin(th));
  Eigen::VectorXd y1 = Eigen::VectorXd::Zero(k1);
  if (k1 > 0 && g.y1_samples > 1) {
    for (int c = 0; c < k1; ++c) {
      y1(c) = 2.0 * counter_uniform(0x5eed, j * std::uint64_t(k1) + c) - 1.0;
    }
    y1 *= r * double(j) / double(g.y1_samples - 1) / y1.norm();
  }
  const double d = zero_dynamics_distance(plant, y1, z);
  const VzEvaluation v = vz_value(plant, y1, z);
  const double grad = std::sqrt(v.grad_z.squaredNorm() + v.grad_y1.squaredNorm());
  return {v.V - zc.c4 * d * d, zc.c5 * d * d - v.V,
          -zc.c6 * d * d - vz_zero_dynamics_derivative(plant, y1, z),
          zc.c7 * d - grad};
}

}  // namespace

AnnulusGridCheck check_converse_grid(const HopfPlant& plant,
                                     const ConverseConstants& zc,
                                     std::size_t points, Execution execution) {
  if (points == 0) throw std::invalid_argument("grid needs at least one point");
  const GridLayout g = grid_layout(plant.dyn.dims.k1, points);
  const auto total = static_cast<long>(g.size());
  double lo = std::numeric_limits<double>::infinity();
  double up = lo, dec = lo, grad = lo;

  if (execution == Execution::kParallel) {
#pragma omp parallel for reduction(min : lo, up, dec, grad) schedule(static)
    for (long i = 0; i < total; ++i) {
      const Margins m = grid_point(plant, zc, g, std::size_t(i));
      lo = std::min(lo, m.lower);
      up = std::min(up, m.upper);
      dec = std::min(dec, m.decrease);
      grad = std::min(grad, m.gradient);
    }
  } else {
    for (long i = 0; i < total; ++i) {
      const Margins m = grid_point(plant, zc, g, std::size_t(i));
      lo = std::min(lo, m.lower);
      up = std::min(up, m.upper);
      dec = std::min(dec, m.decrease);
      grad = std::min(grad, m.gradient);
    }
  }

  AnnulusGridCheck out;
  out.points = g.size();
  out.lower_margin = lo;
  out.upper_margin = up;
  out.decrease_margin = dec;
  out.gradient_margin = grad;
  constexpr double kTol = -1e-12;
  out.ok = lo >= kTol && up >= kTol && dec >= kTol && grad >= kTol;
  return out;
}

namespace {

SweepPoint run_sweep_point(const SweepInputs& in, double eps, double amplitude) {
  const int n = in.plant.dyn.dims.eta_size();
  const int m = in.plant.dyn.dims.input_size();
  DisturbanceSpec spec = in.disturbance;
  spec.amplitude = amplitude;
  HopfClosedLoop loop{in.plant, certificate(in.plant.dyn, in.Q, eps), in.mode,
                      in.eps_bar, DisturbanceSignal(spec, m, in.phase_model), 1.0};
  if (in.x0.eta.size() != n) throw std::invalid_argument("initial eta has the wrong size");
  const TrajectoryRecord rec = integrate(loop, in.x0, in.integrator);

  SweepPoint p;
  p.eps = eps;
  p.amplitude = amplitude;
  p.d_inf = sup_norm(loop.disturbance, in.integrator.horizon);
  p.eta_ultimate = ultimate_bound(rec, in.settle_fraction);
  p.distance_ultimate = ultimate_distance(rec, in.settle_fraction);
  p.lemma3_bound = lemma3_coefficient(loop.cert) * p.d_inf;
  p.lemma4_bound = lemma4_coefficient(loop.cert, in.eps_bar) * p.d_inf;
  p.lemma3_ok = p.eta_ultimate <= p.lemma3_bound + kUltimateSlack;
  p.lemma4_ok = p.eta_ultimate <= p.lemma4_bound + kUltimateSlack;
  return p;
}

}  // namespace

std::vector<SweepPoint> run_sweep(const SweepInputs& inputs, Execution execution) {
  std::vector<std::pair<double, double>> keys;
  for (double e : inputs.eps_grid) {
    for (double a : inputs.amplitudes) keys.emplace_back(e, a);
  }
  std::sort(keys.begin(), keys.end());
  keys.erase(std::unique(keys.begin(), keys.end()), keys.end());

  std::vector<SweepPoint> out(keys.size());
  std::vector<std::exception_ptr> errors(keys.size());
  const auto count = static_cast<long>(keys.size());
  if (execution == Execution::kParallel) {
#pragma omp parallel for schedule(dynamic)
    for (long i = 0; i < count; ++i) {
      try {
        out[i] = run_sweep_point(inputs, keys[i].first, keys[i].second);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  } else {
    for (long i = 0; i < count; ++i) {
      try {
        out[i] = run_sweep_point(inputs, keys[i].first, keys[i].second);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return out;
}

bool sweep_monotone_in_eps(const std::vector<SweepPoint>& points) {
  // Points are sorted by (eps, amplitude); compare equal amplitudes.
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (points[i].amplitude <= 0.0) continue;
    for (std::size_t j = i + 1; j < points.size(); ++j) {
      if (points[j].amplitude == points[i].amplitude &&
          points[j].eps > points[i].eps &&
          !(points[j].eta_ultimate > points[i].eta_ultimate)) {
        return false;
      }
    }
  }
  return true;
}

std::vector<std::pair<std::string, bool>> IssReport::checks() const {
  return {{"sigma_condition", sigma_condition_ok},
          {"zero_stability", zs_ok},
          {"asymptotic_gain", asymptotic_gain.ok},
          {"vc_decrease", vc_decrease_ok},
          {"e_iss_strict", iss_nominal.e_iss_ok && iss_disturbed.e_iss_ok},
          {"lemma3_bound", lemma3_ok},
          {"lemma4_bound", lemma4_ok},
          {"composite_sandwich", sandwich.ok},
          {"converse_grid", annulus.ok}};
}

bool IssReport::pass() const {
  for (const auto& [name, ok] : checks()) {
    if (!ok) return false;
  }
  return true;
}

CertifyOutcome certify_hopf(const CertifyInputs& in) {
  const OutputDynamics& dyn = in.plant.dyn;
  CertifyOutcome out{certificate(dyn, in.Q, in.eps), {}, {}, {}};
  const ResClfCertificate& cert = out.cert;
  if (in.integrator.horizon < 20.0 / cert.rate()) {
    throw std::invalid_argument("horizon shorter than 20 eps / gamma");
  }
  const int m = dyn.dims.input_size();

  IssReport& rep = out.report;
  rep.eps = in.eps;
  rep.eps_bar = in.eps_bar;
  rep.converse = converse_constants(in.plant);
  rep.coupling_lipschitz = coupling_lipschitz(in.plant);
  rep.sigma = in.sigma.value_or(choose_sigma(cert, rep.converse, rep.coupling_lipschitz));
  rep.sigma_condition_ok =
      sigma_condition(cert, rep.converse, rep.coupling_lipschitz, rep.sigma);
  rep.composite = composite_bounds(cert, rep.sigma, rep.converse);

  HopfClosedLoop nominal{in.plant, cert, in.mode, in.eps_bar,
                         DisturbanceSignal(DisturbanceSpec{}, m), rep.sigma};
  HopfClosedLoop disturbed{in.plant, cert, in.mode, in.eps_bar,
                           DisturbanceSignal(in.disturbance, m, in.phase_model),
                           rep.sigma};
  out.nominal = integrate(nominal, in.x0, in.integrator);
  out.disturbed = integrate(disturbed, in.x0, in.integrator);

  rep.d_inf = sup_norm(disturbed.disturbance, in.integrator.horizon);
  rep.eta_ultimate_measured = ultimate_bound(out.disturbed, in.settle_fraction);
  rep.eta_bound_lemma3 = lemma3_coefficient(cert) * rep.d_inf;
  rep.eta_bound_lemma4 = lemma4_coefficient(cert, in.eps_bar) * rep.d_inf;
  rep.lemma3_ok = rep.eta_ultimate_measured <= rep.eta_bound_lemma3 + kUltimateSlack;
  rep.lemma4_ok = rep.eta_ultimate_measured <= rep.eta_bound_lemma4 + kUltimateSlack;

  rep.zero_stability = check_zero_stability(out.nominal);
  rep.zs_ok = rep.zero_stability.zs_ok;
  rep.e_iss_rate_measured = rep.zero_stability.decay_rate;

  rep.iss_nominal = check_iss_lyapunov(out.nominal, cert, dyn, 0.0, 0.0);
  rep.iss_disturbed =
      check_iss_lyapunov(out.disturbed, cert, dyn, rep.d_inf, rep.eta_bound_lemma4);
  rep.vc_decrease_ok = rep.iss_nominal.vc_decrease_ok && rep.iss_disturbed.vc_decrease_ok;

  const SandwichCheck s1 = check_composite_sandwich(out.nominal, in.plant, rep.composite);
  const SandwichCheck s2 =
      check_composite_sandwich(out.disturbed, in.plant, rep.composite);
  rep.sandwich.ok = s1.ok && s2.ok;
  rep.sandwich.samples = s1.samples + s2.samples;
  rep.sandwich.skipped = s1.skipped + s2.skipped;
  rep.sandwich.min_lower_slack = std::min(s1.min_lower_slack, s2.min_lower_slack);
  rep.sandwich.min_upper_slack = std::min(s1.min_upper_slack, s2.min_upper_slack);

  rep.annulus = check_converse_grid(in.plant, rep.converse, in.annulus_points,
                                    in.execution);

  SweepInputs sweep{in.plant, in.Q, in.mode, in.eps_bar, in.disturbance,
                    in.phase_model, in.x0, in.integrator, in.settle_fraction,
                    {in.eps}, in.ag_amplitudes};
  rep.ag_runs = run_sweep(sweep, in.execution);
  std::vector<double> d, dist, eta;
  for (const SweepPoint& p : rep.ag_runs) {
    d.push_back(p.d_inf);
    dist.push_back(p.distance_ultimate);
    eta.push_back(p.eta_ultimate);
  }
  rep.asymptotic_gain = check_asymptotic_gain(d, dist, eta, lemma3_coefficient(cert));
  rep.ag_gain_estimate = rep.asymptotic_gain.distance.gain;
  return out;
}

PhaseEquivalence check_phase_equivalence(const PhaseErrorModel& model,
                                         const std::vector<double>& amplitudes,
                                         double frequency, double horizon,
                                         int states) {
  const MechPlant& p = model.plant;
  PhaseEquivalence out;
  const double step_time = mech_nominal_step_time(p, model.margin);
  for (int i = 0; i < states; ++i) {
    Eigen::Vector4d x = mech_nominal_state(p, step_time * double(i) / states, model.margin);
    // Off-surface offsets so the auxiliary input is active.
    for (int c = 1; c < 4; ++c) {
      x(c) += 0.05 * (2.0 * counter_uniform(0xface, std::uint64_t(4 * i + c)) - 1.0);
    }
    const Eigen::VectorXd gap = mech_time_based_input(p, model.controller, x, 0.0) -
                                mech_state_based_input(p, model.controller, x);
    out.max_controller_gap = std::max(out.max_controller_gap, gap.cwiseAbs().maxCoeff());
  }
  out.equivalence_ok = out.max_controller_gap <= 1e-12;

  auto shared = std::make_shared<const PhaseErrorModel>(model);
  for (double e : amplitudes) {
    DisturbanceSpec spec;
    spec.kind = DisturbanceKind::kPhaseErrorDriven;
    spec.amplitude = e;
    spec.frequency = frequency;
    out.amplitudes.push_back(e);
    out.d_inf.push_back(
        sup_norm(DisturbanceSignal(spec, p.input_size(), shared), horizon));
  }
  out.fit = fit_linear_gain(out.amplitudes, out.d_inf);
  out.linear_ok = out.fit.gain > 0.0 && out.fit.max_relative_deviation <= 0.25;
  return out;
}

}  // namespace resclf
