// Acceptance run: one PASS/FAIL line per criterion, exit status 1 on any FAIL.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>

#include "resclf/certify.hpp"
#include "resclf/cli.hpp"
#include "resclf/config.hpp"

namespace resclf {
namespace {

namespace fs = std::filesystem;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof(buf), f, args...);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::vector<OutputDims> dims_grid() {
  std::vector<OutputDims> out;
  for (int k1 = 0; k1 <= 3; ++k1) {
    for (int k2 = 0; k2 <= 3; ++k2) {
      if (k1 + k2 >= 1) out.push_back({k1, k2});
    }
  }
  return out;
}

Eigen::MatrixXd random_spd(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> normal;
  Eigen::MatrixXd A(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) A(i, j) = normal(rng);
  }
  Eigen::MatrixXd Q = A * A.transpose() + 0.1 * Eigen::MatrixXd::Identity(n, n);
  return 0.5 * (Q + Q.transpose());
}

double max_real_eigenvalue(const Eigen::MatrixXd& A) {
  return Eigen::EigenSolver<Eigen::MatrixXd>(A, false).eigenvalues().real().maxCoeff();
}

constexpr int kRandomQ = 200;

Outcome care_correctness() {
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(20240601);
  double worst_residual = 0.0, worst_eig = -INFINITY;
  int solves = 0;
  for (const OutputDims& dims : dims_grid()) {
    const OutputDynamics dyn = build_fg(dims);
    const int n = dims.eta_size();
    for (int k = 0; k < kRandomQ; ++k) {
      const Eigen::MatrixXd Q = random_spd(n, rng);
      const Eigen::MatrixXd P = solve_care(dyn, Q).P;
      worst_residual = std::max(worst_residual, care_residual(dyn, P, Q));
      worst_eig = std::max(
          worst_eig, max_real_eigenvalue(dyn.F - dyn.G * dyn.G.transpose() * P));
      ++solves;
    }
  }
  const OutputDynamics dyn = build_fg({0, 1});
  Eigen::Matrix2d closed;
  closed << std::sqrt(3.0), 1.0, 1.0, std::sqrt(3.0);
  const double closed_err =
      (solve_care(dyn, Eigen::Matrix2d::Identity()).P - closed).cwiseAbs().maxCoeff();
  const double elapsed = seconds_since(t0);
  return {worst_residual <= 1e-10 && worst_eig < 0.0 && closed_err <= 1e-12 &&
              elapsed < 10.0,
          fmt("%d solves, max residual %.2e, max Re(eig) %.3f, closed-form err %.1e, "
              "%.2f s",
              solves, worst_residual, worst_eig, closed_err, elapsed)};
}

Outcome scaled_care() {
  std::mt19937_64 rng(20240602);
  double worst = 0.0;
  int cases = 0;
  for (const OutputDims& dims : dims_grid()) {
    const OutputDynamics dyn = build_fg(dims);
    const int n = dims.eta_size();
    for (int k = 0; k < kRandomQ; ++k) {
      const Eigen::MatrixXd Q =
          k == 0 ? Eigen::MatrixXd::Identity(n, n) : random_spd(n, rng);
      const Eigen::MatrixXd P = solve_care(dyn, Q).P;
      for (double eps : {0.05, 0.1, 0.5, 1.0}) {
        const EpsilonScaling s = scale_epsilon(P, Q, dims, eps);
        worst = std::max(worst, scaled_care_residual(dyn, s.P_eps, s.Q_eps, eps));
        ++cases;
      }
    }
  }
  return {worst <= 1e-10, fmt("%d cases, max residual %.2e", cases, worst)};
}

HopfClosedLoop hopf_loop(double eps, const DisturbanceSpec& d, double sigma = 1.0,
                         ControllerMode mode = ControllerMode::kMinNorm) {
  const HopfPlant plant = make_hopf_plant({0, 1});
  return {plant, certificate(plant.dyn, Eigen::Matrix2d::Identity(), eps), mode, 0.5,
          DisturbanceSignal(d, 1), sigma};
}

const FullState kX0{Eigen::Vector2d(0.3, 0.0), Eigen::Vector2d(1.3, 0.0)};

Outcome res_clf_decrease() {
  double worst = 0.0;
  for (double eps : {0.1, 0.5}) {
    const HopfClosedLoop loop = hopf_loop(eps, {});
    const TrajectoryRecord r = integrate(loop, kX0, {.horizon = 20.0, .dt = 1e-3});
    const double rate = loop.cert.rate();
    for (std::size_t i = 0; i < r.size(); ++i) {
      worst = std::max(worst, r.V_eps[i] / (r.V_eps[0] * std::exp(-rate * r.t[i])));
    }
  }
  return {worst <= 1.0 + 1e-3,
          fmt("max V_eps(t) / (V_eps(0) e^{-rate t}) = %.6f", worst)};
}

Outcome lemma3_bound() {
  const auto t0 = std::chrono::steady_clock::now();
  const double eps = 0.2;
  int runs = 0, within = 0;
  double worst_ratio = 0.0, worst_linear = 0.0;
  for (DisturbanceKind kind :
       {DisturbanceKind::kSinusoid, DisturbanceKind::kPiecewiseConstantRandom}) {
    SweepInputs in;
    in.plant = make_hopf_plant({0, 1});
    in.Q = Eigen::Matrix2d::Identity();
    in.disturbance.kind = kind;
    in.disturbance.seed = 1;
    in.x0 = kX0;
    in.integrator = {.horizon = 50.0, .dt = 1e-3};
    in.eps_grid = {eps};
    in.amplitudes = {0.01, 0.05, 0.1};
    const std::vector<SweepPoint> points = run_sweep(in, Execution::kParallel);
    std::vector<double> d, eta;
    for (const SweepPoint& p : points) {
      ++runs;
      if (p.eta_ultimate <= p.lemma3_bound) ++within;
      worst_ratio = std::max(worst_ratio, p.eta_ultimate / p.lemma3_bound);
      d.push_back(p.d_inf);
      eta.push_back(p.eta_ultimate);
    }
    const GainFit fit = fit_linear_gain(d, eta);
    for (std::size_t i = 0; i < d.size(); ++i) {
      const double through_origin = eta.back() / d.back() * d[i];
      worst_linear = std::max(
          {worst_linear, std::abs(eta[i] / through_origin - 1.0),
           fit.max_relative_deviation});
    }
  }
  const double elapsed = seconds_since(t0);
  return {within == runs && worst_linear <= 0.25 && elapsed < 60.0,
          fmt("%d/%d runs within bound (max measured/bound %.4f), linearity dev %.3f, "
              "%.1f s",
              within, runs, worst_ratio, worst_linear, elapsed)};
}

CertifyInputs default_certify_inputs() {
  CertifyInputs in;
  in.plant = make_hopf_plant({0, 1});
  in.Q = Eigen::Matrix2d::Identity();
  in.eps = 0.2;
  in.eps_bar = 0.5;
  in.disturbance.kind = DisturbanceKind::kSinusoid;
  in.disturbance.amplitude = 0.05;
  in.x0 = kX0;
  in.integrator = {.horizon = 50.0, .dt = 1e-3};
  in.ag_amplitudes = {0.0, 0.01, 0.02, 0.04};
  return in;
}

const CertifyOutcome& certify_default() {
  static const CertifyOutcome out = certify_hopf(default_certify_inputs());
  return out;
}

Outcome composite_theorem() {
  const IssReport& r = certify_default().report;
  const bool vc = r.iss_nominal.vc_decrease_ok && r.iss_disturbed.vc_decrease_ok;
  const bool sandwich = r.sandwich.ok && r.sandwich.samples >= 10000;
  const ConverseConstants& zc = r.converse;
  const ResClfCertificate& c = certify_default().cert;
  const double lhs = zc.c6 * c.c1 * c.gamma / c.eps;
  const double margin = 1.0 - r.sigma * zc.c7 * zc.c7 * r.coupling_lipschitz *
                                  r.coupling_lipschitz / 4.0 / lhs;
  return {vc && sandwich && r.sigma_condition_ok && margin >= 0.5 - 1e-12,
          fmt("sigma %.4g, V_c decrease %s (worst rate %.2e; %zu d=0 samples, %zu "
              "disturbed samples with |eta| >= %.4g), sandwich %s at %zu samples, "
              "sigma margin %.3f",
              r.sigma, vc ? "ok" : "violated",
              std::max(r.iss_nominal.worst_vc_rate, r.iss_disturbed.worst_vc_rate),
              r.iss_nominal.samples_in_region, r.iss_disturbed.samples_in_region,
              r.iss_disturbed.eta_threshold,
              sandwich ? "ok" : "violated", r.sandwich.samples, margin)};
}

Outcome converse_grid() {
  bool ok = true;
  std::string detail;
  for (const OutputDims dims : {OutputDims{0, 1}, OutputDims{1, 1}}) {
    const HopfPlant plant = make_hopf_plant(dims);
    const AnnulusGridCheck g = check_converse_grid(plant, converse_constants(plant),
                                                   10000, Execution::kParallel);
    ok = ok && g.ok && g.points >= 10000;
    detail += fmt("k1=%d: %zu pts, margins %.2e/%.2e/%.2e/%.2e; ", dims.k1, g.points,
                  g.lower_margin, g.upper_margin, g.decrease_margin, g.gradient_margin);
  }
  detail.resize(detail.size() - 2);
  return {ok, detail};
}

Outcome zs_ag() {
  const IssReport& r = certify_default().report;
  const ZeroStability& zs = r.zero_stability;
  const AsymptoticGain& ag = r.asymptotic_gain;
  const bool decay = zs.final_distance <= 1e-6 * zs.initial_distance;
  const bool gain = std::abs(ag.distance.intercept) <= 1e-4 &&
                    std::isfinite(ag.distance.gain) && ag.distance.gain > 0.0;
  const bool eta_gain = ag.eta.gain <= ag.eta_gain_limit;
  return {decay && gain && eta_gain && zs.zs_ok && ag.ok,
          fmt("decay %.2e of initial (rate %.3f), AG gain %.4f intercept %.1e, "
              "eta gain %.4f <= %.3f",
              zs.final_distance / zs.initial_distance, zs.decay_rate,
              ag.distance.gain, ag.distance.intercept, ag.eta.gain, ag.eta_gain_limit)};
}

Outcome phase_equivalence() {
  bool ok = true;
  std::string detail;
  for (const OutputDims dims : {OutputDims{0, 1}, OutputDims{1, 1}}) {
    const MechPlant p = make_mech_plant(dims);
    const int n = dims.eta_size();
    const PhaseErrorModel model{
        p,
        {certificate(p.dyn, Eigen::MatrixXd::Identity(n, n), 0.2),
         ControllerMode::kMinNorm, 0.5},
        0.1};
    const PhaseEquivalence eq =
        check_phase_equivalence(model, {0.01, 0.02, 0.04}, 0.5, 4.0);
    ok = ok && eq.equivalence_ok && eq.linear_ok;
    detail += fmt("k1=%d: gap %.1e, |d| %.4g/%.4g/%.4g (dev %.3f); ", dims.k1,
                  eq.max_controller_gap, eq.d_inf[0], eq.d_inf[1], eq.d_inf[2],
                  eq.fit.max_relative_deviation);
  }
  detail.resize(detail.size() - 2);
  return {ok, detail};
}

Outcome richardson() {
  // eta stays at zero: the feedback is inactive and the vector field smooth.
  const HopfClosedLoop loop = hopf_loop(0.5, {});
  const FullState x0{Eigen::Vector2d::Zero(), Eigen::Vector2d(1.3, 0.0)};
  auto end = [&](double dt) {
    const TrajectoryRecord r = integrate(loop, x0, {.horizon = 2.0, .dt = dt});
    Eigen::VectorXd x(4);
    x << r.eta.back(), r.z.back();
    return x;
  };
  const Eigen::VectorXd ref = end(1e-4);
  const double e1 = (end(0.1) - ref).norm();
  const double e2 = (end(0.05) - ref).norm();
  const double ratio = e1 / e2;
  return {ratio >= 12.0 && ratio <= 20.0,
          fmt("err(dt=0.1) %.3e, err(dt=0.05) %.3e, ratio %.2f", e1, e2, ratio)};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome determinism() {
  const fs::path root = fs::temp_directory_path() / "resclf_acceptance";
  fs::remove_all(root);
  const nlohmann::json config = resolve_config_json(
      {{"disturbance", {{"kind", "piecewise_constant_random"}}}}, {}, 42);
  std::ostringstream sink;
  const int a = cmd_certify(config, root / "a", sink);
  const int b = cmd_certify(config, root / "b", sink);
  bool same = a == b;
  int files = 0;
  for (const char* name : {"report.json", "trajectory.csv"}) {
    const std::string x = slurp(root / "a" / name);
    same = same && !x.empty() && x == slurp(root / "b" / name);
    ++files;
  }
  fs::remove_all(root);
  return {same, fmt("%d files byte-identical across two runs (exit %d/%d)", files, a, b)};
}

}  // namespace
}  // namespace resclf

int main() {
  using resclf::Outcome;
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"care_correctness", resclf::care_correctness},
      {"scaled_care", resclf::scaled_care},
      {"res_clf_decrease", resclf::res_clf_decrease},
      {"ultimate_bound_min_norm", resclf::lemma3_bound},
      {"composite_iss_lyapunov", resclf::composite_theorem},
      {"converse_lyapunov_grid", resclf::converse_grid},
      {"zs_ag_implies_iss", resclf::zs_ag},
      {"time_state_equivalence", resclf::phase_equivalence},
      {"rk4_richardson", resclf::richardson},
      {"certify_determinism", resclf::determinism},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failures += o.pass ? 0 : 1;
    std::printf("%s  %2zu %-24s %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first,
                o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%zu/%zu criteria passed\n", criteria.size() - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
