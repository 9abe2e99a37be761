#include "resclf/cli.hpp"

#include <cmath>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>

#include "resclf/certify.hpp"
#include "resclf/config.hpp"
#include "resclf/io.hpp"

namespace resclf {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

json certificate_json(const ResClfCertificate& c) {
  return {{"eps", c.eps},
          {"P", to_json(c.P)},
          {"Q", to_json(c.Q)},
          {"M", to_json(c.M)},
          {"P_eps", to_json(c.P_eps)},
          {"Q_eps", to_json(c.Q_eps)},
          {"gamma", c.gamma},
          {"c1", c.c1},
          {"c2", c.c2},
          {"c3", c.c3},
          {"care_residual", c.care_residual},
          {"scaled_care_residual", c.scaled_care_residual},
          {"newton_iterations", c.newton_iterations}};
}

json checks_json(const std::vector<std::pair<std::string, bool>>& checks) {
  json out = json::object();
  for (const auto& [name, ok] : checks) out[name] = ok;
  return out;
}

bool all_pass(const std::vector<std::pair<std::string, bool>>& checks) {
  for (const auto& c : checks) {
    if (!c.second) return false;
  }
  return true;
}

void print_checks(std::ostream& out,
                  const std::vector<std::pair<std::string, bool>>& checks) {
  for (const auto& [name, ok] : checks) {
    out << "  " << std::left << std::setw(28) << name << (ok ? "PASS" : "FAIL") << "\n";
  }
}

json sweep_point_json(const SweepPoint& p) {
  return {{"eps", p.eps},
          {"amplitude", p.amplitude},
          {"d_inf", p.d_inf},
          {"eta_ultimate", p.eta_ultimate},
          {"distance_ultimate", p.distance_ultimate},
          {"lemma3_bound", p.lemma3_bound},
          {"lemma4_bound", p.lemma4_bound},
          {"lemma3_ok", p.lemma3_ok},
          {"lemma4_ok", p.lemma4_ok}};
}

json report_json(const IssReport& r) {
  const ConverseConstants& zc = r.converse;
  json ag_runs = json::array();
  for (const SweepPoint& p : r.ag_runs) ag_runs.push_back(sweep_point_json(p));
  const auto iss = [](const IssLyapunov& i) {
    return json{{"vc_decrease_ok", i.vc_decrease_ok},
                {"e_iss_ok", i.e_iss_ok},
                {"eta_threshold", i.eta_threshold},
                {"samples_in_region", i.samples_in_region},
                {"worst_vc_rate", i.worst_vc_rate},
                {"worst_e_iss_excess", i.worst_e_iss_excess}};
  };
  return {
      {"eps", r.eps},
      {"eps_bar", r.eps_bar},
      {"d_inf", r.d_inf},
      {"eta_ultimate_measured", r.eta_ultimate_measured},
      {"eta_bound_lemma3", r.eta_bound_lemma3},
      {"eta_bound_lemma4", r.eta_bound_lemma4},
      {"sigma", r.sigma},
      {"sigma_condition_ok", r.sigma_condition_ok},
      {"zs_ok", r.zs_ok},
      {"ag_gain_estimate", r.ag_gain_estimate},
      {"vc_decrease_ok", r.vc_decrease_ok},
      {"e_iss_rate_measured", json_number(r.e_iss_rate_measured)},
      {"converse_constants",
       {{"c4", zc.c4}, {"c5", zc.c5}, {"c6", zc.c6}, {"c7", zc.c7}}},
      {"coupling_lipschitz", r.coupling_lipschitz},
      {"composite_bounds",
       {{"lower", r.composite.lower}, {"upper", r.composite.upper}}},
      {"zero_stability",
       {{"decay_rate", json_number(r.zero_stability.decay_rate)},
        {"envelope_gain", r.zero_stability.envelope_gain},
        {"initial_distance", r.zero_stability.initial_distance},
        {"final_distance", r.zero_stability.final_distance}}},
      {"asymptotic_gain",
       {{"distance_gain", r.asymptotic_gain.distance.gain},
        {"distance_intercept", r.asymptotic_gain.distance.intercept},
        {"distance_max_relative_deviation",
         r.asymptotic_gain.distance.max_relative_deviation},
        {"eta_gain", r.asymptotic_gain.eta.gain},
        {"eta_intercept", r.asymptotic_gain.eta.intercept},
        {"eta_gain_limit", r.asymptotic_gain.eta_gain_limit},
        {"runs", ag_runs}}},
      {"iss_nominal", iss(r.iss_nominal)},
      {"iss_disturbed", iss(r.iss_disturbed)},
      {"composite_sandwich",
       {{"samples", r.sandwich.samples},
        {"skipped", r.sandwich.skipped},
        {"min_lower_slack", r.sandwich.min_lower_slack},
        {"min_upper_slack", r.sandwich.min_upper_slack}}},
      {"converse_grid",
       {{"points", r.annulus.points},
        {"lower_margin", r.annulus.lower_margin},
        {"upper_margin", r.annulus.upper_margin},
        {"decrease_margin", r.annulus.decrease_margin},
        {"gradient_margin", r.annulus.gradient_margin}}},
      {"lemma3_ok", r.lemma3_ok},
      {"lemma4_ok", r.lemma4_ok},
      {"checks", checks_json(r.checks())},
      {"pass", r.pass()},
  };
}

HopfClosedLoop make_hopf_loop(const RunConfig& c, const HopfPlant& plant,
                              const ResClfCertificate& cert) {
  double sigma = 1.0;
  if (c.sigma) {
    sigma = *c.sigma;
  } else {
    sigma = choose_sigma(cert, converse_constants(plant), coupling_lipschitz(plant));
  }
  return {plant, cert, c.controller, c.eps_bar,
          DisturbanceSignal(c.disturbance, c.dims.input_size(), build_phase_model(c)),
          sigma};
}

MechController make_mech_controller(const RunConfig& c, const MechPlant& p) {
  return {certificate(p.dyn, c.Q, c.eps), c.controller, c.eps_bar};
}

std::vector<double> nonzero(const std::vector<double>& v) {
  std::vector<double> out;
  for (double x : v) {
    if (x > 0.0) out.push_back(x);
  }
  return out;
}

int certify_mech(const RunConfig& c, const json& config, const fs::path& out_dir,
                 std::ostream& out) {
  const MechPlant plant = build_mech_plant(c);
  const MechController ctrl = make_mech_controller(c, plant);
  const PhaseErrorModel model{plant, ctrl, c.mech_margin};
  const std::vector<double> amps = nonzero(c.sweep_amplitudes);
  if (amps.size() < 2) {
    throw ConfigError("mech certify needs >= 2 nonzero 'sweep.amplitudes'");
  }
  const PhaseEquivalence eq = check_phase_equivalence(
      model, amps, c.disturbance.frequency, c.integrator.horizon);

  const Eigen::Vector4d x0 = mech_initial_state(c);
  const MechSimulation nominal = integrate_mech(plant, ctrl, x0, 0.0, 1.0, c.integrator);
  const double rate = ctrl.cert.rate();
  double worst = 0.0;
  const TrajectoryRecord& rn = nominal.record;
  for (std::size_t i = 0; i < rn.size(); ++i) {
    const double bound = rn.V_eps[0] * std::exp(-rate * rn.t[i]);
    worst = std::max(worst, rn.V_eps[i] - bound * (1.0 + 1e-3));
  }
  const bool decrease_ok = worst <= 0.0;

  const double e = c.disturbance.kind == DisturbanceKind::kPhaseErrorDriven
                       ? c.disturbance.amplitude
                       : 0.0;
  const MechSimulation run = integrate_mech(plant, ctrl, x0, e, c.disturbance.frequency,
                                            c.integrator);

  const std::vector<std::pair<std::string, bool>> checks = {
      {"controller_equivalence", eq.equivalence_ok},
      {"phase_disturbance_linear", eq.linear_ok},
      {"res_clf_decrease", decrease_ok}};
  json d_inf = json::array();
  for (std::size_t i = 0; i < eq.amplitudes.size(); ++i) {
    d_inf.push_back({{"phase_amplitude", eq.amplitudes[i]}, {"d_inf", eq.d_inf[i]}});
  }
  const json report = {
      {"plant", "mech"},
      {"eps", c.eps},
      {"max_controller_gap", eq.max_controller_gap},
      {"phase_disturbance", d_inf},
      {"phase_gain", eq.fit.gain},
      {"phase_intercept", eq.fit.intercept},
      {"phase_max_relative_deviation", eq.fit.max_relative_deviation},
      {"nominal_steps", rn.size()},
      {"nominal_truncated", nominal.truncated},
      {"trajectory_truncated", run.truncated},
      {"checks", checks_json(checks)},
      {"pass", all_pass(checks)},
  };
  write_file(out_dir / "report.json", json_document(config, "report", report));
  write_file(out_dir / "trajectory.csv", trajectory_csv(run.record, config));

  out << "certify (mech, eps = " << c.eps << ")\n";
  out << "  controller gap at e = 0    " << eq.max_controller_gap << "\n";
  out << "  phase gain |d|/e           " << eq.fit.gain << "\n";
  print_checks(out, checks);
  return all_pass(checks) ? kExitPass : kExitCheckFailure;
}

}  // namespace

int cmd_synth(const json& config, const fs::path& out_dir, std::ostream& out) {
  const RunConfig c = parse_config(config);
  const OutputDynamics dyn = build_fg(c.dims);
  ResClfCertificate cert;
  try {
    cert = certificate(dyn, c.Q, c.eps);
  } catch (const std::runtime_error& e) {
    out << "synth failed: " << e.what() << "\n";
    return kExitCheckFailure;
  }
  write_file(out_dir / "certificate.json",
             json_document(config, "certificate", certificate_json(cert)));
  out << "synth (k1 = " << c.dims.k1 << ", k2 = " << c.dims.k2 << ", eps = " << c.eps
      << ")\n";
  out << std::setprecision(10);
  out << "  gamma = " << cert.gamma << "\n  c1    = " << cert.c1
      << "\n  c2    = " << cert.c2 << "\n  CARE residual        " << cert.care_residual
      << "\n  scaled CARE residual " << cert.scaled_care_residual << "\n";
  return kExitPass;
}

int cmd_simulate(const json& config, const fs::path& out_dir, std::ostream& out) {
  const RunConfig c = parse_config(config);
  json summary;
  TrajectoryRecord record;
  if (c.plant == PlantKind::kHopf) {
    const HopfPlant plant = build_hopf_plant(c);
    const HopfClosedLoop loop =
        make_hopf_loop(c, plant, certificate(plant.dyn, c.Q, c.eps));
    record = integrate(loop, hopf_initial_state(c), c.integrator);
    summary = {{"plant", "hopf"},
               {"rows", record.size()},
               {"sigma", loop.sigma},
               {"d_inf", sup_norm(loop.disturbance, c.integrator.horizon)},
               {"eta_ultimate", ultimate_bound(record, c.settle_fraction)},
               {"distance_ultimate", ultimate_distance(record, c.settle_fraction)},
               {"final_distance", record.dist.back()},
               {"final_V_eps", record.V_eps.back()}};
  } else {
    const MechPlant plant = build_mech_plant(c);
    const MechController ctrl = make_mech_controller(c, plant);
    const double e = c.disturbance.kind == DisturbanceKind::kPhaseErrorDriven
                         ? c.disturbance.amplitude
                         : 0.0;
    const MechSimulation sim = integrate_mech(plant, ctrl, mech_initial_state(c), e,
                                              c.disturbance.frequency, c.integrator);
    record = sim.record;
    double d_max = 0.0;
    for (const auto& d : record.d) d_max = std::max(d_max, d.norm());
    summary = {{"plant", "mech"},
               {"rows", record.size()},
               {"truncated", sim.truncated},
               {"phase_amplitude", e},
               {"d_max_sampled", d_max},
               {"final_eta_norm", record.eta.back().norm()},
               {"final_V_eps", record.V_eps.back()}};
  }
  write_file(out_dir / "trajectory.csv", trajectory_csv(record, config));
  write_file(out_dir / "summary.json", json_document(config, "summary", summary));
  out << "simulate (" << to_string(c.plant) << "): " << record.size()
      << " samples written to " << (out_dir / "trajectory.csv").string() << "\n";
  return kExitPass;
}

int cmd_certify(const json& config, const fs::path& out_dir, std::ostream& out) {
  const RunConfig c = parse_config(config);
  if (c.plant == PlantKind::kMech) return certify_mech(c, config, out_dir, out);

  CertifyInputs in;
  in.plant = build_hopf_plant(c);
  in.Q = c.Q;
  in.eps = c.eps;
  in.eps_bar = c.eps_bar;
  in.mode = c.controller;
  in.disturbance = c.disturbance;
  in.phase_model = build_phase_model(c);
  in.x0 = hopf_initial_state(c);
  in.integrator = c.integrator;
  in.settle_fraction = c.settle_fraction;
  in.sigma = c.sigma;
  in.ag_amplitudes = c.sweep_amplitudes;
  in.annulus_points = c.annulus_points;
  const CertifyOutcome result = certify_hopf(in);
  const IssReport& r = result.report;

  write_file(out_dir / "report.json", json_document(config, "report", report_json(r)));
  write_file(out_dir / "trajectory.csv", trajectory_csv(result.disturbed, config));

  out << std::setprecision(6);
  out << "certify (hopf, eps = " << r.eps << ", eps_bar = " << r.eps_bar << ")\n";
  out << "  |d|_inf                    " << r.d_inf << "\n";
  out << "  ultimate |eta| measured    " << r.eta_ultimate_measured << "\n";
  out << "  ultimate bound, min-norm   " << r.eta_bound_lemma3 << "\n";
  out << "  ultimate bound, with u_s   " << r.eta_bound_lemma4 << "\n";
  out << "  sigma                      " << r.sigma << "\n";
  out << "  decay rate                 " << r.e_iss_rate_measured << "\n";
  out << "  asymptotic gain            " << r.ag_gain_estimate << "\n";
  print_checks(out, r.checks());
  return r.pass() ? kExitPass : kExitCheckFailure;
}

int cmd_sweep(const json& config, const fs::path& out_dir, std::ostream& out) {
  const RunConfig c = parse_config(config);
  if (c.plant != PlantKind::kHopf) throw ConfigError("sweep supports plant \"hopf\" only");
  if (c.sweep_eps.empty() || c.sweep_amplitudes.empty()) {
    throw ConfigError("'sweep.eps' and 'sweep.amplitudes' must be non-empty");
  }
  SweepInputs in{build_hopf_plant(c), c.Q, c.controller, c.eps_bar, c.disturbance,
                 build_phase_model(c), hopf_initial_state(c), c.integrator,
                 c.settle_fraction, c.sweep_eps, c.sweep_amplitudes};
  const std::vector<SweepPoint> points = run_sweep(in, Execution::kParallel);

  bool zero_ok = true, lemma3_ok = true;
  json rows = json::array();
  std::string body =
      "eps,amplitude,d_inf,eta_ultimate,distance_ultimate,lemma3_bound,lemma4_bound,"
      "lemma3_ok,lemma4_ok\n";
  for (const SweepPoint& p : points) {
    if (p.amplitude == 0.0 && p.eta_ultimate > 1e-6) zero_ok = false;
    lemma3_ok = lemma3_ok && p.lemma3_ok;
    rows.push_back(sweep_point_json(p));
    body += format_double(p.eps) + "," + format_double(p.amplitude) + "," +
            format_double(p.d_inf) + "," + format_double(p.eta_ultimate) + "," +
            format_double(p.distance_ultimate) + "," + format_double(p.lemma3_bound) +
            "," + format_double(p.lemma4_bound) + "," + (p.lemma3_ok ? "1" : "0") +
            "," + (p.lemma4_ok ? "1" : "0") + "\n";
  }
  const std::vector<std::pair<std::string, bool>> checks = {
      {"monotone_in_eps", sweep_monotone_in_eps(points)},
      {"zero_amplitude_bound", zero_ok},
      {"lemma3_bound", lemma3_ok}};
  const json payload = {{"points", rows}, {"checks", checks_json(checks)},
                        {"pass", all_pass(checks)}};
  write_file(out_dir / "sweep.json", json_document(config, "sweep", payload));
  write_file(out_dir / "sweep.csv", csv_document(config, body));

  out << "sweep: " << points.size() << " runs\n";
  out << "  " << std::left << std::setw(8) << "eps" << std::setw(10) << "|d|_inf"
      << std::setw(14) << "|eta|_ult" << "bound\n";
  for (const SweepPoint& p : points) {
    out << "  " << std::setw(8) << p.eps << std::setw(10) << p.d_inf << std::setw(14)
        << p.eta_ultimate << p.lemma3_bound << "\n";
  }
  print_checks(out, checks);
  return all_pass(checks) ? kExitPass : kExitCheckFailure;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"RES-CLF phase-to-state stability toolkit", "resclf"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir = "out";
  std::optional<std::uint64_t> seed;
  std::vector<std::string> overrides;
  using Command = int (*)(const json&, const fs::path&, std::ostream&);
  Command command = nullptr;

  const auto add = [&](const char* name, const char* help, Command fn) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("--config", config_path, "JSON config file")->check(CLI::ExistingFile);
    sub->add_option("--out", out_dir, "output directory")->capture_default_str();
    sub->add_option("--seed", seed, "disturbance seed (u64)");
    sub->add_option("--override", overrides, "key.path=value (repeatable)")
        ->take_all();
    sub->callback([&command, fn] { command = fn; });
  };
  add("synth", "solve the CARE and write the RES-CLF certificate", cmd_synth);
  add("simulate", "simulate the closed loop and write the trajectory", cmd_simulate);
  add("certify", "run the stability checks and write the report", cmd_certify);
  add("sweep", "ultimate bounds over eps and disturbance amplitude", cmd_sweep);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  if (!reversed.empty()) reversed.pop_back();  // program name
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitPass;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n" << app.help();
    return kExitUsage;
  }

  try {
    const json user = config_path.empty() ? json::object() : read_config_file(config_path);
    const json resolved = resolve_config_json(user, overrides, seed);
    return command(resolved, out_dir, out);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    err << "invalid configuration: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitCheckFailure;
  }
}

}  // namespace resclf
