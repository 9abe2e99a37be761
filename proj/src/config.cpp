#include "resclf/config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace resclf {

using nlohmann::json;

namespace {

std::string join(const std::string& prefix, const std::string& key) {
  return prefix.empty() ? key : prefix + "." + key;
}

// Every key of `doc` must exist in `schema`; nested objects are checked when
// the schema value is itself an object.
void check_keys(const json& doc, const json& schema, const std::string& prefix) {
  if (!doc.is_object()) {
    throw ConfigError("'" + (prefix.empty() ? std::string("config") : prefix) +
                      "' must be an object");
  }
  for (const auto& [key, value] : doc.items()) {
    const std::string path = join(prefix, key);
    if (!schema.contains(key)) throw ConfigError("unknown key '" + path + "'");
    if (schema.at(key).is_object()) check_keys(value, schema.at(key), path);
  }
}

void merge_into(json& base, const json& user, const std::string& prefix) {
  for (const auto& [key, value] : user.items()) {
    const std::string path = join(prefix, key);
    if (base.at(key).is_object()) {
      merge_into(base.at(key), value, path);
    } else {
      base[key] = value;
    }
  }
}

const json& at_path(const json& j, const std::string& path) {
  const json* node = &j;
  std::istringstream in(path);
  for (std::string part; std::getline(in, part, '.');) {
    node = &node->at(part);
  }
  return *node;
}

double number(const json& root, const std::string& path) {
  const json& v = at_path(root, path);
  if (!v.is_number()) throw ConfigError("'" + path + "' must be a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) throw ConfigError("'" + path + "' must be finite");
  return x;
}

double positive(const json& root, const std::string& path) {
  const double x = number(root, path);
  if (!(x > 0.0)) throw ConfigError("'" + path + "' must be positive");
  return x;
}

int count(const json& root, const std::string& path) {
  const json& v = at_path(root, path);
  if (!v.is_number_integer() || v.get<long long>() < 0 || v.get<long long>() > 64) {
    throw ConfigError("'" + path + "' must be an integer in [0, 64]");
  }
  return v.get<int>();
}

std::string text(const json& root, const std::string& path) {
  const json& v = at_path(root, path);
  if (!v.is_string()) throw ConfigError("'" + path + "' must be a string");
  return v.get<std::string>();
}

std::vector<double> numbers(const json& v, const std::string& path) {
  if (!v.is_array()) throw ConfigError("'" + path + "' must be an array of numbers");
  std::vector<double> out;
  for (const json& x : v) {
    if (!x.is_number() || !std::isfinite(x.get<double>())) {
      throw ConfigError("'" + path + "' must be an array of finite numbers");
    }
    out.push_back(x.get<double>());
  }
  return out;
}

Eigen::VectorXd vector_of(const json& v, const std::string& path, int size) {
  const std::vector<double> x = numbers(v, path);
  if (int(x.size()) != size) {
    throw ConfigError("'" + path + "' must have " + std::to_string(size) + " entries");
  }
  return Eigen::Map<const Eigen::VectorXd>(x.data(), size);
}

Eigen::MatrixXd matrix_of(const json& v, const std::string& path, int rows, int cols) {
  if (!v.is_array() || int(v.size()) != rows) {
    throw ConfigError("'" + path + "' must be a " + std::to_string(rows) + " x " +
                      std::to_string(cols) + " array of rows");
  }
  Eigen::MatrixXd M(rows, cols);
  for (int i = 0; i < rows; ++i) {
    M.row(i) = vector_of(v[i], path, cols).transpose();
  }
  return M;
}

Eigen::MatrixXd parse_q(const json& v, int n) {
  if (v.is_string()) {
    if (v.get<std::string>() != "identity") {
      throw ConfigError("'Q' must be \"identity\", a positive number or a matrix");
    }
    return Eigen::MatrixXd::Identity(n, n);
  }
  if (v.is_number()) {
    const double s = v.get<double>();
    if (!(s > 0.0) || !std::isfinite(s)) throw ConfigError("scalar 'Q' must be positive");
    return s * Eigen::MatrixXd::Identity(n, n);
  }
  Eigen::MatrixXd Q = matrix_of(v, "Q", n, n);
  if (!Q.isApprox(Q.transpose(), 1e-12)) throw ConfigError("'Q' must be symmetric");
  if (Q.llt().info() != Eigen::Success) {
    throw ConfigError("'Q' must be positive definite");
  }
  return Q;
}

}  // namespace

json default_config_json() {
  return json{
      {"k1", 0},
      {"k2", 1},
      {"Q", "identity"},
      {"eps", 0.2},
      {"eps_bar", 0.5},
      {"plant", "hopf"},
      {"hopf",
       {{"omega", 1.0},
        {"lambda_h", 1.0},
        {"r0", 1.0},
        {"coupling", 0.2},
        {"C", nullptr},
        {"y1_rate", 1.0},
        {"annulus_halfwidth", 0.5}}},
      {"mech",
       {{"q1_minus", -0.2},
        {"q1_plus", 0.2},
        {"v_d", 0.4},
        {"alpha", {0.0, 0.05, 0.2, 0.15, -0.05, 0.0}},
        {"margin", 0.1}}},
      {"controller", "min_norm"},
      {"disturbance",
       {{"kind", "sinusoid"},
        {"amplitude", 0.05},
        {"frequency", 0.5},
        {"dwell", 0.5},
        {"seed", 1}}},
      {"integrator", {{"dt", 1e-3}, {"horizon", 50.0}}},
      {"initial", {{"eta", nullptr}, {"z", nullptr}}},
      {"settle_fraction", 0.5},
      {"sigma", "auto"},
      {"sweep",
       {{"eps", {0.5, 0.2, 0.1, 0.05}}, {"amplitudes", {0.0, 0.01, 0.02, 0.04}}}},
      {"annulus_points", 10000},
  };
}

json resolve_config_json(const json& user, const std::vector<std::string>& overrides,
                         std::optional<std::uint64_t> seed) {
  json resolved = default_config_json();
  check_keys(user, resolved, "");
  merge_into(resolved, user, "");

  for (const std::string& item : overrides) {
    const auto eq = item.find('=');
    if (eq == std::string::npos || eq == 0) {
      throw ConfigError("override '" + item + "' is not of the form key=value");
    }
    const std::string path = item.substr(0, eq);
    const std::string raw = item.substr(eq + 1);
    json* node = &resolved;
    std::istringstream in(path);
    std::string walked;
    for (std::string part; std::getline(in, part, '.');) {
      walked = join(walked, part);
      if (!node->is_object() || !node->contains(part)) {
        throw ConfigError("unknown key '" + walked + "' in override");
      }
      node = &(*node)[part];
    }
    json value = json::parse(raw, nullptr, false);
    if (value.is_discarded()) value = raw;
    if (node->is_object()) {
      check_keys(value, *node, path);
      merge_into(*node, value, path);
    } else {
      *node = value;
    }
  }
  if (seed) resolved["disturbance"]["seed"] = *seed;
  return resolved;
}

RunConfig parse_config(const json& j) {
  check_keys(j, default_config_json(), "");
  const json r = [&] {
    json full = default_config_json();
    merge_into(full, j, "");
    return full;
  }();

  RunConfig c;
  c.dims = {count(r, "k1"), count(r, "k2")};
  if (c.dims.k1 + c.dims.k2 < 1) throw ConfigError("need k1 + k2 >= 1");
  const int n = c.dims.eta_size();
  c.Q = parse_q(r.at("Q"), n);

  c.eps = number(r, "eps");
  if (!(c.eps > 0.0 && c.eps <= 1.0)) throw ConfigError("'eps' must lie in (0, 1]");
  c.eps_bar = positive(r, "eps_bar");

  const std::string plant = text(r, "plant");
  if (plant == "hopf") {
    c.plant = PlantKind::kHopf;
  } else if (plant == "mech") {
    c.plant = PlantKind::kMech;
  } else {
    throw ConfigError("'plant' must be \"hopf\" or \"mech\"");
  }

  c.hopf.omega = number(r, "hopf.omega");
  c.hopf.lambda_h = number(r, "hopf.lambda_h");
  c.hopf.r0 = positive(r, "hopf.r0");
  c.hopf.coupling = number(r, "hopf.coupling");
  c.hopf.y1_rate = positive(r, "hopf.y1_rate");
  c.hopf.annulus_halfwidth = positive(r, "hopf.annulus_halfwidth");
  if (!r.at("hopf").at("C").is_null()) {
    c.hopf_C = matrix_of(r.at("hopf").at("C"), "hopf.C", 2, n);
  }

  c.mech.q1_minus = number(r, "mech.q1_minus");
  c.mech.q1_plus = number(r, "mech.q1_plus");
  c.mech.v_d = positive(r, "mech.v_d");
  const Eigen::VectorXd alpha = vector_of(r.at("mech").at("alpha"), "mech.alpha", 6);
  for (int i = 0; i < 6; ++i) c.mech.alpha[i] = alpha(i);
  c.mech_margin = number(r, "mech.margin");
  if (!(c.mech_margin >= 0.0 && c.mech_margin < 0.5)) {
    throw ConfigError("'mech.margin' must lie in [0, 0.5)");
  }

  const std::string ctrl = text(r, "controller");
  if (ctrl == "min_norm") {
    c.controller = ControllerMode::kMinNorm;
  } else if (ctrl == "min_norm_plus_us") {
    c.controller = ControllerMode::kMinNormPlusUs;
  } else {
    throw ConfigError("'controller' must be \"min_norm\" or \"min_norm_plus_us\"");
  }

  try {
    c.disturbance.kind = parse_disturbance_kind(text(r, "disturbance.kind"));
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("'disturbance.kind': ") + e.what());
  }
  c.disturbance.amplitude = number(r, "disturbance.amplitude");
  if (c.disturbance.amplitude < 0.0) {
    throw ConfigError("'disturbance.amplitude' must be >= 0");
  }
  c.disturbance.frequency = number(r, "disturbance.frequency");
  c.disturbance.dwell = positive(r, "disturbance.dwell");
  const json& seed = r.at("disturbance").at("seed");
  if (!seed.is_number_unsigned() && !(seed.is_number_integer() && seed.get<long long>() >= 0)) {
    throw ConfigError("'disturbance.seed' must be a non-negative integer");
  }
  c.disturbance.seed = seed.get<std::uint64_t>();

  c.integrator.dt = positive(r, "integrator.dt");
  c.integrator.horizon = positive(r, "integrator.horizon");
  if (c.integrator.horizon < c.integrator.dt) {
    throw ConfigError("'integrator.horizon' must be >= 'integrator.dt'");
  }

  const json& eta = r.at("initial").at("eta");
  if (eta.is_null()) {
    c.initial_eta = Eigen::VectorXd::Zero(n);
    c.initial_eta(0) = 0.3;
  } else {
    c.initial_eta = vector_of(eta, "initial.eta", n);
  }
  const json& z = r.at("initial").at("z");
  if (!z.is_null()) {
    const int nz = c.plant == PlantKind::kHopf ? 2 : (c.dims.k1 == 0 ? 2 : 1);
    c.initial_z = vector_of(z, "initial.z", nz);
  }

  c.settle_fraction = number(r, "settle_fraction");
  if (!(c.settle_fraction > 0.0 && c.settle_fraction < 1.0)) {
    throw ConfigError("'settle_fraction' must lie in (0, 1)");
  }
  const json& sigma = r.at("sigma");
  if (sigma.is_string()) {
    if (sigma.get<std::string>() != "auto") {
      throw ConfigError("'sigma' must be \"auto\" or a positive number");
    }
  } else {
    c.sigma = positive(r, "sigma");
  }

  c.sweep_eps = numbers(r.at("sweep").at("eps"), "sweep.eps");
  for (double e : c.sweep_eps) {
    if (!(e > 0.0 && e <= 1.0)) throw ConfigError("'sweep.eps' entries must lie in (0, 1]");
  }
  c.sweep_amplitudes = numbers(r.at("sweep").at("amplitudes"), "sweep.amplitudes");
  for (double a : c.sweep_amplitudes) {
    if (a < 0.0) throw ConfigError("'sweep.amplitudes' entries must be >= 0");
  }
  const json& pts = r.at("annulus_points");
  if (!pts.is_number_integer() || pts.get<long long>() < 1 ||
      pts.get<long long>() > 10'000'000) {
    throw ConfigError("'annulus_points' must be an integer in [1, 1e7]");
  }
  c.annulus_points = pts.get<std::size_t>();
  return c;
}

json read_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("malformed JSON in '" + path + "' at byte " +
                      std::to_string(e.byte) + ": " + e.what());
  }
}

std::string to_string(ControllerMode mode) {
  return mode == ControllerMode::kMinNorm ? "min_norm" : "min_norm_plus_us";
}

std::string to_string(PlantKind kind) {
  return kind == PlantKind::kHopf ? "hopf" : "mech";
}

HopfPlant build_hopf_plant(const RunConfig& c) {
  return c.hopf_C ? make_hopf_plant(c.dims, c.hopf, *c.hopf_C)
                  : make_hopf_plant(c.dims, c.hopf);
}

MechPlant build_mech_plant(const RunConfig& c) {
  return make_mech_plant(c.dims, c.mech);
}

std::shared_ptr<const PhaseErrorModel> build_phase_model(const RunConfig& c) {
  if (c.disturbance.kind != DisturbanceKind::kPhaseErrorDriven) return nullptr;
  const MechPlant p = build_mech_plant(c);
  MechController ctrl{certificate(p.dyn, c.Q, c.eps), c.controller, c.eps_bar};
  return std::make_shared<const PhaseErrorModel>(
      PhaseErrorModel{p, std::move(ctrl), c.mech_margin});
}

FullState hopf_initial_state(const RunConfig& c) {
  const Eigen::VectorXd z =
      c.initial_z ? *c.initial_z : Eigen::VectorXd(Eigen::Vector2d(c.hopf.r0 + 0.3, 0.0));
  return {c.initial_eta, z};
}

Eigen::Vector4d mech_initial_state(const RunConfig& c) {
  const MechPlant p = build_mech_plant(c);
  const FullState nominal = mech_phi(p, mech_nominal_state(p, 0.0, c.mech_margin));
  return mech_phi_inverse(p, {c.initial_eta, c.initial_z ? *c.initial_z : nominal.z});
}

}  // namespace resclf
