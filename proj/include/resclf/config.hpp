#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "resclf/clf.hpp"
#include "resclf/disturbance.hpp"
#include "resclf/hopf_plant.hpp"
#include "resclf/mech_plant.hpp"
#include "resclf/output_dynamics.hpp"
#include "resclf/simulator.hpp"

namespace resclf {

/// Malformed or invalid configuration. Maps to exit code 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class PlantKind { kHopf, kMech };

struct RunConfig {
  OutputDims dims{0, 1};
  Eigen::MatrixXd Q;  ///< resolved to an explicit matrix
  double eps = 0.2;
  double eps_bar = 0.5;
  PlantKind plant = PlantKind::kHopf;
  HopfParams hopf;
  std::optional<Eigen::MatrixXd> hopf_C;
  MechParams mech;
  double mech_margin = 0.1;
  ControllerMode controller = ControllerMode::kMinNorm;
  DisturbanceSpec disturbance;
  IntegrationOptions integrator;
  Eigen::VectorXd initial_eta;
  std::optional<Eigen::VectorXd> initial_z;
  double settle_fraction = 0.5;
  std::optional<double> sigma;  ///< empty means the sigma rule
  std::vector<double> sweep_eps;
  std::vector<double> sweep_amplitudes;
  std::size_t annulus_points = 10000;
};

/// Documented defaults; every accepted key appears here.
nlohmann::json default_config_json();

/// Merges `user` into the defaults, then applies `key.path=value` overrides
/// (value parsed as JSON, else taken as a string) and an optional seed.
/// Unknown keys and type mismatches throw ConfigError. Returns the resolved
/// JSON, which is what output files embed.
nlohmann::json resolve_config_json(const nlohmann::json& user,
                                   const std::vector<std::string>& overrides,
                                   std::optional<std::uint64_t> seed);

/// Validates a resolved JSON document and converts it. Throws ConfigError.
RunConfig parse_config(const nlohmann::json& resolved);

/// Reads a JSON file; parse errors carry the byte position. Throws
/// ConfigError.
nlohmann::json read_config_file(const std::string& path);

std::string to_string(ControllerMode mode);
std::string to_string(PlantKind kind);

// Builders for the configured objects.
HopfPlant build_hopf_plant(const RunConfig& config);
MechPlant build_mech_plant(const RunConfig& config);
std::shared_ptr<const PhaseErrorModel> build_phase_model(const RunConfig& config);
FullState hopf_initial_state(const RunConfig& config);
Eigen::Vector4d mech_initial_state(const RunConfig& config);

}  // namespace resclf
