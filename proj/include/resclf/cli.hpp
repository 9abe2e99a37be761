#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace resclf {

/// Exit codes shared by every subcommand.
inline constexpr int kExitPass = 0;
inline constexpr int kExitCheckFailure = 1;
inline constexpr int kExitUsage = 2;

/// Each command takes a resolved config (see resolve_config_json), writes its
/// files under out_dir and prints a short human-readable summary. Returns an
/// exit code; ConfigError and std::invalid_argument propagate.
int cmd_synth(const nlohmann::json& config, const std::filesystem::path& out_dir,
              std::ostream& out);
int cmd_simulate(const nlohmann::json& config, const std::filesystem::path& out_dir,
                 std::ostream& out);
int cmd_certify(const nlohmann::json& config, const std::filesystem::path& out_dir,
                std::ostream& out);
int cmd_sweep(const nlohmann::json& config, const std::filesystem::path& out_dir,
              std::ostream& out);

/// Full command line: `<prog> <synth|simulate|certify|sweep> [--config path]
/// [--out dir] [--seed n] [--override key=value]...`. Never throws.
int run_cli(const std::vector<std::string>& args, std::ostream& out,
            std::ostream& err);

}  // namespace resclf
