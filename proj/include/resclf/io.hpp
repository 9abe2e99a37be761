#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "resclf/simulator.hpp"

namespace resclf {

/// 64-bit FNV-1a.
std::uint64_t fnv1a64(std::string_view bytes);

/// "fnv1a64:" followed by 16 lowercase hex digits.
std::string content_hash(std::string_view bytes);

/// Matrices as arrays of rows, vectors as arrays. Non-finite entries map to
/// null.
nlohmann::json to_json(const Eigen::MatrixXd& m);
nlohmann::json to_json(const Eigen::VectorXd& v);
nlohmann::json json_number(double x);

/// {"config": config, key: payload, "content_hash": h} where h hashes the
/// compact serialization of the object without the hash field.
std::string json_document(const nlohmann::json& config, const std::string& key,
                          const nlohmann::json& payload);

/// Columns t, eta_*, z_*, d_*, V_eps, V_Z, V_c, dist. Two leading comment
/// lines carry the compact config and the hash of everything but the hash
/// line.
std::string trajectory_csv(const TrajectoryRecord& record,
                           const nlohmann::json& config);

/// Generic CSV with the same comment preamble.
std::string csv_document(const nlohmann::json& config, const std::string& body);

/// Shortest round-trip decimal ("nan" for NaN).
std::string format_double(double x);

/// Writes bytes verbatim, creating parent directories. Throws
/// std::runtime_error on I/O failure.
void write_file(const std::filesystem::path& path, const std::string& content);

}  // namespace resclf
