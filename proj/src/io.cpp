#include "resclf/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <stdexcept>

namespace resclf {

using nlohmann::json;

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string content_hash(std::string_view bytes) {
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out = "fnv1a64:";
  const std::uint64_t h = fnv1a64(bytes);
  for (int shift = 60; shift >= 0; shift -= 4) out += kHex[(h >> shift) & 0xF];
  return out;
}

json json_number(double x) {
  if (!std::isfinite(x)) return nullptr;
  return x;
}

json to_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(json_number(m(i, j)));
    rows.push_back(std::move(row));
  }
  return rows;
}

json to_json(const Eigen::VectorXd& v) {
  json out = json::array();
  for (double x : v) out.push_back(json_number(x));
  return out;
}

std::string json_document(const json& config, const std::string& key,
                          const json& payload) {
  json doc = {{"config", config}, {key, payload}};
  doc["content_hash"] = content_hash(doc.dump());
  return doc.dump(2) + "\n";
}

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

std::string csv_document(const json& config, const std::string& body) {
  const std::string config_line = "# config: " + config.dump() + "\n";
  return config_line + "# content_hash: " + content_hash(config_line + body) +
         "\n" + body;
}

std::string trajectory_csv(const TrajectoryRecord& r, const json& config) {
  std::string body = "t";
  const auto columns = [&](const char* prefix, Eigen::Index n) {
    for (Eigen::Index i = 0; i < n; ++i) {
      body += ",";
      body += prefix;
      body += std::to_string(i);
    }
  };
  const Eigen::Index ne = r.empty() ? 0 : r.eta.front().size();
  const Eigen::Index nz = r.empty() ? 0 : r.z.front().size();
  const Eigen::Index nd = r.empty() ? 0 : r.d.front().size();
  columns("eta_", ne);
  columns("z_", nz);
  columns("d_", nd);
  body += ",V_eps,V_Z,V_c,dist\n";
  for (std::size_t k = 0; k < r.size(); ++k) {
    body += format_double(r.t[k]);
    for (double x : r.eta[k]) body += "," + format_double(x);
    for (double x : r.z[k]) body += "," + format_double(x);
    for (double x : r.d[k]) body += "," + format_double(x);
    body += "," + format_double(r.V_eps[k]);
    body += "," + format_double(r.V_Z[k]);
    body += "," + format_double(r.V_c[k]);
    body += "," + format_double(r.dist[k]);
    body += "\n";
  }
  return csv_document(config, body);
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
  out.write(content.data(), std::streamsize(content.size()));
  if (!out) throw std::runtime_error("write to '" + path.string() + "' failed");
}

}  // namespace resclf
