#include "resclf/cli.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "resclf/io.hpp"

namespace resclf {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::path(::testing::TempDir()) /
           ("resclf_cli_" + std::string(::testing::UnitTest::GetInstance()
                                            ->current_test_info()
                                            ->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  int run(std::vector<std::string> args) {
    args.insert(args.begin(), "resclf");
    out_.str("");
    err_.str("");
    return run_cli(args, out_, err_);
  }

  fs::path path(const std::string& name) const { return dir_ / name; }

  std::string slurp(const fs::path& p) const {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  }

  json read_json(const fs::path& p) const { return json::parse(slurp(p)); }

  void write(const fs::path& p, const std::string& text) const {
    std::ofstream(p) << text;
  }

  fs::path dir_;
  std::ostringstream out_, err_;
};

Eigen::MatrixXd matrix(const json& j) {
  Eigen::MatrixXd m(j.size(), j[0].size());
  for (std::size_t i = 0; i < j.size(); ++i) {
    for (std::size_t k = 0; k < j[i].size(); ++k) m(i, k) = j[i][k].get<double>();
  }
  return m;
}

TEST_F(CliTest, UsageErrors) {
  EXPECT_EQ(run({}), kExitUsage);
  EXPECT_EQ(run({"frobnicate"}), kExitUsage);
  EXPECT_EQ(run({"synth", "--seed", "abc"}), kExitUsage);
  EXPECT_EQ(run({"synth", "--config", path("missing.json").string()}), kExitUsage);
  EXPECT_EQ(run({"synth", "--help"}), kExitPass);
}

TEST_F(CliTest, ConfigErrors) {
  write(path("bad.json"), "{\"eps\": 0.2,");
  EXPECT_EQ(run({"synth", "--config", path("bad.json").string()}), kExitUsage);
  EXPECT_NE(err_.str().find("bad.json"), std::string::npos);
  write(path("unknown.json"), "{\"epsilon\": 0.2}");
  EXPECT_EQ(run({"synth", "--config", path("unknown.json").string()}), kExitUsage);
  EXPECT_NE(err_.str().find("epsilon"), std::string::npos);
  EXPECT_EQ(run({"simulate", "--override", "eps=-1"}), kExitUsage);
  EXPECT_EQ(run({"simulate", "--override", "hopf.radius=2"}), kExitUsage);
  EXPECT_FALSE(fs::exists(path("out")));
}

TEST_F(CliTest, SynthMatchesClosedForm) {
  ASSERT_EQ(run({"synth", "--out", dir_.string(), "--override", "eps=0.1"}), kExitPass);
  const json doc = read_json(path("certificate.json"));
  const Eigen::MatrixXd P = matrix(doc["certificate"]["P"]);
  Eigen::Matrix2d expected;
  expected << std::sqrt(3.0), 1.0, 1.0, std::sqrt(3.0);
  EXPECT_LE((P - expected).cwiseAbs().maxCoeff(), 1e-10);
  const Eigen::Matrix2d M = Eigen::Vector2d(1.0 / 0.1, 1.0).asDiagonal();
  EXPECT_LE((matrix(doc["certificate"]["P_eps"]) - M * P * M).cwiseAbs().maxCoeff(),
            1e-9);
  EXPECT_EQ(doc["config"]["eps"], 0.1);
  json stripped = doc;
  stripped.erase("content_hash");
  EXPECT_EQ(doc["content_hash"], content_hash(stripped.dump()));
}

TEST_F(CliTest, SimulateRowsSeedAndDeterminism) {
  const std::vector<std::string> common = {
      "--override", "integrator.horizon=2", "--override", "integrator.dt=0.01",
      "--override", "disturbance.kind=piecewise_constant_random", "--seed", "7"};
  auto args = [&](const std::string& out) {
    std::vector<std::string> a = {"simulate", "--out", (dir_ / out).string()};
    a.insert(a.end(), common.begin(), common.end());
    return a;
  };
  ASSERT_EQ(run(args("a")), kExitPass);
  ASSERT_EQ(run(args("b")), kExitPass);
  const std::string csv = slurp(path("a/trajectory.csv"));
  EXPECT_EQ(csv, slurp(path("b/trajectory.csv")));
  EXPECT_EQ(slurp(path("a/summary.json")), slurp(path("b/summary.json")));

  std::istringstream in(csv);
  std::string line;
  std::size_t rows = 0;
  std::string header;
  while (std::getline(in, line)) {
    if (line.starts_with("#")) continue;
    if (header.empty()) {
      header = line;
      continue;
    }
    ++rows;
  }
  EXPECT_EQ(header, "t,eta_0,eta_1,z_0,z_1,d_0,V_eps,V_Z,V_c,dist");
  EXPECT_EQ(rows, 201u);
  EXPECT_EQ(read_json(path("a/summary.json"))["config"]["disturbance"]["seed"], 7u);

  auto other = args("c");
  other.back() = "8";
  ASSERT_EQ(run(other), kExitPass);
  EXPECT_NE(slurp(path("c/trajectory.csv")), csv);
}

TEST_F(CliTest, UndisturbedRunReachesOrbit) {
  ASSERT_EQ(run({"simulate", "--out", dir_.string(), "--override",
                 "disturbance.amplitude=0"}),
            kExitPass);
  const json summary = read_json(path("summary.json"))["summary"];
  EXPECT_LE(summary["final_distance"].get<double>(), 1e-6);
}

TEST_F(CliTest, CertifyPassesAndIsDeterministic) {
  ASSERT_EQ(run({"certify", "--out", (dir_ / "a").string()}), kExitPass);
  ASSERT_EQ(run({"certify", "--out", (dir_ / "b").string()}), kExitPass);
  EXPECT_EQ(slurp(path("a/report.json")), slurp(path("b/report.json")));
  const json r = read_json(path("a/report.json"))["report"];
  EXPECT_TRUE(r["pass"].get<bool>());
  for (const auto& [name, ok] : r["checks"].items()) EXPECT_TRUE(ok.get<bool>()) << name;
  EXPECT_LE(r["eta_ultimate_measured"].get<double>(), r["eta_bound_lemma3"].get<double>());
}

TEST_F(CliTest, AdversarialSigmaIsCheckFailure) {
  EXPECT_EQ(run({"certify", "--out", dir_.string(), "--override", "sigma=744",
                 "--override", "initial.z=[1.0,0.0]"}),
            kExitCheckFailure);
  const json r = read_json(path("report.json"))["report"];
  EXPECT_FALSE(r["sigma_condition_ok"].get<bool>());
  EXPECT_FALSE(r["pass"].get<bool>());
}

TEST_F(CliTest, MechCertify) {
  EXPECT_EQ(run({"certify", "--out", dir_.string(), "--override", "plant=mech",
                 "--override", "disturbance.kind=phase_error_driven", "--override",
                 "integrator.horizon=4"}),
            kExitPass);
  EXPECT_TRUE(read_json(path("report.json"))["report"]["pass"].get<bool>());
}

TEST_F(CliTest, SweepSortedAndMonotone) {
  ASSERT_EQ(run({"sweep", "--out", dir_.string(), "--override", "sweep.eps=[0.2,0.1]",
                 "--override", "sweep.amplitudes=[0.02,0]", "--override",
                 "integrator.horizon=40", "--override", "integrator.dt=0.002"}),
            kExitPass);
  const json points = read_json(path("sweep.json"))["sweep"]["points"];
  ASSERT_EQ(points.size(), 4u);
  EXPECT_EQ(points[0]["eps"], 0.1);
  EXPECT_EQ(points[0]["amplitude"], 0.0);
  EXPECT_EQ(points[3]["eps"], 0.2);
  EXPECT_LE(points[0]["eta_ultimate"].get<double>(), 1e-6);
  EXPECT_LT(points[1]["eta_ultimate"].get<double>(), points[3]["eta_ultimate"].get<double>());
}

TEST_F(CliTest, SweepRejectsMechPlant) {
  EXPECT_EQ(run({"sweep", "--out", dir_.string(), "--override", "plant=mech"}), kExitUsage);
}

}  // namespace
}  // namespace resclf
