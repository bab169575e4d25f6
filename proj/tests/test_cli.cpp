#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>
#include <json.hpp>

#include "qmetro/cli.hpp"
#include "qmetro/gaussian.hpp"

using namespace qmetro;
using Json = nlohmann::json;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "qmetro");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out;
  std::ostringstream err;
  const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string line(const std::string& text, int index) {
  std::istringstream in(text);
  std::string s;
  for (int i = 0; i <= index; ++i) std::getline(in, s);
  return s;
}

Json json_of(const Result& r) { return Json::parse(r.out); }

}  // namespace

TEST(Cli, UsageErrors) {
  EXPECT_EQ(invoke({}).code, cli::kExitUsage);
  EXPECT_EQ(invoke({"frobnicate"}).code, cli::kExitUsage);
  EXPECT_EQ(invoke({"protocol", "--nbar", "1", "--r", "0.5", "--phi", "0.1"}).code, cli::kExitUsage);
  EXPECT_EQ(invoke({"protocol", "--phi", "0.1"}).code, cli::kExitUsage);
  EXPECT_EQ(invoke({"protocol", "--nbar", "1", "--phi", "0.1", "--eta", "0.9", "--eta1", "0.9"}).code,
            cli::kExitUsage);
  EXPECT_EQ(invoke({"protocol", "--nbar", "1", "--phi", "0.1", "--eta1", "0.9"}).code, cli::kExitUsage);
  EXPECT_EQ(invoke({"protocol", "--nbar", "1", "--phi", "0.1", "--engine", "classical"}).code,
            cli::kExitUsage);
  EXPECT_EQ(invoke({"protocol", "--nbar", "1", "--phi", "0.1", "--format", "xml"}).code, cli::kExitUsage);
  EXPECT_EQ(invoke({"table", "--nbar", "0"}).code, cli::kExitUsage);
  EXPECT_EQ(invoke({"sweep", "--nbar", "2,1", "--phi", "0.1", "--eta", "1"}).code, cli::kExitUsage);
  EXPECT_EQ(invoke({"--help"}).code, cli::kExitOk);
}

TEST(Cli, SingularOperatingPointExplained) {
  const auto r = invoke({"protocol", "--nbar", "1", "--phi", "0", "--eta", "0.9"});
  EXPECT_EQ(r.code, cli::kExitUsage);
  EXPECT_NE(r.err.find("slope"), std::string::npos) << r.err;
}

TEST(Cli, ProtocolPeakSignal) {
  const auto r = invoke({"protocol", "--nbar", "1", "--phi", "1.5707963", "--eta", "1", "--engine",
                         "gaussian", "--format", "json"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NEAR(json_of(r)["record"]["gaussian_signal"].get<double>(), 8.0, 1e-10);
}

TEST(Cli, ProtocolHeadline) {
  const auto r = invoke({"protocol", "--nbar", "15000", "--phi", "0.001", "--eta", "0.99", "--engine",
                         "gaussian", "--format", "json"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NEAR(json_of(r)["record"]["snl_ratio"].get<double>(), 5.0, 0.5);
}

TEST(Cli, ProtocolBothEnginesAgree) {
  const auto r = invoke({"protocol", "--r", "0.5", "--phi", "0.2", "--eta1", "0.95", "--eta2", "0.9",
                         "--cutoff", "60", "--format", "json"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto rec = json_of(r)["record"];
  EXPECT_EQ(rec["cutoff"].get<int>(), 60);
  EXPECT_LT(rec["signal_rel_dev"].get<double>(), 1e-6);
  EXPECT_LT(rec["variance_rel_dev"].get<double>(), 1e-6);
}

TEST(Cli, EnvironmentCutoff) {
  setenv("QMETRO_DEFAULT_CUTOFF", "40", 1);
  const auto r = invoke({"protocol", "--nbar", "0.5", "--phi", "0.2", "--eta", "0.9", "--format", "json"});
  unsetenv("QMETRO_DEFAULT_CUTOFF");
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(json_of(r)["record"]["cutoff"].get<int>(), 40);
}

TEST(Cli, Deterministic) {
  const std::vector<std::string> args{"table", "--nbar", "2", "--oracle"};
  EXPECT_EQ(invoke(args).out, invoke(args).out);
  const std::vector<std::string> sweep{"sweep", "--nbar-log", "10,100000,9", "--phi", "0.001", "--eta",
                                       "0.9,0.95,0.99", "--format", "json"};
  EXPECT_EQ(invoke(sweep).out, invoke(sweep).out);
}

TEST(Cli, GoldenHeaders) {
  EXPECT_EQ(line(invoke({"sweep", "--nbar", "1", "--phi", "0.1", "--eta", "1"}).out, 1),
            "n_bar,phi,eta,signal,variance,delta_phi,snl,snl_ratio");
  EXPECT_EQ(line(invoke({"table", "--nbar", "2"}).out, 1),
            "state,n_bar,q,j,qfi,status,oracle_q,oracle_j,oracle_qfi,max_rel_dev,note");
  const auto proto = invoke({"protocol", "--nbar", "1", "--phi", "0.1", "--engine", "gaussian"}).out;
  EXPECT_EQ(line(proto, 0).rfind("# ", 0), 0u);
  EXPECT_EQ(line(proto, 1).rfind("n_bar,r,phi,eta1,eta2,engine,cutoff,", 0), 0u);
}

TEST(Cli, TableRows) {
  const auto t = json_of(invoke({"table", "--nbar", "4", "--format", "json"}));
  ASSERT_EQ(t["rows"].size(), 8u);
  const auto noon = t["rows"][1];
  EXPECT_EQ(noon["state"], "noon");
  EXPECT_EQ(noon["q"].get<double>(), 1.0);
  EXPECT_EQ(noon["j"].get<double>(), -1.0);
  EXPECT_EQ(noon["qfi"].get<double>(), 16.0);
  const auto o = json_of(invoke({"table", "--nbar", "2", "--oracle", "--format", "json"}));
  for (const auto& row : o["rows"]) {
    if (row["state"] == "twin_fock") EXPECT_LT(row["max_rel_dev"].get<double>(), 1e-8);
    if (row["state"] == "amplified_bell") EXPECT_EQ(row["status"], "formula-only");
  }
}

TEST(Cli, SweepMatchesProtocol) {
  const auto s = json_of(invoke({"sweep", "--nbar", "3", "--phi", "0.2", "--eta", "0.9", "--format", "json"}));
  const auto p = json_of(invoke({"protocol", "--nbar", "3", "--phi", "0.2", "--eta", "0.9", "--engine",
                                 "gaussian", "--format", "json"}));
  EXPECT_EQ(s["rows"][0]["signal"], p["record"]["gaussian_signal"]);
  EXPECT_EQ(s["rows"][0]["variance"], p["record"]["gaussian_variance"]);
  EXPECT_EQ(s["rows"][0]["delta_phi"], p["record"]["gaussian_delta_phi"]);
  EXPECT_EQ(s["rows"][0]["snl_ratio"], p["record"]["snl_ratio"]);
}

TEST(Cli, SweepLosslessColumn) {
  const auto s = json_of(invoke({"sweep", "--nbar-log", "1,1000,4", "--phi", "1e-7", "--eta", "1",
                                 "--format", "json"}));
  ASSERT_EQ(s["rows"].size(), 4u);
  for (const auto& row : s["rows"]) {
    const double n = row["n_bar"].get<double>();
    EXPECT_NEAR(row["snl_ratio"].get<double>() / std::sqrt(2.0 * (n + 1.0)), 1.0, 1e-6) << n;
  }
}

TEST(Cli, SweepCrossesShotNoise) {
  const auto s = json_of(invoke({"sweep", "--nbar-log", "10,100000,9", "--phi", "0.001", "--eta",
                                 "0.9,0.95,0.99", "--format", "json"}));
  ASSERT_EQ(s["rows"].size(), 27u);
  // rows are ordered by n_bar, then phi, then eta
  for (int e = 0; e < 3; ++e) {
    EXPECT_LT(s["rows"][e]["snl_ratio"].get<double>(), 1.0);
    EXPECT_GT(s["rows"][24 + e]["snl_ratio"].get<double>(), 1.0);
  }
}

TEST(Cli, OutFile) {
  const auto path = std::filesystem::temp_directory_path() / "qmetro_cli_test.csv";
  std::filesystem::remove(path);
  const auto r = invoke({"sweep", "--nbar", "1", "--phi", "0.1", "--eta", "1", "--out", path.string()});
  ASSERT_EQ(r.code, 0);
  EXPECT_TRUE(r.out.empty());
  std::ifstream in(path);
  std::stringstream buf;
  buf << in.rdbuf();
  EXPECT_EQ(buf.str(), invoke({"sweep", "--nbar", "1", "--phi", "0.1", "--eta", "1"}).out);
  std::filesystem::remove(path);
  EXPECT_EQ(invoke({"sweep", "--nbar", "1", "--phi", "0.1", "--eta", "1", "--out",
                    "/nonexistent-dir/x.csv"})
                .code,
            cli::kExitUsage);
}

TEST(Cli, ValidateQuick) {
  const auto r = invoke({"validate"});
  EXPECT_EQ(r.code, cli::kExitOk) << r.err;
  const auto j = json_of(r);
  EXPECT_TRUE(j["passed"].get<bool>());
  EXPECT_EQ(j["level"], "quick");
}

TEST(Validate, TamperedCoefficientIsCaught) {
  cli::ValidationOptions options;
  options.phase_error_sq = [](double n, double phi, double eta) {
    // leading coefficient 64 -> 63 in the denominator
    const double v = gaussian::phase_error(n, phi, eta).value;
    return v * v * 64.0 / 63.0;
  };
  const auto report = cli::run_validation(options);
  EXPECT_FALSE(report.passed());
  for (const auto& c : report.checks) {
    EXPECT_EQ(c.passed, c.name != "closed-form-phase-error-vs-moment-route") << c.name;
  }
}
