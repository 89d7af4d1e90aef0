#include "icc/api.hpp"

#include <gtest/gtest.h>

#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace {

using json = icc::report::json;

struct Run {
  int status;
  std::string out;
};

// Runs the CLI with stderr folded into stdout.
Run icc_cli(const std::string& args) {
  const std::string cmd = std::string("\"") + ICC_CLI_PATH + "\" " + args + " 2>&1";
  FILE* pipe = ::popen(cmd.c_str(), "r");
  if (!pipe)
    return {-1, ""};
  std::string out;
  std::array<char, 4096> buf{};
  while (const auto n = std::fread(buf.data(), 1, buf.size(), pipe))
    out.append(buf.data(), n);
  const int raw = ::pclose(pipe);
  return {WIFEXITED(raw) ? WEXITSTATUS(raw) : -1, out};
}

std::string data(const char* name) { return std::string(ICC_SAMPLE_DATA_DIR) + "/" + name; }

std::string snapshot(const char* name) {
  std::ifstream in(std::string(ICC_SNAPSHOT_DIR) + "/" + name);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

TEST(Cli, GoldenComparisonText) {
  const auto r = icc_cli("compare --r1 0.95 --r2 0.85 --n 28 --k 2 --dependent --r12 0");
  EXPECT_EQ(r.status, 0);
  EXPECT_EQ(r.out, snapshot("compare_golden1.txt"));
}

TEST(Cli, GoldenComparisonJsonMatchesService) {
  const auto r = icc_cli("compare --r1 0.95 --r2 0.85 --n 28 --k 2 --r12 0 --format json");
  ASSERT_EQ(r.status, 0);
  const auto cli = json::parse(r.out);
  EXPECT_NEAR(cli["result"]["test"]["p_value"].get<double>(), 0.03614277, 1e-7);
  const auto svc = icc::api::dispatch(
      "/diff/test", {{"r1", 0.95}, {"r2", 0.85}, {"n", 28}, {"k", 2}, {"r12", 0.0}});
  EXPECT_EQ(cli["result"], svc.body["result"]);
  EXPECT_EQ(cli["inputs"]["dependent"], true);
}

TEST(Cli, SampleSizeAndNullTest) {
  auto r = icc_cli("samplesize-diff --rho1 0.8 --rho2 0.6 --rho12 0 --k 2 --alpha 0.05 --power 0.8");
  EXPECT_EQ(r.status, 0);
  EXPECT_EQ(r.out, snapshot("samplesize_diff_k2.txt"));
  r = icc_cli("single-test --r 0.75 --n 20 --k 2 --rho0 0.75 --tail greater");
  EXPECT_EQ(r.status, 0);
  EXPECT_NE(r.out.find("p 0.5000"), std::string::npos) << r.out;
}

TEST(Cli, ExitCodes) {
  EXPECT_EQ(icc_cli("").status, 1);
  EXPECT_EQ(icc_cli("frobnicate").status, 1);
  EXPECT_EQ(icc_cli("single-ci --r 0.5 --n 28").status, 1);
  EXPECT_EQ(icc_cli("single-ci --r 0.5 --n 28 --k 2 --format yaml").status, 1);
  EXPECT_EQ(icc_cli("compare --r1 0.9 --r2 0.8 --n 28 --k 2 --independent --r12 0.4").status, 1);
  EXPECT_EQ(icc_cli("--help").status, 0);

  const auto boundary = icc_cli("single-ci --r 1 --n 28 --k 2");
  EXPECT_EQ(boundary.status, 2);
  EXPECT_NE(boundary.out.find("icc-at-boundary"), std::string::npos);
  const auto missing = icc_cli("estimate --data /nonexistent/file.csv");
  EXPECT_EQ(missing.status, 2);
  EXPECT_NE(missing.out.find("unreadable-file"), std::string::npos);
}

TEST(Cli, DataErrorsReportLine) {
  const auto dir = std::filesystem::temp_directory_path() / "icc_cli_test";
  std::filesystem::create_directories(dir);
  const auto path = dir / "ragged.csv";
  std::ofstream(path) << "subject,a,b\nx,1,2\ny,3\n";
  const auto r = icc_cli("estimate --data " + path.string());
  EXPECT_EQ(r.status, 2);
  EXPECT_NE(r.out.find("ragged-row"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("line 3"), std::string::npos) << r.out;
}

TEST(Cli, EstimateFromFile) {
  const auto r = icc_cli("estimate --data " + data("instrument_a.csv"));
  EXPECT_EQ(r.status, 0);
  EXPECT_EQ(r.out, snapshot("estimate_instrument_a.txt"));
}

TEST(Cli, SensitivityTable) {
  const auto r = icc_cli("sensitivity --r1 0.95 --r2 0.85 --n 28 --k 2 --grid 0,0.3,0.6");
  EXPECT_EQ(r.status, 0);
  EXPECT_EQ(r.out, snapshot("sensitivity_golden1.txt"));
}

TEST(Cli, BootstrapLongFormatMatchesWide) {
  const auto a = icc_cli("bootstrap-diff --data " + data("paired_long.csv") +
                         " --unit1 scannerA --unit2 scannerB --seed 7 --format json");
  const auto b = icc_cli("bootstrap-diff --data1 " + data("instrument_a.csv") + " --data2 " +
                         data("instrument_b.csv") + " --seed 7 --workers 3 --format json");
  ASSERT_EQ(a.status, 0) << a.out;
  ASSERT_EQ(b.status, 0) << b.out;
  EXPECT_EQ(json::parse(a.out)["result"], json::parse(b.out)["result"]);
}

TEST(Cli, RegionBootstrapWithMapping) {
  const auto r = icc_cli("bootstrap-regions --data " + data("regions_long.csv") + " --mapping " +
                         data("regions_mapping.csv") + " --seed 3 --format json");
  ASSERT_EQ(r.status, 0) << r.out;
  const auto j = json::parse(r.out);
  EXPECT_EQ(j["result"]["replicate_count"], 1000);
  const auto flags = icc_cli("bootstrap-regions --data " + data("regions_long.csv") +
                             " --group-a hippocampus,amygdala --group-b thalamus,caudate --seed 3 "
                             "--format json");
  ASSERT_EQ(flags.status, 0) << flags.out;
  EXPECT_EQ(json::parse(flags.out)["result"], j["result"]);
}

TEST(Cli, AuditSampleClaims) {
  const auto r = icc_cli("audit --claims " + data("claims.csv"));
  EXPECT_EQ(r.status, 0);
  EXPECT_EQ(r.out, snapshot("audit_claims.txt"));
}

TEST(Cli, OutputFile) {
  const auto path = std::filesystem::temp_directory_path() / "icc_cli_out.json";
  std::filesystem::remove(path);
  const auto r = icc_cli("single-ci --r 0.5 --n 28 --k 2 --format json -o " + path.string());
  EXPECT_EQ(r.status, 0);
  EXPECT_TRUE(r.out.empty());
  std::ifstream in(path);
  const auto j = json::parse(in);
  EXPECT_EQ(j["operation"], "single/ci");
}

} // namespace
