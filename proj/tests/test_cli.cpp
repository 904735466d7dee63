#include <fermipair/cli.hpp>

#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

using namespace fermipair;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "fermipair");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::main_entry(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::vector<std::string> lines(const std::string& s) {
  std::vector<std::string> v;
  std::istringstream in(s);
  for (std::string l; std::getline(in, l);) v.push_back(l);
  return v;
}

}  // namespace

TEST(Cli, ClassifyJson) {
  const auto r = invoke({"classify", "--lambda", "0", "--mu", "0"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_EQ(j["schema_version"], 1);
  EXPECT_EQ(j["region"], "C00");
  EXPECT_EQ(j["expected"], "0|0");
}

TEST(Cli, ClassifyCsv) {
  const auto r = invoke({"classify", "--lambda", "-10", "--mu", "3", "--format", "csv"});
  ASSERT_EQ(r.code, 0);
  const auto l = lines(r.out);
  ASSERT_EQ(l.size(), 2u);
  EXPECT_EQ(l[0], "lambda,mu,region,n_below,n_above,on_boundary");
  EXPECT_EQ(l[1], "-10,3,C11,2,2,0");
}

TEST(Cli, SpectrumJson) {
  const auto r = invoke({"spectrum", "--lambda", "-30", "--mu", "-20"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = nlohmann::json::parse(r.out);
  ASSERT_EQ(j["eigenvalues"].size(), 3u);
  EXPECT_NEAR(j["eigenvalues"][0]["z"].get<double>(), -16.47434511555795, 1e-9);
  EXPECT_EQ(j["eigenvalues"][0]["multiplicity"], 2);
  EXPECT_EQ(j["n_below"], 6);
}

TEST(Cli, SpectrumCsvRoundTrip) {
  const auto r = invoke({"spectrum", "--lambda", "-8", "--mu", "-3", "--k1", "0.7", "--k2", "-1.2", "--format", "csv"});
  ASSERT_EQ(r.code, 0);
  const auto l = lines(r.out);
  ASSERT_EQ(l.size(), 3u);
  EXPECT_EQ(l[0], "z,side,multiplicity");
  EXPECT_NEAR(std::stod(l[1].substr(0, l[1].find(','))), -1.23648022359932, 1e-9);
  const auto again = invoke({"spectrum", "--lambda", "-8", "--mu", "-3", "--k1", "0.7", "--k2", "-1.2", "--format", "csv"});
  EXPECT_EQ(r.out, again.out);
}

TEST(Cli, Constants) {
  const auto r = invoke({"constants"});
  ASSERT_EQ(r.code, 0);
  const auto j = nlohmann::json::parse(r.out);
  const auto k = constants();
  EXPECT_DOUBLE_EQ(j["mu0_minus"].get<double>(), k.mu0_minus);
  EXPECT_DOUBLE_EQ(j["mu1_plus"].get<double>(), k.mu1_plus);
}

TEST(Cli, ExitCodes) {
  EXPECT_EQ(invoke({"spectrum", "--lambda", "1", "--mu", "1", "--k1", "3.141592653589793", "--k2", "-3.141592653589793"}).code, 3);
  EXPECT_EQ(invoke({"classify", "--lambda", "1"}).code, 2);
  EXPECT_EQ(invoke({"frobnicate"}).code, 2);
  EXPECT_EQ(invoke({"classify", "--lambda", "nan", "--mu", "0"}).code, 2);
  EXPECT_EQ(invoke({"spectrum", "--lambda", "1", "--mu", "1", "--grid-n", "7"}).code, 2);
  EXPECT_EQ(invoke({"verify", "--criterion", "42"}).code, 2);
}

TEST(Cli, GridFromEnvironment) {
  ::setenv("FERMIPAIR_GRID_N", "7", 1);
  EXPECT_EQ(invoke({"spectrum", "--lambda", "1", "--mu", "1"}).code, 2);
  ::setenv("FERMIPAIR_GRID_N", "256", 1);
  EXPECT_EQ(cli::grid_from_environment(), 256u);
  ::unsetenv("FERMIPAIR_GRID_N");
  EXPECT_EQ(cli::grid_from_environment(), 512u);
}

TEST(Cli, CurvesCsv) {
  const auto r = invoke({"curves", "--side", "below", "--samples", "101"});
  ASSERT_EQ(r.code, 0);
  const auto l = lines(r.out);
  EXPECT_EQ(l[0], "side,branch,mu,lambda");
  EXPECT_GT(l.size(), 90u);
  for (std::size_t i = 1; i < l.size(); ++i) EXPECT_EQ(l[i].rfind("below,", 0), 0u);
}

TEST(Cli, SweepIsDeterministicAcrossThreads) {
  const std::vector<std::string> base{"sweep", "--lambda-steps", "13", "--mu-steps", "7", "--solve"};
  auto one = base, four = base;
  one.insert(one.end(), {"--threads", "1"});
  four.insert(four.end(), {"--threads", "4"});
  const auto a = invoke(one), b = invoke(four);
  ASSERT_EQ(a.code, 0) << a.err;
  EXPECT_EQ(a.out, b.out);
  EXPECT_EQ(lines(a.out).size(), 1u + 13u * 7u);
}

TEST(Cli, SweepSolverAgreesWithTable) {
  const auto table = invoke({"sweep", "--lambda-steps", "9", "--mu-steps", "5"});
  const auto solved = invoke({"sweep", "--lambda-steps", "9", "--mu-steps", "5", "--solve"});
  ASSERT_EQ(table.code, 0);
  EXPECT_EQ(table.out, solved.out);
}

TEST(Cli, WritesOutputAndSvg) {
  const auto dir = std::filesystem::temp_directory_path() / "fermipair_cli_test";
  std::filesystem::create_directories(dir);
  const auto csv = (dir / "curves.csv").string(), svg = (dir / "curves.svg").string();
  const auto r = invoke({"curves", "--samples", "51", "-o", csv, "--svg", svg});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(r.out.empty());
  std::ifstream in(svg);
  std::string first;
  std::getline(in, first);
  EXPECT_NE(first.find("<svg"), std::string::npos);
  EXPECT_GT(std::filesystem::file_size(csv), 100u);
  std::filesystem::remove_all(dir);
}
