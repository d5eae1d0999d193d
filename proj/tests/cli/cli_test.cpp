#include <gtest/gtest.h>
#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>
#include <string>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Outcome {
  int code = -1;
  std::string out;  // stdout and stderr together
};

Outcome bdd(const std::string& args) {
  std::string cmd = std::string(BDD_CLI) + " " + args + " 2>&1";
  Outcome r;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) return r;
  std::array<char, 4096> buf{};
  std::size_t got;
  while ((got = fread(buf.data(), 1, buf.size(), pipe)) > 0) r.out.append(buf.data(), got);
  int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::size_t line_count(const std::string& s) {
  std::istringstream in(s);
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line))
    if (!line.empty()) ++n;
  return n;
}

/// Simulated demo sample shared by the tests in this file.
class Cli : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    dir_ = fs::temp_directory_path() / "bdd_cli_test";
    fs::create_directories(dir_);
    Outcome r = bdd("simulate --dgp-spec " + std::string(BDD_DATA_DIR) + "/spp-style.dgp --n 1500 --out " +
                (dir_ / "demo.csv").string());
    ASSERT_EQ(r.code, 0) << r.out;
  }
  static void TearDownTestSuite() { fs::remove_all(dir_); }

  static std::string data() { return (dir_ / "demo.csv").string(); }
  static std::string boundary() { return (dir_ / "demo.csv.boundary").string(); }
  static std::string inputs() { return "--data " + data() + " --boundary " + boundary(); }

  static fs::path dir_;
};

fs::path Cli::dir_;

}  // namespace

TEST_F(Cli, SimulateWritesDataTruthAndBoundary) {
  EXPECT_TRUE(fs::exists(data()));
  EXPECT_TRUE(fs::exists(boundary()));
  std::ifstream in(data() + ".truth.json");
  auto truth = json::parse(in);
  EXPECT_TRUE(truth.contains("bate"));
  EXPECT_EQ(line_count([&] {
              std::ifstream d(data());
              return std::string(std::istreambuf_iterator<char>(d), {});
            }()),
            1501u);
}

TEST_F(Cli, PooledEstimateJson) {
  Outcome r = bdd("estimate " + inputs() + " --spec 6 --p 1 --q 2 --h mse");
  ASSERT_EQ(r.code, 0) << r.out;
  auto j = json::parse(r.out);
  EXPECT_TRUE(j.contains("tau_hat"));
  EXPECT_TRUE(j.contains("ci_rbc"));
  EXPECT_GT(j["h_used"].get<double>(), 0.0);
  EXPECT_TRUE(j.contains("bandwidth"));
}

TEST_F(Cli, LocationCurveCsvHasOneRowPerGridPoint) {
  Outcome r = bdd("estimate " + inputs() + " --spec location --grid 40 --out csv --draws 500");
  ASSERT_EQ(r.code, 0) << r.out;
  EXPECT_EQ(line_count(r.out), 41u);
  EXPECT_EQ(r.out.substr(0, r.out.find('\n')),
            "arclength,b1,b2,tau_hat,se,ci_lo,ci_hi,band_lo,band_hi");
}

TEST_F(Cli, CurveJsonCarriesTheAggregates) {
  Outcome r = bdd("estimate " + inputs() + " --spec distance --grid 10 --h 0.4 --draws 500");
  ASSERT_EQ(r.code, 0) << r.out;
  auto j = json::parse(r.out);
  EXPECT_EQ(j["method"].get<std::string>(), "distance");
  EXPECT_EQ(j["tau_hat"].size(), 10u);
  ASSERT_TRUE(j.contains("aggregate"));
  EXPECT_TRUE(j["aggregate"].contains("wbate"));
  EXPECT_TRUE(j["aggregate"].contains("lbate"));
}

TEST_F(Cli, SeededOutputIsByteIdentical) {
  std::string args = "estimate " + inputs() + " --spec location --grid 8 --draws 800 --seed 5";
  Outcome a = bdd(args), b = bdd(args);
  ASSERT_EQ(a.code, 0) << a.out;
  EXPECT_EQ(a.out, b.out);
  std::string mc = "mc --dgp-spec " + std::string(BDD_DATA_DIR) +
                   "/spp-style.dgp --reps 4 --spec 6 --h 0.4 --seed 9";
  Outcome c = bdd(mc), d = bdd(mc + " --threads 2");
  ASSERT_EQ(c.code, 0) << c.out;
  EXPECT_EQ(c.out, d.out);
}

TEST_F(Cli, RdPlotAndTubeCheck) {
  Outcome r = bdd("rdplot " + inputs() + " --bins 5");
  ASSERT_EQ(r.code, 0) << r.out;
  EXPECT_EQ(line_count(r.out), 11u);
  Outcome t = bdd("tube-check --boundary " + boundary() + " --box -1 -1 1 1 --h 0.1 0.05");
  ASSERT_EQ(t.code, 0) << t.out;
  EXPECT_EQ(json::parse(t.out).size(), 2u);
}

TEST_F(Cli, NegativeBandwidthIsAnInputError) {
  Outcome r = bdd("estimate " + inputs() + " --spec 6 --h -1");
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.out.find("NonpositiveBandwidth"), std::string::npos);
}

TEST_F(Cli, EmptyWindowIsADegenerateEstimate) {
  Outcome r = bdd("estimate " + inputs() + " --spec 1 --h 1e-9");
  EXPECT_EQ(r.code, 2) << r.out;
  EXPECT_NE(r.out.find("EmptyWindow"), std::string::npos);
}

TEST_F(Cli, BadInputsExitWithOne) {
  EXPECT_EQ(bdd("estimate --data /nonexistent.csv --boundary " + boundary()).code, 1);
  EXPECT_EQ(bdd("estimate " + inputs() + " --spec 11").code, 1);
  EXPECT_EQ(bdd("estimate " + inputs() + " --kernel gaussian").code, 1);
  Outcome r = bdd("estimate --bogus");
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.out.find("--data"), std::string::npos);
}
