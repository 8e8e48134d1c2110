#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <random>
#include <sstream>
#include <string>
#include <sys/wait.h>

#include <json.hpp>

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("neu_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
    std::mt19937_64 rng(17);
    std::normal_distribution<double> z;
    std::ofstream os(dir_ / "data.csv");
    os << "a,b,y\n" << std::setprecision(17);
    for (int i = 0; i < 50; ++i) {
      const double a = z(rng), b = z(rng);
      os << a << ',' << b << ',' << 0.5 + 1.5 * a - 2.0 * b + 0.1 * z(rng) << '\n';
    }
  }
  void TearDown() override { fs::remove_all(dir_); }

  int run(const std::string& args, const std::string& log = "log.txt") const {
    const std::string cmd = std::string(NEU_CLI_PATH) + " " + args + " > " + (dir_ / log).string() + " 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  }

  std::string read(const fs::path& p) const {
    std::ifstream in(dir_ / p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
  }

  json read_json(const fs::path& p) const { return json::parse(read(p)); }
  std::string data() const { return (dir_ / "data.csv").string(); }
  std::string out(const std::string& name) const { return (dir_ / name).string(); }

  fs::path dir_;
};

std::vector<double> coefficients(const json& fit) {
  std::vector<double> v;
  for (const auto& c : fit.at("coefficients")) v.push_back(c.at("value").get<double>());
  return v;
}

}  // namespace

TEST_F(Cli, EnetWithZeroLambdaMatchesOls) {
  ASSERT_EQ(run("fit ols --data " + data() + " --out " + out("ols")), 0);
  ASSERT_EQ(run("fit enet --lambda 0 --data " + data() + " --out " + out("enet")), 0);
  const auto a = coefficients(read_json("ols/fit.json")), b = coefficients(read_json("enet/fit.json"));
  ASSERT_EQ(a.size(), 3u);
  ASSERT_EQ(b.size(), 3u);
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_NEAR(a[i], b[i], 1e-8);
  EXPECT_NEAR(a[1], 1.5, 0.1);
}

TEST_F(Cli, UrpCheckOnIdenticalPointsReportsZeros) {
  std::ofstream(dir_ / "pts.csv") << "x,y\n0.1,0.2\n0.7,0.3\n0.4,0.9\n";
  const std::string pts = (dir_ / "pts.csv").string();
  ASSERT_EQ(run("urp-check --sources " + pts + " --targets " + pts + " --out " + out("urp")), 0);
  const json rep = read_json("urp/report.json");
  EXPECT_EQ(rep.at("max_endpoint_error").get<double>(), 0.0);
  EXPECT_EQ(rep.at("max_fixed_drift").get<double>(), 0.0);
  EXPECT_TRUE(rep.at("ok").get<bool>());
}

TEST_F(Cli, UsageErrorsExitTwo) {
  EXPECT_EQ(run(""), 2);
  EXPECT_EQ(run("frobnicate"), 2);
  EXPECT_EQ(run("fit"), 2);
  EXPECT_EQ(run("fit ols --data " + data() + " --no-such-flag"), 2);
  EXPECT_EQ(run("fit ols --data " + data() + " --format xml"), 2);
  EXPECT_FALSE(fs::exists(dir_ / "manifest.json"));
}

TEST_F(Cli, FailuresExitOneAndWriteNothing) {
  EXPECT_EQ(run("fit ols --data " + out("missing.csv") + " --out " + out("o1"), "err1.txt"), 1);
  EXPECT_FALSE(fs::exists(dir_ / "o1"));
  EXPECT_NE(read("err1.txt").find("cannot open"), std::string::npos);
  std::ofstream(dir_ / "bad.json") << "{\"lambda\": 1, \"colour\": 2}";
  EXPECT_EQ(run("fit ridge --data " + data() + " --config " + out("bad.json") + " --out " + out("o2")), 1);
  EXPECT_FALSE(fs::exists(dir_ / "o2"));
  EXPECT_EQ(run("fit ols --data " + data() + " --responses 2 --out " + out("o3")), 1);
  EXPECT_FALSE(fs::exists(dir_ / "o3"));
}

TEST_F(Cli, ConfigOverridesFlagsAndIsEchoed) {
  std::ofstream(dir_ / "cfg.json") << "{\"lambda\": 2.5, \"seed\": 9}";
  ASSERT_EQ(run("fit ridge --lambda 0.1 --seed 1 --data " + data() + " --config " + out("cfg.json") + " --out " +
                out("r")),
            0);
  EXPECT_EQ(read_json("r/fit.json").at("lambda").get<double>(), 2.5);
  const json m = read_json("r/manifest.json");
  EXPECT_EQ(m.at("config").at("lambda").get<double>(), 2.5);
  EXPECT_EQ(m.at("seed").get<int>(), 9);
  EXPECT_EQ(m.at("command").get<std::string>(), "fit ridge");
  EXPECT_EQ(m.at("config_hash").get<std::string>().size(), 16u);
}

TEST_F(Cli, HelpListsFlagsWithDefaults) {
  EXPECT_EQ(run("sim-study --help", "help.txt"), 0);
  const std::string h = read("help.txt");
  for (const char* s : {"--target", "[m1]", "--sigma", "[0.1]", "--seed", "--threads", "--format", "--out", "--config"})
    EXPECT_NE(h.find(s), std::string::npos) << s;
}

TEST_F(Cli, JsonTablesAndRepeatedRunsAreIdentical) {
  const std::string args = "fit neu-ols --iters 5 --proposals 20 --refine 10 --seed 4 --format json --data " + data();
  ASSERT_EQ(run(args + " --out " + out("a")), 0);
  ASSERT_EQ(run(args + " --threads 2 --out " + out("b")), 0);
  const json hist = read_json("a/history.json");
  ASSERT_TRUE(hist.is_array());
  EXPECT_EQ(hist.front().at("iteration").get<int>(), 0);
  EXPECT_EQ(read("a/fit.json"), read("b/fit.json"));
  EXPECT_EQ(read("a/history.json"), read("b/history.json"));
}

TEST_F(Cli, DemoRoundTrip) {
  ASSERT_EQ(run("demo reconfigure --points " + data() + " --length 6 --seed 3 --out " + out("d")), 0);
  ASSERT_EQ(run("demo reconfigure --points " + data() + " --chain " + out("d/chain.json") + " --out " + out("e")), 0);
  EXPECT_EQ(read("d/points.csv"), read("e/points.csv"));
  std::istringstream in(read("d/points.csv"));
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "point,start_1,start_2,start_3,end_1,end_2,end_3,error");
  while (std::getline(in, line)) EXPECT_LT(std::stod(line.substr(line.rfind(',') + 1)), 1e-10);
}
