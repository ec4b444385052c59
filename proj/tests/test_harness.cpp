#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <vector>

#include "json.hpp"
#include "nlkg/errors.hpp"
#include "nlkg/evolution.hpp"
#include "nlkg/harness.hpp"

using namespace nlkg;
namespace fs = std::filesystem;

namespace {

struct CliResult {
  int code = 0;
  std::string out;
  std::string err;
};

CliResult cli(std::vector<std::string> args) {
  args.insert(args.begin(), "nlkg");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  CliResult r;
  r.code = run_command(static_cast<int>(argv.size()), argv.data(), out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

std::string read_file(const fs::path& p) {
  std::ifstream f(p);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

int count_lines(const std::string& s) {
  int n = 0;
  for (char c : s) n += c == '\n';
  return n;
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() / ("nlkg_cli_" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()) +
                                        "_" + ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::remove_all(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  fs::path dir_;
};

}  // namespace

TEST(Series, HeaderOnlyAndOneRowPerFrame) {
  Trajectory empty;
  EXPECT_EQ(series_csv(empty), std::string(kSeriesHeader) + "\n");

  auto g = make_grid(5, 64, 8.0);
  EvolveConfig c;
  c.frame_stride = 5;
  c.stop_on_fate = false;
  const auto tr = evolve(State::zero(g), 10 * c.dt_cfl * g->dr(), c);
  ASSERT_EQ(tr.frames.size(), 3u);
  const auto csv = series_csv(tr);
  EXPECT_EQ(count_lines(csv), 4);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), kSeriesHeader);
  // no modulation samples: the frame columns are nan
  EXPECT_NE(csv.find("nan"), std::string::npos);
}

TEST(Manifest, JsonFields) {
  RunManifest m;
  m.command = "constants";
  m.config_hash = "0123456789abcdef";
  m.outputs = {"constants.json"};
  const auto j = nlohmann::json::parse(manifest_json(m));
  EXPECT_EQ(j["tool_version"], kToolVersion);
  EXPECT_EQ(j["command"], "constants");
  EXPECT_EQ(j["outputs"][0], "constants.json");
  EXPECT_TRUE(j.contains("golden"));
}

TEST(OutputDir, EnvironmentRoot) {
  RunConfig c;
  c.output_dir = "runs/a";
  ::unsetenv(kOutputRootEnv);
  EXPECT_EQ(resolve_output_dir(c), fs::path("runs/a"));
  ::setenv(kOutputRootEnv, "/tmp/root", 1);
  EXPECT_EQ(resolve_output_dir(c), fs::path("/tmp/root/runs/a"));
  c.output_dir = "/abs/dir";
  EXPECT_EQ(resolve_output_dir(c), fs::path("/abs/dir"));
  ::unsetenv(kOutputRootEnv);
}

TEST(Golden, TableCoversEachDimension) {
  const auto gv = golden_values();
  ASSERT_EQ(gv.size(), 3u);
  for (std::size_t i = 0; i < gv.size(); ++i) {
    EXPECT_EQ(gv[i].dim, static_cast<int>(i) + 3);
    EXPECT_GT(gv[i].k, 0.0);
  }
}

TEST(Selftest, AllChecksPass) {
  for (const auto& c : run_selftest()) EXPECT_TRUE(c.passed) << c.name << ": " << c.detail;
}

TEST_F(Cli, UsageErrorsExitTwo) {
  for (auto args : std::vector<std::vector<std::string>>{{}, {"frobnicate"}, {"constants", "--dim", "x"}}) {
    const auto r = cli(args);
    EXPECT_EQ(r.code, 2);
    const auto first = r.err.substr(0, r.err.find('\n'));
    EXPECT_EQ(nlohmann::json::parse(first)["error"], "UsageError");
  }
  EXPECT_EQ(cli({"--version"}).code, 0);
}

TEST_F(Cli, RuntimeErrorsExitOneWithJson) {
  const auto r = cli({"constants", "--dim", "7", "--out", dir_.string()});
  EXPECT_EQ(r.code, 1);
  const auto j = nlohmann::json::parse(r.err.substr(0, r.err.find('\n')));
  EXPECT_EQ(j["error"], "ValidationError");
  EXPECT_NE(j["message"].get<std::string>().find("dim"), std::string::npos);

  const auto missing = cli({"constants", "--config", "/nonexistent.cfg"});
  EXPECT_EQ(missing.code, 1);
  EXPECT_EQ(nlohmann::json::parse(missing.err.substr(0, missing.err.find('\n')))["error"], "IoError");

  const auto bad_set = cli({"constants", "--set", "nope=1", "--out", dir_.string()});
  EXPECT_EQ(bad_set.code, 1);
  EXPECT_EQ(nlohmann::json::parse(bad_set.err.substr(0, bad_set.err.find('\n')))["error"], "ParseError");
}

TEST_F(Cli, ConstantsWritesManifest) {
  const auto r = cli({"constants", "--dim", "5", "--n", "512", "--r-max", "40", "--out", dir_.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_GT(j["k"].get<double>(), 0.0);
  const auto m = nlohmann::json::parse(read_file(dir_ / "manifest.json"));
  EXPECT_EQ(m["command"], "constants");
  EXPECT_EQ(m["config_hash"].get<std::string>().size(), 16u);
  EXPECT_TRUE(fs::exists(dir_ / "config.txt"));
  EXPECT_EQ(m["golden"]["k"], j["k"]);
}

TEST_F(Cli, EvolveIsDeterministic) {
  std::vector<std::string> args = {"evolve", "--dim", "5", "--n", "256", "--r-max", "20", "--data",
                                   "gaussian:0.2,2", "--t-final", "1", "--set", "frame_stride=20"};
  auto a = args, b = args;
  a.insert(a.end(), {"--out", (dir_ / "a").string()});
  b.insert(b.end(), {"--out", (dir_ / "b").string()});
  const auto ra = cli(a);
  const auto rb = cli(b);
  ASSERT_EQ(ra.code, 0) << ra.err;
  ASSERT_EQ(rb.code, 0) << rb.err;
  const auto sa = read_file(dir_ / "a" / "series.csv");
  EXPECT_EQ(sa, read_file(dir_ / "b" / "series.csv"));
  EXPECT_GT(count_lines(sa), 2);
  EXPECT_EQ(ra.out, rb.out);
  EXPECT_EQ(read_file(dir_ / "a" / "fate.json"), read_file(dir_ / "b" / "fate.json"));
}

TEST_F(Cli, DecomposeReadsStateFile) {
  fs::create_directories(dir_);
  const auto path = dir_ / "state.txt";
  {
    std::ofstream f(path);
    for (int i = 0; i < 256; ++i) f << "0 0\n";
  }
  const auto r = cli({"decompose", "--dim", "5", "--n", "256", "--r-max", "20", "--state", path.string(), "--out",
                      (dir_ / "o").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_FALSE(nlohmann::json::parse(r.out)["decomposed"].get<bool>());

  const auto wrong = cli({"decompose", "--dim", "5", "--n", "128", "--r-max", "20", "--state", path.string(),
                          "--out", (dir_ / "o").string()});
  EXPECT_EQ(wrong.code, 1);
  EXPECT_EQ(nlohmann::json::parse(wrong.err.substr(0, wrong.err.find('\n')))["error"], "ShapeMismatch");

  // --data and --state are exclusive
  EXPECT_EQ(cli({"decompose", "--data", "zero", "--state", path.string()}).code, 2);
}

TEST_F(Cli, SelftestCommand) {
  const auto r = cli({"selftest"});
  EXPECT_EQ(r.code, 0) << r.out;
  EXPECT_EQ(r.out.find("FAIL"), std::string::npos);
}
