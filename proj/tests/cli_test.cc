#include "app.h"

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "json.hpp"
#include "lanepareto/errors.h"

namespace lanepareto::cli {
namespace {

namespace fs = std::filesystem;

const char kBaseline[] = LANEPARETO_SOURCE_DIR "/scenarios/baseline.json";

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    root_ = fs::temp_directory_path() /
            ("lanepareto_cli_" +
             std::string(::testing::UnitTest::GetInstance()
                             ->current_test_info()
                             ->name()));
    fs::remove_all(root_);
    fs::create_directories(root_);
  }
  void TearDown() override { fs::remove_all(root_); }

  std::string Path(const std::string& name) const {
    return (root_ / name).string();
  }

  // Baseline scenario with `edit` applied, written next to the outputs.
  std::string Scenario(const nlohmann::json& edit) const {
    std::ifstream in(kBaseline);
    nlohmann::json doc = nlohmann::json::parse(in);
    doc.merge_patch(edit);
    const std::string path = Path("scenario.json");
    std::ofstream(path) << doc.dump(2);
    return path;
  }

  OptimizeOptions Small(const std::string& scenario, const std::string& out) {
    OptimizeOptions o;
    o.scenario_path = scenario;
    o.out_dir = Path(out);
    o.seed = 11;
    o.population = 40;
    o.generations = 20;
    return o;
  }

  fs::path root_;
  std::ostringstream out_, err_;
};

std::string Slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

TEST_F(CliTest, InvertedDurationBoundsExitTwo) {
  const std::string path =
      Scenario({{"bounds", {{"t_lc_min", 6.0}, {"t_lc_max", 2.0}}}});
  EXPECT_EQ(CmdOptimize(Small(path, "run"), out_, err_), kConfigError);
  EXPECT_NE(err_.str().find("bounds.t_lc_min"), std::string::npos);
  EXPECT_NE(err_.str().find("bounds.t_lc_max"), std::string::npos);
}

TEST_F(CliTest, MissingScenarioExitTwo) {
  EXPECT_EQ(CmdOptimize(Small(Path("nope.json"), "run"), out_, err_),
            kConfigError);
}

TEST_F(CliTest, OverlappingInsertionExitThree) {
  // Without waiting the lane changer cannot drop back to a later gap, so
  // every plan starts alongside the follower it would cut in front of.
  const std::string path = Scenario(
      {{"lc_initial_gap", 1.0}, {"bounds", {{"t_wait_max", 0.0}}}});
  EXPECT_EQ(CmdOptimize(Small(path, "run"), out_, err_), kNoFeasible);
  EXPECT_NE(err_.str().find("best violation"), std::string::npos);
  const auto manifest =
      nlohmann::json::parse(Slurp(root_ / "run" / "manifest.json"));
  EXPECT_EQ(manifest["status"]["exit_code"], kNoFeasible);
}

TEST_F(CliTest, RunIsReproducibleAndFullyDeclared) {
  const OptimizeOptions a = Small(kBaseline, "a");
  const OptimizeOptions b = Small(kBaseline, "b");
  ASSERT_EQ(CmdOptimize(a, out_, err_), kOk) << err_.str();
  ASSERT_EQ(CmdOptimize(b, out_, err_), kOk) << err_.str();

  const auto manifest = nlohmann::json::parse(Slurp(root_ / "a" / "manifest.json"));
  std::set<std::string> declared(manifest["artifacts"].begin(),
                                 manifest["artifacts"].end());
  declared.insert("manifest.json");
  for (const auto& entry : fs::directory_iterator(root_ / "a")) {
    EXPECT_TRUE(declared.count(entry.path().filename().string()))
        << entry.path();
  }
  for (const std::string name :
       {"front.json", "trace_ideal.csv", "trace_tracked.csv", "costs.json",
        "costs_tracked.json", "edie.json", "region_table.csv", "heatmap.csv",
        "plot.svg"}) {
    ASSERT_TRUE(declared.count(name)) << name;
    EXPECT_EQ(Slurp(root_ / "a" / name), Slurp(root_ / "b" / name)) << name;
  }
}

TEST_F(CliTest, ManifestReproducesRun) {
  ASSERT_EQ(CmdOptimize(Small(kBaseline, "a"), out_, err_), kOk);
  OptimizeOptions again;
  again.scenario_path = Path("a/manifest.json");
  again.out_dir = Path("b");
  ASSERT_EQ(CmdOptimize(again, out_, err_), kOk) << err_.str();
  EXPECT_EQ(Slurp(root_ / "a" / "front.json"), Slurp(root_ / "b" / "front.json"));
  EXPECT_EQ(Slurp(root_ / "a" / "trace_ideal.csv"),
            Slurp(root_ / "b" / "trace_ideal.csv"));
}

TEST_F(CliTest, FrontMarksSelectedAndBaseline) {
  ASSERT_EQ(CmdOptimize(Small(kBaseline, "a"), out_, err_), kOk);
  const auto front = nlohmann::json::parse(Slurp(root_ / "a" / "front.json"));
  int selected = 0, baseline = 0;
  for (const auto& m : front) {
    selected += m.value("selected", false);
    baseline += m.value("baseline", false);
  }
  EXPECT_EQ(selected, 1);
  EXPECT_EQ(baseline, 1);
}

TEST(ParseVaryTest, Grid) {
  const VarySpec v = ParseVary("lc_initial_gap=40:100:20");
  EXPECT_EQ(v.key, "lc_initial_gap");
  EXPECT_EQ(v.values, (std::vector<double>{40, 60, 80, 100}));
  EXPECT_EQ(ParseVary("penetration_ratio=0:1:0.5").values.size(), 3u);
  EXPECT_EQ(ParseVary("lc_initial_speed=20").values,
            (std::vector<double>{20}));
}

TEST(ParseVaryTest, Rejects) {
  EXPECT_THROW(ParseVary("lane_width=3:4:1"), ConfigError);
  EXPECT_THROW(ParseVary("lc_initial_gap"), ConfigError);
  EXPECT_THROW(ParseVary("lc_initial_gap=1:2"), ConfigError);
  EXPECT_THROW(ParseVary("lc_initial_gap=5:1:1"), ConfigError);
  EXPECT_THROW(ParseVary("lc_initial_gap=1:5:0"), ConfigError);
}

TEST_F(CliTest, SweepUnknownKeyExitTwo) {
  SweepOptions s;
  s.scenario_path = kBaseline;
  s.out_dir = Path("sweep");
  s.vary = "sim_step=0.1:0.2:0.1";
  EXPECT_EQ(CmdSweep(s, out_, err_), kConfigError);
}

TEST_F(CliTest, SingleValueSweepMatchesOptimize) {
  ASSERT_EQ(CmdOptimize(Small(kBaseline, "opt"), out_, err_), kOk);
  SweepOptions s;
  s.scenario_path = kBaseline;
  s.out_dir = Path("sweep");
  s.vary = "lc_initial_gap=20";
  s.seed = 11;
  s.population = 40;
  s.generations = 20;
  ASSERT_EQ(CmdSweep(s, out_, err_), kOk) << err_.str();
  const fs::path run = root_ / "sweep" / "lc_initial_gap_20";
  EXPECT_EQ(Slurp(run / "front.json"), Slurp(root_ / "opt" / "front.json"));
  EXPECT_EQ(Slurp(run / "trace_ideal.csv"),
            Slurp(root_ / "opt" / "trace_ideal.csv"));
  const auto doc = nlohmann::json::parse(Slurp(root_ / "sweep" / "sweep.json"));
  EXPECT_EQ(doc["runs"].size(), 1u);
  EXPECT_TRUE(doc["trend"].contains("selected_total_non_increasing"));
}

TEST_F(CliTest, PenetrationSweepWritesRunManifests) {
  SweepOptions s;
  s.scenario_path = kBaseline;
  s.out_dir = Path("sweep");
  s.vary = "penetration_ratio=0:1:0.5";
  s.seed = 3;
  s.population = 40;
  s.generations = 20;
  const int code = CmdSweep(s, out_, err_);
  EXPECT_TRUE(code == kOk || code == kNoFeasible) << err_.str();
  for (const char* sub :
       {"penetration_ratio_0", "penetration_ratio_0.5", "penetration_ratio_1"}) {
    EXPECT_TRUE(fs::exists(root_ / "sweep" / sub / "manifest.json")) << sub;
  }
  const std::string table = Slurp(root_ / "sweep" / "summary.csv");
  EXPECT_EQ(std::count(table.begin(), table.end(), '\n'), 4);
}

TEST(MainTest, UsageErrorsExitTwo) {
  char prog[] = "lanepareto";
  char bogus[] = "frobnicate";
  char* argv1[] = {prog, bogus};
  EXPECT_EQ(Main(2, argv1), kConfigError);
  char optimize[] = "optimize";
  char* argv2[] = {prog, optimize};
  EXPECT_EQ(Main(2, argv2), kConfigError);
}

}  // namespace
}  // namespace lanepareto::cli
