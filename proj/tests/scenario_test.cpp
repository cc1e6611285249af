#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "trellis/scenario.hpp"

using namespace trellis;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  auto d = fs::temp_directory_path() / "trellis-tests";
  fs::create_directories(d);
  return d / name;
}

int cli(const std::string& args) {
  std::string cmd = std::string(TRELLIS_CLI) + " " + args + " >/dev/null 2>&1";
  int rc = std::system(cmd.c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST(ScenarioConfig, RejectsUnknownKeys) {
  EXPECT_THROW(parse_scenario(json{{"scenario", "tpc"}, {"rmz", 3}}), ConfigError);
  EXPECT_THROW(parse_scenario(json{{"scenario", 3}}), ConfigError);
  auto c = parse_scenario(json{{"scenario", "tpc"}, {"rms", 4}, {"seeds", 7}});
  EXPECT_EQ(c.rms, 4);
  EXPECT_EQ(c.seeds, 7u);
}

TEST(ScenarioConfig, Validation) {
  ScenarioConfig c;
  c.scenario = "tpc";
  EXPECT_NO_THROW(validate(c));
  c.drop_p = 1.5;
  EXPECT_THROW(validate(c), ConfigError);
  c.drop_p = 0;
  c.checks = {"convergence"};
  EXPECT_THROW(validate(c), ConfigError);
  c.checks = {"agreement"};
  EXPECT_NO_THROW(validate(c));
  c.scenario = "bogus";
  EXPECT_THROW(validate(c), ConfigError);
}

TEST(ScenarioConfig, Defaults) {
  ScenarioConfig c;
  c.scenario = "gcounter";
  EXPECT_EQ(c.horizon_or_default(), 50000u);
  c.scenario = "incr";
  EXPECT_EQ(c.horizon_or_default(), 200u);
  c.horizon = 5;
  EXPECT_EQ(c.horizon_or_default(), 5u);
  c.seed = 10;
  c.seeds = 3;
  EXPECT_EQ(c.seed_values(), (std::vector<std::uint64_t>{10, 11, 12}));
  c.seed_list = {4, 2};
  EXPECT_EQ(c.seed_values(), (std::vector<std::uint64_t>{4, 2}));
}

TEST(Scenario, SameSeedSameTrace) {
  for (std::string sc : {"tpc", "paxos", "gcounter", "yesno", "incr"}) {
    ScenarioConfig c;
    c.scenario = sc;
    c.seed = 3;
    c.drop_p = sc == "yesno" || sc == "incr" ? 0.0 : 0.1;
    c.horizon = 3000;
    std::ostringstream a, b;
    run_scenario(c, &a);
    run_scenario(c, &b);
    EXPECT_EQ(a.str(), b.str()) << sc;
    EXPECT_GT(a.str().size(), 100u);
    c.seed = 4;
    std::ostringstream d;
    run_scenario(c, &d);
    EXPECT_NE(a.str(), d.str()) << sc;
  }
}

TEST(Scenario, ReportShape) {
  ScenarioConfig c;
  c.scenario = "tpc";
  c.seeds = 3;
  auto rep = run_scenario(c);
  EXPECT_FALSE(rep.failed());
  auto j = rep.to_json();
  EXPECT_EQ(j["schema"], 1);
  EXPECT_EQ(j["seeds"].size(), 3u);
  EXPECT_EQ(rep.tally()["agreement"]["pass"], 3u);
}

TEST(Cli, ExitCodes) {
  EXPECT_EQ(cli("run --scenario tpc --seeds 3"), 0);
  EXPECT_EQ(cli("run --scenario nope"), 2);
  EXPECT_EQ(cli("run --scenario tpc --drop-p 2"), 2);
  EXPECT_EQ(cli("frobnicate"), 2);
  EXPECT_EQ(cli("explore --model tc"), 0);
  EXPECT_EQ(cli("explore --model tc --bug"), 1);
  EXPECT_EQ(cli("explore --model fyn --criterion"), 0);
  EXPECT_EQ(cli("run --config /nonexistent.json"), 2);
}

TEST(Cli, FlagsOverrideConfig) {
  auto cfg = scratch("tpc.json");
  auto rep = scratch("tpc-report.json");
  std::ofstream(cfg) << R"({"scenario": "tpc", "rms": 2, "seeds": 4})";
  ASSERT_EQ(cli("run --config " + cfg.string() + " --seeds 2 --rms 4 --report-out " + rep.string()), 0);
  auto j = json::parse(slurp(rep));
  EXPECT_EQ(j["seeds"].size(), 2u);
  EXPECT_EQ(j["seeds"][0]["extra"]["coins"].size(), 4u);
}

TEST(Cli, TraceFilesAreDeterministic) {
  auto a = scratch("a.jsonl"), b = scratch("b.jsonl");
  ASSERT_EQ(cli("run --scenario paxos --seed 9 --drop-p 0.1 --trace-out " + a.string()), 0);
  ASSERT_EQ(cli("run --scenario paxos --seed 9 --drop-p 0.1 --trace-out " + b.string()), 0);
  EXPECT_EQ(slurp(a), slurp(b));
  EXPECT_FALSE(slurp(a).empty());
}
