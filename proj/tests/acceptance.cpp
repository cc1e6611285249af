// One line per acceptance criterion; exit status is the number of failures.
#include <chrono>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "trellis/explorer.hpp"
#include "trellis/protocols/incr.hpp"
#include "trellis/protocols/sdp.hpp"
#include "trellis/protocols/yesno.hpp"
#include "trellis/scenario.hpp"

using namespace trellis;

namespace {

struct Result {
  bool pass;
  std::string detail;
};

/// Every seed passes every listed check.
Result all_pass(const ScenarioReport& rep, const std::vector<std::string>& checks) {
  auto t = rep.tally();
  for (auto& ch : checks) {
    std::size_t n = t[ch]["pass"];
    if (n != rep.seeds.size())
      return {false, ch + ": " + std::to_string(n) + "/" + std::to_string(rep.seeds.size())};
  }
  return {true, std::to_string(rep.seeds.size()) + " seeds"};
}

Result both(Result a, const Result& b) {
  if (!a.pass) return a;
  if (!b.pass) return b;
  return {true, a.detail + "; " + b.detail};
}

Result tc() {
  ExploreConfig c;
  c.model = "tc";
  auto r = run_explore(c);
  const auto& b = r.body;
  bool ok = r.pass && b["complete"] && b["reachable"] == b["dfs_reachable"] &&
            b["reachable"] == 34;
  return {ok, "reachable " + b["reachable"].dump() + ", dfs " + b["dfs_reachable"].dump()};
}

Result sdpl() {
  ExploreConfig c;
  c.model = "sdpl";
  auto r = run_explore(c);
  const auto& b = r.body;
  bool ok = r.pass && b["complete"] && b["reachable"].get<std::size_t>() < c.max_states &&
            b["unreduced_reachable"] == 8594724;
  return {ok, "representatives " + b["reachable"].dump() + ", states " +
                  b["unreduced_reachable"].dump()};
}

Result walks() {
  sdp::SdpConfig c;
  c.ctr_max = 1;
  auto sts = sdp::sdpl_model(c);
  std::function<sdp::SdpState(const sdp::SdplState&)> proj = [](const sdp::SdplState& s) {
    return s.sdp;
  };
  StepOracle<sdp::SdpState> base = [c](const sdp::SdpState& a, const sdp::SdpState& b) {
    return sdp::sdp_step_valid(c, a, b);
  };
  Rng rng(2024);
  for (int w = 0; w < 1000; ++w) {
    auto t = random_walk(sts, 20, rng);
    if (!project_check(t, proj, base)) return {false, "walk " + std::to_string(w)};
  }
  return {true, "1000 walks"};
}

ScenarioConfig scenario(const std::string& name, std::size_t seeds, double drop) {
  ScenarioConfig c;
  c.scenario = name;
  c.seeds = seeds;
  c.drop_p = drop;
  return c;
}

Result tpc() {
  auto a = scenario("tpc", 500, 0.0);
  a.coins = {true, true, true};
  auto b = scenario("tpc", 500, 0.2);
  b.horizon = 10000;
  return both(all_pass(run_scenario(a), {"refinement", "agreement", "outcome"}),
              all_pass(run_scenario(b), {"refinement", "agreement"}));
}

Result paxos() {
  const std::vector<std::string> checks{"refinement", "agreement", "assertions"};
  return both(all_pass(run_scenario(scenario("paxos", 200, 0.0)), checks),
              all_pass(run_scenario(scenario("paxos", 200, 0.1)), checks));
}

Result gcounter() {
  auto c = scenario("gcounter", 100, 0.1);
  auto ok = all_pass(run_scenario(c), {"refinement", "convergence", "net_fair_del", "model_fair"});
  auto adv = scenario("gcounter", 1, 0.0);
  adv.policy = "adversarial";
  adv.starve = {{"r0", "r1"}};
  auto rep = run_scenario(adv);
  bool neg = rep.tally()["net_fair_del"]["fail"] == 1;
  return both(ok, {neg, neg ? "starved route rejected" : "starved route accepted"});
}

Result yn() {
  for (std::int64_t m = 0; m <= 10; ++m) {
    auto v = yesno::check_criterion(m);
    if (!v.pass()) return {false, v.describe()};
  }
  auto c = scenario("yesno", 200, 0.0);
  return all_pass(run_scenario(c), {"refinement", "termination", "fuel", "destutter"});
}

Result incr_run() {
  auto c = scenario("incr", 1, 0.0);
  c.horizon = 200;
  auto rep = run_scenario(c);
  auto r = all_pass(rep, {"refinement"});
  if (r.pass && rep.seeds[0].steps != 200) return {false, "stopped early"};
  return r;
}

Result determinism() {
  for (std::string name : {"incr", "tpc", "paxos", "gcounter", "yesno"}) {
    auto c = scenario(name, 3, name == "incr" || name == "yesno" ? 0.0 : 0.1);
    std::ostringstream a, b;
    run_scenario(c, &a);
    run_scenario(c, &b);
    if (a.str() != b.str() || a.str().empty()) return {false, name};
  }
  return {true, "5 scenarios"};
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    double budget_s;
    Result (*fn)();
  };
  const Criterion all[] = {
      {"1 tc-bfs", 1, tc},          {"2 sdpl-bfs", 60, sdpl},    {"3 sdpl-walks", 5, walks},
      {"4 tpc", 60, tpc},           {"5 paxos", 120, paxos},      {"6 gcounter", 60, gcounter},
      {"7 yesno", 10, yn},          {"8 incr", 1, incr_run},          {"9 determinism", 60, determinism},
  };
  int failures = 0;
  for (auto& c : all) {
    auto t0 = std::chrono::steady_clock::now();
    Result o = c.fn();
    double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool pass = o.pass && s < c.budget_s;
    if (!pass) ++failures;
    std::printf("%s %-16s %7.2fs (limit %gs)  %s\n", pass ? "PASS" : "FAIL", c.name, s, c.budget_s,
                o.detail.c_str());
    std::fflush(stdout);
  }
  return failures;
}
