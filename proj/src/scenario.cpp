#include "trellis/scenario.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <functional>
#include <sstream>

#include "trellis/explorer.hpp"
#include "trellis/protocols/gcounter.hpp"
#include "trellis/protocols/incr.hpp"
#include "trellis/protocols/paxos.hpp"
#include "trellis/protocols/sdp.hpp"
#include "trellis/protocols/tpc.hpp"
#include "trellis/protocols/yesno.hpp"
#include "trellis/refinement.hpp"
#include "trellis/scheduler.hpp"

namespace trellis {

// ---- config ------------------------------------------------------------------

std::vector<std::uint64_t> ScenarioConfig::seed_values() const {
  if (!seed_list.empty()) return seed_list;
  std::vector<std::uint64_t> out;
  for (std::size_t i = 0; i < seeds; ++i) out.push_back(seed + i);
  return out;
}

std::size_t ScenarioConfig::horizon_or_default() const {
  if (horizon) return *horizon;
  if (scenario == "incr") return 200;
  if (scenario == "gcounter") return 50000;
  return 10000;
}

namespace {

template <class T>
T as(const json& v, const std::string& key) {
  try {
    return v.get<T>();
  } catch (const json::exception&) {
    throw ConfigError("config key '" + key + "' has the wrong type");
  }
}

std::vector<std::string> split_list(const json& v, const std::string& key) {
  if (v.is_string()) {
    std::vector<std::string> out;
    std::stringstream ss(v.get<std::string>());
    std::string item;
    while (std::getline(ss, item, ','))
      if (!item.empty()) out.push_back(item);
    return out;
  }
  return as<std::vector<std::string>>(v, key);
}

}  // namespace

ScenarioConfig parse_scenario(const json& j, ScenarioConfig c) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  using Setter = std::function<void(const json&)>;
  const std::map<std::string, Setter> keys = {
      {"scenario", [&](const json& v) { c.scenario = as<std::string>(v, "scenario"); }},
      {"policy", [&](const json& v) { c.policy = as<std::string>(v, "policy"); }},
      {"W", [&](const json& v) { c.W = as<std::size_t>(v, "W"); }},
      {"D", [&](const json& v) { c.D = as<std::size_t>(v, "D"); }},
      {"drop_p", [&](const json& v) { c.drop_p = as<double>(v, "drop_p"); }},
      {"starve",
       [&](const json& v) {
         c.starve = as<std::vector<std::pair<std::string, std::string>>>(v, "starve");
       }},
      {"horizon", [&](const json& v) { c.horizon = as<std::size_t>(v, "horizon"); }},
      {"seed", [&](const json& v) { c.seed = as<std::uint64_t>(v, "seed"); }},
      {"seeds",
       [&](const json& v) {
         if (v.is_array())
           c.seed_list = as<std::vector<std::uint64_t>>(v, "seeds");
         else
           c.seeds = as<std::size_t>(v, "seeds");
       }},
      {"checks", [&](const json& v) { c.checks = split_list(v, "checks"); }},
      {"rms", [&](const json& v) { c.rms = as<int>(v, "rms"); }},
      {"coins",
       [&](const json& v) {
         if (!v.is_array()) throw ConfigError("config key 'coins' must be an array");
         c.coins.clear();
         for (auto& x : v) {
           if (x.is_null())
             c.coins.push_back(std::nullopt);
           else
             c.coins.push_back(as<bool>(x, "coins"));
         }
       }},
      {"proposers", [&](const json& v) { c.proposers = as<int>(v, "proposers"); }},
      {"acceptors", [&](const json& v) { c.acceptors = as<int>(v, "acceptors"); }},
      {"learners", [&](const json& v) { c.learners = as<int>(v, "learners"); }},
      {"values", [&](const json& v) { c.values = as<std::vector<std::string>>(v, "values"); }},
      {"max_ballots", [&](const json& v) { c.max_ballots = as<int>(v, "max_ballots"); }},
      {"replicas", [&](const json& v) { c.replicas = as<int>(v, "replicas"); }},
      {"incrs", [&](const json& v) { c.incrs = as<int>(v, "incrs"); }},
      {"fair_window", [&](const json& v) { c.fair_window = as<std::size_t>(v, "fair_window"); }},
      {"del_window", [&](const json& v) { c.del_window = as<std::size_t>(v, "del_window"); }},
      {"k", [&](const json& v) { c.k = as<std::int64_t>(v, "k"); }},
      {"f_init", [&](const json& v) { c.f_init = as<std::size_t>(v, "f_init"); }},
      {"fuel_limit", [&](const json& v) { c.fuel_limit = as<std::size_t>(v, "fuel_limit"); }},
      {"trace_out", [&](const json& v) { c.trace_out = as<std::string>(v, "trace_out"); }},
      {"report_out", [&](const json& v) { c.report_out = as<std::string>(v, "report_out"); }},
      {"snapshot_every",
       [&](const json& v) { c.snapshot_every = as<std::size_t>(v, "snapshot_every"); }},
  };
  for (auto& [k, v] : j.items()) {
    auto it = keys.find(k);
    if (it == keys.end()) throw ConfigError("unknown config key '" + k + "'");
    it->second(v);
  }
  return c;
}

ScenarioConfig load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError("cannot parse config " + path + ": " + e.what());
  }
  return parse_scenario(j);
}

std::vector<std::string> scenario_checks(const std::string& s) {
  if (s == "incr") return {"refinement"};
  if (s == "tpc") return {"refinement", "agreement", "outcome"};
  if (s == "paxos") return {"refinement", "agreement", "assertions"};
  if (s == "gcounter") return {"refinement", "convergence", "net_fair_del", "model_fair"};
  if (s == "yesno") return {"refinement", "termination", "fuel", "destutter"};
  return {};
}

void validate(const ScenarioConfig& c) {
  auto all = scenario_checks(c.scenario);
  if (all.empty()) throw ConfigError("unknown scenario '" + c.scenario + "'");
  for (auto& ch : c.checks)
    if (std::find(all.begin(), all.end(), ch) == all.end())
      throw ConfigError("check '" + ch + "' does not apply to scenario " + c.scenario);
  try {
    parse_policy_kind(c.policy);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  if (c.W == 0 || c.D == 0) throw ConfigError("W and D must be positive");
  if (c.drop_p < 0.0 || c.drop_p > 1.0) throw ConfigError("drop_p must lie in [0, 1]");
  if (c.seed_values().empty()) throw ConfigError("no seeds to run");
  if (c.horizon && *c.horizon == 0) throw ConfigError("horizon must be positive");
  if (c.rms < 1 || c.rms > 16) throw ConfigError("rms must lie in [1, 16]");
  if (!c.coins.empty() && static_cast<int>(c.coins.size()) != c.rms)
    throw ConfigError("coins must have one entry per RM");
  if (c.proposers < 1 || c.acceptors < 1 || c.learners < 1)
    throw ConfigError("paxos roles need at least one node each");
  if (c.values.empty()) throw ConfigError("value alphabet is empty");
  for (auto& v : c.values)
    if (v.empty() || v.find(':') != std::string::npos || v.find(',') != std::string::npos)
      throw ConfigError("values must be non-empty and free of ':' and ','");
  if (c.max_ballots < 1) throw ConfigError("max_ballots must be positive");
  if (c.replicas < 1) throw ConfigError("replicas must be positive");
  if (c.incrs < 0) throw ConfigError("incrs must be non-negative");
  if (c.k < 1) throw ConfigError("k must be at least 1");
  if (c.f_init > c.fuel_limit) throw ConfigError("f_init may not exceed fuel_limit");
}

// ---- verdicts ----------------------------------------------------------------

const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::Pass: return "pass";
    case Verdict::Fail: return "fail";
    case Verdict::Inconclusive: return "inconclusive";
  }
  return "?";
}

bool ScenarioReport::failed() const {
  for (auto& s : seeds)
    for (auto& [name, r] : s.checks)
      if (r.verdict == Verdict::Fail) return true;
  return false;
}

std::map<std::string, std::map<std::string, std::size_t>> ScenarioReport::tally() const {
  std::map<std::string, std::map<std::string, std::size_t>> t;
  for (auto& s : seeds)
    for (auto& [name, r] : s.checks) ++t[name][to_string(r.verdict)];
  return t;
}

json ScenarioReport::to_json() const {
  json seeds_j = json::array();
  for (auto& s : seeds) {
    json checks = json::object();
    for (auto& [name, r] : s.checks) {
      json cj = {{"verdict", to_string(r.verdict)}};
      if (!r.detail.empty()) cj["detail"] = r.detail;
      checks[name] = cj;
    }
    json sj = {{"seed", s.seed}, {"steps", s.steps}, {"checks", checks}, {"extra", s.extra}};
    if (s.violation) sj["violation"] = *s.violation;
    seeds_j.push_back(sj);
  }
  return {{"schema", 1},
          {"kind", "run"},
          {"scenario", config.scenario},
          {"policy", config.policy},
          {"drop_p", config.drop_p},
          {"horizon", config.horizon_or_default()},
          {"verdict", failed() ? "fail" : "pass"},
          {"tally", tally()},
          {"seconds", seconds},
          {"seeds", seeds_j}};
}

// ---- per-scenario runs ---------------------------------------------------------

namespace {

SchedulerPolicy policy_of(const ScenarioConfig& c) {
  switch (parse_policy_kind(c.policy)) {
    case SchedulerPolicy::Kind::Random: return SchedulerPolicy::random(c.drop_p);
    case SchedulerPolicy::Kind::Fair: return SchedulerPolicy::fair(c.W, c.D, c.drop_p);
    case SchedulerPolicy::Kind::Adversarial: {
      auto p = SchedulerPolicy::adversarial(c.W, c.D, c.starve);
      p.drop_p = c.drop_p;
      return p;
    }
  }
  return SchedulerPolicy::fair(c.W, c.D, c.drop_p);
}

RunOptions run_options(const ScenarioConfig& c) {
  RunOptions o;
  // background threads never halt; runs go to the horizon
  o.stop_when_quiescent = c.scenario != "gcounter";
  return o;
}

void note_waits(SeedResult& r, const Scheduler& s) {
  r.extra["max_thread_wait"] = s.max_thread_wait();
  r.extra["max_msg_wait"] = s.max_msg_wait();
}

template <class MS>
void note_run(SeedResult& r, const CoupledRun<MS>& run) {
  r.steps = run.steps;
  r.checks["refinement"] = {Verdict::Pass, ""};
  if (run.violation) {
    r.checks["refinement"] = {Verdict::Fail, to_string(run.violation->kind)};
    r.violation = json::parse(violation_json(*run.violation));
  }
  r.extra["halted"] = run.halted;
  r.extra["max_candidates"] = run.max_candidates;
}

void write_trace(std::ostream* os, const ScenarioConfig& c, std::uint64_t seed,
                 const ExecTrace& ex) {
  if (!os) return;
  *os << json{{"scenario", c.scenario}, {"seed", seed}, {"steps", ex.length() - 1}}.dump()
      << '\n';
  write_exec_jsonl(*os, ex, TraceExportOptions{c.snapshot_every});
}

SeedResult run_incr(const ScenarioConfig& c, std::uint64_t seed, std::ostream* os) {
  SeedResult r;
  Scheduler sched(policy_of(c), seed);
  auto run = run_coupled<std::int64_t>(incr::setup(), 0, incr::coupling(), incr::xi, sched,
                                       c.horizon_or_default(), run_options(c));
  note_run(r, run);
  r.extra["counter"] = run.model.last();
  note_waits(r, sched);
  write_trace(os, c, seed, run.exec);
  return r;
}

SeedResult run_tpc(const ScenarioConfig& c, std::uint64_t seed, std::ostream* os) {
  SeedResult r;
  tpc::TpcConfig tc;
  tc.rms = c.rms;
  tc.coins = c.coins;
  Scheduler sched(policy_of(c), seed);
  RunOptions o = run_options(c);
  std::optional<std::size_t> wire_bad;
  o.on_step = [&](const ExecTrace& ex) {
    if (!wire_bad && !tpc::wire_agreement(ex, tc.rms)) wire_bad = ex.length() - 1;
  };
  auto run = run_coupled(tpc::setup(tc, seed), tpc::TcState(tc.rms, tpc::Rm::Working),
                         tpc::coupling(tc), tpc::relation(tc.rms), sched,
                         c.horizon_or_default(), o);
  note_run(r, run);

  std::optional<std::size_t> model_bad;
  for (std::size_t i = 0; i < run.model.length() && !model_bad; ++i)
    if (!tpc::tc_agreement(run.model[i])) model_bad = i;
  if (wire_bad || model_bad)
    r.checks["agreement"] = {Verdict::Fail, wire_bad ? "wire disagreement at " +
                                                           std::to_string(*wire_bad)
                                                     : "model disagreement at " +
                                                           std::to_string(*model_bad)};
  else
    r.checks["agreement"] = {Verdict::Pass, ""};

  auto coins = tpc::coins(tc, seed);
  const bool all_yes = std::all_of(coins.begin(), coins.end(), [](bool b) { return b; });
  const std::string expect = all_yes ? "COMMITTED" : "ABORTED";
  const ThreadSlot* tm = run.exec.last().conf->thread(0);
  if (!tm->halted) {
    r.checks["outcome"] = {Verdict::Inconclusive, "transaction manager still running"};
  } else {
    auto got = std::get<std::string>(tm->result);
    r.extra["tm_result"] = got;
    r.checks["outcome"] = got == expect ? CheckResult{Verdict::Pass, ""}
                                        : CheckResult{Verdict::Fail, "expected " + expect +
                                                                         ", got " + got};
  }
  r.extra["coins"] = coins;
  note_waits(r, sched);
  write_trace(os, c, seed, run.exec);
  return r;
}

SeedResult run_paxos(const ScenarioConfig& c, std::uint64_t seed, std::ostream* os) {
  SeedResult r;
  paxos::PaxosConfig pc;
  pc.proposers = c.proposers;
  pc.acceptors = c.acceptors;
  pc.learners = c.learners;
  pc.alphabet = c.values;
  pc.max_ballots = c.max_ballots;
  Scheduler sched(policy_of(c), seed);
  auto run = run_coupled(paxos::setup(pc), sdp::sdpl_init(pc.sdp()), paxos::coupling(pc),
                         paxos::relation(pc), sched, c.horizon_or_default(), run_options(c));
  note_run(r, run);
  const bool agree = paxos::learners_agree(run.exec);
  const bool wire = paxos::chosen_wire_consistent(pc, run.exec);
  r.checks["agreement"] = agree && wire ? CheckResult{Verdict::Pass, ""}
                                        : CheckResult{Verdict::Fail, agree ? "two values chosen on the wire"
                                                                           : "learners disagree"};
  const bool assert_failed =
      run.violation && run.violation->kind == RefinementViolation::Kind::AssertionFailed;
  r.checks["assertions"] = assert_failed ? CheckResult{Verdict::Fail, run.violation->diagnostic}
                                         : CheckResult{Verdict::Pass, ""};
  json learned = json::array();
  for (auto& [b, v] : paxos::learned(run.exec)) learned.push_back({b, v});
  r.extra["learned"] = learned;
  note_waits(r, sched);
  write_trace(os, c, seed, run.exec);
  return r;
}

Verdict from_gc(gc::Verdict v) {
  switch (v) {
    case gc::Verdict::Pass: return Verdict::Pass;
    case gc::Verdict::Fail: return Verdict::Fail;
    case gc::Verdict::Inconclusive: return Verdict::Inconclusive;
  }
  return Verdict::Fail;
}

SeedResult run_gcounter(const ScenarioConfig& c, std::uint64_t seed, std::ostream* os) {
  SeedResult r;
  gc::GcConfig gcc;
  gcc.replicas = c.replicas;
  gcc.incrs = c.incrs;
  Scheduler sched(policy_of(c), seed);
  auto run = run_coupled(gc::setup(gcc), gc::gc_init(gcc.replicas), gc::coupling(gcc),
                         gc::main_relation(gcc), sched, c.horizon_or_default(), run_options(c));
  note_run(r, run);
  auto rep = gc::check(gcc, run.exec, run.model, {c.fair_window, c.del_window});
  const gc::Vec want(gcc.replicas, gcc.incrs);
  if (!rep.clients_done)
    r.checks["convergence"] = {Verdict::Inconclusive, "clients still incrementing"};
  else if (rep.stab && rep.conv_at && rep.heap_converged && rep.stable == want)
    r.checks["convergence"] = {Verdict::Pass, ""};
  else
    r.checks["convergence"] = {Verdict::Fail, "rows did not converge to the stable vector"};
  r.checks["net_fair_del"] = {from_gc(rep.net_fair_del.verdict), rep.net_fair_del.detail};
  r.checks["model_fair"] = {from_gc(rep.model_fair.verdict), rep.model_fair.detail};
  r.extra["stability"] = rep.stability;
  r.extra["converged_at"] = rep.conv_at ? json(*rep.conv_at) : json(nullptr);
  r.extra["worst_delivery_delay"] = rep.net_fair_del.worst;
  r.extra["worst_merge_delay"] = rep.model_fair.worst;
  note_waits(r, sched);
  write_trace(os, c, seed, run.exec);
  return r;
}

SeedResult run_yesno(const ScenarioConfig& c, std::uint64_t seed, std::ostream* os) {
  SeedResult r;
  yesno::YnConfig yc{c.k, c.f_init, c.fuel_limit};
  auto yr = yesno::run(yc, policy_of(c), seed, c.horizon_or_default());
  note_run(r, yr.run);
  r.checks["termination"] = yr.terminated ? CheckResult{Verdict::Pass, ""}
                                          : CheckResult{Verdict::Fail, "threads still running"};
  r.checks["fuel"] = yr.fuel_underflows == 0
                         ? CheckResult{Verdict::Pass, ""}
                         : CheckResult{Verdict::Fail, std::to_string(yr.fuel_underflows) +
                                                          " fuel underflow(s)"};
  r.checks["destutter"] = yr.live_valid && yr.f_valid
                              ? CheckResult{Verdict::Pass, ""}
                              : CheckResult{Verdict::Fail, "model trace is not valid"};
  r.extra["min_fuel"] = yr.min_fuel;
  r.extra["final_state"] = yesno::show(yr.final_state);
  write_trace(os, c, seed, yr.run.exec);
  return r;
}

}  // namespace

SeedResult run_seed(const ScenarioConfig& c, std::uint64_t seed, std::ostream* trace) {
  SeedResult r;
  if (c.scenario == "incr") r = run_incr(c, seed, trace);
  else if (c.scenario == "tpc") r = run_tpc(c, seed, trace);
  else if (c.scenario == "paxos") r = run_paxos(c, seed, trace);
  else if (c.scenario == "gcounter") r = run_gcounter(c, seed, trace);
  else if (c.scenario == "yesno") r = run_yesno(c, seed, trace);
  else throw ConfigError("unknown scenario '" + c.scenario + "'");
  r.seed = seed;
  if (!c.checks.empty())
    for (auto it = r.checks.begin(); it != r.checks.end();) {
      if (std::find(c.checks.begin(), c.checks.end(), it->first) == c.checks.end())
        it = r.checks.erase(it);
      else
        ++it;
    }
  return r;
}

ScenarioReport run_scenario(const ScenarioConfig& c, std::ostream* trace) {
  validate(c);
  ScenarioReport rep;
  rep.config = c;
  auto t0 = std::chrono::steady_clock::now();
  for (auto seed : c.seed_values()) rep.seeds.push_back(run_seed(c, seed, trace));
  rep.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return rep;
}

// ---- exploration -------------------------------------------------------------

namespace {

template <class S>
json witness_json(const std::optional<std::vector<S>>& w,
                  const std::function<std::string(const S&)>& show) {
  if (!w) return nullptr;
  json out = json::array();
  for (auto& s : *w) out.push_back(show(s));
  return out;
}

ExploreReport explore_tc(const ExploreConfig& c) {
  tpc::TcConfig tc{c.rms, c.bug};
  auto sts = tpc::tc_model(tc);
  ExploreBudget budget;
  budget.max_states = c.max_states;
  auto res = bfs<tpc::TcState, tpc::TcHash>(sts, tpc::tc_agreement, budget);
  auto dfs = dfs_reachable<tpc::TcState, tpc::TcHash>(sts, c.max_states);
  const bool cross = !res.violated() && dfs.size() == res.reachable;
  ExploreReport r;
  r.pass = res.complete && !res.violated() && cross;
  r.body = {{"model", "tc"},
            {"rms", c.rms},
            {"complete", res.complete},
            {"reachable", res.reachable},
            {"dfs_reachable", dfs.size()},
            {"transitions", res.transitions},
            {"depth", res.depth},
            {"witness", witness_json<tpc::TcState>(
                            res.witness, [](const tpc::TcState& s) { return tpc::show(s); })}};
  return r;
}

ExploreReport explore_sdpl(const ExploreConfig& c) {
  sdp::SdpConfig sc;
  sc.acceptors = c.acceptors;
  sc.proposers = c.proposers;
  sc.values = c.values;
  sc.ctr_max = static_cast<std::uint32_t>(c.ctr_max);
  sc.bug_ballot_ahead = c.bug;
  auto sts = sdp::sdpl_model(sc);
  StateCodec<sdp::SdplState, std::string> codec{
      sdp::sdpl_key, [sc](const std::string& k) { return sdp::sdpl_from_key(sc, k); }};
  ExploreOptions<sdp::SdplState> o;
  o.skip_self_loops = true;
  if (c.symmetry) {
    o.keep_keys = true;
    o.canon = [sc](const sdp::SdplState& s) { return sdp::sdpl_canonical(sc, s); };
  }
  ExploreBudget budget;
  budget.max_states = c.max_states;
  auto res = bfs_keyed<sdp::SdplState, std::string>(
      sts, codec, [sc](const sdp::SdplState& s) { return sdp::consistent(sc, s.sdp); }, budget,
      o);
  ExploreReport r;
  r.pass = res.complete && !res.violated();
  r.body = {{"model", "sdpl"},
            {"acceptors", c.acceptors},
            {"proposers", c.proposers},
            {"values", c.values},
            {"ctr_max", c.ctr_max},
            {"symmetry", c.symmetry},
            {"complete", res.complete},
            {"reachable", res.reachable},
            {"transitions", res.transitions},
            {"depth", res.depth},
            {"witness", witness_json<sdp::SdplState>(
                            res.witness, [](const sdp::SdplState& s) { return sdp::show(s); })}};
  if (c.symmetry) {
    std::size_t orbit_sum = 0;
    for (auto& k : res.keys) orbit_sum += sdp::sdpl_orbit_size(sc, sdp::sdpl_from_key(sc, k));
    r.body["unreduced_reachable"] = orbit_sum;
  }
  return r;
}

ExploreReport explore_fyn(const ExploreConfig& c) {
  auto f = yesno::fyn_model(c.m_max);
  auto states = yesno::fyn_states(c.m_max);
  auto shape = check_fairness_model(f, states);
  ExploreReport r;
  r.pass = !shape;
  r.body = {{"model", "fyn"}, {"m_max", c.m_max}, {"states", states.size()},
            {"well_formed", shape ? json(*shape) : json(true)}};
  if (c.criterion) {
    auto v = yesno::check_criterion(c.m_max);
    r.pass = r.pass && v.pass();
    r.body["criterion"] = v.describe();
  }
  return r;
}

}  // namespace

ExploreReport run_explore(const ExploreConfig& c) {
  auto t0 = std::chrono::steady_clock::now();
  ExploreReport r;
  if (c.model == "tc") {
    if (c.rms < 1 || c.rms > 16) throw ConfigError("rms must lie in [1, 16]");
    r = explore_tc(c);
  } else if (c.model == "sdpl") {
    if (c.acceptors < 1 || c.acceptors > 6 || c.values < 1 || c.values > 4 || c.proposers < 1 ||
        c.ctr_max < 0)
      throw ConfigError("sdpl supports 1-6 acceptors, 1-4 values, ctr_max >= 0");
    r = explore_sdpl(c);
  } else if (c.model == "fyn") {
    if (c.m_max < 0) throw ConfigError("m_max must be non-negative");
    r = explore_fyn(c);
  } else {
    throw ConfigError("unknown model '" + c.model + "'");
  }
  r.body["schema"] = 1;
  r.body["kind"] = "explore";
  r.body["verdict"] = r.pass ? "pass" : "fail";
  r.body["seconds"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return r;
}

}  // namespace trellis
