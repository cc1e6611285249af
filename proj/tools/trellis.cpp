#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <memory>

#include "trellis/scenario.hpp"

using namespace trellis;

namespace {

void write_report(const std::string& path, const json& j) {
  if (path.empty()) {
    std::cout << j.dump(2) << '\n';
    return;
  }
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write report " + path);
  out << j.dump(2) << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"trellis: coupled protocol simulation and model exploration"};
  app.require_subcommand(1);

  // run
  auto* run = app.add_subcommand("run", "run a scenario over one or more seeds");
  std::string config_path, scenario, policy, trace_out, report_out, checks;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> seeds, horizon;
  std::optional<double> drop_p;
  std::optional<int> rms, acceptors, proposers, replicas, incrs;
  std::optional<std::int64_t> k;
  run->add_option("--config", config_path, "JSON scenario file; flags override it");
  run->add_option("--scenario", scenario, "incr | tpc | paxos | gcounter | yesno");
  run->add_option("--seed", seed, "first seed");
  run->add_option("--seeds", seeds, "number of consecutive seeds");
  run->add_option("--horizon", horizon, "step bound per run");
  run->add_option("--drop-p", drop_p, "message drop probability");
  run->add_option("--policy", policy, "fair | random | adversarial");
  run->add_option("--trace-out", trace_out, "JSONL trace file");
  run->add_option("--report-out", report_out, "JSON report file (default: stdout)");
  run->add_option("--check", checks, "comma-separated subset of the scenario's checks");
  run->add_option("--rms", rms, "tpc: resource managers");
  run->add_option("--acceptors", acceptors, "paxos: acceptors");
  run->add_option("--proposers", proposers, "paxos: proposers");
  run->add_option("--replicas", replicas, "gcounter: replicas");
  run->add_option("--incrs", incrs, "gcounter: increments per replica");
  run->add_option("--k", k, "yesno: rounds per thread");

  // explore
  auto* explore = app.add_subcommand("explore", "exhaustive exploration of a model");
  ExploreConfig ec;
  explore->add_option("--model", ec.model, "tc | sdpl | fyn")->required();
  explore->add_option("--rms", ec.rms, "tc: resource managers");
  explore->add_option("--acceptors", ec.acceptors, "sdpl: acceptors");
  explore->add_option("--proposers", ec.proposers, "sdpl: proposers");
  explore->add_option("--values", ec.values, "sdpl: value alphabet size");
  explore->add_option("--ctr-max", ec.ctr_max, "sdpl: per-proposer counter bound");
  explore->add_flag("!--no-symmetry", ec.symmetry, "sdpl: explore without symmetry reduction");
  explore->add_option("--m-max", ec.m_max, "fyn: largest m enumerated");
  explore->add_flag("--criterion", ec.criterion, "fyn: check the fair-termination criterion");
  explore->add_option("--max-states", ec.max_states, "state budget");
  explore->add_flag("--bug", ec.bug, "planted-bug variant of the model");
  explore->add_option("--report-out", ec.report_out, "JSON report file (default: stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (*run) {
      ScenarioConfig c;
      if (!config_path.empty()) c = load_scenario(config_path);
      if (!scenario.empty()) c.scenario = scenario;
      if (seed) c.seed = *seed;
      if (seeds) {
        c.seeds = *seeds;
        c.seed_list.clear();
      }
      if (horizon) c.horizon = *horizon;
      if (drop_p) c.drop_p = *drop_p;
      if (!policy.empty()) c.policy = policy;
      if (!trace_out.empty()) c.trace_out = trace_out;
      if (!report_out.empty()) c.report_out = report_out;
      if (!checks.empty()) c.checks = parse_scenario(json{{"checks", checks}}).checks;
      if (rms) c.rms = *rms;
      if (acceptors) c.acceptors = *acceptors;
      if (proposers) c.proposers = *proposers;
      if (replicas) c.replicas = *replicas;
      if (incrs) c.incrs = *incrs;
      if (k) c.k = *k;
      validate(c);

      std::unique_ptr<std::ofstream> trace;
      if (!c.trace_out.empty()) {
        trace = std::make_unique<std::ofstream>(c.trace_out);
        if (!*trace) throw ConfigError("cannot write trace " + c.trace_out);
      }
      auto rep = run_scenario(c, trace.get());
      write_report(c.report_out, rep.to_json());
      for (auto& [check, counts] : rep.tally()) {
        std::cerr << check << ":";
        for (auto& [v, n] : counts) std::cerr << " " << v << "=" << n;
        std::cerr << '\n';
      }
      return rep.failed() ? 1 : 0;
    }
    auto rep = run_explore(ec);
    write_report(ec.report_out, rep.body);
    return rep.pass ? 0 : 1;
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
}
