#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

namespace trellis {

using json = nlohmann::json;

/// Bad configuration or usage; maps to exit code 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ScenarioConfig {
  std::string scenario;  // incr | tpc | paxos | gcounter | yesno
  std::string policy = "fair";
  std::size_t W = 8;
  std::size_t D = 32;
  double drop_p = 0.0;
  std::vector<std::pair<std::string, std::string>> starve;  // adversarial only
  std::optional<std::size_t> horizon;                       // per-scenario default
  std::uint64_t seed = 0;                                   // first seed
  std::size_t seeds = 1;
  std::vector<std::uint64_t> seed_list;  // overrides seed/seeds when set
  std::vector<std::string> checks;       // empty: all of the scenario's checks

  // tpc
  int rms = 3;
  std::vector<std::optional<bool>> coins;
  // paxos
  int proposers = 2;
  int acceptors = 3;
  int learners = 2;
  std::vector<std::string> values{"x", "y"};
  int max_ballots = 3;
  // gcounter
  int replicas = 3;
  int incrs = 5;
  std::size_t fair_window = 4096;
  std::size_t del_window = 4096;
  // yesno
  std::int64_t k = 5;
  std::size_t f_init = 30;
  std::size_t fuel_limit = 30;

  std::string trace_out;
  std::string report_out;
  std::size_t snapshot_every = 0;

  std::vector<std::uint64_t> seed_values() const;
  std::size_t horizon_or_default() const;
};

/// Rejects unknown keys and ill-typed values.
ScenarioConfig parse_scenario(const json& j, ScenarioConfig base = {});
ScenarioConfig load_scenario(const std::string& path);
/// Throws ConfigError when a knob is out of range or a check is unknown.
void validate(const ScenarioConfig& c);
std::vector<std::string> scenario_checks(const std::string& scenario);

enum class Verdict { Pass, Fail, Inconclusive };
const char* to_string(Verdict v);

struct CheckResult {
  Verdict verdict = Verdict::Pass;
  std::string detail;
};

struct SeedResult {
  std::uint64_t seed = 0;
  std::size_t steps = 0;
  std::map<std::string, CheckResult> checks;
  std::optional<json> violation;
  json extra = json::object();
};

struct ScenarioReport {
  ScenarioConfig config;
  std::vector<SeedResult> seeds;
  double seconds = 0;

  bool failed() const;
  /// check -> verdict -> count
  std::map<std::string, std::map<std::string, std::size_t>> tally() const;
  json to_json() const;
};

/// Runs one seed. Appends the execution trace as JSONL when `trace` is set.
SeedResult run_seed(const ScenarioConfig& c, std::uint64_t seed, std::ostream* trace = nullptr);
ScenarioReport run_scenario(const ScenarioConfig& c, std::ostream* trace = nullptr);

struct ExploreConfig {
  std::string model;  // tc | sdpl | fyn
  int rms = 3;
  bool bug = false;  // planted bug variant (tc: no CanCommit, sdpl: ballot ahead)
  int acceptors = 3;
  int proposers = 2;
  int values = 2;
  int ctr_max = 1;
  bool symmetry = true;
  std::int64_t m_max = 10;
  bool criterion = false;
  std::size_t max_states = 1'000'000;
  std::string report_out;
};

struct ExploreReport {
  bool pass = false;
  json body;
};

ExploreReport run_explore(const ExploreConfig& c);

}  // namespace trellis
