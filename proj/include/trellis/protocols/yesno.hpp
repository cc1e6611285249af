#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "trellis/model.hpp"
#include "trellis/refinement.hpp"
#include "trellis/scheduler.hpp"

namespace trellis::yesno {

enum class Role { Yes, No };
const char* to_string(Role r);

struct FynState {
  std::int64_t m = 0;
  int b = 0;
  int ye = 1;
  int ne = 1;
  bool operator==(const FynState&) const = default;
};
std::string show(const FynState& s);

/// The yes/no fairness model with a constant fuel limit.
FairnessModel<FynState, Role> fyn_model(std::int64_t k, std::size_t fuel_limit = 30);

/// Every state with m <= m_max.
std::vector<FynState> fyn_states(std::int64_t m_max);
/// Lexicographic on (m, b), product order with the two shutdown bits.
bool fyn_leq(const FynState& a, const FynState& b);
Rank fyn_rank(const FynState& s);
/// "Yes if b = 1, else No", redirected to the other role once a role has shut down.
Role fyn_progress(const FynState& s);

LftVerdict check_criterion(std::int64_t m_max);

using LivePt = LivePoint<FynState, Role>;

struct YnConfig {
  std::int64_t k = 5;
  std::size_t f_init = 30;
  std::size_t fuel_limit = 30;
};

inline constexpr const char* kNode = "n0";

/// Main thread allocates b, then Yes's and No's counters, forks Yes and
/// continues as No.
ConfPtr setup(const YnConfig& c);
LivePt live_start(const YnConfig& c);

struct MatchStats {
  std::size_t fuel_underflows = 0;
};

/// Candidates are LiveModel steps built with live_witness; the relation
/// picks among them. Silent steps that would take a fuel below zero are
/// counted in `stats`.
Coupling<LivePt> coupling(const YnConfig& c, std::shared_ptr<MatchStats> stats);

/// Program state agrees with the model state at the last point.
TraceRel<LivePt> xi(const YnConfig& c);

struct YnRun {
  CoupledRun<LivePt> run;
  std::size_t fuel_underflows = 0;
  std::size_t min_fuel = 0;  // smallest fuel seen anywhere along the model trace
  bool terminated = false;
  bool live_valid = false;
  bool f_valid = false;
  FynState final_state;
};

YnRun run(const YnConfig& c, const SchedulerPolicy& policy, std::uint64_t seed,
          std::size_t horizon = 10000);

}  // namespace trellis::yesno
