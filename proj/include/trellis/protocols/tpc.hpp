#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "trellis/model.hpp"
#include "trellis/refinement.hpp"

namespace trellis::tpc {

enum class Rm : std::uint8_t { Working, Prepared, Committed, Aborted };
const char* to_string(Rm r);

using TcState = std::vector<Rm>;

struct TcHash {
  std::size_t operator()(const TcState& s) const;
};

struct TcConfig {
  int rms = 3;
  /// Planted bug: TC-Commit without the CanCommit premise.
  bool bug_no_cancommit = false;
};

bool can_commit(const TcState& s);
bool not_committed(const TcState& s);
std::optional<TcState> tc_prepare(const TcState& s, int r);
std::optional<TcState> tc_commit(const TcState& s, int r, bool check_can_commit = true);
std::optional<TcState> tc_abort(const TcState& s, int r);
std::vector<TcState> tc_successors(const TcConfig& c, const TcState& s);
Sts<TcState> tc_model(const TcConfig& c);
bool tc_agreement(const TcState& s);
std::string show(const TcState& s);

// ---- implementation --------------------------------------------------------

struct TpcConfig {
  int rms = 3;
  /// Coin outcome per RM (true: prepare). Unset entries are drawn from the seed.
  std::vector<std::optional<bool>> coins;
  std::uint16_t port = 80;
};

inline std::string rm_ip(int r) { return "rm" + std::to_string(r); }
inline constexpr const char* kTmIp = "tm";

/// tm plus one node per RM; the TM is thread 0, RM r is thread r+1.
ConfPtr setup(const TpcConfig& c, std::uint64_t seed);
/// Coin outcomes after applying overrides.
std::vector<bool> coins(const TpcConfig& c, std::uint64_t seed);

struct MatcherOptions {
  /// Fault injection: never offer TC-Commit.
  bool forbid_commit = false;
};
Coupling<TcState> coupling(const TpcConfig& c, MatcherOptions o = {});

/// Status of each RM implied by its sends to the TM, or nullopt if an RM
/// sent both COMMITTED and ABORTED.
std::optional<TcState> wire_state(const ExecTrace& ex, int rms);
/// No COMMITTED and ABORTED sent by two RMs.
bool wire_agreement(const ExecTrace& ex, int rms);

/// Model state equals the wire-implied state, plus model and wire agreement.
/// Incremental: keep one instance per run.
TraceRel<TcState> relation(int rms);

}  // namespace trellis::tpc
