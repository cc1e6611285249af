#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "trellis/protocols/sdp.hpp"
#include "trellis/refinement.hpp"

namespace trellis::paxos {

struct PaxosConfig {
  int proposers = 2;
  int acceptors = 3;
  int learners = 2;
  std::vector<std::string> alphabet{"x", "y"};
  /// Ballots a proposer tries before giving up.
  int max_ballots = 3;
  /// Non-blocking receive attempts per ballot before retrying.
  int poll_budget = 60;
  std::uint16_t port = 80;

  sdp::SdpConfig sdp() const;
};

inline std::string proposer_ip(int p) { return "p" + std::to_string(p); }
inline std::string acceptor_ip(int a) { return "a" + std::to_string(a); }
inline std::string learner_ip(int l) { return "l" + std::to_string(l); }
inline constexpr const char* kClientIp = "c0";

/// Proposer p proposes alphabet[p % |alphabet|].
ConfPtr setup(const PaxosConfig& c);

struct MatcherOptions {
  /// Fault injection: the first send of this type leaves the model unchanged.
  std::optional<sdp::MsgType> suppress_first;
};

Coupling<sdp::SdplState> coupling(const PaxosConfig& c, MatcherOptions o = {});

/// Messages of the model equal the parsed wire messages sent so far.
/// Incremental: keep one instance per run.
TraceRel<sdp::SdplState> relation(const PaxosConfig& c);

/// (ballot, value) reported by each learner to the client so far.
std::vector<std::pair<std::string, std::string>> learned(const ExecTrace& ex);
/// All learner reports carry the same value.
bool learners_agree(const ExecTrace& ex);

/// No two values chosen by the sent 2b messages.
bool chosen_wire_consistent(const PaxosConfig& c, const ExecTrace& ex);

}  // namespace trellis::paxos
