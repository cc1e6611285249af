#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "trellis/model.hpp"

namespace trellis::sdp {

using Ballot = std::int64_t;
using Val = std::int32_t;  // index into the value alphabet

enum class MsgType : std::uint8_t { P1a = 0, P1b = 1, P2a = 2, P2b = 3 };

struct Vote {
  Ballot bal;
  Val val;
  bool operator==(const Vote&) const = default;
};

struct SdpMsg {
  MsgType type = MsgType::P1a;
  std::int32_t acc = 0;
  Ballot bal = 0;
  std::optional<Vote> vote;  // 1b: previous vote; 2a/2b: the proposal (bal, val)
  Val val = 0;               // 2a/2b value

  std::uint64_t pack() const;
  static SdpMsg unpack(std::uint64_t k);
  bool operator==(const SdpMsg&) const = default;

  static SdpMsg one_a(Ballot b) { return {MsgType::P1a, 0, b, std::nullopt, 0}; }
  static SdpMsg one_b(std::int32_t a, Ballot b, std::optional<Vote> mv) {
    return {MsgType::P1b, a, b, mv, 0};
  }
  static SdpMsg two_a(Ballot b, Val v) { return {MsgType::P2a, 0, b, std::nullopt, v}; }
  static SdpMsg two_b(std::int32_t a, Ballot b, Val v) { return {MsgType::P2b, a, b, std::nullopt, v}; }
};

std::string show(const SdpMsg& m);

struct SdpConfig {
  int acceptors = 3;
  int proposers = 2;
  int values = 2;
  int quorum = 0;  // 0: majority
  std::optional<std::uint32_t> ctr_max;  // bound for exploration only
  /// Planted bug: 1a/2a are issued one counter step ahead of ctr.
  bool bug_ballot_ahead = false;

  int quorum_size() const { return quorum > 0 ? quorum : acceptors / 2 + 1; }
};

/// msgs is a sorted set of packed messages; maxBal/maxVal are per acceptor
/// with -1 standing for None.
struct SdpState {
  std::vector<std::uint64_t> msgs;
  std::vector<Ballot> max_bal;
  std::vector<Vote> max_val;

  bool has(const SdpMsg& m) const;
  bool operator==(const SdpState&) const = default;
};

struct SdplState {
  std::vector<std::uint32_t> ctr;
  SdpState sdp;
  bool operator==(const SdplState&) const = default;
};

struct SdpHash {
  std::size_t operator()(const SdpState& s) const;
};
struct SdplHash {
  std::size_t operator()(const SdplState& s) const;
};

constexpr Vote kNoVote{-1, -1};

SdpState sdp_init(const SdpConfig& c);
SdplState sdpl_init(const SdpConfig& c);

Ballot ballot(std::uint64_t k, int p, int nprops);

// predicates over msgs; Q is an acceptor bitmask
std::vector<SdpMsg> q1bv(const SdpState& s, std::uint32_t Q, Ballot b);
bool have_promised(const SdpState& s, std::uint32_t Q, Ballot b);
bool is_max_vote(const SdpState& s, std::uint32_t Q, Ballot b, Val v);
bool shows_safe_at(const SdpState& s, std::uint32_t Q, Ballot b, Val v);
std::vector<std::uint32_t> quorums(const SdpConfig& c);
bool safe_for_some_quorum(const SdpConfig& c, const SdpState& s, Ballot b, Val v);
bool chosen(const SdpConfig& c, const SdpState& s, Val v);
/// No two distinct values chosen.
bool consistent(const SdpConfig& c, const SdpState& s);
/// Every 1a/2a ballot is k|P|+p with k <= ctr(p).
bool ctr_coherent(const SdpConfig& c, const SdplState& s);

/// Applies the rule that adds m, if its premises hold.
std::optional<SdpState> sdp_add(const SdpConfig& c, const SdpState& s, const SdpMsg& m);
/// Single SDP transition check (any ballot).
bool sdp_step_valid(const SdpConfig& c, const SdpState& a, const SdpState& b);

std::vector<SdplState> sdpl_successors(const SdpConfig& c, const SdplState& s);
SdplState sdpl_inc(const SdplState& s, int p);
/// SDPL successor adding exactly m (no counter change), if any.
std::optional<SdplState> sdpl_add(const SdpConfig& c, const SdplState& s, const SdpMsg& m);

Sts<SdplState> sdpl_model(const SdpConfig& c);

// ---- exploration keys ---------------------------------------------------------
// Key: one byte per proposer counter, then 4 bytes per message. maxBal and
// maxVal are recomputed from the 1b/2b messages on decode.
std::string sdpl_key(const SdplState& s);
SdplState sdpl_from_key(const SdpConfig& c, const std::string& k);
/// Rebuilds maxBal/maxVal from msgs.
void recompute_acceptors(const SdpConfig& c, SdpState& s);
/// Representative of s under acceptor and value renaming (least key).
SdplState sdpl_canonical(const SdpConfig& c, const SdplState& s);
/// Number of distinct states reachable from s by such renamings.
std::size_t sdpl_orbit_size(const SdpConfig& c, const SdplState& s);
std::string show(const SdpState& s);
std::string show(const SdplState& s);

// wire format; values are indices into `alphabet`
std::string serialize(const SdpMsg& m, const std::vector<std::string>& alphabet);
std::optional<SdpMsg> deserialize(const std::string& body, const std::vector<std::string>& alphabet);

/// Keeps the accumulator on equal ballots.
std::optional<Vote> find_max_promise(const std::vector<std::optional<Vote>>& promises);

}  // namespace trellis::sdp
