#include <gtest/gtest.h>

#include "trellis/protocols/sdp.hpp"

using namespace trellis::sdp;

namespace {

const std::vector<std::string> kAlpha{"x", "y"};

SdpState add(const SdpConfig& c, const SdpState& s, const SdpMsg& m) {
  auto t = sdp_add(c, s, m);
  EXPECT_TRUE(t.has_value()) << show(m);
  return t ? *t : s;
}

}  // namespace

TEST(SdpWire, Examples) {
  EXPECT_EQ(serialize(SdpMsg::one_a(4), kAlpha), "1a:4");
  EXPECT_EQ(serialize(SdpMsg::one_b(2, 5, std::nullopt), kAlpha), "1b:2:5:none");
  EXPECT_EQ(serialize(SdpMsg::one_b(0, 5, Vote{3, 1}), kAlpha), "1b:0:5:3,y");
  EXPECT_EQ(serialize(SdpMsg::two_a(7, 0), kAlpha), "2a:7:x");
  EXPECT_EQ(serialize(SdpMsg::two_b(1, 7, 1), kAlpha), "2b:1:7:y");
}

TEST(SdpWire, RoundTrip) {
  std::vector<SdpMsg> all{SdpMsg::one_a(0),         SdpMsg::one_a(123),
                          SdpMsg::one_b(2, 9, {}),  SdpMsg::one_b(1, 9, Vote{8, 0}),
                          SdpMsg::two_a(3, 1),      SdpMsg::two_b(0, 3, 1)};
  for (auto& m : all) {
    auto back = deserialize(serialize(m, kAlpha), kAlpha);
    ASSERT_TRUE(back) << show(m);
    EXPECT_EQ(*back, m);
  }
}

TEST(SdpWire, RejectsMalformed) {
  for (std::string bad : {"", "1a", "1a:", "1a:x", "1a:1:2", "1b:0:1", "1b:0:1:3", "1b:0:1:3,z",
                          "2a:1:z", "2a:1", "2b:0:1", "3a:1", "2b:a:1:x", "COMMITTED"})
    EXPECT_FALSE(deserialize(bad, kAlpha).has_value()) << bad;
}

TEST(Sdp, BallotsInterleaveProposers) {
  EXPECT_EQ(ballot(0, 0, 2), 0);
  EXPECT_EQ(ballot(0, 1, 2), 1);
  EXPECT_EQ(ballot(3, 1, 2), 7);
  EXPECT_EQ(ballot(2, 2, 3), 8);
  EXPECT_THROW(ballot(0, 2, 2), std::invalid_argument);
}

TEST(Sdp, FindMaxPromise) {
  EXPECT_EQ(find_max_promise({}), std::nullopt);
  EXPECT_EQ(find_max_promise({std::nullopt, std::nullopt}), std::nullopt);
  EXPECT_EQ(find_max_promise({std::nullopt, Vote{2, 1}, std::nullopt}), (Vote{2, 1}));
  EXPECT_EQ(find_max_promise({Vote{1, 0}, Vote{3, 1}, Vote{2, 0}}), (Vote{3, 1}));
  // equal ballots keep the first one seen
  EXPECT_EQ(find_max_promise({Vote{3, 0}, Vote{3, 1}}), (Vote{3, 0}));
}

TEST(Sdp, MajorityQuorums) {
  SdpConfig c;
  EXPECT_EQ(c.quorum_size(), 2);
  EXPECT_EQ(quorums(c), (std::vector<std::uint32_t>{3, 5, 6, 7}));
  c.acceptors = 4;
  EXPECT_EQ(c.quorum_size(), 3);
  EXPECT_EQ(quorums(c).size(), 5u);
  c.quorum = 4;
  EXPECT_EQ(quorums(c), (std::vector<std::uint32_t>{15}));
}

TEST(Sdp, PackRoundTrip) {
  for (auto& m : {SdpMsg::one_a(5), SdpMsg::one_b(2, 9, {}), SdpMsg::one_b(1, 9, Vote{8, 1}),
                  SdpMsg::two_a(3, 1), SdpMsg::two_b(2, 6, 0)})
    EXPECT_EQ(SdpMsg::unpack(m.pack()), m);
}

TEST(Sdp, TwoRoundsKeepTheChosenValue) {
  SdpConfig c;
  SdpState s = sdp_init(c);
  EXPECT_FALSE(sdp_add(c, s, SdpMsg::one_b(0, 0, {})));  // no 1a yet
  s = add(c, s, SdpMsg::one_a(0));
  EXPECT_FALSE(sdp_add(c, s, SdpMsg::two_a(0, 0)));  // no promises
  s = add(c, s, SdpMsg::one_b(0, 0, {}));
  EXPECT_FALSE(sdp_add(c, s, SdpMsg::two_a(0, 0)));  // one promise is not a quorum
  s = add(c, s, SdpMsg::one_b(1, 0, {}));
  EXPECT_FALSE(sdp_add(c, s, SdpMsg::one_b(1, 0, {})));  // ballot not above maxBal
  s = add(c, s, SdpMsg::two_a(0, 0));
  EXPECT_FALSE(sdp_add(c, s, SdpMsg::two_a(0, 1)));  // one proposal per ballot
  s = add(c, s, SdpMsg::two_b(0, 0, 0));
  EXPECT_FALSE(chosen(c, s, 0));
  s = add(c, s, SdpMsg::two_b(1, 0, 0));
  EXPECT_TRUE(chosen(c, s, 0));
  EXPECT_EQ(s.max_val[1], (Vote{0, 0}));

  s = add(c, s, SdpMsg::one_a(1));
  EXPECT_FALSE(sdp_add(c, s, SdpMsg::one_b(0, 1, {})));  // must report its vote
  s = add(c, s, SdpMsg::one_b(0, 1, Vote{0, 0}));
  s = add(c, s, SdpMsg::one_b(2, 1, {}));
  EXPECT_FALSE(sdp_add(c, s, SdpMsg::two_a(1, 1)));
  s = add(c, s, SdpMsg::two_a(1, 0));
  EXPECT_FALSE(sdp_add(c, s, SdpMsg::two_b(1, 0, 0)).has_value() &&
               sdp_add(c, s, SdpMsg::two_b(1, 0, 0))->max_bal[1] != 0);
  EXPECT_FALSE(sdp_add(c, s, SdpMsg::two_b(2, 0, 0)));  // acceptor 2 promised ballot 1
  s = add(c, s, SdpMsg::two_b(2, 1, 0));
  EXPECT_TRUE(consistent(c, s));
  EXPECT_FALSE(chosen(c, s, 1));
}

TEST(Sdp, StepValidity) {
  SdpConfig c;
  SdpState a = sdp_init(c);
  SdpState b = add(c, a, SdpMsg::one_a(3));
  EXPECT_TRUE(sdp_step_valid(c, a, b));
  EXPECT_TRUE(sdp_step_valid(c, b, b));
  EXPECT_FALSE(sdp_step_valid(c, b, a));
  SdpState two = add(c, b, SdpMsg::one_a(4));
  EXPECT_FALSE(sdp_step_valid(c, a, two));
}

TEST(Sdpl, BallotsFollowCounters) {
  SdpConfig c;
  c.ctr_max = 1;
  auto s = sdpl_init(c);
  for (auto& t : sdpl_successors(c, s)) {
    EXPECT_TRUE(ctr_coherent(c, t));
    for (auto k : t.sdp.msgs) {
      auto m = SdpMsg::unpack(k);
      if (m.type == MsgType::P1a) EXPECT_LT(m.bal, 2);
    }
  }
  auto inc = sdpl_inc(s, 1);
  EXPECT_EQ(inc.ctr, (std::vector<std::uint32_t>{0, 1}));
  EXPECT_TRUE(sdpl_add(c, inc, SdpMsg::one_a(3)));
  EXPECT_FALSE(sdpl_add(c, s, SdpMsg::one_a(3)));
}

TEST(Sdpl, CanonicalFormIsInvariantUnderRenaming) {
  SdpConfig c;
  c.ctr_max = 1;
  SdplState s = sdpl_init(c);
  s.sdp = add(c, s.sdp, SdpMsg::one_a(0));
  s.sdp = add(c, s.sdp, SdpMsg::one_b(2, 0, {}));
  SdplState r = sdpl_init(c);
  r.sdp = add(c, r.sdp, SdpMsg::one_a(0));
  r.sdp = add(c, r.sdp, SdpMsg::one_b(0, 0, {}));
  EXPECT_EQ(sdpl_canonical(c, s), sdpl_canonical(c, r));
  EXPECT_EQ(sdpl_orbit_size(c, s), 3u);
  EXPECT_EQ(sdpl_orbit_size(c, sdpl_init(c)), 1u);
}
