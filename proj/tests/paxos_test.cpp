#include <gtest/gtest.h>

#include "trellis/protocols/paxos.hpp"

using namespace trellis;
using namespace trellis::paxos;

namespace {

CoupledRun<sdp::SdplState> go(const PaxosConfig& c, std::uint64_t seed, double drop,
                              MatcherOptions mo = {}) {
  Scheduler s(SchedulerPolicy::fair(8, 32, drop), seed);
  return run_coupled(setup(c), sdp::sdpl_init(c.sdp()), coupling(c, mo), relation(c), s, 10000);
}

}  // namespace

TEST(Paxos, LosslessRunsDecide) {
  PaxosConfig c;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    auto r = go(c, seed, 0.0);
    ASSERT_TRUE(r.ok()) << seed << " " << r.violation->diagnostic;
    EXPECT_TRUE(learners_agree(r.exec));
    EXPECT_TRUE(chosen_wire_consistent(c, r.exec));
    EXPECT_TRUE(sdp::consistent(c.sdp(), r.model.last().sdp));
    EXPECT_EQ(learned(r.exec).size(), 2u) << seed;
  }
}

TEST(Paxos, LossyRunsStaySafe) {
  PaxosConfig c;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    auto r = go(c, seed, 0.1);
    ASSERT_TRUE(r.ok()) << seed << " " << r.violation->diagnostic;
    EXPECT_TRUE(learners_agree(r.exec));
    EXPECT_TRUE(sdp::consistent(c.sdp(), r.model.last().sdp));
  }
}

TEST(Paxos, ModelBallotsComeFromCounters) {
  PaxosConfig c;
  auto r = go(c, 4, 0.1);
  ASSERT_TRUE(r.ok());
  EXPECT_TRUE(sdp::ctr_coherent(c.sdp(), r.model.last()));
}

TEST(Paxos, Suppressed2bIsCaught) {
  PaxosConfig c;
  MatcherOptions mo;
  mo.suppress_first = sdp::MsgType::P2b;
  auto r = go(c, 0, 0.0, mo);
  ASSERT_FALSE(r.ok());
  EXPECT_EQ(r.violation->kind, RefinementViolation::Kind::RelationFailed);
}

TEST(Paxos, Addresses) {
  EXPECT_EQ(proposer_ip(1), "p1");
  EXPECT_EQ(acceptor_ip(2), "a2");
  EXPECT_EQ(learner_ip(0), "l0");
  EXPECT_EQ(PaxosConfig{}.sdp().quorum_size(), 2);
}
