#include <gtest/gtest.h>

#include "trellis/protocols/tpc.hpp"

using namespace trellis;
using namespace trellis::tpc;

namespace {

CoupledRun<TcState> go(const TpcConfig& c, std::uint64_t seed, const SchedulerPolicy& p,
                       MatcherOptions mo = {}, RunOptions ro = {}) {
  Scheduler s(p, seed);
  return run_coupled(setup(c, seed), TcState(c.rms, Rm::Working), coupling(c, mo), relation(c.rms),
                     s, 10000, ro);
}

}  // namespace

TEST(Tpc, ForcedCommit) {
  TpcConfig c;
  c.coins = {true, true, true};
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    RunOptions ro;
    bool wire_ok = true;
    ro.on_step = [&](const ExecTrace& ex) { wire_ok &= wire_agreement(ex, 3); };
    auto r = go(c, seed, SchedulerPolicy::fair(8, 32, 0.0), {}, ro);
    ASSERT_TRUE(r.ok()) << r.violation->diagnostic;
    EXPECT_TRUE(r.halted);
    EXPECT_TRUE(wire_ok);
    const Configuration& conf = *r.exec.last().conf;
    EXPECT_EQ(std::get<std::string>(conf.thread(0)->result), "COMMITTED");
    EXPECT_EQ(r.model.last(), TcState(3, Rm::Committed));
  }
}

TEST(Tpc, OneNoVoteAborts) {
  TpcConfig c;
  c.coins = {true, false, true};
  auto r = go(c, 3, SchedulerPolicy::fair(8, 32, 0.0));
  ASSERT_TRUE(r.ok());
  EXPECT_EQ(std::get<std::string>(r.exec.last().conf->thread(0)->result), "ABORTED");
  for (auto x : r.model.last()) EXPECT_NE(x, Rm::Committed);
  EXPECT_EQ(r.model.last()[1], Rm::Aborted);
}

TEST(Tpc, LossyRunsStaySafe) {
  TpcConfig c;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    auto r = go(c, seed, SchedulerPolicy::fair(8, 32, 0.2));
    ASSERT_TRUE(r.ok()) << seed << " " << r.violation->diagnostic;
    EXPECT_TRUE(tc_agreement(r.model.last()));
    EXPECT_TRUE(wire_agreement(r.exec, 3));
  }
}

TEST(Tpc, CoinsFromSeedAreStable) {
  TpcConfig c;
  EXPECT_EQ(coins(c, 17), coins(c, 17));
  c.coins = {false};
  EXPECT_FALSE(coins(c, 17)[0]);
  EXPECT_EQ(coins(c, 17).size(), 3u);
}

TEST(Tpc, ForbiddenCommitIsCaught) {
  TpcConfig c;
  c.coins = {true, true, true};
  auto r = go(c, 1, SchedulerPolicy::fair(8, 32, 0.0), {true});
  ASSERT_FALSE(r.ok());
  EXPECT_EQ(r.violation->kind, RefinementViolation::Kind::NoCandidate);
}

TEST(Tpc, WireStateFollowsReplies) {
  TpcConfig c;
  c.coins = {true, true, true};
  auto r = go(c, 2, SchedulerPolicy::fair(8, 32, 0.0));
  ASSERT_TRUE(r.ok());
  EXPECT_EQ(wire_state(r.exec, 3), r.model.last());
  EXPECT_EQ(wire_state(r.exec.prefix(1), 3), TcState(3, Rm::Working));
}
