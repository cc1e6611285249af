#include <gtest/gtest.h>

#include "trellis/protocols/gcounter.hpp"

using namespace trellis;
using namespace trellis::gc;

TEST(GcVec, Operations) {
  EXPECT_EQ(vect_inc({0, 2, 1}, 1), (Vec{0, 3, 1}));
  EXPECT_EQ(vect_sum({1, 2, 3}), 6);
  EXPECT_EQ(merge({1, 5, 0}, {2, 3, 0}), (Vec{2, 5, 0}));
  EXPECT_TRUE(leq({1, 2}, {1, 3}));
  EXPECT_FALSE(leq({2, 2}, {1, 3}));
  EXPECT_THROW(merge({1}, {1, 2}), std::invalid_argument);
  EXPECT_THROW(leq({1}, {1, 2}), std::invalid_argument);
}

TEST(GcVec, WireFormat) {
  EXPECT_EQ(ser({3, 0, 12}), "3|3,0,12");
  EXPECT_EQ(deser("3|3,0,12"), (Vec{3, 0, 12}));
  EXPECT_EQ(deser(ser({})), Vec{});
  for (std::string bad : {"", "3", "3|1,2", "2|1,x", "x|1", "2|1,,2", "2|1,-1", "1|1|1"})
    EXPECT_THROW(deser(bad), std::invalid_argument) << bad;
}

TEST(GcModel, Transitions) {
  auto s = gc_incr(gc_init(3), 0);
  EXPECT_EQ(s, (GcState{{1, 0, 0}, {0, 0, 0}, {0, 0, 0}}));
  auto t = gc_apply(s, 2, {1, 0, 0});
  ASSERT_TRUE(t);
  EXPECT_EQ((*t)[2], (Vec{1, 0, 0}));
  EXPECT_FALSE(gc_apply(s, 2, {0, 1, 0}));  // nobody has it
  // 3 incrs, plus one apply per (row, pool vector)
  EXPECT_EQ(gc_successors(s, {{1, 0, 0}}).size(), 3u + 3u);
}

namespace {

CoupledRun<GcState> go(const GcConfig& c, std::uint64_t seed, const SchedulerPolicy& p,
                       MatcherOptions mo = {}) {
  Scheduler s(p, seed);
  RunOptions ro;
  ro.stop_when_quiescent = false;
  return run_coupled(setup(c), gc_init(c.replicas), coupling(c, mo), main_relation(c), s, 50000,
                     ro);
}

}  // namespace

TEST(GcRun, ConvergesUnderLoss) {
  GcConfig c;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    auto r = go(c, seed, SchedulerPolicy::fair(8, 32, 0.1));
    ASSERT_TRUE(r.ok()) << r.violation->diagnostic;
    auto rep = check(c, r.exec, r.model);
    EXPECT_TRUE(rep.clients_done);
    EXPECT_TRUE(rep.stab);
    EXPECT_EQ(rep.stable, (Vec{5, 5, 5}));
    EXPECT_TRUE(rep.conv_at.has_value());
    EXPECT_TRUE(rep.heap_converged);
    EXPECT_EQ(rep.net_fair_del.verdict, Verdict::Pass) << rep.net_fair_del.detail;
    EXPECT_EQ(rep.model_fair.verdict, Verdict::Pass) << rep.model_fair.detail;
  }
}

TEST(GcRun, LastReceiveMayBeAhead) {
  // the heap may lag the newest received vector; the relation only
  // requires it to cover the earlier ones
  GcConfig c;
  auto r = go(c, 0, SchedulerPolicy::fair(8, 32, 0.0));
  ASSERT_TRUE(r.ok());
  bool lagging = false;
  for (int i = 0; i < c.replicas && !lagging; ++i) {
    const std::string ip = replica_ip(i);
    auto allocs = events_of(r.exec, alloc_labeled(std::to_string(i)));
    ASSERT_EQ(allocs.size(), 1u);
    const Loc loc = std::get<AllocEv>(allocs[0]).loc;
    Vec joined(c.replicas, 0);
    for (std::size_t k = 0; k < r.exec.length(); ++k) {
      for (auto& e : r.exec[k].events)
        if (auto* rv = std::get_if<RecvEv>(&e); rv && rv->ip == ip)
          joined = merge(joined, deser(rv->msg->body));
      auto h = heap_row(r.exec[k], ip, loc);
      if (h && !leq(joined, *h)) lagging = true;
    }
  }
  EXPECT_TRUE(lagging);
}

TEST(GcRun, StarvedRouteFailsDelivery) {
  GcConfig c;
  auto r = go(c, 1, SchedulerPolicy::adversarial(8, 32, {{"r0", "r1"}}));
  ASSERT_TRUE(r.ok());
  auto rep = check(c, r.exec, r.model);
  EXPECT_EQ(rep.net_fair_del.verdict, Verdict::Fail);
  EXPECT_TRUE(rep.heap_converged);  // news still travels via r2
}

TEST(GcRun, WrongIncrementIsCaught) {
  GcConfig c;
  MatcherOptions mo;
  mo.diverge_at_incr = 4;
  auto r = go(c, 0, SchedulerPolicy::fair(8, 32, 0.0), mo);
  ASSERT_FALSE(r.ok());
  EXPECT_EQ(r.violation->kind, RefinementViolation::Kind::RelationFailed);
}

TEST(GcWindows, ModelFairDetectsStarvedRow) {
  // row 1 never catches up with row 0
  GcState s = gc_init(2);
  auto m = ModelTrace<GcState>(s);
  s = gc_incr(s, 0);
  for (int i = 0; i < 50; ++i) m = m.extend(s);
  EXPECT_EQ(model_fair(m, 10).verdict, Verdict::Fail);
  EXPECT_NE(model_fair(m, 100).verdict, Verdict::Fail);
  auto t = m.extend(*gc_apply(s, 1, s[0]));
  EXPECT_EQ(model_fair(t, 100).verdict, Verdict::Pass);
}
