#include <gtest/gtest.h>

#include "trellis/protocols/gcounter.hpp"
#include "trellis/protocols/incr.hpp"
#include "trellis/protocols/tpc.hpp"
#include "trellis/protocols/yesno.hpp"
#include "trellis/scheduler.hpp"

using namespace trellis;

namespace {

std::vector<StepLabel> labels(const SchedulerPolicy& p, std::uint64_t seed, ConfPtr c, int n) {
  Scheduler s(p, seed);
  std::vector<StepLabel> out;
  for (int i = 0; i < n && !all_halted(*c); ++i) {
    auto l = s.choose(*c);
    out.push_back(l);
    c = step(c, l).conf;
  }
  return out;
}

}  // namespace

TEST(Scheduler, SameSeedSameChoices) {
  tpc::TpcConfig tc;
  auto p = SchedulerPolicy::fair(8, 32, 0.2);
  EXPECT_EQ(labels(p, 7, tpc::setup(tc, 7), 400), labels(p, 7, tpc::setup(tc, 7), 400));
  EXPECT_NE(labels(p, 7, tpc::setup(tc, 7), 400), labels(p, 8, tpc::setup(tc, 7), 400));
}

TEST(Scheduler, ThreadWindowHoldsWhenFeasible) {
  // two spinning threads, window 4
  Scheduler s(SchedulerPolicy::fair(4, 32, 0.0), 1);
  ConfPtr c = incr::setup();
  for (int i = 0; i < 2000; ++i) c = step(c, s.choose(*c)).conf;
  EXPECT_LE(s.max_thread_wait(), 4u);
}

TEST(Scheduler, MessageWindowHoldsWhenFeasible) {
  tpc::TpcConfig tc;
  tc.rms = 2;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    Scheduler s(SchedulerPolicy::fair(8, 16, 0.0), seed);
    ConfPtr c = tpc::setup(tc, seed);
    for (int i = 0; i < 500 && !all_halted(*c) && !quiescent(*c); ++i) c = step(c, s.choose(*c)).conf;
    EXPECT_LE(s.max_msg_wait(), 16u + 3u) << seed;  // three threads may be overdue at once
  }
}

TEST(Scheduler, RandomWithoutLossNeverDrops) {
  tpc::TpcConfig tc;
  for (auto& l : labels(SchedulerPolicy::random(0.0), 3, tpc::setup(tc, 3), 3000))
    EXPECT_FALSE(std::holds_alternative<Drop>(l));
}

TEST(Scheduler, RouteDropsAreBounded) {
  // drop_p = 1: every fourth message on a route is forced through
  gc::GcConfig gcc;
  Scheduler s(SchedulerPolicy::fair(8, 32, 1.0), 5);
  ConfPtr c = gc::setup(gcc);
  std::map<std::pair<std::string, std::string>, int> run;
  int worst = 0, delivered = 0;
  for (int i = 0; i < 20000; ++i) {
    auto l = s.choose(*c);
    const Message* m = nullptr;
    if (auto* d = std::get_if<Drop>(&l)) m = c->in_soup(d->id);
    if (auto* d = std::get_if<Deliver>(&l)) m = c->in_soup(d->id);
    if (m && deliverable(*c, *m)) {
      auto key = std::make_pair(m->from.ip, m->to.ip);
      if (std::holds_alternative<Drop>(l)) {
        worst = std::max(worst, ++run[key]);
      } else {
        EXPECT_EQ(run[key], 3);
        run[key] = 0;
        ++delivered;
      }
    }
    c = step(c, l).conf;
  }
  EXPECT_EQ(worst, 3);
  EXPECT_GT(delivered, 0);
}

TEST(Scheduler, AdversaryStarvesItsRoutes) {
  tpc::TpcConfig tc;
  tc.coins = {true, true, true};
  auto p = SchedulerPolicy::adversarial(8, 32, {{"tm", "rm0"}});
  Scheduler s(p, 2);
  ConfPtr c = tpc::setup(tc, 2);
  for (int i = 0; i < 3000 && !quiescent(*c); ++i) {
    auto l = s.choose(*c);
    if (auto* d = std::get_if<Deliver>(&l)) EXPECT_NE(c->in_soup(d->id)->to.ip, "rm0");
    c = step(c, l).conf;
  }
  EXPECT_FALSE(c->thread(1)->halted);  // rm0 never hears from the TM
}

TEST(Scheduler, PolicyNames) {
  EXPECT_EQ(parse_policy_kind("fair"), SchedulerPolicy::Kind::Fair);
  EXPECT_EQ(to_string(SchedulerPolicy::Kind::Adversarial), "adversarial");
  EXPECT_THROW(parse_policy_kind("chaotic"), std::invalid_argument);
}
