#include <gtest/gtest.h>

#include "trellis/protocols/yesno.hpp"

using namespace trellis;
using namespace trellis::yesno;

TEST(YesNo, FairRunsTerminate) {
  YnConfig c;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    auto r = run(c, SchedulerPolicy::fair(8, 32, 0.0), seed);
    ASSERT_TRUE(r.run.ok()) << seed << " " << r.run.violation->diagnostic;
    EXPECT_TRUE(r.terminated);
    EXPECT_EQ(r.fuel_underflows, 0u);
    EXPECT_TRUE(r.live_valid);
    EXPECT_TRUE(r.f_valid);
    EXPECT_EQ(r.final_state, (FynState{0, 1, 0, 0}));
    EXPECT_GT(r.min_fuel, 0u);
  }
}

TEST(YesNo, RoleStepsMatchSuccessfulCas) {
  YnConfig c;
  c.k = 3;
  auto r = run(c, SchedulerPolicy::fair(4, 32, 0.0), 11);
  ASSERT_TRUE(r.run.ok());
  // k No-successes, k Yes-successes, plus the shutdown steps
  std::size_t no_dec = 0;
  auto d = destutter(r.run.model);
  for (std::size_t i = 1; i < d.length(); ++i)
    if (d[i].s.m < d[i - 1].s.m) ++no_dec;
  EXPECT_EQ(no_dec, 3u);
}

TEST(YesNo, TinyFuelUnderflows) {
  YnConfig c;
  c.f_init = 2;
  c.fuel_limit = 2;
  auto r = run(c, SchedulerPolicy::fair(8, 32, 0.0), 0);
  EXPECT_GT(r.fuel_underflows, 0u);
  EXPECT_FALSE(r.run.ok());
}

TEST(YesNo, StartsAtInit) {
  YnConfig c;
  auto p = live_start(c);
  EXPECT_EQ(p.ls.under, (FynState{5, 0, 1, 1}));
  EXPECT_EQ(p.ls.fuels.at(Role::Yes), 30u);
  EXPECT_EQ(p.ls.mapping.at(Role::No), 0u);
}
