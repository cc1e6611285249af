#include <gtest/gtest.h>

#include "trellis/protocols/incr.hpp"

using namespace trellis;

TEST(Incr, CoupledRunKeepsRelation) {
  Scheduler s(SchedulerPolicy::fair(8, 32, 0.0), 0);
  auto r = run_coupled<std::int64_t>(incr::setup(), 0, incr::coupling(), incr::xi, s, 200);
  ASSERT_TRUE(r.ok()) << r.violation->diagnostic;
  EXPECT_EQ(r.steps, 200u);
  EXPECT_GT(r.model.last(), 0);
  EXPECT_FALSE(check_rel_all_prefixes<std::int64_t>(incr::xi, r.exec, r.model).has_value());
}

TEST(Incr, ModelIsSuccessor) {
  auto m = incr::model();
  EXPECT_EQ(m.init, 0);
  EXPECT_EQ(m.successors(4), std::vector<std::int64_t>{5});
}

TEST(Incr, RelationRejectsSkippedValue) {
  Scheduler s(SchedulerPolicy::fair(8, 32, 0.0), 1);
  auto r = run_coupled<std::int64_t>(incr::setup(), 0, incr::coupling(), incr::xi, s, 50);
  ASSERT_TRUE(r.ok());
  std::vector<std::int64_t> bumped = r.model.to_vector();
  bumped.back() += 1;
  EXPECT_FALSE(incr::xi(r.exec, ModelTrace<std::int64_t>::from(bumped)));
}
