#include <gtest/gtest.h>

#include "script.hpp"
#include "trellis/netsem.hpp"

using namespace trellis;
using trellis::testing::run_thread;
using trellis::testing::Script;
using trellis::testing::script_of;

namespace {

ConfPtr one(std::vector<Effect> effects, const std::string& ip = "n0") {
  auto c = std::make_shared<Configuration>();
  c->add_node(ip);
  c->add_thread(ip, std::make_shared<Script>(std::move(effects)));
  return c;
}

}  // namespace

TEST(Netsem, AllocLoadStoreCas) {
  auto c = one({eff::Alloc{"x", std::int64_t{5}}, eff::Alloc{std::nullopt, std::int64_t{0}},
                eff::Load{0}, eff::Store{0, std::int64_t{6}}, eff::Cas{0, std::int64_t{5}, std::int64_t{9}},
                eff::Cas{0, std::int64_t{6}, std::int64_t{7}}});
  auto r = step_thread(c, 0);
  ASSERT_EQ(r.events.size(), 1u);
  EXPECT_EQ(std::get<AllocEv>(r.events[0]).label, "x");
  EXPECT_EQ(std::get<AllocEv>(r.events[0]).loc, 0);
  auto r2 = step_thread(r.conf, 0);
  EXPECT_TRUE(r2.events.empty());  // unlabelled
  c = run_thread(r2.conf, 0, 4);
  auto& out = script_of(*c, 0).outcomes();
  EXPECT_EQ(std::get<std::int64_t>(out[1].value), 1);
  EXPECT_EQ(std::get<std::int64_t>(out[2].value), 5);
  EXPECT_FALSE(out[4].ok);
  EXPECT_TRUE(out[5].ok);
  EXPECT_EQ(std::get<std::int64_t>(c->node("n0").heap.at(0)), 7);
}

TEST(Netsem, StepsDoNotMutateTheirInput) {
  auto c = one({eff::Alloc{"x", std::int64_t{1}}});
  auto c2 = step_thread(c, 0).conf;
  EXPECT_TRUE(c->node("n0").heap.empty());
  EXPECT_EQ(c2->node("n0").heap.size(), 1u);
  EXPECT_EQ(script_of(*c, 0).pc(), 0u);
}

TEST(Netsem, SendDeliverReceive) {
  auto c = std::make_shared<Configuration>();
  c->add_node("a");
  c->add_node("b");
  c->add_thread("a", std::make_shared<Script>(std::vector<Effect>{
                         eff::NewSocket{}, eff::SocketBind{0, {"a", 1}},
                         eff::Send{0, "hi", {"b", 2}}}));
  c->add_thread("b", std::make_shared<Script>(std::vector<Effect>{
                         eff::NewSocket{}, eff::SocketBind{0, {"b", 2}}, eff::Receive{0}}));
  ConfPtr s = run_thread(c, 0, 2);
  auto sent = step_thread(s, 0);
  ASSERT_EQ(sent.conf->soup.size(), 1u);
  const Message& m = *sent.conf->soup[0];
  EXPECT_EQ(std::get<SendEv>(sent.events[0]).msg->id, m.id);
  EXPECT_FALSE(deliverable(*sent.conf, m));  // b has not bound yet
  s = run_thread(sent.conf, 1, 2);
  EXPECT_TRUE(deliverable(*s, m));
  EXPECT_TRUE(conservation_holds(*s));

  // blocking receive on an empty buffer is a self-step
  auto blocked = step_thread(s, 1);
  EXPECT_EQ(blocked.conf, s);
  EXPECT_TRUE(blocked_on_receive(*s, *s->thread(1)));

  s = sys_deliver(s, m.id);
  EXPECT_TRUE(s->soup.empty());
  EXPECT_EQ(buffered_count(*s), 1u);
  auto got = step_thread(s, 1);
  ASSERT_EQ(got.events.size(), 1u);
  EXPECT_EQ(std::get<RecvEv>(got.events[0]).ip, "b");
  EXPECT_EQ(script_of(*got.conf, 1).outcomes().back().msg->body, "hi");
  EXPECT_TRUE(conservation_holds(*got.conf));
  EXPECT_EQ(got.conf->consumed, 1u);
}

TEST(Netsem, NonBlockingReceiveReturnsNothing) {
  auto c = one({eff::NewSocket{}, eff::SocketBind{0, {"n0", 1}},
                eff::SetBlocking{0, false, std::nullopt}, eff::Receive{0}});
  c = run_thread(c, 0, 4);
  EXPECT_EQ(script_of(*c, 0).outcomes().back().msg, nullptr);
}

TEST(Netsem, DropKeepsConservation) {
  auto c = one({eff::NewSocket{}, eff::SocketBind{0, {"n0", 1}}, eff::Send{0, "x", {"n0", 1}}});
  c = run_thread(c, 0, 3);
  auto d = sys_drop(c, c->soup[0]->id);
  EXPECT_EQ(d->dropped, 1u);
  EXPECT_TRUE(conservation_holds(*d));
  EXPECT_THROW(sys_drop(d, 0), StepError);
}

TEST(Netsem, StuckAndAssertionErrors) {
  auto bind_twice = one({eff::NewSocket{}, eff::SocketBind{0, {"n0", 1}}, eff::SocketBind{0, {"n0", 2}}});
  bind_twice = run_thread(bind_twice, 0, 2);
  try {
    step_thread(bind_twice, 0);
    FAIL();
  } catch (const StepError& e) {
    EXPECT_EQ(e.kind, StepError::Kind::Stuck);
  }
  auto foreign = one({eff::NewSocket{}, eff::SocketBind{0, {"elsewhere", 1}}});
  EXPECT_THROW(run_thread(foreign, 0, 2), StepError);
  auto unalloc = one({eff::Load{3}});
  EXPECT_THROW(step_thread(unalloc, 0), StepError);
  auto bad = one({eff::Assert{false, "boom"}});
  try {
    step_thread(bad, 0);
    FAIL();
  } catch (const StepError& e) {
    EXPECT_EQ(e.kind, StepError::Kind::AssertionFailed);
  }
}

TEST(Netsem, ForkHaltAndQuiescence) {
  auto child = std::make_shared<Script>(std::vector<Effect>{}, "child");
  auto c = one({eff::Fork{child}});
  c = step_thread(c, 0).conf;
  ASSERT_EQ(c->threads.size(), 2u);
  EXPECT_EQ(c->threads[1].tid, 1u);
  EXPECT_EQ(c->threads[1].ip, "n0");
  EXPECT_FALSE(all_halted(*c));
  c = step_thread(c, 0).conf;
  c = step_thread(c, 1).conf;
  EXPECT_TRUE(all_halted(*c));
  EXPECT_TRUE(quiescent(*c));
  EXPECT_EQ(std::get<std::int64_t>(c->threads[0].result), 1);
  EXPECT_TRUE(enabled_steps(*c).empty());
}

TEST(Netsem, EnabledStepsListThreadsAndMessages) {
  auto c = one({eff::NewSocket{}, eff::SocketBind{0, {"n0", 1}}, eff::Send{0, "x", {"n0", 1}}});
  c = run_thread(c, 0, 3);
  auto steps = enabled_steps(*c);
  const MsgId id = c->soup[0]->id;
  EXPECT_NE(std::find(steps.begin(), steps.end(), StepLabel{ThreadStep{0}}), steps.end());
  EXPECT_NE(std::find(steps.begin(), steps.end(), StepLabel{Deliver{id}}), steps.end());
  EXPECT_NE(std::find(steps.begin(), steps.end(), StepLabel{Drop{id}}), steps.end());
}
