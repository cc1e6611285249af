#include "trellis/scheduler.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>

namespace trellis {

SchedulerPolicy SchedulerPolicy::random(double drop_p) {
  SchedulerPolicy p;
  p.kind = Kind::Random;
  p.drop_p = drop_p;
  return p;
}

SchedulerPolicy SchedulerPolicy::fair(std::size_t W, std::size_t D, double drop_p) {
  SchedulerPolicy p;
  p.kind = Kind::Fair;
  p.W = W;
  p.D = D;
  p.drop_p = drop_p;
  return p;
}

SchedulerPolicy SchedulerPolicy::adversarial(
    std::size_t W, std::size_t D, std::vector<std::pair<std::string, std::string>> starve) {
  SchedulerPolicy p = fair(W, D, 0.0);
  p.kind = Kind::Adversarial;
  p.starve_routes = std::move(starve);
  return p;
}

SchedulerPolicy::Kind parse_policy_kind(const std::string& s) {
  if (s == "random") return SchedulerPolicy::Kind::Random;
  if (s == "fair") return SchedulerPolicy::Kind::Fair;
  if (s == "adversarial") return SchedulerPolicy::Kind::Adversarial;
  throw std::invalid_argument("unknown policy: " + s);
}

std::string to_string(SchedulerPolicy::Kind k) {
  switch (k) {
    case SchedulerPolicy::Kind::Random: return "random";
    case SchedulerPolicy::Kind::Fair: return "fair";
    case SchedulerPolicy::Kind::Adversarial: return "adversarial";
  }
  return "?";
}

Scheduler::Scheduler(SchedulerPolicy policy, std::uint64_t seed)
    : policy_(std::move(policy)), rng_(seed) {}

StepLabel Scheduler::choose(const Configuration& c) {
  // refresh waiting bookkeeping
  for (auto it = thread_since_.begin(); it != thread_since_.end();) {
    const ThreadSlot* t = c.thread(it->first);
    if (!t || t->halted)
      it = thread_since_.erase(it);
    else
      ++it;
  }
  for (auto& t : c.threads)
    if (!t.halted) thread_since_.emplace(t.tid, t_);
  for (auto it = msg_birth_.begin(); it != msg_birth_.end();) {
    if (!c.in_soup(it->first))
      it = msg_birth_.erase(it);
    else
      ++it;
  }
  for (auto& m : c.soup) msg_birth_.emplace(m->id, t_);

  StepLabel l = policy_.kind == SchedulerPolicy::Kind::Random ? choose_random(c)
                                                               : choose_fair(c);
  note_chosen(l);
  ++t_;
  return l;
}

void Scheduler::note_chosen(const StepLabel& l) {
  if (auto* s = std::get_if<ThreadStep>(&l)) {
    auto it = thread_since_.find(s->tid);
    if (it != thread_since_.end()) {
      max_thread_wait_ = std::max<std::size_t>(max_thread_wait_, t_ - it->second + 1);
      it->second = t_ + 1;
    }
    return;
  }
  MsgId id = std::holds_alternative<Deliver>(l) ? std::get<Deliver>(l).id
                                                : std::get<Drop>(l).id;
  auto it = msg_birth_.find(id);
  if (it != msg_birth_.end()) {
    max_msg_wait_ = std::max<std::size_t>(max_msg_wait_, t_ - it->second + 1);
    msg_birth_.erase(it);
  }
}

StepLabel Scheduler::choose_random(const Configuration& c) {
  auto steps = enabled_steps(c);
  if (policy_.drop_p <= 0.0)
    steps.erase(std::remove_if(steps.begin(), steps.end(),
                               [](const StepLabel& l) { return std::holds_alternative<Drop>(l); }),
                steps.end());
  if (steps.empty()) {
    // only undeliverable messages are left
    if (c.soup.empty()) throw std::logic_error("no enabled step");
    return Drop{c.soup.front()->id};
  }
  return steps[rng_.below(steps.size())];
}

StepLabel Scheduler::settle_message(const Configuration& c, const Message& m) {
  auto route = std::make_pair(m.from.ip, m.to.ip);
  if (!deliverable(c, m)) return Drop{m.id};
  bool drop;
  if (policy_.kind == SchedulerPolicy::Kind::Adversarial &&
      std::find(policy_.starve_routes.begin(), policy_.starve_routes.end(), route) !=
          policy_.starve_routes.end()) {
    drop = true;
  } else if (route_drops_[route] >= policy_.max_route_drops) {
    drop = false;
  } else {
    drop = policy_.drop_p > 0.0 && rng_.bernoulli(policy_.drop_p);
  }
  if (drop) {
    ++route_drops_[route];
    return Drop{m.id};
  }
  route_drops_[route] = 0;
  return Deliver{m.id};
}

namespace {

bool node_live(const Configuration& c, const std::string& ip) {
  return std::any_of(c.threads.begin(), c.threads.end(),
                     [&](const ThreadSlot& t) { return !t.halted && t.ip == ip; });
}

}  // namespace

StepLabel Scheduler::choose_fair(const Configuration& c) {
  // A message to an unbound address waits while its node may still bind it.
  std::vector<const Message*> msgs;
  msgs.reserve(c.soup.size());
  for (auto& m : c.soup)
    if (deliverable(c, *m) || !node_live(c, m->to.ip)) msgs.push_back(m.get());

  // earliest deadline first among overdue items; messages win ties
  const std::uint64_t none = std::numeric_limits<std::uint64_t>::max();
  std::uint64_t best = none;
  const Message* best_msg = nullptr;
  Tid best_tid = 0;
  bool best_is_thread = false;
  for (const Message* m : msgs) {
    std::uint64_t dl = msg_birth_[m->id] + policy_.D - 1;
    if (dl <= t_ && dl < best) {
      best = dl;
      best_msg = m;
      best_is_thread = false;
    }
  }
  for (auto& t : c.threads) {
    if (t.halted) continue;
    std::uint64_t dl = thread_since_[t.tid] + policy_.W - 1;
    if (dl <= t_ && dl < best) {
      best = dl;
      best_tid = t.tid;
      best_is_thread = true;
    }
  }
  if (best != none) {
    if (best_is_thread) return ThreadStep{best_tid};
    return settle_message(c, *best_msg);
  }

  std::uint64_t total = msgs.size();
  for (auto& t : c.threads)
    if (!t.halted) total += static_cast<std::uint64_t>(std::max(1, t.prog->priority()));
  if (total == 0) throw std::logic_error("no enabled step");
  std::uint64_t r = rng_.below(total);
  for (auto& t : c.threads) {
    if (t.halted) continue;
    std::uint64_t w = static_cast<std::uint64_t>(std::max(1, t.prog->priority()));
    if (r < w) return ThreadStep{t.tid};
    r -= w;
  }
  return settle_message(c, *msgs[r]);
}

}  // namespace trellis
