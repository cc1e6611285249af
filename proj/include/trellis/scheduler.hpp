#pragma once

#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "trellis/netsem.hpp"

namespace trellis {

/// Seeded generator with platform-independent derived draws.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}
  std::uint64_t next() { return eng_(); }
  std::uint64_t below(std::uint64_t n) { return n ? eng_() % n : 0; }
  double unit() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }
  bool bernoulli(double p) { return unit() < p; }

 private:
  std::mt19937_64 eng_;
};

struct SchedulerPolicy {
  enum class Kind { Random, Fair, Adversarial };
  Kind kind = Kind::Fair;
  std::size_t W = 8;   // thread window
  std::size_t D = 32;  // message window
  double drop_p = 0.0;
  /// Consecutive drops on one (src ip, dst ip) route before a forced delivery.
  std::size_t max_route_drops = 3;
  /// Adversarial only: routes whose messages are always dropped.
  std::vector<std::pair<std::string, std::string>> starve_routes;

  static SchedulerPolicy random(double drop_p = 0.0);
  static SchedulerPolicy fair(std::size_t W, std::size_t D, double drop_p);
  static SchedulerPolicy adversarial(std::size_t W, std::size_t D,
                                     std::vector<std::pair<std::string, std::string>> starve);
};

SchedulerPolicy::Kind parse_policy_kind(const std::string& s);
std::string to_string(SchedulerPolicy::Kind k);

/// Picks the next step. Stateful: tracks how long threads and messages have
/// been waiting so the fair policy can honour its windows.
class Scheduler {
 public:
  Scheduler(SchedulerPolicy policy, std::uint64_t seed);

  /// Precondition: enabled_steps(c) is non-empty.
  StepLabel choose(const Configuration& c);

  const SchedulerPolicy& policy() const { return policy_; }
  std::uint64_t decisions() const { return t_; }
  /// Largest observed wait (in decisions) of a thread / message before it was served.
  std::size_t max_thread_wait() const { return max_thread_wait_; }
  std::size_t max_msg_wait() const { return max_msg_wait_; }

 private:
  StepLabel choose_random(const Configuration& c);
  StepLabel choose_fair(const Configuration& c);
  StepLabel settle_message(const Configuration& c, const Message& m);
  void note_chosen(const StepLabel& l);

  SchedulerPolicy policy_;
  Rng rng_;
  std::uint64_t t_ = 0;
  std::map<Tid, std::uint64_t> thread_since_;
  std::map<MsgId, std::uint64_t> msg_birth_;
  std::map<std::pair<std::string, std::string>, std::size_t> route_drops_;
  std::size_t max_thread_wait_ = 0;
  std::size_t max_msg_wait_ = 0;
};

}  // namespace trellis
