#pragma once

#include <string>
#include <utility>
#include <vector>

#include "trellis/netsem.hpp"

namespace trellis::testing {

/// Runs a fixed list of effects, then halts. Outcomes are recorded.
class Script : public Program<Script> {
 public:
  explicit Script(std::vector<Effect> effects, std::string name = "script")
      : effects_(std::move(effects)), name_(std::move(name)) {}

  Effect next() const override {
    if (pc_ < effects_.size()) return effects_[pc_];
    return eff::Halt{static_cast<std::int64_t>(pc_)};
  }
  void resume(const Outcome& o) override {
    outcomes_.push_back(o);
    ++pc_;
  }
  std::string name() const override { return name_; }

  const std::vector<Outcome>& outcomes() const { return outcomes_; }
  std::size_t pc() const { return pc_; }

 private:
  std::vector<Effect> effects_;
  std::string name_;
  std::size_t pc_ = 0;
  std::vector<Outcome> outcomes_;
};

inline const Script& script_of(const Configuration& c, Tid t) {
  return dynamic_cast<const Script&>(*c.thread(t)->prog);
}

/// Runs thread t for n steps.
inline ConfPtr run_thread(ConfPtr c, Tid t, int n) {
  for (int i = 0; i < n; ++i) c = step_thread(c, t).conf;
  return c;
}

}  // namespace trellis::testing
