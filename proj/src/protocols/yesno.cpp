#include "trellis/protocols/yesno.hpp"

#include <algorithm>
#include <limits>

namespace trellis::yesno {

const char* to_string(Role r) { return r == Role::Yes ? "Yes" : "No"; }

std::string show(const FynState& s) {
  return "(" + std::to_string(s.m) + "," + std::to_string(s.b) + "," + std::to_string(s.ye) +
         "," + std::to_string(s.ne) + ")";
}

namespace {

std::vector<FynState> fyn_step(const FynState& s, Role r) {
  std::vector<FynState> out;
  const bool both = s.ye == 1 && s.ne == 1;
  if (r == Role::Yes) {
    if (s.ye != 1) return out;
    if (s.m > 0 && s.b == 1 && both) out.push_back({s.m, 0, 1, 1});
    if (s.m > 0 && s.b == 0 && both) out.push_back(s);
    if (s.m <= 1) out.push_back({s.m, s.b, 0, s.ne});
  } else {
    if (s.ne != 1) return out;
    if (s.m > 0 && s.b == 0 && both) out.push_back({s.m - 1, 1, 1, 1});
    if (s.b == 1 && both) out.push_back(s);
    if (s == FynState{1, 0, 0, 1}) out.push_back({0, 1, 0, 1});
    if (s.m == 0) out.push_back({0, s.b, s.ye, 0});
  }
  return out;
}

}  // namespace

FairnessModel<FynState, Role> fyn_model(std::int64_t k, std::size_t fuel_limit) {
  FairnessModel<FynState, Role> f;
  f.init = {k, 0, 1, 1};
  f.roles = {Role::Yes, Role::No};
  f.enabled = [](const FynState& s) {
    std::vector<Role> e;
    if (s.ye) e.push_back(Role::Yes);
    if (s.ne) e.push_back(Role::No);
    return e;
  };
  f.step = fyn_step;
  f.fuel_limit = [fuel_limit](const FynState&) { return fuel_limit; };
  f.show = [](const FynState& s) { return show(s); };
  f.show_role = [](const Role& r) { return std::string(to_string(r)); };
  return f;
}

std::vector<FynState> fyn_states(std::int64_t m_max) {
  std::vector<FynState> out;
  for (std::int64_t m = 0; m <= m_max; ++m)
    for (int b = 0; b < 2; ++b)
      for (int ye = 0; ye < 2; ++ye)
        for (int ne = 0; ne < 2; ++ne) out.push_back({m, b, ye, ne});
  return out;
}

bool fyn_leq(const FynState& a, const FynState& b) {
  const bool lex = a.m < b.m || (a.m == b.m && a.b <= b.b);
  return lex && a.ye <= b.ye && a.ne <= b.ne;
}

Rank fyn_rank(const FynState& s) {
  return {static_cast<std::size_t>(2 * s.m + s.b), static_cast<std::size_t>(s.ye + s.ne)};
}

Role fyn_progress(const FynState& s) {
  return (s.b == 1 && s.ye == 1) || s.ne == 0 ? Role::Yes : Role::No;
}

LftVerdict check_criterion(std::int64_t m_max) {
  return check_locally_fair_terminating<FynState, Role>(fyn_model(m_max), fyn_leq, fyn_rank,
                                                        fyn_progress, fyn_states(m_max));
}

// ---- programs ----------------------------------------------------------------

namespace {

constexpr Loc kB = 0, kN = 1, kM = 2;

/// One flipper loop: cas(b, from, to); on success decrement the counter;
/// continue while the counter is positive.
class Flipper {
 public:
  enum class Pc { Cas, LoadDec, StoreDec, LoadCheck, Done };

  Flipper(Loc counter, std::int64_t from) : counter_(counter), from_(from) {}

  Effect next() const {
    switch (pc_) {
      case Pc::Cas: return eff::Cas{kB, from_, 1 - from_};
      case Pc::LoadDec:
      case Pc::LoadCheck: return eff::Load{counter_};
      case Pc::StoreDec: return eff::Store{counter_, seen_ - 1};
      case Pc::Done: return eff::Halt{};
    }
    return eff::Halt{};
  }
  void resume(const Outcome& o) {
    switch (pc_) {
      case Pc::Cas: pc_ = o.ok ? Pc::LoadDec : Pc::LoadCheck; break;
      case Pc::LoadDec: seen_ = std::get<std::int64_t>(o.value); pc_ = Pc::StoreDec; break;
      case Pc::StoreDec: pc_ = Pc::LoadCheck; break;
      case Pc::LoadCheck: pc_ = std::get<std::int64_t>(o.value) > 0 ? Pc::Cas : Pc::Done; break;
      case Pc::Done: break;
    }
  }
  /// Between a successful cas and the store of the decrement.
  bool owes_decrement() const { return pc_ == Pc::LoadDec || pc_ == Pc::StoreDec; }

 private:
  Loc counter_;
  std::int64_t from_;
  Pc pc_ = Pc::Cas;
  std::int64_t seen_ = 0;
};

class YesThread : public Program<YesThread> {
 public:
  Effect next() const override { return loop_.next(); }
  void resume(const Outcome& o) override { loop_.resume(o); }
  std::string name() const override { return "yn-yes"; }
  const Flipper& loop() const { return loop_; }

 private:
  Flipper loop_{kN, 1};
};

class NoThread : public Program<NoThread> {
 public:
  explicit NoThread(std::int64_t k) : k_(k) {}
  Effect next() const override {
    switch (setup_) {
      case 0: return eff::Alloc{std::nullopt, std::int64_t{0}};
      case 1:
      case 2: return eff::Alloc{std::nullopt, k_};
      case 3: return eff::Fork{std::make_shared<YesThread>()};
      default: return loop_.next();
    }
  }
  void resume(const Outcome& o) override {
    if (setup_ < 4)
      ++setup_;
    else
      loop_.resume(o);
  }
  std::string name() const override { return "yn-no"; }
  const Flipper& loop() const { return loop_; }

 private:
  std::int64_t k_;
  int setup_ = 0;
  Flipper loop_{kM, 0};
};

}  // namespace

ConfPtr setup(const YnConfig& c) {
  auto conf = std::make_shared<Configuration>();
  conf->add_node(kNode);
  conf->add_thread(kNode, std::make_shared<NoThread>(c.k));
  return conf;
}

LivePt live_start(const YnConfig& c) {
  auto f = fyn_model(c.k, c.fuel_limit);
  LiveState<FynState, Role> ls = live_init(f, 0);
  for (auto& [r, x] : ls.fuels) x = c.f_init;
  return {ls, std::nullopt};
}

Coupling<LivePt> coupling(const YnConfig& c, std::shared_ptr<MatchStats> stats) {
  auto f = fyn_model(c.k, c.fuel_limit);
  Coupling<LivePt> cp;
  cp.matcher = [f, stats](const ExecTrace& ex, const ModelTrace<LivePt>& mt) {
    std::vector<LivePt> out;
    const ExecPoint& p = ex.last();
    const auto& a = mt.last().ls;
    auto* ts = p.via ? std::get_if<ThreadStep>(&*p.via) : nullptr;
    if (!ts) {
      out.push_back({a, std::nullopt});
      return out;
    }
    const Tid tid = ts->tid;
    std::map<Role, Tid> handoff;
    if (p.effect == EffectKind::Fork) handoff[Role::Yes] = static_cast<Tid>(p.conf->threads.size() - 1);
    auto silent = [&]() {
      auto lbl = LiveLabel<Role>::silent(tid);
      if (auto b = live_witness(f, a, lbl, a.under, handoff)) {
        out.push_back({*b, lbl});
        return;
      }
      for (auto& [r, t] : a.mapping)
        if ((t == tid || handoff.count(r)) && a.fuels.at(r) == 0) {
          ++stats->fuel_underflows;
          return;
        }
    };
    if (p.effect == EffectKind::Cas || p.effect == EffectKind::Halt) {
      for (auto& [r, t] : a.mapping) {
        if (t != tid) continue;
        auto lbl = LiveLabel<Role>::step(r, tid);
        for (const FynState& s2 : f.step(a.under, r))
          if (auto b = live_witness(f, a, lbl, s2)) out.push_back({*b, lbl});
      }
      if (p.effect == EffectKind::Cas) silent();
    } else {
      silent();
    }
    return out;
  };
  cp.show = [](const LivePt& p) {
    std::string s = show(p.ls.under) + " {";
    for (auto& [r, x] : p.ls.fuels)
      s += std::string(to_string(r)) + ":" + std::to_string(x) + "@" +
           std::to_string(p.ls.mapping.at(r)) + " ";
    return s + "}";
  };
  return cp;
}

namespace {

std::optional<std::int64_t> heap_int(const Configuration& c, Loc l) {
  const auto& h = c.node(kNode).heap;
  auto it = h.find(l);
  if (it == h.end()) return std::nullopt;
  return std::get<std::int64_t>(it->second);
}

}  // namespace

TraceRel<LivePt> xi(const YnConfig& c) {
  const FynState init{c.k, 0, 1, 1};
  return [init](const ExecTrace& ex, const ModelTrace<LivePt>& mt) {
    const Configuration& conf = *ex.last().conf;
    const FynState& s = mt.last().ls.under;
    auto b = heap_int(conf, kB), n = heap_int(conf, kN), m = heap_int(conf, kM);
    if (!b || !n || !m) return s == init;
    const ThreadSlot* no = conf.thread(0);
    const ThreadSlot* yes = conf.thread(1);
    const auto* no_prog = dynamic_cast<const NoThread*>(no->prog.get());
    const auto* yes_prog = yes ? dynamic_cast<const YesThread*>(yes->prog.get()) : nullptr;
    if (!no_prog || (yes && !yes_prog)) return false;
    const std::int64_t m_eff = *m - (no_prog->loop().owes_decrement() ? 1 : 0);
    const std::int64_t n_eff = *n - (yes_prog && yes_prog->loop().owes_decrement() ? 1 : 0);
    if (n_eff != m_eff + *b) return false;
    if (s.m != m_eff) return false;
    if (s.m > 0 && s.b != *b) return false;
    if (s.ye != (yes && yes->halted ? 0 : 1)) return false;
    if (s.ne != (no->halted ? 0 : 1)) return false;
    return true;
  };
}

YnRun run(const YnConfig& c, const SchedulerPolicy& policy, std::uint64_t seed,
          std::size_t horizon) {
  auto stats = std::make_shared<MatchStats>();
  Scheduler sched(policy, seed);
  YnRun r{run_coupled(setup(c), live_start(c), coupling(c, stats), xi(c), sched, horizon), 0, 0,
          false, false, false, {}};
  r.fuel_underflows = stats->fuel_underflows;
  r.terminated = r.run.halted;
  auto f = fyn_model(c.k, c.fuel_limit);
  r.live_valid = valid_live_trace(f, r.run.model);
  r.f_valid = valid_f_trace(f, destutter(r.run.model));
  r.min_fuel = std::numeric_limits<std::size_t>::max();
  for (std::size_t i = 0; i < r.run.model.length(); ++i)
    for (auto& [role, x] : r.run.model[i].ls.fuels) r.min_fuel = std::min(r.min_fuel, x);
  r.final_state = r.run.model.last().ls.under;
  return r;
}

}  // namespace trellis::yesno
