#pragma once

#include <algorithm>
#include <cstddef>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "trellis/netsem.hpp"
#include "trellis/traces.hpp"

namespace trellis {

template <class S>
struct Sts {
  S init;
  std::function<std::vector<S>(const S&)> successors;
  std::function<std::string(const S&)> show;
};

template <class S>
bool sts_step(const Sts<S>& sts, const S& a, const S& b) {
  auto succ = sts.successors(a);
  return std::find(succ.begin(), succ.end(), b) != succ.end();
}

/// Role-labelled transition system with per-state fuel limits.
template <class S, class R>
struct FairnessModel {
  S init;
  std::vector<R> roles;
  std::function<std::vector<R>(const S&)> enabled;
  std::function<std::vector<S>(const S&, const R&)> step;
  std::function<std::size_t(const S&)> fuel_limit;
  std::function<std::string(const S&)> show;
  std::function<std::string(const R&)> show_role;

  bool is_enabled(const S& s, const R& r) const {
    auto e = enabled(s);
    return std::find(e.begin(), e.end(), r) != e.end();
  }
  bool has_step(const S& s, const R& r, const S& t) const {
    auto succ = step(s, r);
    return std::find(succ.begin(), succ.end(), t) != succ.end();
  }
};

template <class S, class R>
struct LiveState {
  S under;
  std::map<R, std::size_t> fuels;
  std::map<R, Tid> mapping;
  bool operator==(const LiveState&) const = default;
};

template <class R>
struct LiveLabel {
  std::optional<R> role;  // empty: silent
  Tid tid = 0;

  static LiveLabel step(R r, Tid t) { return {std::move(r), t}; }
  static LiveLabel silent(Tid t) { return {std::nullopt, t}; }
  bool is_silent() const { return !role.has_value(); }
  bool operator==(const LiveLabel&) const = default;
};

template <class S, class R>
struct LivePoint {
  LiveState<S, R> ls;
  std::optional<LiveLabel<R>> via;
  bool operator==(const LivePoint&) const = default;
};

template <class S, class R>
struct FPoint {
  S s;
  std::optional<R> via;
  bool operator==(const FPoint&) const = default;
};

template <class S, class R>
LiveState<S, R> live_init(const FairnessModel<S, R>& f, Tid owner) {
  LiveState<S, R> ls{f.init, {}, {}};
  for (auto& r : f.enabled(f.init)) {
    ls.fuels[r] = f.fuel_limit(f.init);
    ls.mapping[r] = owner;
  }
  return ls;
}

namespace detail {

template <class R>
bool domain_is(const std::map<R, std::size_t>& fuels, const std::map<R, Tid>& mapping,
               std::vector<R> roles) {
  std::sort(roles.begin(), roles.end());
  roles.erase(std::unique(roles.begin(), roles.end()), roles.end());
  if (fuels.size() != roles.size() || mapping.size() != roles.size()) return false;
  std::size_t i = 0;
  for (auto& [r, f] : fuels)
    if (!(r == roles[i++])) return false;
  i = 0;
  for (auto& [r, t] : mapping)
    if (!(r == roles[i++])) return false;
  return true;
}

}  // namespace detail

/// Independent check of a single LiveModel transition.
template <class S, class R>
bool live_step_valid(const FairnessModel<S, R>& f, const LiveState<S, R>& a,
                     const LiveLabel<R>& lbl, const LiveState<S, R>& b) {
  if (!detail::domain_is(b.fuels, b.mapping, f.enabled(b.under))) return false;
  const Tid tid = lbl.tid;
  bool owns_any = false;
  for (auto& [r, t] : a.mapping) owns_any |= (t == tid);
  if (lbl.is_silent()) {
    if (!owns_any) return false;
    if (!(a.under == b.under)) return false;
  } else {
    const R& rho = *lbl.role;
    auto it = a.mapping.find(rho);
    if (it == a.mapping.end() || it->second != tid) return false;
    if (!f.has_step(a.under, rho, b.under)) return false;
    if (auto jt = b.fuels.find(rho); jt != b.fuels.end() && jt->second > f.fuel_limit(b.under))
      return false;
  }
  const std::size_t fl = f.fuel_limit(b.under);
  for (auto& [r, fuel2] : b.fuels) {
    auto old = a.fuels.find(r);
    if (old == a.fuels.end()) {
      if (fuel2 > fl) return false;  // newly enabled role
      continue;
    }
    const bool moved = a.mapping.at(r) != b.mapping.at(r);
    if (!lbl.is_silent() && r == *lbl.role) {
      if (moved && !(fuel2 < old->second)) return false;
      continue;
    }
    const bool mine = a.mapping.at(r) == tid;
    if (mine || moved) {
      if (!(fuel2 < old->second)) return false;
    } else if (fuel2 > old->second) {
      return false;
    }
  }
  return true;
}

/// Every LiveModel successor of `a` under `lbl`; owners range over `tids`.
template <class S, class R>
std::vector<LiveState<S, R>> live_successors(const FairnessModel<S, R>& f,
                                             const LiveState<S, R>& a,
                                             const LiveLabel<R>& lbl,
                                             const std::vector<Tid>& tids) {
  std::vector<LiveState<S, R>> out;
  const Tid tid = lbl.tid;
  bool owns_any = false;
  for (auto& [r, t] : a.mapping) owns_any |= (t == tid);

  std::vector<S> targets;
  if (lbl.is_silent()) {
    if (!owns_any) return out;
    targets.push_back(a.under);
  } else {
    auto it = a.mapping.find(*lbl.role);
    if (it == a.mapping.end() || it->second != tid) return out;
    targets = f.step(a.under, *lbl.role);
  }

  for (const S& s2 : targets) {
    const std::size_t fl = f.fuel_limit(s2);
    auto roles2 = f.enabled(s2);
    std::sort(roles2.begin(), roles2.end());
    roles2.erase(std::unique(roles2.begin(), roles2.end()), roles2.end());
    // per-role option lists of (fuel, owner)
    std::vector<std::vector<std::pair<std::size_t, Tid>>> opts;
    for (const R& r : roles2) {
      std::vector<std::pair<std::size_t, Tid>> o;
      auto old = a.fuels.find(r);
      if (old == a.fuels.end()) {
        for (std::size_t x = 0; x <= fl; ++x)
          for (Tid t : tids) o.push_back({x, t});
      } else if (!lbl.is_silent() && r == *lbl.role) {
        for (std::size_t x = 0; x <= fl; ++x) o.push_back({x, tid});
        for (Tid t : tids)
          if (t != tid)
            for (std::size_t x = 0; x < std::min(old->second, fl + 1); ++x) o.push_back({x, t});
      } else {
        const Tid owner = a.mapping.at(r);
        for (Tid t : tids) {
          const bool strict = owner == tid || t != owner;
          const std::size_t hi = strict ? old->second : old->second + 1;
          for (std::size_t x = 0; x < hi; ++x) o.push_back({x, t});
        }
      }
      opts.push_back(std::move(o));
    }
    // cartesian product
    std::vector<std::size_t> idx(opts.size(), 0);
    bool empty = std::any_of(opts.begin(), opts.end(), [](auto& o) { return o.empty(); });
    if (empty) continue;
    while (true) {
      LiveState<S, R> b{s2, {}, {}};
      for (std::size_t i = 0; i < roles2.size(); ++i) {
        b.fuels[roles2[i]] = opts[i][idx[i]].first;
        b.mapping[roles2[i]] = opts[i][idx[i]].second;
      }
      out.push_back(std::move(b));
      std::size_t k = 0;
      while (k < idx.size() && ++idx[k] == opts[k].size()) idx[k++] = 0;
      if (k == idx.size()) break;
    }
  }
  return out;
}

/// The single successor a runner commits to: refuel to the limit, spend one
/// unit of fuel everywhere else the label forces a decrease. `handoff`
/// re-assigns roles to other threads (such roles also pay one unit).
/// Returns nullopt on fuel underflow or if the underlying step is not in F.
template <class S, class R>
std::optional<LiveState<S, R>> live_witness(const FairnessModel<S, R>& f,
                                            const LiveState<S, R>& a,
                                            const LiveLabel<R>& lbl, const S& under2,
                                            const std::map<R, Tid>& handoff = {}) {
  LiveState<S, R> b{under2, {}, {}};
  const std::size_t fl = f.fuel_limit(under2);
  for (const R& r : f.enabled(under2)) {
    auto old = a.fuels.find(r);
    if (old == a.fuels.end()) {
      b.fuels[r] = fl;
      b.mapping[r] = lbl.tid;
      continue;
    }
    Tid owner = a.mapping.at(r);
    if (!lbl.is_silent() && r == *lbl.role) {
      b.fuels[r] = fl;
      b.mapping[r] = owner;
      continue;
    }
    Tid owner2 = owner;
    if (auto h = handoff.find(r); h != handoff.end()) owner2 = h->second;
    if (owner == lbl.tid || owner2 != owner) {
      if (old->second == 0) return std::nullopt;
      b.fuels[r] = old->second - 1;
    } else {
      b.fuels[r] = old->second;
    }
    b.mapping[r] = owner2;
  }
  if (!live_step_valid(f, a, lbl, b)) return std::nullopt;
  return b;
}

/// Keeps only role steps; the result is a trace of the fairness model.
template <class S, class R>
FiniteTrace<FPoint<S, R>> destutter(const FiniteTrace<LivePoint<S, R>>& t) {
  FiniteTrace<FPoint<S, R>> out(FPoint<S, R>{t.first().ls.under, std::nullopt});
  for (std::size_t i = 1; i < t.length(); ++i) {
    const auto& p = t[i];
    if (p.via && !p.via->is_silent()) out = out.extend(FPoint<S, R>{p.ls.under, p.via->role});
  }
  return out;
}

template <class S, class R>
bool valid_live_trace(const FairnessModel<S, R>& f, const FiniteTrace<LivePoint<S, R>>& t) {
  for (std::size_t i = 1; i < t.length(); ++i) {
    if (!t[i].via) return false;
    if (!live_step_valid(f, t[i - 1].ls, *t[i].via, t[i].ls)) return false;
  }
  return true;
}

template <class S, class R>
bool valid_f_trace(const FairnessModel<S, R>& f, const FiniteTrace<FPoint<S, R>>& t) {
  for (std::size_t i = 1; i < t.length(); ++i) {
    if (!t[i].via) return false;
    const R& r = *t[i].via;
    if (!f.is_enabled(t[i - 1].s, r) || !f.has_step(t[i - 1].s, r, t[i].s)) return false;
  }
  return true;
}

/// Packages LiveModel(F) as a plain STS over the given thread ids.
template <class S, class R>
Sts<LiveState<S, R>> lift(const FairnessModel<S, R>& f, std::vector<Tid> tids) {
  Sts<LiveState<S, R>> sts;
  sts.init = live_init(f, tids.empty() ? 0 : tids.front());
  sts.successors = [f, tids](const LiveState<S, R>& a) {
    std::vector<LiveState<S, R>> out;
    for (Tid t : tids) {
      auto s = live_successors(f, a, LiveLabel<R>::silent(t), tids);
      out.insert(out.end(), s.begin(), s.end());
    }
    for (auto& [r, t] : a.mapping) {
      auto s = live_successors(f, a, LiveLabel<R>::step(r, t), tids);
      out.insert(out.end(), s.begin(), s.end());
    }
    return out;
  };
  sts.show = [f](const LiveState<S, R>& a) {
    std::string s = f.show(a.under) + " {";
    for (auto& [r, x] : a.fuels)
      s += f.show_role(r) + ":" + std::to_string(x) + "@" + std::to_string(a.mapping.at(r)) + " ";
    return s + "}";
  };
  return sts;
}

/// Checks that transitions only use enabled roles and never disable others.
template <class S, class R>
std::optional<std::string> check_fairness_model(const FairnessModel<S, R>& f,
                                                const std::vector<S>& states) {
  for (const S& s : states) {
    auto en = f.enabled(s);
    for (const R& r : f.roles) {
      for (const S& s2 : f.step(s, r)) {
        if (std::find(en.begin(), en.end(), r) == en.end())
          return f.show(s) + " steps by disabled role " + f.show_role(r);
        for (const R& r2 : en)
          if (!(r2 == r) && !f.is_enabled(s2, r2))
            return f.show(s) + " -" + f.show_role(r) + "-> " + f.show(s2) + " disables " +
                   f.show_role(r2);
      }
    }
  }
  return std::nullopt;
}

using Rank = std::pair<std::size_t, std::size_t>;

struct LftVerdict {
  enum class Kind { Pass, NotDecreasing, ProgressNotEnabled, ProgressNotStrict,
                    ProgressChanged, ComparatorError };
  Kind kind = Kind::Pass;
  std::string from, role, to;
  bool pass() const { return kind == Kind::Pass; }
  std::string describe() const;
};

inline const char* to_string(LftVerdict::Kind k) {
  switch (k) {
    case LftVerdict::Kind::Pass: return "pass";
    case LftVerdict::Kind::NotDecreasing: return "transition increases the state";
    case LftVerdict::Kind::ProgressNotEnabled: return "progress role not enabled";
    case LftVerdict::Kind::ProgressNotStrict: return "progress step does not strictly decrease";
    case LftVerdict::Kind::ProgressChanged: return "non-progress step changes the progress role";
    case LftVerdict::Kind::ComparatorError: return "comparator disagrees with rank";
  }
  return "?";
}

inline std::string LftVerdict::describe() const {
  if (pass()) return "pass";
  return std::string(to_string(kind)) + ": " + from + " -" + role + "-> " + to;
}

/// Per-transition termination criterion. `leq(a, b)` reads a <= b; `rank`
/// maps into N x N (lexicographic) and must agree with `leq`, which is what
/// makes the order checkably well founded.
template <class S, class R>
LftVerdict check_locally_fair_terminating(const FairnessModel<S, R>& f,
                                          const std::function<bool(const S&, const S&)>& leq,
                                          const std::function<Rank(const S&)>& rank,
                                          const std::function<R(const S&)>& progress,
                                          const std::vector<S>& states) {
  auto fail = [&](LftVerdict::Kind k, const S& a, const R& r, const S& b) {
    return LftVerdict{k, f.show(a), f.show_role(r), f.show(b)};
  };
  for (const S& s : states) {
    std::vector<std::pair<R, S>> outs;
    for (const R& r : f.roles)
      for (const S& s2 : f.step(s, r)) outs.push_back({r, s2});
    const R pi = progress(s);
    if (!outs.empty() && !f.is_enabled(s, pi))
      return LftVerdict{LftVerdict::Kind::ProgressNotEnabled, f.show(s), f.show_role(pi), ""};
    for (auto& [r, s2] : outs) {
      const bool down = leq(s2, s);
      if (down && !(rank(s2) <= rank(s)))
        return fail(LftVerdict::Kind::ComparatorError, s, r, s2);
      if (!down) return fail(LftVerdict::Kind::NotDecreasing, s, r, s2);
      if (r == pi) {
        const bool strict = !leq(s, s2);
        if (strict && !(rank(s2) < rank(s)))
          return fail(LftVerdict::Kind::ComparatorError, s, r, s2);
        if (!strict) return fail(LftVerdict::Kind::ProgressNotStrict, s, r, s2);
      } else if (!(progress(s2) == pi)) {
        return fail(LftVerdict::Kind::ProgressChanged, s, r, s2);
      }
    }
  }
  return {};
}

}  // namespace trellis
