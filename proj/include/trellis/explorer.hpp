#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <unordered_set>
#include <vector>

#include "trellis/model.hpp"
#include "trellis/traces.hpp"

namespace trellis {

struct ExploreBudget {
  std::size_t max_states = 1'000'000;
  std::size_t max_depth = static_cast<std::size_t>(-1);
};

template <class S>
struct ExploreOptions {
  /// Skip successors equal to their source. Sound for reachability.
  bool skip_self_loops = false;
  /// Keep the visited keys in the result (for cross-checks).
  bool keep_keys = false;
  /// Maps a state to its class representative before deduplication.
  std::function<S(const S&)> canon;
};

template <class S, class Key = S>
struct ExploreResult {
  bool complete = false;
  std::size_t reachable = 0;
  std::size_t transitions = 0;
  std::size_t depth = 0;
  std::optional<std::vector<S>> witness;  // init ... violating state
  std::vector<Key> keys;
  bool violated() const { return witness.has_value(); }
};

/// Visited states are stored only as keys; `decode(encode(s))` must be
/// equivalent to s for successor generation.
template <class S, class Key>
struct StateCodec {
  std::function<Key(const S&)> encode;
  std::function<S(const Key&)> decode;
};

namespace detail {

/// Hash set of indices into a key vector, so each key is stored once.
template <class Key, class KeyHash>
class KeyTable {
 public:
  explicit KeyTable(std::vector<Key>& keys)
      : keys_(keys), set_(16, Hash{&keys_}, Eq{&keys_}) {}

  /// Adds `k` if new; returns its index and whether it was inserted.
  std::pair<std::uint32_t, bool> intern(Key k) {
    keys_.push_back(std::move(k));
    auto idx = static_cast<std::uint32_t>(keys_.size() - 1);
    auto [it, fresh] = set_.insert(idx);
    if (!fresh) keys_.pop_back();
    return {*it, fresh};
  }
  bool contains(Key k) {
    keys_.push_back(std::move(k));
    bool found = set_.count(static_cast<std::uint32_t>(keys_.size() - 1)) > 0;
    keys_.pop_back();
    return found;
  }

 private:
  struct Hash {
    std::vector<Key>* keys;
    std::size_t operator()(std::uint32_t i) const { return KeyHash{}((*keys)[i]); }
  };
  struct Eq {
    std::vector<Key>* keys;
    bool operator()(std::uint32_t a, std::uint32_t b) const { return (*keys)[a] == (*keys)[b]; }
  };
  std::vector<Key>& keys_;
  std::unordered_set<std::uint32_t, Hash, Eq> set_;
};

}  // namespace detail

/// Breadth-first reachability with an invariant. The witness is a shortest
/// path (of representatives when `canon` is set).
template <class S, class Key, class KeyHash = std::hash<Key>>
ExploreResult<S, Key> bfs_keyed(const Sts<S>& sts, const StateCodec<S, Key>& codec,
                                const std::function<bool(const S&)>& invariant,
                                const ExploreBudget& budget,
                                const ExploreOptions<S>& opts = {}) {
  ExploreResult<S, Key> res;
  std::vector<Key> keys;
  std::vector<std::uint32_t> parent;
  detail::KeyTable<Key, KeyHash> table(keys);
  auto path_to = [&](std::uint32_t i) {
    std::vector<S> p;
    while (true) {
      p.push_back(codec.decode(keys[i]));
      if (parent[i] == i) break;
      i = parent[i];
    }
    return std::vector<S>(p.rbegin(), p.rend());
  };
  auto finish = [&]() {
    res.reachable = keys.size();
    if (opts.keep_keys) res.keys = keys;
    return res;
  };
  S init = opts.canon ? opts.canon(sts.init) : sts.init;
  table.intern(codec.encode(init));
  parent.push_back(0);
  if (!invariant(init)) {
    res.witness = path_to(0);
    return finish();
  }
  std::size_t layer_begin = 0, layer_end = 1, depth = 0;
  bool truncated = false;
  while (layer_begin < layer_end) {
    if (depth >= budget.max_depth) {
      truncated = true;
      break;
    }
    for (std::size_t i = layer_begin; i < layer_end; ++i) {
      const S cur = codec.decode(keys[i]);
      for (S& nx0 : sts.successors(cur)) {
        if (opts.skip_self_loops && nx0 == cur) continue;
        ++res.transitions;
        S nx = opts.canon ? opts.canon(nx0) : std::move(nx0);
        Key k = codec.encode(nx);
        if (keys.size() >= budget.max_states) {
          if (table.contains(k)) continue;
          res.depth = depth;
          return finish();  // exhausted
        }
        auto [id, fresh] = table.intern(std::move(k));
        if (!fresh) continue;
        parent.push_back(static_cast<std::uint32_t>(i));
        if (!invariant(nx)) {
          res.witness = path_to(id);
          res.depth = depth + 1;
          return finish();
        }
      }
    }
    layer_begin = layer_end;
    layer_end = keys.size();
    if (layer_begin < layer_end) ++depth;
  }
  res.complete = !truncated;
  res.depth = depth;
  return finish();
}

template <class S>
StateCodec<S, S> identity_codec() {
  return {[](const S& s) { return s; }, [](const S& s) { return s; }};
}

template <class S, class Hash = std::hash<S>>
ExploreResult<S> bfs(const Sts<S>& sts, const std::function<bool(const S&)>& invariant,
                     const ExploreBudget& budget, const ExploreOptions<S>& opts = {}) {
  return bfs_keyed<S, S, Hash>(sts, identity_codec<S>(), invariant, budget, opts);
}

/// Depth-first reimplementation used to cross-check bfs reachable sets.
template <class S, class Key, class KeyHash = std::hash<Key>>
std::unordered_set<Key, KeyHash> dfs_reachable_keyed(const Sts<S>& sts,
                                                     const StateCodec<S, Key>& codec,
                                                     std::size_t max_states,
                                                     const std::function<S(const S&)>& canon = {}) {
  std::unordered_set<Key, KeyHash> seen;
  auto norm = [&](const S& s) { return canon ? canon(s) : s; };
  std::vector<Key> stack{codec.encode(norm(sts.init))};
  seen.insert(stack.back());
  while (!stack.empty()) {
    S cur = codec.decode(stack.back());
    stack.pop_back();
    for (const S& nx : sts.successors(cur)) {
      Key k = codec.encode(norm(nx));
      if (seen.count(k)) continue;
      if (seen.size() >= max_states) return seen;
      seen.insert(k);
      stack.push_back(std::move(k));
    }
  }
  return seen;
}

template <class S, class Hash = std::hash<S>>
std::unordered_set<S, Hash> dfs_reachable(const Sts<S>& sts, std::size_t max_states) {
  return dfs_reachable_keyed<S, S, Hash>(sts, identity_codec<S>(), max_states);
}

/// All reachable states, in BFS order.
template <class S, class Hash = std::hash<S>>
std::vector<S> bfs_states(const Sts<S>& sts, std::size_t max_states) {
  std::vector<S> states{sts.init};
  std::unordered_set<S, Hash> seen{sts.init};
  for (std::size_t i = 0; i < states.size() && states.size() < max_states; ++i) {
    const S cur = states[i];
    for (S& nx : sts.successors(cur))
      if (seen.insert(nx).second) states.push_back(std::move(nx));
  }
  return states;
}

/// Random walk of at most `depth` steps; stops early at dead ends.
template <class S, class Rand>
FiniteTrace<S> random_walk(const Sts<S>& sts, std::size_t depth, Rand& rng) {
  FiniteTrace<S> t(sts.init);
  for (std::size_t i = 0; i < depth; ++i) {
    auto succ = sts.successors(t.last());
    if (succ.empty()) break;
    t = t.extend(succ[rng.below(succ.size())]);
  }
  return t;
}

/// Projects a lifted trace and checks it step by step against the base
/// system, where a step may also be a stutter.
template <class L, class B>
bool project_check(const FiniteTrace<L>& lifted, const std::function<B(const L&)>& project,
                   const StepOracle<B>& base_step) {
  for (std::size_t i = 0; i + 1 < lifted.length(); ++i) {
    B a = project(lifted[i]);
    B b = project(lifted[i + 1]);
    if (!(a == b) && !base_step(a, b)) return false;
  }
  return true;
}

}  // namespace trellis
