#pragma once

#include <algorithm>
#include <functional>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "trellis/model.hpp"
#include "trellis/netsem.hpp"
#include "trellis/scheduler.hpp"
#include "trellis/traces.hpp"

namespace trellis {

struct ExecPoint {
  ConfPtr conf;
  std::optional<StepLabel> via;
  std::vector<Event> events;
  EffectKind effect = EffectKind::System;
  bool ok = true;  // Cas outcome of the step that produced this point
};
using ExecTrace = FiniteTrace<ExecPoint>;

template <class MS>
using ModelTrace = FiniteTrace<MS>;

inline ExecTrace exec_start(ConfPtr c) { return ExecTrace(ExecPoint{std::move(c), {}, {}}); }

// ---- event extraction -------------------------------------------------------

using EventSelector = std::function<bool(const Event&)>;

std::vector<Event> events_of(const ExecTrace& t, const EventSelector& sel);
EventSelector any_event();
EventSelector alloc_labeled(std::string label);
EventSelector sends_on_route(std::string src_ip, std::string dst_ip);
EventSelector received_at(std::string ip);
bool same_event(const Event& a, const Event& b);
std::string describe(const Event& e);

// ---- incremental per-prefix summaries ---------------------------------------

/// Caches a fold over the first length-1 elements of a trace so a relation
/// called on every prefix does not rescan history. The last element is folded
/// into a scratch copy, so rejected candidate extensions never pollute the
/// cache. Instances belong to one run.
template <class T, class Summary>
class PrefixFold {
 public:
  using Step = std::function<void(Summary&, const T&, std::size_t)>;

  PrefixFold(Summary init, Step step) : init_(init), sum_(std::move(init)), step_(std::move(step)) {}

  /// Summary of the whole trace.
  Summary get(const FiniteTrace<T>& t) {
    const std::size_t want = t.length() - 1;
    if (t.storage_id() != id_ || want < done_) {
      sum_ = init_;
      done_ = 0;
      id_ = t.storage_id();
    }
    for (; done_ < want; ++done_) step_(sum_, t[done_], done_);
    Summary s = sum_;
    step_(s, t[want], want);
    return s;
  }

 private:
  Summary init_;
  Summary sum_;
  Step step_;
  const void* id_ = nullptr;
  std::size_t done_ = 0;
};

/// PrefixFold over two aligned traces.
template <class A, class B, class Summary>
class PairFold {
 public:
  using Step = std::function<void(Summary&, const A&, const B&, std::size_t)>;

  PairFold(Summary init, Step step) : init_(init), sum_(std::move(init)), step_(std::move(step)) {}

  Summary get(const FiniteTrace<A>& a, const FiniteTrace<B>& b) {
    if (a.length() != b.length()) throw std::invalid_argument("traces are not aligned");
    const std::size_t want = a.length() - 1;
    if (a.storage_id() != ida_ || b.storage_id() != idb_ || want < done_) {
      sum_ = init_;
      done_ = 0;
      ida_ = a.storage_id();
      idb_ = b.storage_id();
    }
    for (; done_ < want; ++done_) step_(sum_, a[done_], b[done_], done_);
    Summary s = sum_;
    step_(s, a[want], b[want], want);
    return s;
  }

 private:
  Summary init_;
  Summary sum_;
  Step step_;
  const void* ida_ = nullptr;
  const void* idb_ = nullptr;
  std::size_t done_ = 0;
};

// ---- coupling ---------------------------------------------------------------

template <class MS>
struct Coupling {
  /// Candidate next model states, given the exec trace already extended
  /// with the new step and the model trace before it.
  std::function<std::vector<MS>(const ExecTrace&, const ModelTrace<MS>&)> matcher;
  /// Optional admissibility filter on candidates (defaults to none).
  std::function<bool(const ModelTrace<MS>&, const MS&)> evolution;
  std::function<std::string(const MS&)> show;
};

template <class MS>
using TraceRel = std::function<bool(const ExecTrace&, const ModelTrace<MS>&)>;

template <class MS>
bool valid_evolution_default(const ModelTrace<MS>& m, const MS& next, const Sts<MS>& sts) {
  return m.last() == next || sts_step(sts, m.last(), next);
}

struct RefinementViolation {
  enum class Kind { NoCandidate, RelationFailed, StuckThread, AssertionFailed, EventLedger };
  std::size_t index = 0;
  Kind kind = Kind::NoCandidate;
  std::string diagnostic;
  std::vector<std::string> exec_tail;
  std::vector<std::string> model_tail;
};
const char* to_string(RefinementViolation::Kind k);
std::string violation_json(const RefinementViolation& v);

struct RunOptions {
  bool stop_when_quiescent = true;
  bool check_event_ledger = true;
  std::size_t tail = 6;
  /// Called after every accepted step.
  std::function<void(const ExecTrace&)> on_step;
};

template <class MS>
struct CoupledRun {
  ExecTrace exec;
  ModelTrace<MS> model;
  std::optional<RefinementViolation> violation;
  std::size_t max_candidates = 0;
  std::size_t steps = 0;
  bool halted = false;     // all threads halted
  bool quiescent = false;  // stopped on quiescence
  bool ok() const { return !violation.has_value(); }
};

std::string describe_point(const ExecPoint& p);

template <class MS>
std::vector<std::string> model_tail(const ModelTrace<MS>& m, const Coupling<MS>& c,
                                    std::size_t n) {
  std::vector<std::string> out;
  const std::size_t from = m.length() > n ? m.length() - n : 0;
  for (std::size_t i = from; i < m.length(); ++i)
    out.push_back(c.show ? c.show(m[i]) : std::to_string(i));
  return out;
}

std::vector<std::string> exec_tail(const ExecTrace& t, std::size_t n);

template <class MS>
CoupledRun<MS> run_coupled(ConfPtr init_conf, MS init_model, const Coupling<MS>& coupling,
                           const TraceRel<MS>& rel, Scheduler& sched, std::size_t horizon,
                           const RunOptions& opts = {}) {
  CoupledRun<MS> run{exec_start(std::move(init_conf)), ModelTrace<MS>(std::move(init_model)),
                     std::nullopt};
  auto violate = [&](RefinementViolation::Kind k, std::string why, const ExecTrace& ex,
                     const ModelTrace<MS>& mo) {
    RefinementViolation v;
    v.index = ex.length() - 1;
    v.kind = k;
    v.diagnostic = std::move(why);
    v.exec_tail = exec_tail(ex, opts.tail);
    v.model_tail = model_tail(mo, coupling, opts.tail);
    run.violation = std::move(v);
  };
  if (!rel(run.exec, run.model)) {
    violate(RefinementViolation::Kind::RelationFailed, "relation fails initially", run.exec,
            run.model);
    return run;
  }
  std::vector<Event> ledger;
  while (run.steps < horizon) {
    const Configuration& c = *run.exec.last().conf;
    if (all_halted(c)) {
      run.halted = true;
      break;
    }
    if (opts.stop_when_quiescent && quiescent(c)) {
      run.quiescent = true;
      break;
    }
    StepLabel label = sched.choose(c);
    StepResult r;
    try {
      r = step(run.exec.last().conf, label);
    } catch (const StepError& e) {
      auto ex = run.exec.extend(ExecPoint{run.exec.last().conf, label, {}});
      violate(e.kind == StepError::Kind::AssertionFailed
                  ? RefinementViolation::Kind::AssertionFailed
                  : RefinementViolation::Kind::StuckThread,
              to_string(label) + ": " + e.what(), ex, run.model);
      return run;
    }
    ledger.insert(ledger.end(), r.events.begin(), r.events.end());
    ExecTrace ex2 =
        run.exec.extend(ExecPoint{std::move(r.conf), label, std::move(r.events), r.effect, r.ok});
    std::vector<MS> cands = coupling.matcher(ex2, run.model);
    if (coupling.evolution)
      cands.erase(std::remove_if(cands.begin(), cands.end(),
                                 [&](const MS& m) { return !coupling.evolution(run.model, m); }),
                  cands.end());
    run.max_candidates = std::max(run.max_candidates, cands.size());
    if (cands.empty()) {
      violate(RefinementViolation::Kind::NoCandidate, "no model step matches " + to_string(label),
              ex2, run.model);
      return run;
    }
    bool accepted = false;
    for (auto& cand : cands) {
      ModelTrace<MS> mo2 = run.model.extend(cand);
      if (rel(ex2, mo2)) {
        run.exec = std::move(ex2);
        run.model = std::move(mo2);
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      violate(RefinementViolation::Kind::RelationFailed,
              "no candidate satisfies the relation after " + to_string(label), ex2,
              run.model.extend(cands.front()));
      return run;
    }
    ++run.steps;
    if (opts.on_step) opts.on_step(run.exec);
  }
  if (opts.check_event_ledger) {
    auto extracted = events_of(run.exec, any_event());
    bool same = extracted.size() == ledger.size();
    for (std::size_t i = 0; same && i < ledger.size(); ++i) same = same_event(ledger[i], extracted[i]);
    if (!same)
      violate(RefinementViolation::Kind::EventLedger, "event ledger disagrees with trace",
              run.exec, run.model);
  }
  return run;
}

/// First index at which rel fails on the aligned prefixes, or nullopt.
template <class MS>
std::optional<std::size_t> check_rel_all_prefixes(const TraceRel<MS>& rel, const ExecTrace& exec,
                                                  const ModelTrace<MS>& model) {
  if (exec.length() != model.length())
    throw std::invalid_argument("traces are not aligned");
  for (std::size_t n = 1; n <= exec.length(); ++n)
    if (!rel(exec.prefix(n), model.prefix(n))) return n - 1;
  return std::nullopt;
}

// ---- JSONL export -----------------------------------------------------------

struct TraceExportOptions {
  std::size_t snapshot_every = 0;  // 0: never embed full node state
};

/// One JSON object per step.
void write_exec_jsonl(std::ostream& os, const ExecTrace& t, const TraceExportOptions& o = {});

}  // namespace trellis
