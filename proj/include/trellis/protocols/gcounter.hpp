#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "trellis/model.hpp"
#include "trellis/refinement.hpp"

namespace trellis::gc {

using Vec = std::vector<std::int64_t>;

Vec vect_inc(const Vec& v, std::size_t i);
std::int64_t vect_sum(const Vec& v);
/// Pointwise max. Throws on length mismatch.
Vec merge(const Vec& a, const Vec& b);
/// Pointwise <=. Throws on length mismatch.
bool leq(const Vec& a, const Vec& b);
/// "<n>|v0,v1,..."
std::string ser(const Vec& v);
/// Throws std::invalid_argument on malformed input.
Vec deser(const std::string& s);

/// Row i is replica i's view.
using GcState = std::vector<Vec>;

GcState gc_init(std::size_t n);
GcState gc_incr(const GcState& s, std::size_t i);
/// Null unless v is below some row.
std::optional<GcState> gc_apply(const GcState& s, std::size_t i, const Vec& v);
/// Every IncrStep, plus ApplyStep with v drawn from `pool`.
std::vector<GcState> gc_successors(const GcState& s, const std::vector<Vec>& pool);
/// Applies draw from the current rows.
Sts<GcState> gc_model(std::size_t n);
std::string show(const GcState& s);

struct GcConfig {
  int replicas = 3;
  int incrs = 5;
  std::uint16_t port = 80;
};

inline std::string replica_ip(int i) { return "r" + std::to_string(i); }

/// One main thread per replica: installs, forks apply and broadcast, then
/// runs the client (incr; query) `incrs` times and halts with its last query.
ConfPtr setup(const GcConfig& c);

struct MatcherOptions {
  /// Fault injection: the n-th IncrStep (1-based) bumps the wrong entry.
  std::optional<std::size_t> diverge_at_incr;
};

Coupling<GcState> coupling(const GcConfig& c, MatcherOptions o = {});

/// The four-part main relation. Incremental: one instance per run.
TraceRel<GcState> main_relation(const GcConfig& c);

enum class Verdict { Pass, Fail, Inconclusive };
const char* to_string(Verdict v);

struct WindowReport {
  Verdict verdict = Verdict::Pass;
  std::size_t worst = 0;          // largest observed delay among decided items
  std::size_t undecided = 0;      // items too close to the horizon
  std::string detail;
};

struct GcReport {
  /// Index of the last IncrStep in the model trace (0 if none).
  std::size_t stability = 0;
  Vec stable;                     // the diagonal at the stability point
  bool stab = false;              // diagonal constant from the stability point on
  std::optional<std::size_t> conv_at;  // first index from which all rows equal `stable`
  bool heap_converged = false;    // every heap row equals `stable` at the end
  WindowReport model_fair;
  WindowReport net_fair_del;
  bool clients_done = false;      // every main thread halted
};

struct CheckOptions {
  std::size_t fair_window = 4096;
  std::size_t del_window = 4096;
};

GcReport check(const GcConfig& c, const ExecTrace& ex, const ModelTrace<GcState>& m,
               const CheckOptions& o = {});

/// Bounded NetFairDel over the send and receive events of a trace.
WindowReport net_fair_del(const GcConfig& c, const ExecTrace& ex, std::size_t window);
/// Bounded ModelFair over the model trace.
WindowReport model_fair(const ModelTrace<GcState>& m, std::size_t window);

/// Vector stored at `loc` on node `ip` at a point, if any.
std::optional<Vec> heap_row(const ExecPoint& p, const std::string& ip, Loc loc);

}  // namespace trellis::gc
