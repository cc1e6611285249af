#include "trellis/protocols/gcounter.hpp"

#include <algorithm>
#include <charconv>
#include <limits>
#include <map>
#include <stdexcept>
#include <string_view>

namespace trellis::gc {

Vec vect_inc(const Vec& v, std::size_t i) {
  Vec w = v;
  ++w.at(i);
  return w;
}

std::int64_t vect_sum(const Vec& v) {
  std::int64_t s = 0;
  for (auto x : v) s += x;
  return s;
}

Vec merge(const Vec& a, const Vec& b) {
  if (a.size() != b.size()) throw std::invalid_argument("merge: length mismatch");
  Vec out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = std::max(a[i], b[i]);
  return out;
}

bool leq(const Vec& a, const Vec& b) {
  if (a.size() != b.size()) throw std::invalid_argument("leq: length mismatch");
  for (std::size_t i = 0; i < a.size(); ++i)
    if (a[i] > b[i]) return false;
  return true;
}

std::string ser(const Vec& v) {
  std::string s = std::to_string(v.size()) + "|";
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += ',';
    s += std::to_string(v[i]);
  }
  return s;
}

namespace {

std::int64_t parse_int(std::string_view s, const char* what) {
  std::int64_t x = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), x);
  if (s.empty() || ec != std::errc() || p != s.data() + s.size())
    throw std::invalid_argument(std::string("deser: bad ") + what);
  return x;
}

}  // namespace

Vec deser(const std::string& s) {
  auto bar = s.find('|');
  if (bar == std::string::npos) throw std::invalid_argument("deser: missing length");
  std::int64_t n = parse_int(std::string_view(s).substr(0, bar), "length");
  if (n < 0) throw std::invalid_argument("deser: negative length");
  std::string_view rest = std::string_view(s).substr(bar + 1);
  Vec v;
  if (n == 0) {
    if (!rest.empty()) throw std::invalid_argument("deser: trailing data");
    return v;
  }
  while (true) {
    auto comma = rest.find(',');
    v.push_back(parse_int(rest.substr(0, comma), "entry"));
    if (v.back() < 0) throw std::invalid_argument("deser: negative entry");
    if (comma == std::string_view::npos) break;
    rest = rest.substr(comma + 1);
  }
  if (static_cast<std::int64_t>(v.size()) != n)
    throw std::invalid_argument("deser: length prefix disagrees");
  return v;
}

GcState gc_init(std::size_t n) { return GcState(n, Vec(n, 0)); }

GcState gc_incr(const GcState& s, std::size_t i) {
  GcState t = s;
  ++t.at(i).at(i);
  return t;
}

std::optional<GcState> gc_apply(const GcState& s, std::size_t i, const Vec& v) {
  bool below = std::any_of(s.begin(), s.end(), [&](const Vec& r) { return leq(v, r); });
  if (!below) return std::nullopt;
  GcState t = s;
  t.at(i) = merge(t[i], v);
  return t;
}

std::vector<GcState> gc_successors(const GcState& s, const std::vector<Vec>& pool) {
  std::vector<GcState> out;
  for (std::size_t i = 0; i < s.size(); ++i) {
    out.push_back(gc_incr(s, i));
    for (auto& v : pool)
      if (auto t = gc_apply(s, i, v)) {
        if (std::find(out.begin(), out.end(), *t) == out.end()) out.push_back(std::move(*t));
      }
  }
  return out;
}

Sts<GcState> gc_model(std::size_t n) {
  Sts<GcState> sts;
  sts.init = gc_init(n);
  sts.successors = [](const GcState& s) { return gc_successors(s, s); };
  sts.show = [](const GcState& s) { return show(s); };
  return sts;
}

std::string show(const GcState& s) {
  std::string out = "[";
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (i) out += ' ';
    out += '[';
    for (std::size_t j = 0; j < s[i].size(); ++j) {
      if (j) out += ',';
      out += std::to_string(s[i][j]);
    }
    out += ']';
  }
  return out + "]";
}

// ---- programs ----------------------------------------------------------------

namespace {

const std::string kMain = "gc-main-";
const std::string kApply = "gc-apply-";
const std::string kBcast = "gc-broadcast-";

class Apply : public Program<Apply> {
 public:
  Apply(int i, Loc loc, Handle h) : i_(i), loc_(loc), h_(h) {}

  Effect next() const override {
    switch (pc_) {
      case 0: return eff::Receive{h_};
      case 1: return eff::Load{loc_};
      default: return eff::Cas{loc_, seen_, merge(seen_, incoming_)};
    }
  }
  void resume(const Outcome& o) override {
    switch (pc_) {
      case 0:
        try {
          incoming_ = deser(o.msg->body);
        } catch (const std::invalid_argument& e) {
          throw StepError(StepError::Kind::Stuck, e.what());
        }
        pc_ = 1;
        break;
      case 1:
        seen_ = std::get<Vec>(o.value);
        if (seen_.size() != incoming_.size())
          throw StepError(StepError::Kind::Stuck, "apply: vector length mismatch");
        pc_ = 2;
        break;
      default: pc_ = o.ok ? 0 : 1; break;
    }
  }
  std::string name() const override { return kApply + std::to_string(i_); }
  int priority() const override { return 3; }

 private:
  int i_;
  Loc loc_;
  Handle h_;
  int pc_ = 0;
  Vec incoming_, seen_;
};

constexpr int kHeartbeat = 8;

class Broadcast : public Program<Broadcast> {
 public:
  Broadcast(int i, int n, Loc loc, Handle h, std::uint16_t port)
      : i_(i), n_(n), loc_(loc), h_(h), port_(port) {}

  Effect next() const override {
    if (to_ < 0) return eff::Load{loc_};
    return eff::Send{h_, body_, SocketAddr{replica_ip(to_), port_}};
  }
  void resume(const Outcome& o) override {
    if (to_ < 0) {
      const Vec& v = std::get<Vec>(o.value);
      // unchanged since the last round: skip, but resend every kHeartbeat loads
      if (v == last_ && ++idle_ < kHeartbeat) return;
      idle_ = 0;
      last_ = v;
      body_ = ser(v);
    }
    to_ = next_peer(to_);
  }
  std::string name() const override { return kBcast + std::to_string(i_); }

 private:
  int next_peer(int j) const {
    for (++j; j < n_; ++j)
      if (j != i_) return j;
    return -1;
  }
  int i_, n_;
  Loc loc_;
  Handle h_;
  std::uint16_t port_;
  int to_ = -1;  // -1: load next
  std::string body_;
  Vec last_;
  int idle_ = 0;
};

class Main : public Program<Main> {
 public:
  Main(int i, int n, int incrs, std::uint16_t port) : i_(i), n_(n), incrs_(incrs), port_(port) {}

  enum class Pc { Alloc, Socket, Bind, ForkApply, ForkBcast, IncLoad, IncCas, QLoad, QCheck, Done };

  Effect next() const override {
    switch (pc_) {
      case Pc::Alloc: return eff::Alloc{std::to_string(i_), Vec(n_, 0)};
      case Pc::Socket: return eff::NewSocket{};
      case Pc::Bind: return eff::SocketBind{h_, SocketAddr{replica_ip(i_), port_}};
      case Pc::ForkApply: return eff::Fork{std::make_shared<Apply>(i_, loc_, h_)};
      case Pc::ForkBcast: return eff::Fork{std::make_shared<Broadcast>(i_, n_, loc_, h_, port_)};
      case Pc::IncLoad:
      case Pc::QLoad: return eff::Load{loc_};
      case Pc::IncCas: return eff::Cas{loc_, seen_, vect_inc(seen_, i_)};
      case Pc::QCheck: return eff::Assert{query_ >= last_query_, "query decreased"};
      case Pc::Done: return eff::Halt{last_query_};
    }
    return eff::Halt{};
  }
  void resume(const Outcome& o) override {
    switch (pc_) {
      case Pc::Alloc: loc_ = std::get<std::int64_t>(o.value); pc_ = Pc::Socket; break;
      case Pc::Socket: h_ = std::get<std::int64_t>(o.value); pc_ = Pc::Bind; break;
      case Pc::Bind: pc_ = Pc::ForkApply; break;
      case Pc::ForkApply: pc_ = Pc::ForkBcast; break;
      case Pc::ForkBcast: pc_ = incrs_ > 0 ? Pc::IncLoad : Pc::Done; break;
      case Pc::IncLoad: seen_ = std::get<Vec>(o.value); pc_ = Pc::IncCas; break;
      case Pc::IncCas: pc_ = o.ok ? Pc::QLoad : Pc::IncLoad; break;
      case Pc::QLoad: query_ = vect_sum(std::get<Vec>(o.value)); pc_ = Pc::QCheck; break;
      case Pc::QCheck:
        last_query_ = query_;
        pc_ = ++done_ < incrs_ ? Pc::IncLoad : Pc::Done;
        break;
      case Pc::Done: break;
    }
  }
  std::string name() const override { return kMain + std::to_string(i_); }

 private:
  int i_, n_, incrs_;
  std::uint16_t port_;
  Pc pc_ = Pc::Alloc;
  Loc loc_ = -1;
  Handle h_ = -1;
  Vec seen_;
  int done_ = 0;
  std::int64_t query_ = 0, last_query_ = 0;
};

/// Replica index encoded in a thread name with the given prefix, or -1.
int role_index(const std::string& name, const std::string& prefix) {
  if (name.compare(0, prefix.size(), prefix) != 0) return -1;
  return std::stoi(name.substr(prefix.size()));
}

int replica_of_ip(const std::string& ip, int n) {
  if (ip.size() < 2 || ip[0] != 'r') return -1;
  int i = 0;
  auto [p, ec] = std::from_chars(ip.data() + 1, ip.data() + ip.size(), i);
  if (ec != std::errc() || p != ip.data() + ip.size() || i < 0 || i >= n) return -1;
  return i;
}

}  // namespace

ConfPtr setup(const GcConfig& c) {
  auto conf = std::make_shared<Configuration>();
  for (int i = 0; i < c.replicas; ++i) conf->add_node(replica_ip(i));
  for (int i = 0; i < c.replicas; ++i)
    conf->add_thread(replica_ip(i), std::make_shared<Main>(i, c.replicas, c.incrs, c.port));
  return conf;
}

std::optional<Vec> heap_row(const ExecPoint& p, const std::string& ip, Loc loc) {
  const auto& h = p.conf->node(ip).heap;
  auto it = h.find(loc);
  if (it == h.end()) return std::nullopt;
  if (auto* v = std::get_if<Vec>(&it->second)) return *v;
  return std::nullopt;
}

// ---- coupling ----------------------------------------------------------------

Coupling<GcState> coupling(const GcConfig& c, MatcherOptions o) {
  const int n = c.replicas;
  // last vector received at each node
  auto last_recv = std::make_shared<PrefixFold<ExecPoint, std::vector<std::optional<Vec>>>>(
      std::vector<std::optional<Vec>>(n),
      [n](std::vector<std::optional<Vec>>& s, const ExecPoint& p, std::size_t) {
        for (auto& e : p.events)
          if (auto* r = std::get_if<RecvEv>(&e)) {
            int i = replica_of_ip(r->ip, n);
            if (i < 0) continue;
            try {
              s[i] = deser(r->msg->body);
            } catch (const std::invalid_argument&) {
              s[i].reset();
            }
          }
      });
  auto incr_count = std::make_shared<std::size_t>(0);
  Coupling<GcState> cp;
  cp.matcher = [n, o, last_recv, incr_count](const ExecTrace& ex,
                                               const ModelTrace<GcState>& m) {
    const ExecPoint& p = ex.last();
    const GcState& s = m.last();
    auto* ts = p.via ? std::get_if<ThreadStep>(&*p.via) : nullptr;
    if (!ts || p.effect != EffectKind::Cas || !p.ok) return std::vector<GcState>{s};
    std::string name = p.conf->thread(ts->tid)->prog->name();
    if (int i = role_index(name, kMain); i >= 0) {
      // the matcher is only asked once per accepted step, so this counts IncrSteps
      if (o.diverge_at_incr && ++*incr_count == *o.diverge_at_incr)
        return std::vector<GcState>{gc_incr(s, (i + 1) % n)};
      return std::vector<GcState>{gc_incr(s, i)};
    }
    if (int i = role_index(name, kApply); i >= 0) {
      auto got = last_recv->get(ex);
      if (!got[i] || got[i]->size() != s[i].size()) return std::vector<GcState>{};
      if (auto t = gc_apply(s, i, *got[i])) return std::vector<GcState>{*t};
      return std::vector<GcState>{};
    }
    return std::vector<GcState>{s};
  };
  cp.show = [](const GcState& s) { return show(s); };
  return cp;
}

// ---- main relation -----------------------------------------------------------

namespace {

struct RelSummary {
  bool bad = false;
  std::vector<std::optional<Loc>> loc;
  std::vector<std::optional<Vec>> floor;  // n*n: join of heap_i at earlier i->j sends
  std::vector<Vec> recv_but_last;
  std::vector<std::optional<Vec>> last;
};

}  // namespace

TraceRel<GcState> main_relation(const GcConfig& c) {
  const int n = c.replicas;
  RelSummary init;
  init.loc.resize(n);
  init.floor.resize(static_cast<std::size_t>(n) * n);
  init.recv_but_last.assign(n, Vec(n, 0));
  init.last.resize(n);
  auto step = [n](RelSummary& s, const ExecPoint& p, const GcState& ms, std::size_t) {
    if (s.bad) return;
    std::vector<std::optional<Vec>> heap(n);
    auto heap_of = [&](int i) -> const std::optional<Vec>& {
      if (!heap[i] && s.loc[i]) heap[i] = heap_row(p, replica_ip(i), *s.loc[i]);
      return heap[i];
    };
    for (auto& e : p.events) {
      if (auto* a = std::get_if<AllocEv>(&e)) {
        int i = replica_of_ip("r" + a->label, n);
        if (i < 0) continue;
        // (1) unique, and on its own node
        if (s.loc[i] || a->ip != replica_ip(i)) {
          s.bad = true;
          return;
        }
        s.loc[i] = a->loc;
      } else if (auto* se = std::get_if<SendEv>(&e)) {
        int i = replica_of_ip(se->msg->from.ip, n);
        if (i < 0) continue;
        if (!s.loc[i]) {
          s.bad = true;
          return;
        }
        int j = replica_of_ip(se->msg->to.ip, n);
        if (j < 0) continue;
        Vec v;
        try {
          v = deser(se->msg->body);
        } catch (const std::invalid_argument&) {
          s.bad = true;
          return;
        }
        auto& fl = s.floor[i * n + j];
        auto& h = heap_of(i);
        if (!h || v.size() != h->size() || (fl && !leq(*fl, v))) {  // (2)
          s.bad = true;
          return;
        }
        fl = fl ? merge(*fl, *h) : *h;
      } else if (auto* r = std::get_if<RecvEv>(&e)) {
        int i = replica_of_ip(r->ip, n);
        if (i < 0) continue;
        if (!s.loc[i]) {
          s.bad = true;
          return;
        }
        Vec v;
        try {
          v = deser(r->msg->body);
        } catch (const std::invalid_argument&) {
          s.bad = true;
          return;
        }
        if (v.size() != static_cast<std::size_t>(n)) {
          s.bad = true;
          return;
        }
        if (s.last[i]) s.recv_but_last[i] = merge(s.recv_but_last[i], *s.last[i]);
        s.last[i] = std::move(v);
      }
    }
    for (int i = 0; i < n; ++i) {
      const auto& h = heap_of(i);
      if (!h) {
        if (s.loc[i] || ms[i] != Vec(n, 0)) s.bad = true;  // all-zero before allocation
      } else if (!leq(s.recv_but_last[i], *h) || *h != ms[i]) {  // (3), (4)
        s.bad = true;
      }
      if (s.bad) return;
    }
  };
  auto fold = std::make_shared<PairFold<ExecPoint, GcState, RelSummary>>(init, step);
  return [fold](const ExecTrace& ex, const ModelTrace<GcState>& m) {
    return !fold->get(ex, m).bad;
  };
}

// ---- checkers ----------------------------------------------------------------

const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::Pass: return "pass";
    case Verdict::Fail: return "fail";
    case Verdict::Inconclusive: return "inconclusive";
  }
  return "?";
}

WindowReport net_fair_del(const GcConfig& c, const ExecTrace& ex, std::size_t window) {
  const int n = c.replicas;
  const std::size_t H = ex.length() - 1;
  struct Send { std::size_t at; MsgId id; };
  std::map<std::pair<int, int>, std::vector<Send>> sends;
  std::map<MsgId, std::size_t> recv_at;
  for (std::size_t k = 0; k < ex.length(); ++k)
    for (auto& e : ex[k].events) {
      if (auto* s = std::get_if<SendEv>(&e)) {
        int i = replica_of_ip(s->msg->from.ip, n), j = replica_of_ip(s->msg->to.ip, n);
        if (i >= 0 && j >= 0) sends[{i, j}].push_back({k, s->msg->id});
      } else if (auto* r = std::get_if<RecvEv>(&e)) {
        recv_at.emplace(r->msg->id, k);
      }
    }
  WindowReport rep;
  const std::size_t never = std::numeric_limits<std::size_t>::max();
  for (auto& [route, list] : sends) {
    // suffix minimum of receive indices over this route's sends
    std::vector<std::size_t> best(list.size() + 1, never);
    for (std::size_t q = list.size(); q-- > 0;) {
      auto it = recv_at.find(list[q].id);
      best[q] = std::min(best[q + 1], it == recv_at.end() ? never : it->second);
    }
    for (std::size_t q = 0; q < list.size(); ++q) {
      const std::size_t k = list[q].at;
      if (best[q] != never && best[q] - k <= window) {
        rep.worst = std::max(rep.worst, best[q] - k);
        continue;
      }
      if (k + window > H) {
        ++rep.undecided;
        continue;
      }
      if (rep.verdict != Verdict::Fail)
        rep.detail = "send r" + std::to_string(route.first) + "->r" +
                     std::to_string(route.second) + " at " + std::to_string(k) +
                     " has no delivered successor within " + std::to_string(window);
      rep.verdict = Verdict::Fail;
    }
  }
  if (rep.verdict == Verdict::Pass && sends.empty() && H < window)
    rep.verdict = Verdict::Inconclusive;
  return rep;
}

WindowReport model_fair(const ModelTrace<GcState>& m, std::size_t window) {
  WindowReport rep;
  const std::size_t H = m.length() - 1;
  const std::size_t n = m.first().size();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      std::size_t ptr = 0;
      for (std::size_t s = 0; s <= H; ++s) {
        if (s > 0 && m[s][i] == m[s - 1][i]) continue;  // same sample as before
        ptr = std::max(ptr, s);
        while (ptr <= H && !leq(m[s][i], m[ptr][j])) ++ptr;
        if (ptr <= H && ptr - s <= window) {
          rep.worst = std::max(rep.worst, ptr - s);
          continue;
        }
        if (s + window > H) {
          ++rep.undecided;
          continue;
        }
        if (rep.verdict != Verdict::Fail)
          rep.detail = "row " + std::to_string(i) + " at " + std::to_string(s) +
                       " not merged into row " + std::to_string(j) + " within " +
                       std::to_string(window);
        rep.verdict = Verdict::Fail;
      }
    }
  return rep;
}

GcReport check(const GcConfig& c, const ExecTrace& ex, const ModelTrace<GcState>& m,
               const CheckOptions& o) {
  GcReport r;
  const std::size_t n = static_cast<std::size_t>(c.replicas);
  const std::size_t H = m.length() - 1;
  auto diag = [&](std::size_t k) {
    Vec d(n);
    for (std::size_t i = 0; i < n; ++i) d[i] = m[k][i][i];
    return d;
  };
  for (std::size_t k = 1; k <= H; ++k)
    if (diag(k) != diag(k - 1)) r.stability = k;
  r.stable = diag(r.stability);
  r.stab = true;
  for (std::size_t k = r.stability; k <= H && r.stab; ++k) r.stab = diag(k) == r.stable;
  // last index where some row differs from the stable vector
  std::optional<std::size_t> last_off;
  for (std::size_t k = H + 1; k-- > 0;) {
    bool all = std::all_of(m[k].begin(), m[k].end(), [&](const Vec& v) { return v == r.stable; });
    if (!all) {
      last_off = k;
      break;
    }
  }
  if (!last_off) r.conv_at = 0;
  else if (*last_off < H) r.conv_at = *last_off + 1;

  std::vector<std::optional<Loc>> locs(n);
  for (auto& e : events_of(ex, any_event()))
    if (auto* a = std::get_if<AllocEv>(&e)) {
      int i = replica_of_ip("r" + a->label, c.replicas);
      if (i >= 0) locs[i] = a->loc;
    }
  r.heap_converged = true;
  for (std::size_t i = 0; i < n && r.heap_converged; ++i) {
    auto h = locs[i] ? heap_row(ex.last(), replica_ip(static_cast<int>(i)), *locs[i])
                     : std::nullopt;
    r.heap_converged = h && *h == r.stable;
  }
  r.clients_done = true;
  for (auto& t : ex.last().conf->threads)
    if (role_index(t.prog->name(), kMain) >= 0 && !t.halted) r.clients_done = false;
  r.model_fair = model_fair(m, o.fair_window);
  r.net_fair_del = net_fair_del(c, ex, o.del_window);
  return r;
}

}  // namespace trellis::gc
