#include "trellis/protocols/tpc.hpp"

#include <algorithm>
#include <set>

#include "trellis/scheduler.hpp"

namespace trellis::tpc {

const char* to_string(Rm r) {
  switch (r) {
    case Rm::Working: return "W";
    case Rm::Prepared: return "P";
    case Rm::Committed: return "C";
    case Rm::Aborted: return "A";
  }
  return "?";
}

std::size_t TcHash::operator()(const TcState& s) const {
  std::size_t h = 0;
  for (auto r : s) h = h * 4 + static_cast<std::size_t>(r);
  return h;
}

bool can_commit(const TcState& s) {
  return std::all_of(s.begin(), s.end(),
                     [](Rm r) { return r == Rm::Prepared || r == Rm::Committed; });
}

bool not_committed(const TcState& s) {
  return std::none_of(s.begin(), s.end(), [](Rm r) { return r == Rm::Committed; });
}

std::optional<TcState> tc_prepare(const TcState& s, int r) {
  if (s.at(r) != Rm::Working) return std::nullopt;
  TcState t = s;
  t[r] = Rm::Prepared;
  return t;
}

std::optional<TcState> tc_commit(const TcState& s, int r, bool check_can_commit) {
  if (s.at(r) != Rm::Prepared || (check_can_commit && !can_commit(s))) return std::nullopt;
  TcState t = s;
  t[r] = Rm::Committed;
  return t;
}

std::optional<TcState> tc_abort(const TcState& s, int r) {
  if (!(s.at(r) == Rm::Working || s.at(r) == Rm::Prepared) || !not_committed(s))
    return std::nullopt;
  TcState t = s;
  t[r] = Rm::Aborted;
  return t;
}

std::vector<TcState> tc_successors(const TcConfig& c, const TcState& s) {
  std::vector<TcState> out;
  for (int r = 0; r < c.rms; ++r) {
    if (auto t = tc_prepare(s, r)) out.push_back(*t);
    if (auto t = tc_commit(s, r, !c.bug_no_cancommit)) out.push_back(*t);
    if (auto t = tc_abort(s, r)) out.push_back(*t);
  }
  return out;
}

Sts<TcState> tc_model(const TcConfig& c) {
  Sts<TcState> sts;
  sts.init = TcState(c.rms, Rm::Working);
  sts.successors = [c](const TcState& s) { return tc_successors(c, s); };
  sts.show = [](const TcState& s) { return show(s); };
  return sts;
}

bool tc_agreement(const TcState& s) {
  bool c = false, a = false;
  for (auto r : s) {
    c |= r == Rm::Committed;
    a |= r == Rm::Aborted;
  }
  return !(c && a);
}

std::string show(const TcState& s) {
  std::string out;
  for (auto r : s) out += to_string(r);
  return out;
}

// ---- programs ----------------------------------------------------------------

namespace {

SocketAddr rm_addr(int r, std::uint16_t port) { return {rm_ip(r), port}; }
SocketAddr tm_addr(std::uint16_t port) { return {kTmIp, port}; }

class TransactionManager : public Program<TransactionManager> {
 public:
  TransactionManager(int rms, std::uint16_t port) : rms_(rms), port_(port) {}

  Effect next() const override {
    switch (pc_) {
      case Pc::Socket: return eff::NewSocket{};
      case Pc::Bind: return eff::SocketBind{h_, tm_addr(port_)};
      case Pc::SendPrepare: return eff::Send{h_, "PREPARE", rm_addr(i_, port_)};
      case Pc::RecvResps:
      case Pc::RecvAll: return eff::Receive{h_};
      case Pc::SendCommit: return eff::Send{h_, "COMMIT", rm_addr(i_, port_)};
      case Pc::SendAbort: return eff::Send{h_, "ABORT", rm_addr(i_, port_)};
      case Pc::Done: return eff::Halt{std::string(committed_ ? "COMMITTED" : "ABORTED")};
    }
    return eff::Halt{};
  }

  void resume(const Outcome& o) override {
    switch (pc_) {
      case Pc::Socket:
        h_ = std::get<std::int64_t>(o.value);
        pc_ = Pc::Bind;
        break;
      case Pc::Bind: pc_ = Pc::SendPrepare; break;
      case Pc::SendPrepare:
        if (++i_ == rms_) {
          i_ = 0;
          pc_ = Pc::RecvResps;
        }
        break;
      case Pc::RecvResps: {
        if (!fresh(*o.msg)) break;
        if (o.msg->body != "PREPARED") {
          pc_ = Pc::SendAbort;
          break;
        }
        prepared_.insert(o.msg->from.ip);
        if (static_cast<int>(prepared_.size()) == rms_) pc_ = Pc::SendCommit;
        break;
      }
      case Pc::SendCommit:
        if (++i_ == rms_) pc_ = Pc::RecvAll;
        break;
      case Pc::RecvAll:
        if (!fresh(*o.msg)) break;
        acked_.insert(o.msg->from.ip);
        if (static_cast<int>(acked_.size()) == rms_) {
          committed_ = true;
          pc_ = Pc::Done;
        }
        break;
      case Pc::SendAbort:
        if (++i_ == rms_) pc_ = Pc::Done;
        break;
      case Pc::Done: break;
    }
  }

  std::string name() const override { return "tpc-tm"; }

 private:
  enum class Pc { Socket, Bind, SendPrepare, RecvResps, SendCommit, RecvAll, SendAbort, Done };

  // nodup: a (body, sender) pair is delivered to the protocol once
  bool fresh(const Message& m) { return seen_.insert({m.body, to_string(m.from)}).second; }

  int rms_;
  std::uint16_t port_;
  Pc pc_ = Pc::Socket;
  Handle h_ = -1;
  int i_ = 0;
  bool committed_ = false;
  std::set<std::pair<std::string, std::string>> seen_;
  std::set<std::string> prepared_, acked_;
};

class ResourceManager : public Program<ResourceManager> {
 public:
  ResourceManager(int r, bool coin, std::uint16_t port) : r_(r), coin_(coin), port_(port) {}

  Effect next() const override {
    switch (pc_) {
      case Pc::Socket: return eff::NewSocket{};
      case Pc::Bind: return eff::SocketBind{h_, rm_addr(r_, port_)};
      case Pc::RecvFirst:
      case Pc::WaitDecision: return eff::Receive{h_};
      case Pc::Coin: return eff::Pure{"coin_flip"};
      case Pc::SendReply: return eff::Send{h_, reply_, tm_addr(port_)};
      case Pc::Done: return eff::Halt{reply_};
    }
    return eff::Halt{};
  }

  void resume(const Outcome& o) override {
    switch (pc_) {
      case Pc::Socket:
        h_ = std::get<std::int64_t>(o.value);
        pc_ = Pc::Bind;
        break;
      case Pc::Bind: pc_ = Pc::RecvFirst; break;
      case Pc::RecvFirst:
        if (o.msg->body == "ABORT") {
          reply_ = "ABORTED";
          final_ = true;
          pc_ = Pc::SendReply;
        } else {
          pc_ = Pc::Coin;
        }
        break;
      case Pc::Coin:
        reply_ = coin_ ? "PREPARED" : "ABORTED";
        final_ = !coin_;
        pc_ = Pc::SendReply;
        break;
      case Pc::SendReply: pc_ = final_ ? Pc::Done : Pc::WaitDecision; break;
      case Pc::WaitDecision:
        if (o.msg->body == "COMMIT" || o.msg->body == "ABORT") {
          reply_ = o.msg->body == "COMMIT" ? "COMMITTED" : "ABORTED";
          final_ = true;
          pc_ = Pc::SendReply;
        }
        break;
      case Pc::Done: break;
    }
  }

  std::string name() const override { return "tpc-rm" + std::to_string(r_); }

 private:
  enum class Pc { Socket, Bind, RecvFirst, Coin, SendReply, WaitDecision, Done };
  int r_;
  bool coin_;
  std::uint16_t port_;
  Pc pc_ = Pc::Socket;
  Handle h_ = -1;
  std::string reply_;
  bool final_ = false;
};

int rm_index(const std::string& ip) {
  if (ip.rfind("rm", 0) != 0) return -1;
  return std::stoi(ip.substr(2));
}

}  // namespace

std::vector<bool> coins(const TpcConfig& c, std::uint64_t seed) {
  Rng rng(seed ^ 0xc01dc0ffeeULL);
  std::vector<bool> out;
  for (int r = 0; r < c.rms; ++r) {
    bool draw = rng.bernoulli(0.5);
    if (r < static_cast<int>(c.coins.size()) && c.coins[r]) draw = *c.coins[r];
    out.push_back(draw);
  }
  return out;
}

ConfPtr setup(const TpcConfig& c, std::uint64_t seed) {
  auto conf = std::make_shared<Configuration>();
  conf->add_node(kTmIp);
  conf->add_thread(kTmIp, std::make_shared<TransactionManager>(c.rms, c.port));
  auto flips = coins(c, seed);
  for (int r = 0; r < c.rms; ++r) {
    conf->add_node(rm_ip(r));
    conf->add_thread(rm_ip(r), std::make_shared<ResourceManager>(r, flips[r], c.port));
  }
  return conf;
}

Coupling<TcState> coupling(const TpcConfig& c, MatcherOptions o) {
  Coupling<TcState> cp;
  cp.matcher = [c, o](const ExecTrace& ex, const ModelTrace<TcState>& m) {
    const TcState& s = m.last();
    for (const Event& e : ex.last().events) {
      auto* se = std::get_if<SendEv>(&e);
      if (!se || se->msg->to.ip != kTmIp) continue;
      int r = rm_index(se->msg->from.ip);
      if (r < 0 || r >= c.rms) return std::vector<TcState>{};
      std::optional<TcState> t;
      const std::string& b = se->msg->body;
      if (b == "PREPARED") t = tc_prepare(s, r);
      else if (b == "COMMITTED" && !o.forbid_commit) t = tc_commit(s, r);
      else if (b == "ABORTED") t = tc_abort(s, r);
      if (!t) return std::vector<TcState>{};
      return std::vector<TcState>{*t};
    }
    return std::vector<TcState>{s};
  };
  cp.show = [](const TcState& s) { return show(s); };
  return cp;
}

namespace {

// per RM: bit 0 PREPARED, bit 1 COMMITTED, bit 2 ABORTED sent to the TM
void note_sends(std::vector<int>& sent, const ExecPoint& p, int rms) {
  for (const Event& e : p.events) {
    auto* se = std::get_if<SendEv>(&e);
    if (!se || se->msg->to.ip != kTmIp) continue;
    int r = rm_index(se->msg->from.ip);
    if (r < 0 || r >= rms) continue;
    const std::string& b = se->msg->body;
    if (b == "PREPARED") sent[r] |= 1;
    if (b == "COMMITTED") sent[r] |= 2;
    if (b == "ABORTED") sent[r] |= 4;
  }
}

std::optional<TcState> implied(const std::vector<int>& sent) {
  TcState s;
  for (int f : sent) {
    if ((f & 6) == 6) return std::nullopt;
    s.push_back(f & 2 ? Rm::Committed : f & 4 ? Rm::Aborted : f & 1 ? Rm::Prepared : Rm::Working);
  }
  return s;
}

}  // namespace

std::optional<TcState> wire_state(const ExecTrace& ex, int rms) {
  std::vector<int> sent(rms, 0);
  for (const auto& p : ex) note_sends(sent, p, rms);
  return implied(sent);
}

bool wire_agreement(const ExecTrace& ex, int rms) {
  auto s = wire_state(ex, rms);
  return s && tc_agreement(*s);
}

TraceRel<TcState> relation(int rms) {
  auto fold = std::make_shared<PrefixFold<ExecPoint, std::vector<int>>>(
      std::vector<int>(rms, 0),
      [rms](std::vector<int>& sent, const ExecPoint& p, std::size_t) { note_sends(sent, p, rms); });
  return [fold](const ExecTrace& ex, const ModelTrace<TcState>& m) {
    auto s = implied(fold->get(ex));
    return s && tc_agreement(*s) && *s == m.last() && tc_agreement(m.last());
  };
}

}  // namespace trellis::tpc
