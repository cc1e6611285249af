#include "trellis/protocols/paxos.hpp"

#include <algorithm>
#include <map>
#include <set>

namespace trellis::paxos {

using namespace trellis::sdp;

SdpConfig PaxosConfig::sdp() const {
  SdpConfig s;
  s.acceptors = acceptors;
  s.proposers = proposers;
  s.values = static_cast<int>(alphabet.size());
  return s;
}

namespace {

int majority(int n) { return n / 2 + 1; }

class Proposer : public Program<Proposer> {
 public:
  Proposer(const PaxosConfig& c, int p) : c_(c), p_(p), v_(p % static_cast<int>(c.alphabet.size())) {}

  Effect next() const override {
    switch (pc_) {
      case Pc::Socket: return eff::NewSocket{};
      case Pc::Bind: return eff::SocketBind{h_, {proposer_ip(p_), c_.port}};
      case Pc::NonBlocking: return eff::SetBlocking{h_, false, 0.0};
      case Pc::PrepareBallot: return eff::Pure{"prepare-ballot"};
      case Pc::Send1a:
        return eff::Send{h_, serialize(SdpMsg::one_a(bal()), c_.alphabet), {acceptor_ip(i_), c_.port}};
      case Pc::RecvPromises: return eff::Receive{h_};
      case Pc::Send2a:
        return eff::Send{h_, serialize(SdpMsg::two_a(bal(), av_), c_.alphabet), {acceptor_ip(i_), c_.port}};
      case Pc::Done: return eff::Halt{std::int64_t{proposed_ ? av_ : -1}};
    }
    return eff::Halt{};
  }

  void resume(const Outcome& o) override {
    switch (pc_) {
      case Pc::Socket:
        h_ = std::get<std::int64_t>(o.value);
        pc_ = Pc::Bind;
        break;
      case Pc::Bind: pc_ = Pc::NonBlocking; break;
      case Pc::NonBlocking: pc_ = Pc::Send1a; break;
      case Pc::PrepareBallot: pc_ = Pc::Send1a; break;
      case Pc::Send1a:
        if (++i_ == c_.acceptors) {
          i_ = 0;
          polls_ = 0;
          senders_.clear();
          promises_.clear();
          pc_ = Pc::RecvPromises;
        }
        break;
      case Pc::RecvPromises: {
        ++polls_;
        if (o.msg) {
          auto m = deserialize(o.msg->body, c_.alphabet);
          if (m && m->type == MsgType::P1b && m->bal == bal()) {
            senders_.insert(to_string(o.msg->from));
            auto key = m->vote ? std::make_pair(m->vote->bal, m->vote->val) : std::make_pair(Ballot{-1}, -1);
            if (std::find(seen_.begin(), seen_.end(), key) == seen_.end()) {
              seen_.push_back(key);
              promises_.push_back(m->vote);
            }
          }
        }
        if (static_cast<int>(senders_.size()) == majority(c_.acceptors)) {
          auto mp = find_max_promise(promises_);
          av_ = mp ? mp->val : v_;
          proposed_ = true;
          pc_ = Pc::Send2a;
        } else if (polls_ >= c_.poll_budget) {
          seen_.clear();
          if (++k_ == c_.max_ballots)
            pc_ = Pc::Done;
          else
            pc_ = Pc::PrepareBallot;
        }
        break;
      }
      case Pc::Send2a:
        if (++i_ == c_.acceptors) pc_ = Pc::Done;
        break;
      case Pc::Done: break;
    }
  }

  std::string name() const override { return "paxos-proposer-" + std::to_string(p_); }

 private:
  enum class Pc { Socket, Bind, NonBlocking, PrepareBallot, Send1a, RecvPromises, Send2a, Done };
  Ballot bal() const { return ballot(static_cast<std::uint64_t>(k_), p_, c_.proposers); }

  PaxosConfig c_;
  int p_;
  Val v_;
  Pc pc_ = Pc::Socket;
  Handle h_ = -1;
  int k_ = 0;
  int i_ = 0;
  int polls_ = 0;
  std::set<std::string> senders_;
  std::vector<std::optional<Vote>> promises_;
  std::vector<std::pair<Ballot, Val>> seen_;
  Val av_ = 0;
  bool proposed_ = false;
};

class Acceptor : public Program<Acceptor> {
 public:
  Acceptor(const PaxosConfig& c, int a) : c_(c), a_(a) {}

  Effect next() const override {
    switch (pc_) {
      case Pc::Socket: return eff::NewSocket{};
      case Pc::Bind: return eff::SocketBind{h_, {acceptor_ip(a_), c_.port}};
      case Pc::Recv: return eff::Receive{h_};
      case Pc::Reply: return eff::Send{h_, out_, reply_to_};
      case Pc::ToLearners: return eff::Send{h_, out_, {learner_ip(i_), c_.port}};
    }
    return eff::Halt{};
  }

  void resume(const Outcome& o) override {
    switch (pc_) {
      case Pc::Socket:
        h_ = std::get<std::int64_t>(o.value);
        pc_ = Pc::Bind;
        break;
      case Pc::Bind: pc_ = Pc::Recv; break;
      case Pc::Recv: {
        auto m = deserialize(o.msg->body, c_.alphabet);
        if (!m) break;
        if (m->type == MsgType::P1a && (!max_bal_ || *max_bal_ < m->bal)) {
          max_bal_ = m->bal;
          out_ = serialize(SdpMsg::one_b(a_, m->bal, max_val_), c_.alphabet);
          reply_to_ = o.msg->from;
          pc_ = Pc::Reply;
        } else if (m->type == MsgType::P2a && (!max_bal_ || *max_bal_ <= m->bal)) {
          max_bal_ = m->bal;
          max_val_ = Vote{m->bal, m->val};
          out_ = serialize(SdpMsg::two_b(a_, m->bal, m->val), c_.alphabet);
          i_ = 0;
          if (c_.learners > 0) pc_ = Pc::ToLearners;
        }
        break;
      }
      case Pc::Reply: pc_ = Pc::Recv; break;
      case Pc::ToLearners:
        if (++i_ == c_.learners) pc_ = Pc::Recv;
        break;
    }
  }

  std::string name() const override { return "paxos-acceptor-" + std::to_string(a_); }

 private:
  enum class Pc { Socket, Bind, Recv, Reply, ToLearners };
  PaxosConfig c_;
  int a_;
  Pc pc_ = Pc::Socket;
  Handle h_ = -1;
  std::optional<Ballot> max_bal_;
  std::optional<Vote> max_val_;
  std::string out_;
  SocketAddr reply_to_;
  int i_ = 0;
};

class Learner : public Program<Learner> {
 public:
  Learner(const PaxosConfig& c, int l) : c_(c), l_(l) {}

  Effect next() const override {
    switch (pc_) {
      case Pc::Socket: return eff::NewSocket{};
      case Pc::Bind: return eff::SocketBind{h_, {learner_ip(l_), c_.port}};
      case Pc::Recv: return eff::Receive{h_};
      case Pc::Report:
        return eff::Send{h_, "learned:" + std::to_string(bal_) + ":" + c_.alphabet.at(val_),
                         {kClientIp, c_.port}};
      case Pc::Done: return eff::Halt{c_.alphabet.at(val_)};
    }
    return eff::Halt{};
  }

  void resume(const Outcome& o) override {
    switch (pc_) {
      case Pc::Socket:
        h_ = std::get<std::int64_t>(o.value);
        pc_ = Pc::Bind;
        break;
      case Pc::Bind: pc_ = Pc::Recv; break;
      case Pc::Recv: {
        auto m = deserialize(o.msg->body, c_.alphabet);
        if (!m || m->type != MsgType::P2b) break;
        auto& vs = votes_[m->bal];
        vs.insert(to_string(o.msg->from));
        if (static_cast<int>(vs.size()) == majority(c_.acceptors)) {
          bal_ = m->bal;
          val_ = m->val;
          pc_ = Pc::Report;
        }
        break;
      }
      case Pc::Report: pc_ = Pc::Done; break;
      case Pc::Done: break;
    }
  }

  std::string name() const override { return "paxos-learner-" + std::to_string(l_); }

 private:
  enum class Pc { Socket, Bind, Recv, Report, Done };
  PaxosConfig c_;
  int l_;
  Pc pc_ = Pc::Socket;
  Handle h_ = -1;
  std::map<Ballot, std::set<std::string>> votes_;
  Ballot bal_ = 0;
  Val val_ = 0;
};

std::string learned_value(const std::string& body) {
  auto p = body.rfind(':');
  return p == std::string::npos ? std::string() : body.substr(p + 1);
}

class Client : public Program<Client> {
 public:
  explicit Client(const PaxosConfig& c) : c_(c) {}

  Effect next() const override {
    switch (pc_) {
      case Pc::Socket: return eff::NewSocket{};
      case Pc::Bind: return eff::SocketBind{h_, {kClientIp, c_.port}};
      case Pc::First:
      case Pc::Second: return eff::Receive{h_};
      case Pc::Check: return eff::Assert{v1_ == v2_, "learners disagree: " + v1_ + " vs " + v2_};
      case Pc::Done: return eff::Halt{v1_};
    }
    return eff::Halt{};
  }

  void resume(const Outcome& o) override {
    switch (pc_) {
      case Pc::Socket:
        h_ = std::get<std::int64_t>(o.value);
        pc_ = Pc::Bind;
        break;
      case Pc::Bind: pc_ = Pc::First; break;
      case Pc::First:
        sndr1_ = o.msg->from;
        v1_ = learned_value(o.msg->body);
        pc_ = Pc::Second;
        break;
      case Pc::Second:
        if (o.msg->from != sndr1_) {
          v2_ = learned_value(o.msg->body);
          pc_ = Pc::Check;
        }
        break;
      case Pc::Check: pc_ = Pc::Done; break;
      case Pc::Done: break;
    }
  }

  std::string name() const override { return "paxos-client"; }

 private:
  enum class Pc { Socket, Bind, First, Second, Check, Done };
  PaxosConfig c_;
  Pc pc_ = Pc::Socket;
  Handle h_ = -1;
  SocketAddr sndr1_;
  std::string v1_, v2_;
};

int proposer_of(const Configuration& c, Tid tid) {
  const ThreadSlot* t = c.thread(tid);
  if (!t) return -1;
  const std::string prefix = "paxos-proposer-";
  std::string n = t->prog->name();
  if (n.rfind(prefix, 0) != 0) return -1;
  return std::stoi(n.substr(prefix.size()));
}

}  // namespace

ConfPtr setup(const PaxosConfig& c) {
  auto conf = std::make_shared<Configuration>();
  for (int p = 0; p < c.proposers; ++p) {
    conf->add_node(proposer_ip(p));
    conf->add_thread(proposer_ip(p), std::make_shared<Proposer>(c, p));
  }
  for (int a = 0; a < c.acceptors; ++a) {
    conf->add_node(acceptor_ip(a));
    conf->add_thread(acceptor_ip(a), std::make_shared<Acceptor>(c, a));
  }
  for (int l = 0; l < c.learners; ++l) {
    conf->add_node(learner_ip(l));
    conf->add_thread(learner_ip(l), std::make_shared<Learner>(c, l));
  }
  conf->add_node(kClientIp);
  conf->add_thread(kClientIp, std::make_shared<Client>(c));
  return conf;
}

Coupling<SdplState> coupling(const PaxosConfig& c, MatcherOptions o) {
  const SdpConfig sc = c.sdp();
  Coupling<SdplState> cp;
  cp.matcher = [c, sc, o](const ExecTrace& ex, const ModelTrace<SdplState>& m) {
    const SdplState& s = m.last();
    const ExecPoint& p = ex.last();
    if (p.effect == EffectKind::Pure && p.via && std::holds_alternative<ThreadStep>(*p.via)) {
      int prop = proposer_of(*p.conf, std::get<ThreadStep>(*p.via).tid);
      if (prop >= 0) return std::vector<SdplState>{sdpl_inc(s, prop)};
    }
    for (const Event& e : p.events) {
      auto* se = std::get_if<SendEv>(&e);
      if (!se) continue;
      auto msg = deserialize(se->msg->body, c.alphabet);
      if (!msg || s.sdp.has(*msg)) return std::vector<SdplState>{s};
      if (o.suppress_first && msg->type == *o.suppress_first) {
        bool first = std::none_of(s.sdp.msgs.begin(), s.sdp.msgs.end(), [&](std::uint64_t k) {
          return SdpMsg::unpack(k).type == *o.suppress_first;
        });
        if (first) return std::vector<SdplState>{s};
      }
      auto t = sdpl_add(sc, s, *msg);
      if (!t) return std::vector<SdplState>{};
      return std::vector<SdplState>{std::move(*t)};
    }
    return std::vector<SdplState>{s};
  };
  cp.show = [](const SdplState& s) { return show(s); };
  return cp;
}

TraceRel<SdplState> relation(const PaxosConfig& c) {
  struct Sum {
    std::vector<std::uint64_t> msgs;  // sorted
    bool malformed = false;
  };
  auto alphabet = c.alphabet;
  auto fold = std::make_shared<PrefixFold<ExecPoint, Sum>>(
      Sum{}, [alphabet](Sum& s, const ExecPoint& p, std::size_t) {
        for (const Event& e : p.events) {
          auto* se = std::get_if<SendEv>(&e);
          if (!se || se->msg->body.rfind("learned:", 0) == 0) continue;
          auto m = deserialize(se->msg->body, alphabet);
          if (!m) {
            s.malformed = true;
            continue;
          }
          auto k = m->pack();
          auto it = std::lower_bound(s.msgs.begin(), s.msgs.end(), k);
          if (it == s.msgs.end() || *it != k) s.msgs.insert(it, k);
        }
      });
  return [fold](const ExecTrace& ex, const ModelTrace<SdplState>& m) {
    Sum s = fold->get(ex);
    return !s.malformed && s.msgs == m.last().sdp.msgs;
  };
}

std::vector<std::pair<std::string, std::string>> learned(const ExecTrace& ex) {
  std::vector<std::pair<std::string, std::string>> out;
  for (const Event& e : events_of(ex, any_event())) {
    auto* se = std::get_if<SendEv>(&e);
    if (!se || se->msg->body.rfind("learned:", 0) != 0) continue;
    const std::string& b = se->msg->body;
    auto p1 = b.find(':'), p2 = b.rfind(':');
    out.push_back({b.substr(p1 + 1, p2 - p1 - 1), b.substr(p2 + 1)});
  }
  return out;
}

bool learners_agree(const ExecTrace& ex) {
  auto l = learned(ex);
  return std::all_of(l.begin(), l.end(), [&](auto& x) { return x.second == l.front().second; });
}

bool chosen_wire_consistent(const PaxosConfig& c, const ExecTrace& ex) {
  SdpState s = sdp_init(c.sdp());
  for (const Event& e : events_of(ex, any_event())) {
    auto* se = std::get_if<SendEv>(&e);
    if (!se) continue;
    auto m = deserialize(se->msg->body, c.alphabet);
    if (m && m->type == MsgType::P2b) s.msgs.push_back(m->pack());
  }
  std::sort(s.msgs.begin(), s.msgs.end());
  s.msgs.erase(std::unique(s.msgs.begin(), s.msgs.end()), s.msgs.end());
  return consistent(c.sdp(), s);
}

}  // namespace trellis::paxos
