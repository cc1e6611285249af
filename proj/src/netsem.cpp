#include "trellis/netsem.hpp"

#include <algorithm>
#include <sstream>

namespace trellis {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

std::uint64_t fnv(std::uint64_t h, const std::string& s) {
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  return h;
}

[[noreturn]] void stuck(const std::string& why) {
  throw StepError(StepError::Kind::Stuck, why);
}

SocketState& socket_of(NodeState& n, Handle h, const char* op) {
  auto it = n.sockets.find(h);
  if (it == n.sockets.end()) stuck(std::string(op) + ": unknown socket handle");
  return it->second;
}

}  // namespace

std::string show_value(const Value& v) {
  return std::visit(overloaded{
                        [](std::monostate) { return std::string("()"); },
                        [](std::int64_t i) { return std::to_string(i); },
                        [](const std::vector<std::int64_t>& xs) {
                          std::string s = "[";
                          for (std::size_t i = 0; i < xs.size(); ++i) {
                            if (i) s += ",";
                            s += std::to_string(xs[i]);
                          }
                          return s + "]";
                        },
                        [](const std::string& s) { return "\"" + s + "\""; }},
                    v);
}

std::string to_string(const SocketAddr& a) {
  return a.ip + ":" + std::to_string(a.port);
}

const char* to_string(EffectKind k) {
  static const char* names[] = {"pure",   "alloc",       "load",  "store",   "cas",
                                "fork",   "socket",      "bind",  "set_blocking",
                                "send",   "receive",     "assert", "halt", "system"};
  return names[static_cast<int>(k)];
}

std::string to_string(const StepLabel& l) {
  return std::visit(
      overloaded{[](const ThreadStep& s) { return "thread:" + std::to_string(s.tid); },
                 [](const Deliver& d) { return "deliver:" + std::to_string(d.id); },
                 [](const Drop& d) { return "drop:" + std::to_string(d.id); }},
      l);
}

bool operator==(const StepLabel& a, const StepLabel& b) {
  if (a.index() != b.index()) return false;
  return std::visit(
      overloaded{[&](const ThreadStep& s) { return s.tid == std::get<ThreadStep>(b).tid; },
                 [&](const Deliver& d) { return d.id == std::get<Deliver>(b).id; },
                 [&](const Drop& d) { return d.id == std::get<Drop>(b).id; }},
      a);
}

void Configuration::add_node(const std::string& ip) {
  if (!nodes.count(ip)) nodes.emplace(ip, std::make_shared<NodeState>());
}

Tid Configuration::add_thread(const std::string& ip, ProgPtr prog) {
  add_node(ip);
  Tid tid = static_cast<Tid>(threads.size());
  threads.push_back(ThreadSlot{tid, ip, std::move(prog), false, {}});
  return tid;
}

const NodeState& Configuration::node(const std::string& ip) const {
  auto it = nodes.find(ip);
  if (it == nodes.end()) throw std::out_of_range("unknown node " + ip);
  return *it->second;
}

const ThreadSlot* Configuration::thread(Tid tid) const {
  // tids are dense and assigned in order
  if (tid < threads.size() && threads[tid].tid == tid) return &threads[tid];
  for (auto& t : threads)
    if (t.tid == tid) return &t;
  return nullptr;
}

const Message* Configuration::in_soup(MsgId id) const {
  // soup stays sorted by id: appends are increasing, erasure keeps order
  auto it = std::lower_bound(soup.begin(), soup.end(), id,
                             [](const MsgPtr& m, MsgId x) { return m->id < x; });
  return it != soup.end() && (*it)->id == id ? it->get() : nullptr;
}

StepResult step_thread(const ConfPtr& c, Tid tid) {
  const ThreadSlot* slot = c->thread(tid);
  if (!slot || slot->halted)
    throw StepError(StepError::Kind::Precondition, "thread not runnable");
  const Effect eff = slot->prog->next();
  StepResult res;
  res.effect = static_cast<EffectKind>(eff.index());

  // Blocking receive on an empty buffer reduces to itself.
  if (auto* r = std::get_if<eff::Receive>(&eff)) {
    const NodeState& n = c->node(slot->ip);
    auto it = n.sockets.find(r->h);
    if (it == n.sockets.end()) stuck("receive: unknown socket handle");
    if (it->second.buffer.empty() && it->second.blocking) {
      res.conf = c;
      return res;
    }
  }

  auto next = std::make_shared<Configuration>(*c);
  const std::size_t my_idx = static_cast<std::size_t>(slot - c->threads.data());
  const std::string ip = slot->ip;
  std::shared_ptr<NodeState> node;
  auto mut_node = [&]() -> NodeState& {
    if (!node) {
      node = std::make_shared<NodeState>(*next->nodes.at(ip));
      next->nodes[ip] = node;
    }
    return *node;
  };
  Outcome out;

  std::visit(
      overloaded{
          [&](const eff::Pure&) {},
          [&](const eff::Alloc& a) {
            NodeState& n = mut_node();
            Loc l = n.next_loc++;
            n.heap[l] = a.init;
            out.value = static_cast<std::int64_t>(l);
            if (a.label) res.events.push_back(AllocEv{*a.label, l, ip});
          },
          [&](const eff::Load& a) {
            const NodeState& n = *next->nodes.at(ip);
            auto it = n.heap.find(a.loc);
            if (it == n.heap.end()) stuck("load: unallocated location");
            out.value = it->second;
          },
          [&](const eff::Store& a) {
            NodeState& n = mut_node();
            auto it = n.heap.find(a.loc);
            if (it == n.heap.end()) stuck("store: unallocated location");
            it->second = a.v;
          },
          [&](const eff::Cas& a) {
            const NodeState& cur = *next->nodes.at(ip);
            auto it = cur.heap.find(a.loc);
            if (it == cur.heap.end()) stuck("cas: unallocated location");
            if (it->second == a.expect) {
              mut_node().heap[a.loc] = a.desired;
              out.ok = true;
            } else {
              out.ok = false;
            }
            res.ok = out.ok;
          },
          [&](const eff::Fork& f) {
            Tid child = static_cast<Tid>(next->threads.size());
            next->threads.push_back(ThreadSlot{child, ip, f.child, false, {}});
            out.value = static_cast<std::int64_t>(child);
          },
          [&](const eff::NewSocket&) {
            NodeState& n = mut_node();
            Handle h = n.next_handle++;
            n.sockets[h] = SocketState{};
            out.value = static_cast<std::int64_t>(h);
          },
          [&](const eff::SocketBind& b) {
            NodeState& n = mut_node();
            SocketState& s = socket_of(n, b.h, "bind");
            if (s.bound) stuck("bind: socket already bound");
            if (b.addr.ip != ip) stuck("bind: address not local");
            if (n.ports.count(b.addr.port)) stuck("bind: port in use");
            n.ports.insert(b.addr.port);
            s.bound = b.addr;
            s.blocking = true;
          },
          [&](const eff::SetBlocking& b) {
            NodeState& n = mut_node();
            SocketState& s = socket_of(n, b.h, "set_blocking");
            s.blocking = b.blocking;
            s.timeout = b.timeout;
          },
          [&](const eff::Send& s) {
            const NodeState& n = *next->nodes.at(ip);
            auto it = n.sockets.find(s.h);
            if (it == n.sockets.end()) stuck("send: unknown socket handle");
            if (!it->second.bound) stuck("send: unbound socket");
            auto m = std::make_shared<Message>();
            m->id = next->next_msg_id++;
            m->from = *it->second.bound;
            m->to = s.to;
            m->body = s.body;
            next->soup.push_back(m);
            ++next->sent;
            res.events.push_back(SendEv{m});
          },
          [&](const eff::Receive& r) {
            NodeState& n = mut_node();
            SocketState& s = socket_of(n, r.h, "receive");
            if (s.buffer.empty()) return;  // non-blocking: none
            out.msg = s.buffer.front();
            s.buffer.erase(s.buffer.begin());
            ++next->consumed;
            res.events.push_back(RecvEv{out.msg, ip});
          },
          [&](const eff::Assert& a) {
            if (!a.cond)
              throw StepError(StepError::Kind::AssertionFailed, "assert: " + a.what);
          },
          [&](const eff::Halt& h) {
            next->threads[my_idx].halted = true;
            next->threads[my_idx].result = h.result;
          }},
      eff);

  // Fork may have reallocated the thread vector.
  ThreadSlot& me = next->threads[my_idx];
  if (!me.halted) {
    auto p = me.prog->clone();
    p->resume(out);
    me.prog = std::move(p);
  }
  res.conf = std::move(next);
  return res;
}

bool deliverable(const Configuration& c, const Message& m) {
  auto it = c.nodes.find(m.to.ip);
  if (it == c.nodes.end()) return false;
  for (auto& [h, s] : it->second->sockets)
    if (s.bound && *s.bound == m.to) return true;
  return false;
}

ConfPtr sys_deliver(const ConfPtr& c, MsgId id) {
  auto pos = std::find_if(c->soup.begin(), c->soup.end(),
                          [&](const MsgPtr& m) { return m->id == id; });
  if (pos == c->soup.end())
    throw StepError(StepError::Kind::Precondition, "deliver: message not in soup");
  if (!deliverable(*c, **pos))
    throw StepError(StepError::Kind::Precondition, "deliver: no bound destination");
  auto next = std::make_shared<Configuration>(*c);
  MsgPtr m = *pos;
  next->soup.erase(next->soup.begin() + (pos - c->soup.begin()));
  auto node = std::make_shared<NodeState>(*c->nodes.at(m->to.ip));
  for (auto& [h, s] : node->sockets)
    if (s.bound && *s.bound == m->to) {
      s.buffer.push_back(m);
      break;
    }
  next->nodes[m->to.ip] = node;
  return next;
}

ConfPtr sys_drop(const ConfPtr& c, MsgId id) {
  auto pos = std::find_if(c->soup.begin(), c->soup.end(),
                          [&](const MsgPtr& m) { return m->id == id; });
  if (pos == c->soup.end())
    throw StepError(StepError::Kind::Precondition, "drop: message not in soup");
  auto next = std::make_shared<Configuration>(*c);
  next->soup.erase(next->soup.begin() + (pos - c->soup.begin()));
  ++next->dropped;
  return next;
}

StepResult step(const ConfPtr& c, const StepLabel& l) {
  return std::visit(overloaded{[&](const ThreadStep& s) { return step_thread(c, s.tid); },
                               [&](const Deliver& d) {
                                 StepResult r;
                                 r.conf = sys_deliver(c, d.id);
                                 return r;
                               },
                               [&](const Drop& d) {
                                 StepResult r;
                                 r.conf = sys_drop(c, d.id);
                                 return r;
                               }},
                    l);
}

std::vector<StepLabel> enabled_steps(const Configuration& c) {
  std::vector<StepLabel> out;
  for (auto& t : c.threads)
    if (!t.halted) out.push_back(ThreadStep{t.tid});
  for (auto& m : c.soup) {
    if (deliverable(c, *m)) out.push_back(Deliver{m->id});
    out.push_back(Drop{m->id});
  }
  return out;
}

bool blocked_on_receive(const Configuration& c, const ThreadSlot& t) {
  if (t.halted) return false;
  Effect e = t.prog->next();
  auto* r = std::get_if<eff::Receive>(&e);
  if (!r) return false;
  const NodeState& n = c.node(t.ip);
  auto it = n.sockets.find(r->h);
  return it != n.sockets.end() && it->second.blocking && it->second.buffer.empty();
}

bool all_halted(const Configuration& c) {
  for (auto& t : c.threads)
    if (!t.halted) return false;
  return true;
}

bool quiescent(const Configuration& c) {
  if (!c.soup.empty()) return false;
  for (auto& t : c.threads)
    if (!t.halted && !blocked_on_receive(c, t)) return false;
  return true;
}

std::size_t buffered_count(const Configuration& c) {
  std::size_t n = 0;
  for (auto& [ip, node] : c.nodes)
    for (auto& [h, s] : node->sockets) n += s.buffer.size();
  return n;
}

bool conservation_holds(const Configuration& c) {
  return c.sent == c.soup.size() + buffered_count(c) + c.consumed + c.dropped;
}

std::uint64_t node_digest(const NodeState& n) {
  std::ostringstream os;
  for (auto& [l, v] : n.heap) os << l << '=' << show_value(v) << ';';
  os << '|';
  for (auto& [h, s] : n.sockets) {
    os << h << ':' << (s.bound ? to_string(*s.bound) : "-") << ':' << s.blocking << ':';
    for (auto& m : s.buffer) os << m->id << ',';
    os << ';';
  }
  return fnv(1469598103934665603ULL, os.str());
}

}  // namespace trellis
