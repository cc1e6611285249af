#include "trellis/refinement.hpp"

#include <json.hpp>

namespace trellis {

using nlohmann::json;

std::vector<Event> events_of(const ExecTrace& t, const EventSelector& sel) {
  std::vector<Event> out;
  for (const auto& p : t)
    for (const auto& e : p.events)
      if (sel(e)) out.push_back(e);
  return out;
}

EventSelector any_event() {
  return [](const Event&) { return true; };
}

EventSelector alloc_labeled(std::string label) {
  return [label = std::move(label)](const Event& e) {
    auto* a = std::get_if<AllocEv>(&e);
    return a && a->label == label;
  };
}

EventSelector sends_on_route(std::string src_ip, std::string dst_ip) {
  return [src = std::move(src_ip), dst = std::move(dst_ip)](const Event& e) {
    auto* s = std::get_if<SendEv>(&e);
    return s && s->msg->from.ip == src && s->msg->to.ip == dst;
  };
}

EventSelector received_at(std::string ip) {
  return [ip = std::move(ip)](const Event& e) {
    auto* r = std::get_if<RecvEv>(&e);
    return r && r->ip == ip;
  };
}

bool same_event(const Event& a, const Event& b) {
  if (a.index() != b.index()) return false;
  if (auto* x = std::get_if<AllocEv>(&a)) {
    auto& y = std::get<AllocEv>(b);
    return x->label == y.label && x->loc == y.loc && x->ip == y.ip;
  }
  if (auto* x = std::get_if<SendEv>(&a)) return x->msg->id == std::get<SendEv>(b).msg->id;
  auto& x = std::get<RecvEv>(a);
  auto& y = std::get<RecvEv>(b);
  return x.msg->id == y.msg->id && x.ip == y.ip;
}

namespace {

json event_json(const Event& e) {
  if (auto* a = std::get_if<AllocEv>(&e))
    return {{"alloc", a->label}, {"loc", a->loc}, {"ip", a->ip}};
  if (auto* s = std::get_if<SendEv>(&e))
    return {{"send", s->msg->id},
            {"from", to_string(s->msg->from)},
            {"to", to_string(s->msg->to)},
            {"body", s->msg->body}};
  auto& r = std::get<RecvEv>(e);
  return {{"recv", r.msg->id}, {"ip", r.ip}, {"body", r.msg->body}};
}

json node_json(const NodeState& n) {
  json heap = json::object();
  for (auto& [l, v] : n.heap) heap[std::to_string(l)] = show_value(v);
  json socks = json::array();
  for (auto& [h, s] : n.sockets) {
    json buf = json::array();
    for (auto& m : s.buffer) buf.push_back(m->id);
    socks.push_back({{"handle", h},
                     {"bound", s.bound ? to_string(*s.bound) : std::string()},
                     {"blocking", s.blocking},
                     {"buffer", buf}});
  }
  return {{"heap", heap}, {"sockets", socks}, {"ports", n.ports}};
}

}  // namespace

std::string describe(const Event& e) { return event_json(e).dump(); }

std::string describe_point(const ExecPoint& p) {
  std::string s = p.via ? to_string(*p.via) : std::string("init");
  s += " [";
  s += to_string(p.effect);
  s += "]";
  for (auto& e : p.events) s += " " + describe(e);
  return s;
}

std::vector<std::string> exec_tail(const ExecTrace& t, std::size_t n) {
  std::vector<std::string> out;
  const std::size_t from = t.length() > n ? t.length() - n : 0;
  for (std::size_t i = from; i < t.length(); ++i) out.push_back(describe_point(t[i]));
  return out;
}

const char* to_string(RefinementViolation::Kind k) {
  switch (k) {
    case RefinementViolation::Kind::NoCandidate: return "NoCandidate";
    case RefinementViolation::Kind::RelationFailed: return "RelationFailed";
    case RefinementViolation::Kind::StuckThread: return "StuckThread";
    case RefinementViolation::Kind::AssertionFailed: return "AssertionFailed";
    case RefinementViolation::Kind::EventLedger: return "EventLedger";
  }
  return "?";
}

std::string violation_json(const RefinementViolation& v) {
  json j = {{"index", v.index},
            {"kind", to_string(v.kind)},
            {"diagnostic", v.diagnostic},
            {"exec_tail", v.exec_tail},
            {"model_tail", v.model_tail}};
  return j.dump();
}

void write_exec_jsonl(std::ostream& os, const ExecTrace& t, const TraceExportOptions& o) {
  for (std::size_t i = 0; i < t.length(); ++i) {
    const ExecPoint& p = t[i];
    json ev = json::array();
    for (auto& e : p.events) ev.push_back(event_json(e));
    json digest = json::object();
    for (auto& [ip, n] : p.conf->nodes) digest[ip] = node_digest(*n);
    json rec = {{"index", i},
                {"label", p.via ? to_string(*p.via) : std::string("init")},
                {"effect", to_string(p.effect)},
                {"events", ev},
                {"soup", p.conf->soup.size()},
                {"digest", digest}};
    if (o.snapshot_every && i % o.snapshot_every == 0) {
      json nodes = json::object();
      for (auto& [ip, n] : p.conf->nodes) nodes[ip] = node_json(*n);
      rec["state"] = nodes;
    }
    os << rec.dump() << '\n';
  }
}

}  // namespace trellis
