#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace trellis {

using Loc = std::int64_t;
using Handle = std::int64_t;
using Tid = std::uint32_t;
using MsgId = std::uint64_t;

using Value = std::variant<std::monostate, std::int64_t, std::vector<std::int64_t>,
                           std::string>;
std::string show_value(const Value& v);

struct SocketAddr {
  std::string ip;
  std::uint16_t port = 0;
  auto operator<=>(const SocketAddr&) const = default;
};
std::string to_string(const SocketAddr& a);

struct Message {
  MsgId id = 0;
  SocketAddr from;
  SocketAddr to;
  std::string body;
};
using MsgPtr = std::shared_ptr<const Message>;

struct SocketState {
  std::optional<SocketAddr> bound;
  bool blocking = true;
  std::optional<double> timeout;  // recorded only
  std::vector<MsgPtr> buffer;     // FIFO
};

struct NodeState {
  std::map<Loc, Value> heap;
  std::map<Handle, SocketState> sockets;
  std::set<std::uint16_t> ports;
  Loc next_loc = 0;
  Handle next_handle = 0;
};

class ThreadProgram;
using ProgPtr = std::shared_ptr<const ThreadProgram>;

namespace eff {
struct Pure { std::string note; };
struct Alloc { std::optional<std::string> label; Value init; };
struct Load { Loc loc; };
struct Store { Loc loc; Value v; };
struct Cas { Loc loc; Value expect; Value desired; };
struct Fork { ProgPtr child; };
struct NewSocket {};
struct SocketBind { Handle h; SocketAddr addr; };
struct SetBlocking { Handle h; bool blocking; std::optional<double> timeout; };
struct Send { Handle h; std::string body; SocketAddr to; };
struct Receive { Handle h; };
struct Assert { bool cond; std::string what; };
struct Halt { Value result; };
}  // namespace eff

using Effect = std::variant<eff::Pure, eff::Alloc, eff::Load, eff::Store, eff::Cas,
                            eff::Fork, eff::NewSocket, eff::SocketBind,
                            eff::SetBlocking, eff::Send, eff::Receive, eff::Assert,
                            eff::Halt>;

// Same order as the Effect alternatives.
enum class EffectKind {
  Pure, Alloc, Load, Store, Cas, Fork, NewSocket, SocketBind, SetBlocking, Send,
  Receive, Assert, Halt, System
};
const char* to_string(EffectKind k);

/// What a thread observes after its effect ran.
struct Outcome {
  Value value;         // Alloc: loc, Load: stored value, NewSocket: handle
  MsgPtr msg;          // Receive: null on a non-blocking empty read
  bool ok = true;      // Cas success
};

/// A thread as an explicit state machine emitting one atomic effect per step.
class ThreadProgram {
 public:
  virtual ~ThreadProgram() = default;
  virtual Effect next() const = 0;
  virtual void resume(const Outcome& out) = 0;
  virtual std::unique_ptr<ThreadProgram> clone() const = 0;
  virtual std::string name() const = 0;
  /// Relative weight for randomized schedulers.
  virtual int priority() const { return 1; }
};

template <class Derived>
class Program : public ThreadProgram {
 public:
  std::unique_ptr<ThreadProgram> clone() const override {
    return std::make_unique<Derived>(static_cast<const Derived&>(*this));
  }
};

struct ThreadSlot {
  Tid tid = 0;
  std::string ip;
  ProgPtr prog;
  bool halted = false;
  Value result;
};

struct Configuration {
  std::map<std::string, std::shared_ptr<const NodeState>> nodes;
  std::vector<MsgPtr> soup;
  std::vector<ThreadSlot> threads;
  MsgId next_msg_id = 0;
  std::uint64_t sent = 0;
  std::uint64_t consumed = 0;
  std::uint64_t dropped = 0;

  void add_node(const std::string& ip);
  Tid add_thread(const std::string& ip, ProgPtr prog);
  const NodeState& node(const std::string& ip) const;
  const ThreadSlot* thread(Tid tid) const;
  const Message* in_soup(MsgId id) const;
};
using ConfPtr = std::shared_ptr<const Configuration>;

struct AllocEv {
  std::string label;
  Loc loc = 0;
  std::string ip;
};
struct SendEv { MsgPtr msg; };
struct RecvEv {
  MsgPtr msg;
  std::string ip;
};
using Event = std::variant<AllocEv, SendEv, RecvEv>;

struct ThreadStep { Tid tid; };
struct Deliver { MsgId id; };
struct Drop { MsgId id; };
using StepLabel = std::variant<ThreadStep, Deliver, Drop>;
std::string to_string(const StepLabel& l);
bool operator==(const StepLabel& a, const StepLabel& b);

class StepError : public std::runtime_error {
 public:
  enum class Kind { Stuck, AssertionFailed, Precondition };
  StepError(Kind k, std::string what) : std::runtime_error(std::move(what)), kind(k) {}
  Kind kind;
};

struct StepResult {
  ConfPtr conf;
  std::vector<Event> events;
  EffectKind effect = EffectKind::System;
  bool ok = true;  // Cas outcome
};

StepResult step_thread(const ConfPtr& c, Tid tid);
ConfPtr sys_deliver(const ConfPtr& c, MsgId id);
ConfPtr sys_drop(const ConfPtr& c, MsgId id);
StepResult step(const ConfPtr& c, const StepLabel& l);

bool deliverable(const Configuration& c, const Message& m);
std::vector<StepLabel> enabled_steps(const Configuration& c);

/// Blocking receive on an empty buffer: the thread's next step is a no-op.
bool blocked_on_receive(const Configuration& c, const ThreadSlot& t);
bool all_halted(const Configuration& c);
/// No message in flight and every live thread waits on an empty buffer.
bool quiescent(const Configuration& c);

/// ever-sent = soup + buffers + consumed + dropped, by count.
bool conservation_holds(const Configuration& c);
std::size_t buffered_count(const Configuration& c);

std::uint64_t node_digest(const NodeState& n);

}  // namespace trellis
