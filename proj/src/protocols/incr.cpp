#include "trellis/protocols/incr.hpp"

namespace trellis::incr {

namespace {

class Incrementer : public Program<Incrementer> {
 public:
  explicit Incrementer(bool main) : main_(main), pc_(main ? 0 : 2) {}
  explicit Incrementer(Loc l) : main_(false), pc_(2), loc_(l) {}

  Effect next() const override {
    switch (pc_) {
      case 0: return eff::Alloc{kLabel, std::int64_t{0}};
      case 1: return eff::Fork{std::make_shared<Incrementer>(loc_)};
      case 2: return eff::Load{loc_};
      default: return eff::Cas{loc_, seen_, seen_ + 1};
    }
  }
  void resume(const Outcome& o) override {
    switch (pc_) {
      case 0: loc_ = std::get<std::int64_t>(o.value); pc_ = 1; break;
      case 1: pc_ = 2; break;
      case 2: seen_ = std::get<std::int64_t>(o.value); pc_ = 3; break;
      default: pc_ = 2; break;
    }
  }
  std::string name() const override { return main_ ? "incr-main" : "incr-fork"; }

 private:
  bool main_;
  int pc_;
  Loc loc_ = -1;
  std::int64_t seen_ = 0;
};

}  // namespace

ConfPtr setup() {
  auto c = std::make_shared<Configuration>();
  c->add_node(kNode);
  c->add_thread(kNode, std::make_shared<Incrementer>(true));
  return c;
}

Sts<std::int64_t> model() {
  return {0, [](const std::int64_t& n) { return std::vector<std::int64_t>{n + 1}; },
          [](const std::int64_t& n) { return std::to_string(n); }};
}

Coupling<std::int64_t> coupling() {
  Coupling<std::int64_t> c;
  c.matcher = [](const ExecTrace&, const ModelTrace<std::int64_t>& m) {
    return std::vector<std::int64_t>{m.last(), m.last() + 1};
  };
  c.show = [](const std::int64_t& n) { return std::to_string(n); };
  return c;
}

bool xi(const ExecTrace& ex, const ModelTrace<std::int64_t>& m) {
  auto allocs = events_of(ex, alloc_labeled(kLabel));
  if (allocs.empty()) {
    for (std::size_t i = 0; i < m.length(); ++i)
      if (m[i] != 0) return false;
    return true;
  }
  if (allocs.size() != 1) return false;
  const auto& a = std::get<AllocEv>(allocs.front());
  auto heap_at = [&](std::size_t i) -> std::optional<std::int64_t> {
    const auto& h = ex[i].conf->node(a.ip).heap;
    auto it = h.find(a.loc);
    if (it == h.end()) return std::nullopt;
    return std::get<std::int64_t>(it->second);
  };
  auto n = heap_at(ex.length() - 1);
  if (!n || m.last() != *n) return false;
  for (std::size_t i = 0; i < ex.length(); ++i) {
    auto v = heap_at(i);
    if (v && (*v > *n || m[i] != *v)) return false;
  }
  return true;
}

}  // namespace trellis::incr
