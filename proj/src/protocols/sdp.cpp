#include "trellis/protocols/sdp.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <sstream>
#include <stdexcept>

namespace trellis::sdp {

// layout: type:2 | acc:8 | bal:22 | has_vote:1 | vote_bal:19 | val:12
std::uint64_t SdpMsg::pack() const {
  auto u = [](auto x) { return static_cast<std::uint64_t>(x); };
  if (acc < 0 || acc > 255 || bal < 0 || bal >= (1 << 22))
    throw std::out_of_range("sdp message field out of packing range");
  std::uint64_t k = u(type) << 62 | u(acc) << 54 | u(bal) << 32;
  if (type == MsgType::P1b) {
    if (vote) {
      if (vote->bal < 0 || vote->bal >= (1 << 19) || vote->val < 0 || vote->val >= 4096)
        throw std::out_of_range("sdp vote out of packing range");
      k |= u(1) << 31 | u(vote->bal) << 12 | u(vote->val);
    }
  } else {
    if (val < 0 || val >= 4096) throw std::out_of_range("sdp value out of packing range");
    k |= u(val);
  }
  return k;
}

SdpMsg SdpMsg::unpack(std::uint64_t k) {
  SdpMsg m;
  m.type = static_cast<MsgType>(k >> 62);
  m.acc = static_cast<std::int32_t>((k >> 54) & 0xff);
  m.bal = static_cast<Ballot>((k >> 32) & ((1u << 22) - 1));
  if (m.type == MsgType::P1b) {
    if ((k >> 31) & 1)
      m.vote = Vote{static_cast<Ballot>((k >> 12) & ((1u << 19) - 1)),
                    static_cast<Val>(k & 0xfff)};
  } else {
    m.val = static_cast<Val>(k & 0xfff);
  }
  return m;
}

std::string show(const SdpMsg& m) {
  std::ostringstream os;
  switch (m.type) {
    case MsgType::P1a: os << "1a(" << m.bal << ")"; break;
    case MsgType::P1b:
      os << "1b(a" << m.acc << "," << m.bal << ",";
      if (m.vote)
        os << "(" << m.vote->bal << ",v" << m.vote->val << "))";
      else
        os << "none)";
      break;
    case MsgType::P2a: os << "2a(" << m.bal << ",v" << m.val << ")"; break;
    case MsgType::P2b: os << "2b(a" << m.acc << "," << m.bal << ",v" << m.val << ")"; break;
  }
  return os.str();
}

bool SdpState::has(const SdpMsg& m) const {
  return std::binary_search(msgs.begin(), msgs.end(), m.pack());
}

namespace {

std::size_t mix(std::size_t h, std::uint64_t x) {
  x ^= x >> 33;
  x *= 0xff51afd7ed558ccdULL;
  x ^= x >> 33;
  return h ^ (x + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2));
}

void insert_sorted(std::vector<std::uint64_t>& v, std::uint64_t k) {
  auto it = std::lower_bound(v.begin(), v.end(), k);
  if (it == v.end() || *it != k) v.insert(it, k);
}

// range of packed messages of one type
std::pair<std::vector<std::uint64_t>::const_iterator, std::vector<std::uint64_t>::const_iterator>
of_type(const SdpState& s, MsgType t) {
  std::uint64_t lo = static_cast<std::uint64_t>(t) << 62;
  auto b = std::lower_bound(s.msgs.begin(), s.msgs.end(), lo);
  auto e = t == MsgType::P2b ? s.msgs.end()
                             : std::lower_bound(s.msgs.begin(), s.msgs.end(),
                                                (static_cast<std::uint64_t>(t) + 1) << 62);
  return {b, e};
}

}  // namespace

std::size_t SdpHash::operator()(const SdpState& s) const {
  std::size_t h = s.msgs.size();
  for (auto k : s.msgs) h = mix(h, k);
  for (auto b : s.max_bal) h = mix(h, static_cast<std::uint64_t>(b + 1));
  for (auto& v : s.max_val) h = mix(h, static_cast<std::uint64_t>((v.bal + 1) * 4096 + v.val + 1));
  return h;
}

std::size_t SdplHash::operator()(const SdplState& s) const {
  std::size_t h = SdpHash{}(s.sdp);
  for (auto c : s.ctr) h = mix(h, c);
  return h;
}

SdpState sdp_init(const SdpConfig& c) {
  return SdpState{{}, std::vector<Ballot>(c.acceptors, -1), std::vector<Vote>(c.acceptors, kNoVote)};
}

SdplState sdpl_init(const SdpConfig& c) {
  return SdplState{std::vector<std::uint32_t>(c.proposers, 0), sdp_init(c)};
}

Ballot ballot(std::uint64_t k, int p, int nprops) {
  if (p < 0 || p >= nprops) throw std::invalid_argument("proposer out of range");
  return static_cast<Ballot>(k) * nprops + p;
}

std::vector<SdpMsg> q1bv(const SdpState& s, std::uint32_t Q, Ballot b) {
  std::vector<SdpMsg> out;
  auto [it, end] = of_type(s, MsgType::P1b);
  for (; it != end; ++it) {
    SdpMsg m = SdpMsg::unpack(*it);
    if (m.bal == b && m.vote && (Q >> m.acc & 1)) out.push_back(m);
  }
  return out;
}

bool have_promised(const SdpState& s, std::uint32_t Q, Ballot b) {
  std::uint32_t seen = 0;
  auto [it, end] = of_type(s, MsgType::P1b);
  for (; it != end; ++it) {
    SdpMsg m = SdpMsg::unpack(*it);
    if (m.bal == b) seen |= 1u << m.acc;
  }
  return (seen & Q) == Q;
}

bool is_max_vote(const SdpState& s, std::uint32_t Q, Ballot b, Val v) {
  auto votes = q1bv(s, Q, b);
  for (auto& m0 : votes) {
    if (m0.vote->val != v) continue;
    bool top = std::all_of(votes.begin(), votes.end(),
                           [&](const SdpMsg& m1) { return m0.vote->bal >= m1.vote->bal; });
    if (top) return true;
  }
  return false;
}

bool shows_safe_at(const SdpState& s, std::uint32_t Q, Ballot b, Val v) {
  return have_promised(s, Q, b) && (q1bv(s, Q, b).empty() || is_max_vote(s, Q, b, v));
}

std::vector<std::uint32_t> quorums(const SdpConfig& c) {
  std::vector<std::uint32_t> out;
  for (std::uint32_t q = 1; q < (1u << c.acceptors); ++q)
    if (std::popcount(q) >= c.quorum_size()) out.push_back(q);
  return out;
}

bool safe_for_some_quorum(const SdpConfig& c, const SdpState& s, Ballot b, Val v) {
  for (auto q : quorums(c))
    if (shows_safe_at(s, q, b, v)) return true;
  return false;
}

bool chosen(const SdpConfig& c, const SdpState& s, Val v) {
  // ballot -> acceptor mask of 2b votes for v
  std::vector<std::pair<Ballot, std::uint32_t>> tally;
  auto [it, end] = of_type(s, MsgType::P2b);
  for (; it != end; ++it) {
    SdpMsg m = SdpMsg::unpack(*it);
    if (m.val != v) continue;
    auto t = std::find_if(tally.begin(), tally.end(), [&](auto& p) { return p.first == m.bal; });
    if (t == tally.end())
      tally.push_back({m.bal, 1u << m.acc});
    else
      t->second |= 1u << m.acc;
  }
  for (auto& [b, mask] : tally)
    if (std::popcount(mask) >= c.quorum_size()) return true;
  return false;
}

bool consistent(const SdpConfig& c, const SdpState& s) {
  int n = 0;
  for (Val v = 0; v < c.values; ++v) n += chosen(c, s, v) ? 1 : 0;
  return n <= 1;
}

bool ctr_coherent(const SdpConfig& c, const SdplState& s) {
  for (auto k : s.sdp.msgs) {
    SdpMsg m = SdpMsg::unpack(k);
    if (m.type != MsgType::P1a && m.type != MsgType::P2a) continue;
    int p = static_cast<int>(m.bal % c.proposers);
    if (static_cast<std::uint64_t>(m.bal / c.proposers) > s.ctr[p]) return false;
  }
  return true;
}

std::optional<SdpState> sdp_add(const SdpConfig& c, const SdpState& s, const SdpMsg& m) {
  SdpState t = s;
  switch (m.type) {
    case MsgType::P1a: break;
    case MsgType::P1b: {
      if (m.acc < 0 || m.acc >= c.acceptors) return std::nullopt;
      if (!s.has(SdpMsg::one_a(m.bal))) return std::nullopt;
      if (!(m.bal > s.max_bal[m.acc])) return std::nullopt;
      const Vote& mv = s.max_val[m.acc];
      std::optional<Vote> want = mv == kNoVote ? std::nullopt : std::optional<Vote>(mv);
      if (m.vote != want) return std::nullopt;
      t.max_bal[m.acc] = m.bal;
      break;
    }
    case MsgType::P2a: {
      if (m.val < 0 || m.val >= c.values) return std::nullopt;
      auto [it, end] = of_type(s, MsgType::P2a);
      for (; it != end; ++it)
        if (SdpMsg::unpack(*it).bal == m.bal) return std::nullopt;
      if (!safe_for_some_quorum(c, s, m.bal, m.val)) return std::nullopt;
      break;
    }
    case MsgType::P2b: {
      if (m.acc < 0 || m.acc >= c.acceptors) return std::nullopt;
      if (!s.has(SdpMsg::two_a(m.bal, m.val))) return std::nullopt;
      if (!(m.bal >= s.max_bal[m.acc])) return std::nullopt;
      t.max_bal[m.acc] = m.bal;
      t.max_val[m.acc] = Vote{m.bal, m.val};
      break;
    }
  }
  insert_sorted(t.msgs, m.pack());
  return t;
}

bool sdp_step_valid(const SdpConfig& c, const SdpState& a, const SdpState& b) {
  // b.msgs must be a.msgs plus at most one message
  if (b.msgs.size() < a.msgs.size() || b.msgs.size() > a.msgs.size() + 1) return false;
  if (!std::includes(b.msgs.begin(), b.msgs.end(), a.msgs.begin(), a.msgs.end())) return false;
  if (b.msgs.size() == a.msgs.size()) {
    // re-adding a present message: 1a always, 1b never, 2a never, 2b when b >= maxBal
    if (a == b) return true;
    for (auto k : a.msgs) {
      auto r = sdp_add(c, a, SdpMsg::unpack(k));
      if (r && *r == b) return true;
    }
    return false;
  }
  std::vector<std::uint64_t> diff;
  std::set_difference(b.msgs.begin(), b.msgs.end(), a.msgs.begin(), a.msgs.end(),
                      std::back_inserter(diff));
  auto r = sdp_add(c, a, SdpMsg::unpack(diff.front()));
  return r && *r == b;
}

SdplState sdpl_inc(const SdplState& s, int p) {
  SdplState t = s;
  ++t.ctr[p];
  return t;
}

std::optional<SdplState> sdpl_add(const SdpConfig& c, const SdplState& s, const SdpMsg& m) {
  if (m.type == MsgType::P1a || m.type == MsgType::P2a) {
    int p = static_cast<int>(m.bal % c.proposers);
    std::uint64_t n = s.ctr[p] + (c.bug_ballot_ahead ? 1 : 0);
    if (m.bal != ballot(n, p, c.proposers)) return std::nullopt;
  }
  auto r = sdp_add(c, s.sdp, m);
  if (!r) return std::nullopt;
  return SdplState{s.ctr, std::move(*r)};
}

std::vector<SdplState> sdpl_successors(const SdpConfig& c, const SdplState& s) {
  std::vector<SdplState> out;
  auto push = [&](const SdpMsg& m) {
    if (auto r = sdp_add(c, s.sdp, m)) out.push_back(SdplState{s.ctr, std::move(*r)});
  };
  for (int p = 0; p < c.proposers; ++p) {
    if (!c.ctr_max || s.ctr[p] < *c.ctr_max) out.push_back(sdpl_inc(s, p));
    Ballot b = ballot(s.ctr[p] + (c.bug_ballot_ahead ? 1 : 0), p, c.proposers);
    push(SdpMsg::one_a(b));
    for (Val v = 0; v < c.values; ++v) push(SdpMsg::two_a(b, v));
  }
  {
    auto [it, end] = of_type(s.sdp, MsgType::P1a);
    std::vector<Ballot> bals;
    for (; it != end; ++it) bals.push_back(SdpMsg::unpack(*it).bal);
    for (Ballot b : bals)
      for (int a = 0; a < c.acceptors; ++a) {
        if (!(b > s.sdp.max_bal[a])) continue;
        const Vote& mv = s.sdp.max_val[a];
        push(SdpMsg::one_b(a, b, mv == kNoVote ? std::nullopt : std::optional<Vote>(mv)));
      }
  }
  {
    auto [it, end] = of_type(s.sdp, MsgType::P2a);
    std::vector<SdpMsg> props;
    for (; it != end; ++it) props.push_back(SdpMsg::unpack(*it));
    for (auto& m : props)
      for (int a = 0; a < c.acceptors; ++a) push(SdpMsg::two_b(a, m.bal, m.val));
  }
  return out;
}

std::string show(const SdpState& s) {
  std::string out = "{";
  for (std::size_t i = 0; i < s.msgs.size(); ++i) {
    if (i) out += " ";
    out += show(SdpMsg::unpack(s.msgs[i]));
  }
  return out + "}";
}

std::string show(const SdplState& s) {
  std::string out = "ctr=[";
  for (std::size_t i = 0; i < s.ctr.size(); ++i) {
    if (i) out += ",";
    out += std::to_string(s.ctr[i]);
  }
  return out + "] " + show(s.sdp);
}

Sts<SdplState> sdpl_model(const SdpConfig& c) {
  Sts<SdplState> sts;
  sts.init = sdpl_init(c);
  sts.successors = [c](const SdplState& s) { return sdpl_successors(c, s); };
  sts.show = [](const SdplState& s) { return show(s); };
  return sts;
}

// ---- exploration keys -------------------------------------------------------

namespace {

// compact layout: type:2 | acc:4 | bal:8 | has_vote:1 | vote_bal:8 | val:4,
// same field order as pack() so sorting agrees
std::uint32_t compact(const SdpMsg& m) {
  auto u = [](auto x) { return static_cast<std::uint32_t>(x); };
  if (m.acc > 15 || m.bal > 255) throw std::out_of_range("sdp message too large for key");
  std::uint32_t k = u(m.type) << 25 | u(m.acc) << 21 | u(m.bal) << 13;
  if (m.type == MsgType::P1b) {
    if (m.vote) {
      if (m.vote->bal > 255 || m.vote->val > 15) throw std::out_of_range("sdp vote too large for key");
      k |= 1u << 12 | u(m.vote->bal) << 4 | u(m.vote->val);
    }
  } else {
    if (m.val > 15) throw std::out_of_range("sdp value too large for key");
    k |= u(m.val);
  }
  return k;
}

SdpMsg expand(std::uint32_t k) {
  SdpMsg m;
  m.type = static_cast<MsgType>(k >> 25);
  m.acc = static_cast<std::int32_t>(k >> 21 & 0xf);
  m.bal = k >> 13 & 0xff;
  if (m.type == MsgType::P1b) {
    if (k >> 12 & 1) m.vote = Vote{k >> 4 & 0xff, static_cast<Val>(k & 0xf)};
  } else {
    m.val = static_cast<Val>(k & 0xf);
  }
  return m;
}

std::string key_of(const std::vector<std::uint32_t>& ctr, std::vector<std::uint32_t>& cm) {
  std::sort(cm.begin(), cm.end());
  std::string k;
  k.reserve(ctr.size() + 4 * cm.size());
  for (auto c : ctr) {
    if (c > 255) throw std::out_of_range("counter too large for key");
    k += static_cast<char>(c);
  }
  for (auto x : cm)
    for (int sh = 24; sh >= 0; sh -= 8) k += static_cast<char>(x >> sh & 0xff);
  return k;
}

SdpMsg rename(SdpMsg m, const std::vector<int>& acc, const std::vector<int>& val) {
  if (m.type == MsgType::P1b || m.type == MsgType::P2b) m.acc = acc[m.acc];
  if (m.type == MsgType::P2a || m.type == MsgType::P2b) m.val = val[m.val];
  if (m.vote) m.vote->val = val[m.vote->val];
  return m;
}

std::vector<std::vector<int>> perms(int n) {
  std::vector<int> p(n);
  for (int i = 0; i < n; ++i) p[i] = i;
  std::vector<std::vector<int>> out;
  do out.push_back(p);
  while (std::next_permutation(p.begin(), p.end()));
  return out;
}

template <class F>
void for_each_image(const SdpConfig& c, const SdplState& s, F&& f) {
  if (c.acceptors > 6 || c.values > 4) throw std::invalid_argument("too many renamings");
  std::vector<SdpMsg> ms;
  for (auto k : s.sdp.msgs) ms.push_back(SdpMsg::unpack(k));
  std::vector<std::uint32_t> cm(ms.size());
  for (auto& pa : perms(c.acceptors))
    for (auto& pv : perms(c.values)) {
      for (std::size_t i = 0; i < ms.size(); ++i) cm[i] = compact(rename(ms[i], pa, pv));
      f(key_of(s.ctr, cm));
    }
}

}  // namespace

std::string sdpl_key(const SdplState& s) {
  std::vector<std::uint32_t> cm;
  cm.reserve(s.sdp.msgs.size());
  for (auto k : s.sdp.msgs) cm.push_back(compact(SdpMsg::unpack(k)));
  return key_of(s.ctr, cm);
}

void recompute_acceptors(const SdpConfig& c, SdpState& s) {
  s.max_bal.assign(c.acceptors, -1);
  s.max_val.assign(c.acceptors, kNoVote);
  for (auto k : s.msgs) {
    SdpMsg m = SdpMsg::unpack(k);
    if (m.type == MsgType::P1b || m.type == MsgType::P2b)
      s.max_bal[m.acc] = std::max(s.max_bal[m.acc], m.bal);
    if (m.type == MsgType::P2b && m.bal > s.max_val[m.acc].bal) s.max_val[m.acc] = Vote{m.bal, m.val};
  }
}

SdplState sdpl_from_key(const SdpConfig& c, const std::string& k) {
  SdplState s;
  const auto np = static_cast<std::size_t>(c.proposers);
  if (k.size() < np || (k.size() - np) % 4) throw std::invalid_argument("bad sdpl key");
  for (std::size_t i = 0; i < np; ++i) s.ctr.push_back(static_cast<unsigned char>(k[i]));
  for (std::size_t i = np; i < k.size(); i += 4) {
    std::uint32_t x = 0;
    for (std::size_t j = 0; j < 4; ++j) x = x << 8 | static_cast<unsigned char>(k[i + j]);
    s.sdp.msgs.push_back(expand(x).pack());
  }
  recompute_acceptors(c, s.sdp);
  return s;
}

SdplState sdpl_canonical(const SdpConfig& c, const SdplState& s) {
  std::string best;
  bool first = true;
  for_each_image(c, s, [&](std::string k) {
    if (first || k < best) best = std::move(k);
    first = false;
  });
  return sdpl_from_key(c, best);
}

std::size_t sdpl_orbit_size(const SdpConfig& c, const SdplState& s) {
  std::vector<std::string> keys;
  for_each_image(c, s, [&](std::string k) { keys.push_back(std::move(k)); });
  std::sort(keys.begin(), keys.end());
  return static_cast<std::size_t>(std::unique(keys.begin(), keys.end()) - keys.begin());
}

// ---- wire format -----------------------------------------------------------

std::string serialize(const SdpMsg& m, const std::vector<std::string>& alphabet) {
  switch (m.type) {
    case MsgType::P1a: return "1a:" + std::to_string(m.bal);
    case MsgType::P1b: {
      std::string s = "1b:" + std::to_string(m.acc) + ":" + std::to_string(m.bal) + ":";
      if (m.vote)
        s += std::to_string(m.vote->bal) + "," + alphabet.at(m.vote->val);
      else
        s += "none";
      return s;
    }
    case MsgType::P2a: return "2a:" + std::to_string(m.bal) + ":" + alphabet.at(m.val);
    case MsgType::P2b:
      return "2b:" + std::to_string(m.acc) + ":" + std::to_string(m.bal) + ":" +
             alphabet.at(m.val);
  }
  return {};
}

namespace {

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : s) {
    if (ch == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += ch;
    }
  }
  out.push_back(cur);
  return out;
}

std::optional<std::int64_t> num(const std::string& s) {
  std::int64_t x = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), x);
  if (ec != std::errc() || p != s.data() + s.size() || s.empty() || x < 0) return std::nullopt;
  return x;
}

std::optional<Val> value_of(const std::string& s, const std::vector<std::string>& alphabet) {
  auto it = std::find(alphabet.begin(), alphabet.end(), s);
  if (it == alphabet.end()) return std::nullopt;
  return static_cast<Val>(it - alphabet.begin());
}

}  // namespace

std::optional<SdpMsg> deserialize(const std::string& body,
                                  const std::vector<std::string>& alphabet) {
  auto f = split(body, ':');
  if (f.empty()) return std::nullopt;
  if (f[0] == "1a" && f.size() == 2) {
    auto b = num(f[1]);
    if (b) return SdpMsg::one_a(*b);
  } else if (f[0] == "1b" && f.size() == 4) {
    auto a = num(f[1]);
    auto b = num(f[2]);
    if (!a || !b) return std::nullopt;
    if (f[3] == "none") return SdpMsg::one_b(static_cast<int>(*a), *b, std::nullopt);
    auto vv = split(f[3], ',');
    if (vv.size() != 2) return std::nullopt;
    auto vb = num(vv[0]);
    auto v = value_of(vv[1], alphabet);
    if (vb && v) return SdpMsg::one_b(static_cast<int>(*a), *b, Vote{*vb, *v});
  } else if (f[0] == "2a" && f.size() == 3) {
    auto b = num(f[1]);
    auto v = value_of(f[2], alphabet);
    if (b && v) return SdpMsg::two_a(*b, *v);
  } else if (f[0] == "2b" && f.size() == 4) {
    auto a = num(f[1]);
    auto b = num(f[2]);
    auto v = value_of(f[3], alphabet);
    if (a && b && v) return SdpMsg::two_b(static_cast<int>(*a), *b, *v);
  }
  return std::nullopt;
}

std::optional<Vote> find_max_promise(const std::vector<std::optional<Vote>>& promises) {
  std::optional<Vote> acc;
  for (const auto& promise : promises) {
    if (promise && acc) {
      if (promise->bal <= acc->bal) continue;  // ties keep the accumulator
      acc = promise;
    } else if (!promise && acc) {
      continue;
    } else {
      acc = promise;
    }
  }
  return acc;
}

}  // namespace trellis::sdp
