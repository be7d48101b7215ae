#pragma once

#include <algorithm>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>

#include "rpksim/bytes.hpp"
#include "rpksim/crypto.hpp"
#include "rpksim/trace.hpp"

namespace rpksim::testing {

inline Bytes seq_bytes(std::uint8_t from, std::size_t n) {
  Bytes out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = static_cast<std::uint8_t>(from + i);
  return out;
}

inline crypto::KeyPair key_from(std::uint8_t tag) {
  Bytes seed(32, tag);
  return crypto::KeyPair::from_seed(seed);
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

// Renumbers events 1..n so hand-built traces pass validate_trace.
inline Trace numbered(Trace trace) {
  for (std::size_t i = 0; i < trace.size(); ++i) trace[i].seq = i + 1;
  return trace;
}

}  // namespace rpksim::testing

namespace rpksim::testing {

// Small random traces over tiny value pools so that collisions (and hence
// both verdicts) are common.
class TraceGenerator {
 public:
  explicit TraceGenerator(std::uint64_t seed) : gen_(seed) {
    for (std::uint8_t i = 0; i < 2; ++i) keys_.push_back(key_from(static_cast<std::uint8_t>(40 + i)).public_key);
    for (std::uint8_t i = 0; i < 3; ++i) secrets_.push_back(Bytes(32, static_cast<std::uint8_t>(0xa0 + i)));
  }

  Trace next(std::size_t max_events = 12) {
    Trace t;
    const std::size_t n = pick(max_events + 1);
    for (std::size_t i = 0; i < n; ++i) t.push_back(event());
    return numbered(std::move(t));
  }

  TraceEvent event() {
    static const char* domains[] = {"a.example", "b.example", "c.example"};
    static const char* clients[] = {"x.example", "y.example"};
    const std::string s = domains[pick(3)];
    const auto spk = keys_[pick(2)];
    const auto ms = secrets_[pick(3)];
    switch (pick(6)) {
      case 0:
        return TraceEvent::client_finished(s, spk, ms, "client");
      case 1:
        return TraceEvent::client_finished(s, clients[pick(2)], spk, keys_[pick(2)], ms, "client");
      case 2:
      case 3:
        return TraceEvent::server_finished(s, spk, ms, "server");
      case 4:
        return TraceEvent::server_complete(s, clients[pick(2)], spk, keys_[pick(2)], ms, "server");
      default:
        return TraceEvent::compromise_domain(pick(4) == 3 ? clients[pick(2)] : domains[pick(3)]);
    }
  }

  const std::vector<Bytes>& secrets() const { return secrets_; }
  std::size_t pick(std::size_t n) { return static_cast<std::size_t>(gen_() % n); }

 private:
  std::mt19937_64 gen_;
  std::vector<crypto::RawPublicKey> keys_;
  std::vector<Bytes> secrets_;
};

// Exhaustive reference checkers; deliberately naive.
namespace oracle {

inline bool compromised(const Trace& t, const std::string& d, bool allow) {
  if (!allow) return false;
  for (const auto& e : t) {
    if (e.kind == EventKind::kCompromiseDomain && e.domain == d) return true;
  }
  return false;
}

inline bool server_pair(const TraceEvent& cf, const TraceEvent& sf) {
  return cf.domain == sf.domain && cf.server_key == sf.server_key && cf.master_secret == sf.master_secret;
}

// Largest number of `left` events that can be given distinct ServerFinished
// partners, by trying every assignment.
inline std::size_t max_pairs(const Trace& t, const std::vector<std::size_t>& left) {
  std::vector<std::size_t> right;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (t[i].kind == EventKind::kServerFinished) right.push_back(i);
  }
  std::vector<bool> used(right.size(), false);
  std::function<std::size_t(std::size_t)> go = [&](std::size_t k) -> std::size_t {
    if (k == left.size()) return 0;
    std::size_t best = go(k + 1);
    for (std::size_t r = 0; r < right.size(); ++r) {
      if (used[r] || !server_pair(t[left[k]], t[right[r]])) continue;
      used[r] = true;
      best = std::max(best, 1 + go(k + 1));
      used[r] = false;
    }
    return best;
  };
  return go(0);
}

inline std::vector<std::size_t> unexcused_client_finished(const Trace& t, bool allow) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (t[i].kind == EventKind::kClientFinished && !compromised(t, t[i].domain, allow)) out.push_back(i);
  }
  return out;
}

inline bool server_auth(const Trace& t, bool allow = true) {
  auto left = unexcused_client_finished(t, allow);
  return max_pairs(t, left) == left.size();
}

inline bool client_auth(const Trace& t, bool allow = true) {
  for (const auto& sc : t) {
    if (sc.kind != EventKind::kServerComplete) continue;
    bool found = false;
    for (const auto& cf : t) {
      found = found || (cf.kind == EventKind::kClientFinished && cf.client_domain && cf.client_key &&
                        cf.domain == sc.domain && cf.client_domain == sc.client_domain &&
                        cf.server_key == sc.server_key && cf.client_key == sc.client_key &&
                        cf.master_secret == sc.master_secret);
    }
    if (!found && !compromised(t, sc.domain, allow) && !compromised(t, *sc.client_domain, allow)) return false;
  }
  return true;
}

inline bool secrecy(const Trace& t, const std::vector<Bytes>& knowledge) {
  for (const auto& e : t) {
    if (!e.master_secret) continue;
    if (compromised(t, e.domain, true) || (e.client_domain && compromised(t, *e.client_domain, true))) continue;
    for (const auto& item : knowledge) {
      if (std::search(item.begin(), item.end(), e.master_secret->begin(), e.master_secret->end()) != item.end()) {
        return false;
      }
    }
  }
  return true;
}

}  // namespace oracle
}  // namespace rpksim::testing
