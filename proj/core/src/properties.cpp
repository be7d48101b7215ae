#include "rpksim/properties.hpp"

#include <algorithm>
#include <map>
#include <set>

namespace rpksim::properties {

namespace {

constexpr const char* kOrderingNote =
    "temporal precedence between matched events is not enforced; only presence in the trace";

bool same_server_params(const TraceEvent& a, const TraceEvent& b) {
  return a.domain == b.domain && a.server_key == b.server_key && a.master_secret == b.master_secret;
}

bool same_mutual_params(const TraceEvent& complete, const TraceEvent& finished) {
  return finished.is_mutual_client_finished() && complete.domain == finished.domain &&
         complete.client_domain == finished.client_domain && complete.server_key == finished.server_key &&
         complete.client_key == finished.client_key && complete.master_secret == finished.master_secret;
}

// First CompromiseDomain event per domain.
std::map<std::string, std::size_t> compromise_index(const Trace& trace) {
  std::map<std::string, std::size_t> out;
  for (std::size_t i = 0; i < trace.size(); ++i) {
    if (trace[i].kind == EventKind::kCompromiseDomain) out.emplace(trace[i].domain, i);
  }
  return out;
}

// Kuhn's augmenting-path matching over an explicit adjacency list.
class BipartiteMatcher {
 public:
  BipartiteMatcher(std::size_t left, std::size_t right)
      : adjacency_(left), match_left_(left, kNone), match_right_(right, kNone) {}

  void add_edge(std::size_t l, std::size_t r) { adjacency_[l].push_back(r); }

  bool augment(std::size_t l) {
    std::vector<bool> seen(match_right_.size(), false);
    return try_augment(l, seen);
  }

  bool matched(std::size_t l) const { return match_left_[l] != kNone; }

 private:
  static constexpr std::size_t kNone = static_cast<std::size_t>(-1);

  bool try_augment(std::size_t l, std::vector<bool>& seen) {
    for (std::size_t r : adjacency_[l]) {
      if (seen[r]) continue;
      seen[r] = true;
      if (match_right_[r] == kNone || try_augment(match_right_[r], seen)) {
        match_left_[l] = r;
        match_right_[r] = l;
        return true;
      }
    }
    return false;
  }

  std::vector<std::vector<std::size_t>> adjacency_;
  std::vector<std::size_t> match_left_;
  std::vector<std::size_t> match_right_;
};

}  // namespace

bool AdversaryKnowledge::knows(ByteView secret) const {
  return std::any_of(items.begin(), items.end(), [&](const Bytes& item) { return contains_subsequence(item, secret); });
}

void validate_trace(const Trace& trace) {
  for (std::size_t i = 0; i < trace.size(); ++i) {
    const auto& e = trace[i];
    if (i > 0 && e.seq <= trace[i - 1].seq) {
      throw MalformedTrace("sequence numbers not strictly increasing at entry " + std::to_string(i + 1));
    }
    const bool needs_server_params = e.kind == EventKind::kClientFinished || e.kind == EventKind::kServerFinished ||
                                     e.kind == EventKind::kServerComplete;
    if (needs_server_params && (e.domain.empty() || !e.server_key || !e.master_secret)) {
      throw MalformedTrace(std::string(to_string(e.kind)) + " at entry " + std::to_string(i + 1) +
                           " lacks s_domain, server key or master secret");
    }
    if (e.kind == EventKind::kServerComplete && (!e.client_domain || !e.client_key)) {
      throw MalformedTrace("ServerComplete at entry " + std::to_string(i + 1) + " lacks client parameters");
    }
    if (e.kind == EventKind::kClientFinished && e.client_domain.has_value() != e.client_key.has_value()) {
      throw MalformedTrace("ClientFinished at entry " + std::to_string(i + 1) + " has partial client parameters");
    }
    if (e.kind == EventKind::kCompromiseDomain && e.domain.empty()) {
      throw MalformedTrace("CompromiseDomain at entry " + std::to_string(i + 1) + " names no domain");
    }
  }
}

Verdict check_server_auth(const Trace& trace, const CheckOptions& options) {
  validate_trace(trace);
  Verdict v;
  v.query_name = "server_auth";
  v.notes.push_back(kOrderingNote);

  std::vector<std::size_t> client_finished;
  std::vector<std::size_t> server_finished;
  for (std::size_t i = 0; i < trace.size(); ++i) {
    if (trace[i].kind == EventKind::kClientFinished) client_finished.push_back(i);
    if (trace[i].kind == EventKind::kServerFinished) server_finished.push_back(i);
  }
  const auto compromised = options.allow_compromise_exception ? compromise_index(trace)
                                                              : std::map<std::string, std::size_t>{};

  // Non-excused events go first so the excused ones can never take a partner
  // away from them.
  std::vector<std::size_t> order;
  for (std::size_t l = 0; l < client_finished.size(); ++l) {
    if (!compromised.count(trace[client_finished[l]].domain)) order.push_back(l);
  }
  for (std::size_t l = 0; l < client_finished.size(); ++l) {
    if (compromised.count(trace[client_finished[l]].domain)) order.push_back(l);
  }

  BipartiteMatcher matcher(client_finished.size(), server_finished.size());
  for (std::size_t l = 0; l < client_finished.size(); ++l) {
    for (std::size_t r = 0; r < server_finished.size(); ++r) {
      if (same_server_params(trace[client_finished[l]], trace[server_finished[r]])) matcher.add_edge(l, r);
    }
  }
  for (std::size_t l : order) matcher.augment(l);

  for (std::size_t l = 0; l < client_finished.size(); ++l) {
    if (matcher.matched(l)) continue;
    const auto& event = trace[client_finished[l]];
    if (auto c = compromised.find(event.domain); c != compromised.end()) {
      if (!v.exception_used) v.exception_used = c->second;
      continue;
    }
    v.satisfied = false;
    v.witness = client_finished[l];
    for (std::size_t r : server_finished) {
      if (same_server_params(event, trace[r]) || trace[r].domain == event.domain ||
          trace[r].master_secret == event.master_secret) {
        v.candidates.push_back(r);
      }
    }
    break;
  }
  return v;
}

Verdict check_client_auth(const Trace& trace, const CheckOptions& options) {
  validate_trace(trace);
  Verdict v;
  v.query_name = "client_auth";
  v.notes.push_back(kOrderingNote);
  const auto compromised = options.allow_compromise_exception ? compromise_index(trace)
                                                              : std::map<std::string, std::size_t>{};

  for (std::size_t i = 0; i < trace.size(); ++i) {
    const auto& complete = trace[i];
    if (complete.kind != EventKind::kServerComplete) continue;
    const bool matched = std::any_of(trace.begin(), trace.end(), [&](const TraceEvent& e) {
      return e.kind == EventKind::kClientFinished && same_mutual_params(complete, e);
    });
    if (matched) continue;
    auto s = compromised.find(complete.domain);
    auto c = compromised.find(*complete.client_domain);
    if (s != compromised.end() || c != compromised.end()) {
      if (!v.exception_used) v.exception_used = (s != compromised.end() ? s : c)->second;
      continue;
    }
    v.satisfied = false;
    v.witness = i;
    for (std::size_t j = 0; j < trace.size(); ++j) {
      const auto& e = trace[j];
      if (e.kind == EventKind::kClientFinished &&
          (e.master_secret == complete.master_secret || e.domain == complete.domain)) {
        v.candidates.push_back(j);
      }
    }
    break;
  }
  return v;
}

Verdict check_secrecy(const Trace& trace, const AdversaryKnowledge& knowledge) {
  validate_trace(trace);
  Verdict v;
  v.query_name = "secrecy";
  v.notes.push_back("reconstructed query: master secrets of sessions between uncompromised parties stay secret");
  std::set<std::string> compromised;
  for (const auto& e : trace) {
    if (e.kind == EventKind::kCompromiseDomain) compromised.insert(e.domain);
  }
  for (std::size_t i = 0; i < trace.size(); ++i) {
    const auto& e = trace[i];
    if (!e.master_secret) continue;
    if (compromised.count(e.domain) || (e.client_domain && compromised.count(*e.client_domain))) continue;
    if (knowledge.knows(*e.master_secret)) {
      v.satisfied = false;
      v.witness = i;
      break;
    }
  }
  return v;
}

}  // namespace rpksim::properties
