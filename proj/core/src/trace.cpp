#include "rpksim/trace.hpp"

#include <sstream>

namespace rpksim {

std::string_view to_string(EventKind kind) {
  switch (kind) {
    case EventKind::kClientFinished:
      return "ClientFinished";
    case EventKind::kServerFinished:
      return "ServerFinished";
    case EventKind::kServerComplete:
      return "ServerComplete";
    case EventKind::kCompromiseDomain:
      return "CompromiseDomain";
    case EventKind::kRegisterBinding:
      return "RegisterBinding";
    case EventKind::kSessionAbort:
      return "SessionAbort";
  }
  return "?";
}

TraceEvent TraceEvent::client_finished(std::string s_domain, crypto::RawPublicKey spk, Bytes ms, std::string actor) {
  TraceEvent e;
  e.kind = EventKind::kClientFinished;
  e.domain = std::move(s_domain);
  e.server_key = std::move(spk);
  e.master_secret = std::move(ms);
  e.actor = std::move(actor);
  return e;
}

TraceEvent TraceEvent::client_finished(std::string s_domain, std::string c_domain, crypto::RawPublicKey spk,
                                       crypto::RawPublicKey cpk, Bytes ms, std::string actor) {
  TraceEvent e = client_finished(std::move(s_domain), std::move(spk), std::move(ms), std::move(actor));
  e.client_domain = std::move(c_domain);
  e.client_key = std::move(cpk);
  return e;
}

TraceEvent TraceEvent::server_finished(std::string s_domain, crypto::RawPublicKey spk, Bytes ms, std::string actor) {
  TraceEvent e;
  e.kind = EventKind::kServerFinished;
  e.domain = std::move(s_domain);
  e.server_key = std::move(spk);
  e.master_secret = std::move(ms);
  e.actor = std::move(actor);
  return e;
}

TraceEvent TraceEvent::server_complete(std::string s_domain, std::string c_domain, crypto::RawPublicKey spk,
                                       crypto::RawPublicKey cpk, Bytes ms, std::string actor) {
  TraceEvent e;
  e.kind = EventKind::kServerComplete;
  e.domain = std::move(s_domain);
  e.client_domain = std::move(c_domain);
  e.server_key = std::move(spk);
  e.client_key = std::move(cpk);
  e.master_secret = std::move(ms);
  e.actor = std::move(actor);
  return e;
}

TraceEvent TraceEvent::compromise_domain(std::string domain) {
  TraceEvent e;
  e.kind = EventKind::kCompromiseDomain;
  e.domain = std::move(domain);
  return e;
}

TraceEvent TraceEvent::register_binding(std::string identifier, crypto::RawPublicKey key, std::string registrant,
                                        std::string target) {
  TraceEvent e;
  e.kind = EventKind::kRegisterBinding;
  e.domain = std::move(identifier);
  e.server_key = std::move(key);
  e.actor = std::move(registrant);
  e.detail = std::move(target);
  return e;
}

TraceEvent TraceEvent::session_abort(std::string endpoint, std::string reason) {
  TraceEvent e;
  e.kind = EventKind::kSessionAbort;
  e.actor = std::move(endpoint);
  e.detail = std::move(reason);
  return e;
}

namespace {
std::string key_fp(const std::optional<crypto::RawPublicKey>& key) {
  return key ? fingerprint(key->key_bytes) : std::string("-");
}
}  // namespace

std::string format_event(const TraceEvent& e) {
  std::ostringstream out;
  out << e.seq << ' ' << to_string(e.kind) << '(';
  switch (e.kind) {
    case EventKind::kClientFinished:
    case EventKind::kServerFinished:
    case EventKind::kServerComplete:
      out << e.domain;
      if (e.client_domain) out << ", " << *e.client_domain;
      out << ", " << key_fp(e.server_key);
      if (e.client_key) out << ", " << key_fp(e.client_key);
      out << ", " << (e.master_secret ? fingerprint(*e.master_secret) : std::string("-")) << ')';
      if (!e.actor.empty()) out << " by " << e.actor;
      break;
    case EventKind::kCompromiseDomain:
      out << e.domain << ')';
      break;
    case EventKind::kRegisterBinding:
      out << e.domain << ", " << key_fp(e.server_key) << ", " << e.actor << ") in " << e.detail;
      break;
    case EventKind::kSessionAbort:
      out << e.actor << ", " << e.detail << ')';
      break;
  }
  return out.str();
}

std::string format_trace(const Trace& trace) {
  std::string out;
  for (const auto& e : trace) {
    out += format_event(e);
    out += '\n';
  }
  return out;
}

const TraceEvent& TraceSink::emit(TraceEvent event) {
  event.seq = next_seq_++;
  events_.push_back(std::move(event));
  return events_.back();
}

}  // namespace rpksim
