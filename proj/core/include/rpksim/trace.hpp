#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "rpksim/bytes.hpp"
#include "rpksim/crypto.hpp"

namespace rpksim {

enum class EventKind : std::uint8_t {
  kClientFinished,
  kServerFinished,
  kServerComplete,
  kCompromiseDomain,
  kRegisterBinding,
  // Not consulted by any query; records why a session stopped.
  kSessionAbort,
};

std::string_view to_string(EventKind kind);

// One entry in the global event log. Which optional fields are set depends on
// the kind:
//   ClientFinished   domain=s_domain, server_key, master_secret
//                    [+ client_domain, client_key in mutual runs]
//   ServerFinished   domain=s_domain, server_key, master_secret
//   ServerComplete   domain=s_domain, client_domain, server_key, client_key, master_secret
//   CompromiseDomain domain
//   RegisterBinding  domain=identifier, server_key=registered key, actor=registrant, detail=target
//   SessionAbort     actor=endpoint, detail=reason
struct TraceEvent {
  std::uint64_t seq = 0;
  EventKind kind = EventKind::kClientFinished;
  std::string domain;
  std::optional<std::string> client_domain;
  std::optional<crypto::RawPublicKey> server_key;
  std::optional<crypto::RawPublicKey> client_key;
  std::optional<Bytes> master_secret;
  std::string actor;
  std::string detail;

  static TraceEvent client_finished(std::string s_domain, crypto::RawPublicKey spk, Bytes ms, std::string actor);
  static TraceEvent client_finished(std::string s_domain, std::string c_domain, crypto::RawPublicKey spk,
                                    crypto::RawPublicKey cpk, Bytes ms, std::string actor);
  static TraceEvent server_finished(std::string s_domain, crypto::RawPublicKey spk, Bytes ms, std::string actor);
  static TraceEvent server_complete(std::string s_domain, std::string c_domain, crypto::RawPublicKey spk,
                                    crypto::RawPublicKey cpk, Bytes ms, std::string actor);
  static TraceEvent compromise_domain(std::string domain);
  static TraceEvent register_binding(std::string identifier, crypto::RawPublicKey key, std::string registrant,
                                     std::string target);
  static TraceEvent session_abort(std::string endpoint, std::string reason);

  bool is_mutual_client_finished() const {
    return kind == EventKind::kClientFinished && client_domain && client_key;
  }

  friend bool operator==(const TraceEvent&, const TraceEvent&) = default;
};

using Trace = std::vector<TraceEvent>;

// Single-line rendering used in report files; keys and secrets appear as
// short fingerprints.
std::string format_event(const TraceEvent& event);
std::string format_trace(const Trace& trace);

// Append-only log; assigns strictly increasing sequence numbers.
class TraceSink {
 public:
  const TraceEvent& emit(TraceEvent event);
  const Trace& events() const noexcept { return events_; }

 private:
  Trace events_;
  std::uint64_t next_seq_ = 1;
};

}  // namespace rpksim
