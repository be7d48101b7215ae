#pragma once

#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "rpksim/binding.hpp"
#include "rpksim/crypto.hpp"
#include "rpksim/messages.hpp"
#include "rpksim/netsim.hpp"
#include "rpksim/rng.hpp"
#include "rpksim/trace.hpp"

namespace rpksim::handshake {

struct EndpointIdentity {
  std::string name;
  crypto::KeyPair keypair;
};

struct ClientPolicy {
  bool send_sni = false;
  std::string intended_server;
  // How the server's key is validated.
  binding::BindingMode binding_mode = binding::BindingMode::kDane;
  bool use_mini_cert = false;
  // Send the (encrypted) ClientName in our Certificate when authenticating.
  bool send_client_name = false;

  // Empty when consistent; otherwise one message per defect.
  std::vector<std::string> defects() const;
};

struct ServerPolicy {
  // Require an SNI naming this server; abort otherwise.
  bool check_sni = false;
  bool request_client_auth = false;
  binding::BindingMode client_binding_mode = binding::BindingMode::kPreconfig;
  bool accept_mini_cert = false;
};

enum class AbortReason {
  kDecodeError,
  kDecryptError,
  kUnexpectedMessage,
  kSignatureInvalid,
  kMacInvalid,
  kBindingMismatch,
  kSubjectMismatch,
  kCertificateInvalid,
  kUnrecognizedName,
  kMissingServerName,
  kMissingClientName,
  kUnknownClientAddress,
  kUnsupportedCertificateType,
  kDegenerateKeyShare,
  kUnresolvableName,
  kNoClientIdentity,
  kPeerAlert,
};

std::string_view to_string(AbortReason reason);

struct SessionResult {
  crypto::SymmetricKey master_secret;
  crypto::RawPublicKey peer_key;
  std::optional<std::string> peer_name;
  messages::Transcript transcript;
};

struct KeySet {
  crypto::SymmetricKey master;
  crypto::SymmetricKey client_traffic;
  crypto::SymmetricKey server_traffic;
  crypto::SymmetricKey client_finished;
  crypto::SymmetricKey server_finished;
};

class HandshakeError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

// master = expand(dh_shared, "master", H(ClientHello || ServerHello)); the
// traffic and finished keys are expanded from master over the same context.
// Throws HandshakeError unless the transcript starts with both hellos.
KeySet key_schedule(const crypto::SymmetricKey& dh_shared, const messages::Transcript& transcript);

enum class SessionStatus { kInProgress, kComplete, kAborted };

struct SessionOutcome {
  SessionStatus status = SessionStatus::kInProgress;
  std::optional<AbortReason> reason;
  std::string detail;  // alert text for kPeerAlert

  // "complete", "in_progress", or the abort reason (with alert text).
  std::string describe() const;
};

// Shared plumbing for both roles: record protection, transcript, aborts.
class SessionBase {
 public:
  virtual ~SessionBase() = default;

  const SessionOutcome& outcome() const noexcept { return outcome_; }
  const std::optional<SessionResult>& result() const noexcept { return result_; }
  const messages::Transcript& transcript() const noexcept { return transcript_; }
  std::uint64_t connection() const noexcept { return connection_; }
  const netsim::Address& peer_address() const noexcept { return peer_; }

  void on_envelope(const netsim::Envelope& envelope);

 protected:
  SessionBase(std::string actor, netsim::NetworkPort& port, TraceSink& trace, DeterministicRng& rng,
              netsim::Address peer, std::uint64_t connection)
      : actor_(std::move(actor)), port_(&port), trace_(&trace), rng_(&rng), peer_(std::move(peer)),
        connection_(connection) {}

  virtual void on_message(const messages::HandshakeMessage& message, bool encrypted) = 0;
  virtual const crypto::SymmetricKey* inbound_key() const = 0;
  virtual const crypto::SymmetricKey* outbound_key() const = 0;

  void send_plain(const messages::HandshakeMessage& message);
  void send_protected(const messages::HandshakeMessage& message);
  void abort(AbortReason reason, std::string detail = {});
  void complete(SessionResult result);
  bool active() const noexcept { return outcome_.status == SessionStatus::kInProgress; }

  std::string actor_;
  netsim::NetworkPort* port_;
  TraceSink* trace_;
  DeterministicRng* rng_;
  netsim::Address peer_;
  std::uint64_t connection_;
  messages::Transcript transcript_;

 private:
  SessionOutcome outcome_;
  std::optional<SessionResult> result_;
  std::uint64_t send_counter_ = 0;
  std::uint64_t receive_counter_ = 0;
};

// Client half of the handshake. Emits ClientFinished only after the server
// signature, the binding check and the server Finished MAC all passed.
class ClientSession : public SessionBase {
 public:
  ClientSession(std::optional<EndpointIdentity> identity, ClientPolicy policy, binding::BindingView binding,
                netsim::NetworkPort& port, TraceSink& trace, DeterministicRng& rng, std::uint64_t connection);

  // Resolves the intended server and sends ClientHello.
  void start();

  const ClientPolicy& policy() const noexcept { return policy_; }
  // The identifier this client claims in mutual runs: its name when it sends
  // ClientName, otherwise its network address.
  std::string own_identifier() const;

 protected:
  void on_message(const messages::HandshakeMessage& message, bool encrypted) override;
  const crypto::SymmetricKey* inbound_key() const override { return keys_ ? &keys_->server_traffic : nullptr; }
  const crypto::SymmetricKey* outbound_key() const override { return keys_ ? &keys_->client_traffic : nullptr; }

 private:
  enum class State { kIdle, kServerHello, kEncryptedExtensions, kCertificate, kCertificateVerify, kFinished, kDone };

  void on_server_hello(const messages::ServerHello& hello);
  void on_certificate(const messages::Certificate& certificate);
  void on_certificate_verify(const messages::CertificateVerify& verify);
  void on_finished(const messages::Finished& finished);
  messages::CertificateType offered_type() const;

  std::optional<EndpointIdentity> identity_;
  ClientPolicy policy_;
  binding::BindingView binding_;
  State state_ = State::kIdle;
  crypto::DhKeyPair dh_;
  std::optional<KeySet> keys_;
  messages::CertificateType server_cert_type_ = messages::CertificateType::kRawPublicKey;
  bool mutual_ = false;
  std::optional<messages::Certificate> server_certificate_;
};

// Server half. Emits ServerFinished when sending its Finished and, with
// client authentication, ServerComplete once the client is validated.
class ServerSession : public SessionBase {
 public:
  ServerSession(EndpointIdentity identity, ServerPolicy policy, binding::BindingView client_binding,
                netsim::NetworkPort& port, TraceSink& trace, DeterministicRng& rng, netsim::Address peer,
                std::uint64_t connection);

  const EndpointIdentity& identity() const noexcept { return identity_; }

 protected:
  void on_message(const messages::HandshakeMessage& message, bool encrypted) override;
  const crypto::SymmetricKey* inbound_key() const override { return keys_ ? &keys_->client_traffic : nullptr; }
  const crypto::SymmetricKey* outbound_key() const override { return keys_ ? &keys_->server_traffic : nullptr; }

 private:
  enum class State { kClientHello, kClientCertificate, kClientCertificateVerify, kClientFinished, kDone };

  void on_client_hello(const messages::ClientHello& hello);
  void on_client_certificate(const messages::Certificate& certificate);
  void on_client_certificate_verify(const messages::CertificateVerify& verify);
  void on_client_finished(const messages::Finished& finished);

  EndpointIdentity identity_;
  ServerPolicy policy_;
  binding::BindingView client_binding_;
  State state_ = State::kClientHello;
  std::optional<KeySet> keys_;
  messages::CertificateType client_cert_type_ = messages::CertificateType::kRawPublicKey;
  std::optional<messages::Certificate> client_certificate_;
  std::string client_identifier_;
};

// Accepts connections on one address; one ServerSession per (observed source
// address, connection id).
class ServerEndpoint {
 public:
  ServerEndpoint(netsim::Network& net, netsim::Address address, EndpointIdentity identity, ServerPolicy policy,
                 binding::BindingView client_binding, TraceSink& trace, DeterministicRng& rng);

  const std::vector<std::unique_ptr<ServerSession>>& sessions() const noexcept { return sessions_; }
  const EndpointIdentity& identity() const noexcept { return identity_; }

 private:
  void on_envelope(const netsim::Envelope& envelope);

  EndpointIdentity identity_;
  ServerPolicy policy_;
  binding::BindingView client_binding_;
  TraceSink* trace_;
  DeterministicRng* rng_;
  netsim::NetworkPort port_;
  std::map<std::pair<netsim::Address, std::uint64_t>, ServerSession*> by_connection_;
  std::vector<std::unique_ptr<ServerSession>> sessions_;
};

// Originates connections from one address and routes replies by connection id.
class ClientEndpoint {
 public:
  ClientEndpoint(netsim::Network& net, netsim::Address address, std::optional<EndpointIdentity> identity,
                 TraceSink& trace, DeterministicRng& rng);

  ClientSession& connect(ClientPolicy policy, binding::BindingView binding, std::uint64_t connection);
  const std::optional<EndpointIdentity>& identity() const noexcept { return identity_; }

 private:
  void on_envelope(const netsim::Envelope& envelope);

  std::optional<EndpointIdentity> identity_;
  TraceSink* trace_;
  DeterministicRng* rng_;
  netsim::NetworkPort port_;
  std::map<std::uint64_t, std::unique_ptr<ClientSession>> sessions_;
};

}  // namespace rpksim::handshake
