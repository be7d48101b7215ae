#include "rpksim/handshake.hpp"

namespace rpksim::handshake {

using messages::CertificateType;
using messages::ContentType;

namespace {

constexpr std::uint8_t kEncryptedAad[] = {static_cast<std::uint8_t>(ContentType::kEncrypted)};

binding::TlsaUsage usage_for(CertificateType type) {
  return type == CertificateType::kX509 ? binding::TlsaUsage::kPkixEeMiniCert : binding::TlsaUsage::kDaneEeRpk;
}

// Subject, self-signature and binding checks shared by both roles.
std::optional<AbortReason> validate_peer_certificate(const messages::Certificate& certificate,
                                                     const std::string& expected_identifier,
                                                     const binding::BindingView& binding) {
  if (const auto* cert = std::get_if<messages::MiniCert>(&certificate.payload)) {
    if (!cert->self_signature_valid()) return AbortReason::kCertificateInvalid;
    if (cert->subject != expected_identifier) return AbortReason::kSubjectMismatch;
  }
  if (!binding.accepts(expected_identifier, certificate.public_key(), usage_for(certificate.type()))) {
    return AbortReason::kBindingMismatch;
  }
  return std::nullopt;
}

messages::Certificate make_certificate(CertificateType type, const std::string& subject,
                                       const crypto::KeyPair& keys) {
  messages::Certificate c;
  if (type == CertificateType::kX509) {
    c.payload = messages::MiniCert::issue(subject, keys);
  } else {
    c.payload = keys.public_key;
  }
  return c;
}

}  // namespace

std::vector<std::string> ClientPolicy::defects() const {
  std::vector<std::string> out;
  if (intended_server.empty()) out.push_back("intended_server is empty");
  if (send_client_name && binding_mode != binding::BindingMode::kDane) {
    out.push_back("send_client_name requires binding_mode dane");
  }
  return out;
}

std::string_view to_string(AbortReason reason) {
  switch (reason) {
    case AbortReason::kDecodeError:
      return "decode_error";
    case AbortReason::kDecryptError:
      return "decrypt_error";
    case AbortReason::kUnexpectedMessage:
      return "unexpected_message";
    case AbortReason::kSignatureInvalid:
      return "signature_invalid";
    case AbortReason::kMacInvalid:
      return "mac_invalid";
    case AbortReason::kBindingMismatch:
      return "binding_mismatch";
    case AbortReason::kSubjectMismatch:
      return "subject_mismatch";
    case AbortReason::kCertificateInvalid:
      return "certificate_invalid";
    case AbortReason::kUnrecognizedName:
      return "unrecognized_name";
    case AbortReason::kMissingServerName:
      return "missing_server_name";
    case AbortReason::kMissingClientName:
      return "missing_client_name";
    case AbortReason::kUnknownClientAddress:
      return "unknown_client_address";
    case AbortReason::kUnsupportedCertificateType:
      return "unsupported_certificate_type";
    case AbortReason::kDegenerateKeyShare:
      return "degenerate_key_share";
    case AbortReason::kUnresolvableName:
      return "unresolvable_name";
    case AbortReason::kNoClientIdentity:
      return "no_client_identity";
    case AbortReason::kPeerAlert:
      return "peer_alert";
  }
  return "unknown";
}

std::string SessionOutcome::describe() const {
  switch (status) {
    case SessionStatus::kInProgress:
      return "in_progress";
    case SessionStatus::kComplete:
      return "complete";
    case SessionStatus::kAborted:
      break;
  }
  std::string out(to_string(*reason));
  if (!detail.empty()) out += "(" + detail + ")";
  return out;
}

KeySet key_schedule(const crypto::SymmetricKey& dh_shared, const messages::Transcript& transcript) {
  if (transcript.size() < 2) throw HandshakeError("key schedule needs ClientHello and ServerHello");
  const auto first = messages::decode(transcript.messages()[0]);
  const auto second = messages::decode(transcript.messages()[1]);
  if (!std::holds_alternative<messages::ClientHello>(first) || !std::holds_alternative<messages::ServerHello>(second)) {
    throw HandshakeError("key schedule needs ClientHello and ServerHello");
  }
  const crypto::Digest hello_hash = transcript.digest(2);
  KeySet keys;
  keys.master = crypto::kdf_expand_label(dh_shared, "master", hello_hash);
  keys.client_traffic = crypto::kdf_expand_label(keys.master, "handshake-traffic-client", hello_hash);
  keys.server_traffic = crypto::kdf_expand_label(keys.master, "handshake-traffic-server", hello_hash);
  keys.client_finished = crypto::kdf_expand_label(keys.master, "finished-client", hello_hash);
  keys.server_finished = crypto::kdf_expand_label(keys.master, "finished-server", hello_hash);
  return keys;
}

// ---------------------------------------------------------------------------
// SessionBase

void SessionBase::on_envelope(const netsim::Envelope& envelope) {
  if (!active()) return;
  messages::Record record;
  try {
    record = messages::unframe(envelope.payload);
  } catch (const DecodeError& e) {
    abort(AbortReason::kDecodeError, e.field());
    return;
  }
  if (record.type == ContentType::kAlert) {
    abort(AbortReason::kPeerAlert, std::string(record.body.begin(), record.body.end()));
    return;
  }
  const bool encrypted = record.type == ContentType::kEncrypted;
  const crypto::SymmetricKey* key = inbound_key();
  if (encrypted != (key != nullptr)) {
    abort(AbortReason::kUnexpectedMessage, encrypted ? "encrypted record before keys" : "plaintext after keys");
    return;
  }
  Bytes plain;
  if (encrypted) {
    auto opened = crypto::aead_open(*key, receive_counter_++, record.body, kEncryptedAad);
    if (!opened) {
      abort(AbortReason::kDecryptError);
      return;
    }
    plain = std::move(*opened);
  } else {
    plain = std::move(record.body);
  }
  messages::HandshakeMessage message;
  try {
    message = messages::decode(plain);
  } catch (const DecodeError& e) {
    abort(AbortReason::kDecodeError, e.field());
    return;
  }
  on_message(message, encrypted);
}

void SessionBase::send_plain(const messages::HandshakeMessage& message) {
  port_->send(peer_, connection_, messages::frame(ContentType::kHandshake, messages::encode(message)));
}

void SessionBase::send_protected(const messages::HandshakeMessage& message) {
  const crypto::SymmetricKey* key = outbound_key();
  Bytes sealed = crypto::aead_seal(*key, send_counter_++, messages::encode(message), kEncryptedAad);
  port_->send(peer_, connection_, messages::frame(ContentType::kEncrypted, sealed));
}

void SessionBase::abort(AbortReason reason, std::string detail) {
  if (!active()) return;
  outcome_.status = SessionStatus::kAborted;
  outcome_.reason = reason;
  outcome_.detail = std::move(detail);
  trace_->emit(TraceEvent::session_abort(actor_, outcome_.describe()));
  if (reason != AbortReason::kPeerAlert && reason != AbortReason::kUnresolvableName) {
    port_->send(peer_, connection_, messages::frame(ContentType::kAlert, to_bytes(to_string(reason))));
  }
}

void SessionBase::complete(SessionResult result) {
  outcome_.status = SessionStatus::kComplete;
  result_ = std::move(result);
}

// ---------------------------------------------------------------------------
// ClientSession

ClientSession::ClientSession(std::optional<EndpointIdentity> identity, ClientPolicy policy,
                             binding::BindingView binding, netsim::NetworkPort& port, TraceSink& trace,
                             DeterministicRng& rng, std::uint64_t connection)
    : SessionBase(identity ? identity->name : "anonymous@" + port.local().value, port, trace, rng, netsim::Address{},
                  connection),
      identity_(std::move(identity)),
      policy_(std::move(policy)),
      binding_(binding) {}

std::string ClientSession::own_identifier() const {
  if (policy_.send_client_name && identity_) return identity_->name;
  return port_->local().value;
}

CertificateType ClientSession::offered_type() const {
  return policy_.use_mini_cert ? CertificateType::kX509 : CertificateType::kRawPublicKey;
}

void ClientSession::start() {
  try {
    peer_ = port_->resolve(policy_.intended_server);
  } catch (const netsim::NetError& e) {
    abort(AbortReason::kUnresolvableName, policy_.intended_server);
    return;
  }
  dh_ = crypto::dh_keygen(*rng_);
  messages::ClientHello hello;
  hello.random = rng_->bytes(32);
  hello.dh_public = dh_.public_key;
  if (policy_.send_sni) hello.sni = messages::ServerNameExt::make(policy_.intended_server);
  hello.server_cert_type = messages::CertificateTypeExt::make(messages::CertificateTypeKind::kServer, {offered_type()});
  if (identity_) {
    hello.client_cert_type =
        messages::CertificateTypeExt::make(messages::CertificateTypeKind::kClient, {offered_type()});
  }
  hello.dane_clientid_offer = policy_.send_client_name;
  transcript_.append(hello);
  send_plain(hello);
  state_ = State::kServerHello;
}

void ClientSession::on_message(const messages::HandshakeMessage& message, bool) {
  using namespace messages;
  switch (state_) {
    case State::kServerHello:
      if (const auto* m = std::get_if<ServerHello>(&message)) return on_server_hello(*m);
      break;
    case State::kEncryptedExtensions:
      if (std::holds_alternative<EncryptedExtensions>(message)) {
        transcript_.append(message);
        state_ = State::kCertificate;
        return;
      }
      break;
    case State::kCertificate:
      if (const auto* m = std::get_if<CertificateRequest>(&message); m && !mutual_) {
        if (!identity_) return abort(AbortReason::kNoClientIdentity);
        if (m->client_cert_type_ack != offered_type()) return abort(AbortReason::kUnsupportedCertificateType);
        // A dane_clientid request without our ClientName is left for the
        // server to reject.
        mutual_ = true;
        transcript_.append(message);
        return;
      }
      if (const auto* m = std::get_if<Certificate>(&message)) return on_certificate(*m);
      break;
    case State::kCertificateVerify:
      if (const auto* m = std::get_if<CertificateVerify>(&message)) return on_certificate_verify(*m);
      break;
    case State::kFinished:
      if (const auto* m = std::get_if<Finished>(&message)) return on_finished(*m);
      break;
    case State::kIdle:
    case State::kDone:
      break;
  }
  abort(AbortReason::kUnexpectedMessage, std::string(variant_name(message)));
}

void ClientSession::on_server_hello(const messages::ServerHello& hello) {
  if (hello.server_cert_type_ack != offered_type()) return abort(AbortReason::kUnsupportedCertificateType);
  crypto::SymmetricKey shared;
  try {
    shared = crypto::dh_shared(dh_.private_key, hello.dh_public);
  } catch (const crypto::CryptoError&) {
    return abort(AbortReason::kDegenerateKeyShare);
  }
  server_cert_type_ = hello.server_cert_type_ack;
  transcript_.append(hello);
  keys_ = key_schedule(shared, transcript_);
  state_ = State::kEncryptedExtensions;
}

void ClientSession::on_certificate(const messages::Certificate& certificate) {
  if (certificate.type() != server_cert_type_) return abort(AbortReason::kUnsupportedCertificateType);
  if (auto failure = validate_peer_certificate(certificate, policy_.intended_server, binding_)) {
    return abort(*failure);
  }
  server_certificate_ = certificate;
  transcript_.append(certificate);
  state_ = State::kCertificateVerify;
}

void ClientSession::on_certificate_verify(const messages::CertificateVerify& verify) {
  const auto content = messages::certificate_verify_content(messages::Signer::kServer, transcript_.digest());
  if (!crypto::verify(server_certificate_->public_key(), content, verify.signature)) {
    return abort(AbortReason::kSignatureInvalid);
  }
  transcript_.append(verify);
  state_ = State::kFinished;
}

void ClientSession::on_finished(const messages::Finished& finished) {
  if (!crypto::hmac_verify(keys_->server_finished, transcript_.digest().view(), finished.mac)) {
    return abort(AbortReason::kMacInvalid);
  }
  transcript_.append(finished);

  if (mutual_) {
    auto certificate = make_certificate(offered_type(), own_identifier(), identity_->keypair);
    if (policy_.send_client_name) certificate.client_name = messages::ClientNameExt{identity_->name, true};
    transcript_.append(certificate);
    send_protected(certificate);

    const auto content = messages::certificate_verify_content(messages::Signer::kClient, transcript_.digest());
    messages::CertificateVerify verify{crypto::sign(identity_->keypair.private_key, content)};
    transcript_.append(verify);
    send_protected(verify);
  }

  messages::Finished own{crypto::hmac(keys_->client_finished, transcript_.digest().view())};
  transcript_.append(own);
  send_protected(own);

  const auto& server_key = server_certificate_->public_key();
  const Bytes ms(keys_->master.bytes.begin(), keys_->master.bytes.end());
  if (mutual_) {
    trace_->emit(TraceEvent::client_finished(policy_.intended_server, own_identifier(), server_key,
                                             identity_->keypair.public_key, ms, actor_));
  } else {
    trace_->emit(TraceEvent::client_finished(policy_.intended_server, server_key, ms, actor_));
  }
  state_ = State::kDone;
  complete(SessionResult{keys_->master, server_key, policy_.intended_server, transcript_});
}

// ---------------------------------------------------------------------------
// ServerSession

ServerSession::ServerSession(EndpointIdentity identity, ServerPolicy policy, binding::BindingView client_binding,
                             netsim::NetworkPort& port, TraceSink& trace, DeterministicRng& rng, netsim::Address peer,
                             std::uint64_t connection)
    : SessionBase(identity.name, port, trace, rng, std::move(peer), connection),
      identity_(std::move(identity)),
      policy_(policy),
      client_binding_(client_binding) {}

void ServerSession::on_message(const messages::HandshakeMessage& message, bool) {
  using namespace messages;
  switch (state_) {
    case State::kClientHello:
      if (const auto* m = std::get_if<ClientHello>(&message)) return on_client_hello(*m);
      break;
    case State::kClientCertificate:
      if (const auto* m = std::get_if<Certificate>(&message)) return on_client_certificate(*m);
      break;
    case State::kClientCertificateVerify:
      if (const auto* m = std::get_if<CertificateVerify>(&message)) return on_client_certificate_verify(*m);
      break;
    case State::kClientFinished:
      if (const auto* m = std::get_if<Finished>(&message)) return on_client_finished(*m);
      break;
    case State::kDone:
      break;
  }
  abort(AbortReason::kUnexpectedMessage, std::string(variant_name(message)));
}

void ServerSession::on_client_hello(const messages::ClientHello& hello) {
  if (policy_.check_sni) {
    if (!hello.sni) return abort(AbortReason::kMissingServerName);
    if (hello.sni->host_name != messages::ServerNameExt::make(identity_.name).host_name) {
      return abort(AbortReason::kUnrecognizedName);
    }
  }
  // Both certificate types are available on the server side.
  const CertificateType server_type = hello.server_cert_type.types.front();

  if (policy_.request_client_auth) {
    if (hello.client_cert_type && hello.client_cert_type->offers(CertificateType::kRawPublicKey)) {
      client_cert_type_ = CertificateType::kRawPublicKey;
    } else if (hello.client_cert_type && policy_.accept_mini_cert &&
               hello.client_cert_type->offers(CertificateType::kX509)) {
      client_cert_type_ = CertificateType::kX509;
    } else {
      return abort(AbortReason::kUnsupportedCertificateType);
    }
  }

  const auto dh = crypto::dh_keygen(*rng_);
  crypto::SymmetricKey shared;
  try {
    shared = crypto::dh_shared(dh.private_key, hello.dh_public);
  } catch (const crypto::CryptoError&) {
    return abort(AbortReason::kDegenerateKeyShare);
  }

  messages::ServerHello server_hello{rng_->bytes(32), dh.public_key, server_type};
  transcript_.append(hello);
  transcript_.append(server_hello);
  keys_ = key_schedule(shared, transcript_);
  send_plain(server_hello);

  messages::EncryptedExtensions extensions;
  transcript_.append(extensions);
  send_protected(extensions);

  if (policy_.request_client_auth) {
    messages::CertificateRequest request{client_cert_type_,
                                         policy_.client_binding_mode == binding::BindingMode::kDane};
    transcript_.append(request);
    send_protected(request);
  }

  const auto certificate = make_certificate(server_type, identity_.name, identity_.keypair);
  transcript_.append(certificate);
  send_protected(certificate);

  const auto content = messages::certificate_verify_content(messages::Signer::kServer, transcript_.digest());
  messages::CertificateVerify verify{crypto::sign(identity_.keypair.private_key, content)};
  transcript_.append(verify);
  send_protected(verify);

  messages::Finished finished{crypto::hmac(keys_->server_finished, transcript_.digest().view())};
  transcript_.append(finished);
  send_protected(finished);
  trace_->emit(TraceEvent::server_finished(identity_.name, identity_.keypair.public_key,
                                           Bytes(keys_->master.bytes.begin(), keys_->master.bytes.end()), actor_));

  state_ = policy_.request_client_auth ? State::kClientCertificate : State::kClientFinished;
}

void ServerSession::on_client_certificate(const messages::Certificate& certificate) {
  if (certificate.type() != client_cert_type_) return abort(AbortReason::kUnsupportedCertificateType);
  if (policy_.client_binding_mode == binding::BindingMode::kDane) {
    if (!certificate.client_name) return abort(AbortReason::kMissingClientName);
    client_identifier_ = certificate.client_name->client_domain;
  } else {
    // Pre-configured client keys are indexed by the network source address.
    client_identifier_ = peer_.value;
    if (!client_binding_.knows(client_identifier_)) return abort(AbortReason::kUnknownClientAddress);
  }
  if (auto failure = validate_peer_certificate(certificate, client_identifier_, client_binding_)) {
    return abort(*failure);
  }
  client_certificate_ = certificate;
  transcript_.append(certificate);
  state_ = State::kClientCertificateVerify;
}

void ServerSession::on_client_certificate_verify(const messages::CertificateVerify& verify) {
  const auto content = messages::certificate_verify_content(messages::Signer::kClient, transcript_.digest());
  if (!crypto::verify(client_certificate_->public_key(), content, verify.signature)) {
    return abort(AbortReason::kSignatureInvalid);
  }
  transcript_.append(verify);
  state_ = State::kClientFinished;
}

void ServerSession::on_client_finished(const messages::Finished& finished) {
  if (!crypto::hmac_verify(keys_->client_finished, transcript_.digest().view(), finished.mac)) {
    return abort(AbortReason::kMacInvalid);
  }
  transcript_.append(finished);
  state_ = State::kDone;
  const Bytes ms(keys_->master.bytes.begin(), keys_->master.bytes.end());
  if (policy_.request_client_auth) {
    const auto& client_key = client_certificate_->public_key();
    trace_->emit(TraceEvent::server_complete(identity_.name, client_identifier_, identity_.keypair.public_key,
                                             client_key, ms, actor_));
    complete(SessionResult{keys_->master, client_key, client_identifier_, transcript_});
  } else {
    complete(SessionResult{keys_->master, crypto::RawPublicKey{}, std::nullopt, transcript_});
  }
}

// ---------------------------------------------------------------------------
// Endpoints

ServerEndpoint::ServerEndpoint(netsim::Network& net, netsim::Address address, EndpointIdentity identity,
                               ServerPolicy policy, binding::BindingView client_binding, TraceSink& trace,
                               DeterministicRng& rng)
    : identity_(std::move(identity)),
      policy_(policy),
      client_binding_(client_binding),
      trace_(&trace),
      rng_(&rng),
      port_(net.attach(address, [this](const netsim::Envelope& e) { on_envelope(e); })) {}

void ServerEndpoint::on_envelope(const netsim::Envelope& envelope) {
  const auto key = std::make_pair(envelope.src, envelope.connection);
  auto it = by_connection_.find(key);
  if (it == by_connection_.end()) {
    sessions_.push_back(std::make_unique<ServerSession>(identity_, policy_, client_binding_, port_, *trace_, *rng_,
                                                        envelope.src, envelope.connection));
    it = by_connection_.emplace(key, sessions_.back().get()).first;
  }
  it->second->on_envelope(envelope);
}

ClientEndpoint::ClientEndpoint(netsim::Network& net, netsim::Address address,
                               std::optional<EndpointIdentity> identity, TraceSink& trace, DeterministicRng& rng)
    : identity_(std::move(identity)),
      trace_(&trace),
      rng_(&rng),
      port_(net.attach(address, [this](const netsim::Envelope& e) { on_envelope(e); })) {}

ClientSession& ClientEndpoint::connect(ClientPolicy policy, binding::BindingView binding, std::uint64_t connection) {
  auto session =
      std::make_unique<ClientSession>(identity_, std::move(policy), binding, port_, *trace_, *rng_, connection);
  auto& ref = *session;
  sessions_[connection] = std::move(session);
  ref.start();
  return ref;
}

void ClientEndpoint::on_envelope(const netsim::Envelope& envelope) {
  auto it = sessions_.find(envelope.connection);
  if (it == sessions_.end()) return;
  it->second->on_envelope(envelope);
}

}  // namespace rpksim::handshake
