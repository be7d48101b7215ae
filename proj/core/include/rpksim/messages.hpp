#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "rpksim/bytes.hpp"
#include "rpksim/crypto.hpp"

namespace rpksim::messages {

// Code points follow the certificate type registry: X509 = 0, RawPublicKey = 2.
// In this simulator the X509 type carries a MiniCert.
enum class CertificateType : std::uint8_t { kX509 = 0, kRawPublicKey = 2 };

std::string_view to_string(CertificateType type);

enum class CertificateTypeKind : std::uint8_t { kServer = 20, kClient = 19 };

struct CertificateTypeExt {
  CertificateTypeKind kind = CertificateTypeKind::kServer;
  std::vector<CertificateType> types;

  // Throws std::invalid_argument on an empty or duplicated list.
  static CertificateTypeExt make(CertificateTypeKind kind, std::vector<CertificateType> types);
  bool offers(CertificateType type) const;

  friend bool operator==(const CertificateTypeExt&, const CertificateTypeExt&) = default;
};

struct ServerNameExt {
  std::string host_name;

  // Lowercases the name.
  static ServerNameExt make(std::string_view host_name);
  friend bool operator==(const ServerNameExt&, const ServerNameExt&) = default;
};

struct ClientNameExt {
  std::string client_domain;
  bool encrypted_in_flight = true;
  friend bool operator==(const ClientNameExt&, const ClientNameExt&) = default;
};

// Minimal self-signed certificate: a subject name bound to a key by the key
// itself.
struct MiniCert {
  std::string subject;
  crypto::RawPublicKey public_key;
  crypto::Signature self_signature;

  static MiniCert issue(std::string_view subject, const crypto::KeyPair& keys);
  Bytes signed_content() const;
  bool self_signature_valid() const;

  friend bool operator==(const MiniCert&, const MiniCert&) = default;
};

struct ClientHello {
  Bytes random;
  Bytes dh_public;
  std::optional<ServerNameExt> sni;
  CertificateTypeExt server_cert_type;
  std::optional<CertificateTypeExt> client_cert_type;
  bool dane_clientid_offer = false;
  friend bool operator==(const ClientHello&, const ClientHello&) = default;
};

struct ServerHello {
  Bytes random;
  Bytes dh_public;
  CertificateType server_cert_type_ack = CertificateType::kRawPublicKey;
  friend bool operator==(const ServerHello&, const ServerHello&) = default;
};

// Carries nothing the analysis uses; present so the flight has its usual shape.
struct EncryptedExtensions {
  friend bool operator==(const EncryptedExtensions&, const EncryptedExtensions&) = default;
};

struct CertificateRequest {
  CertificateType client_cert_type_ack = CertificateType::kRawPublicKey;
  bool dane_clientid_request = false;
  friend bool operator==(const CertificateRequest&, const CertificateRequest&) = default;
};

struct Certificate {
  std::variant<crypto::RawPublicKey, MiniCert> payload;
  std::optional<ClientNameExt> client_name;

  CertificateType type() const;
  const crypto::RawPublicKey& public_key() const;
  friend bool operator==(const Certificate&, const Certificate&) = default;
};

struct CertificateVerify {
  crypto::Signature signature;
  friend bool operator==(const CertificateVerify&, const CertificateVerify&) = default;
};

struct Finished {
  crypto::Digest mac;
  friend bool operator==(const Finished&, const Finished&) = default;
};

using HandshakeMessage = std::variant<ClientHello, ServerHello, EncryptedExtensions, CertificateRequest, Certificate,
                                      CertificateVerify, Finished>;

std::string_view variant_name(const HandshakeMessage& message);

Bytes encode(const HandshakeMessage& message);
// Throws DecodeError naming the offending field for truncated, over-long or
// otherwise malformed input.
HandshakeMessage decode(ByteView data);

// Octets covered by a CertificateVerify signature: a fixed per-role context
// label followed by the transcript digest.
enum class Signer { kServer, kClient };
Bytes certificate_verify_content(Signer signer, const crypto::Digest& transcript_digest);

// Record framing on the simulated wire: one content-type octet then the body.
// Handshake records carry an encoded message in the clear, encrypted records
// carry an AEAD ciphertext of one, alert records carry an alert description.
enum class ContentType : std::uint8_t { kAlert = 21, kHandshake = 22, kEncrypted = 23 };

struct Record {
  ContentType type = ContentType::kHandshake;
  Bytes body;
};

Bytes frame(ContentType type, ByteView body);
// Throws DecodeError on an empty payload or unknown content type.
Record unframe(ByteView payload);
// "ClientHello", ..., "opaque" for encrypted records, "alert", or "malformed".
std::string describe_payload(ByteView payload);

// Append-only list of encoded handshake messages.
class Transcript {
 public:
  void append(const HandshakeMessage& message) { messages_.push_back(encode(message)); }
  void append_encoded(Bytes encoded) { messages_.push_back(std::move(encoded)); }

  std::size_t size() const noexcept { return messages_.size(); }
  const std::vector<Bytes>& messages() const noexcept { return messages_; }

  // Hash over the first `up_to` messages. Throws std::out_of_range when
  // up_to > size().
  crypto::Digest digest(std::size_t up_to) const;
  crypto::Digest digest() const { return digest(size()); }

  friend bool operator==(const Transcript&, const Transcript&) = default;

 private:
  std::vector<Bytes> messages_;
};

}  // namespace rpksim::messages
