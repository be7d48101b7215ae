#include "rpksim/messages.hpp"

#include <algorithm>
#include <cctype>
#include <stdexcept>

namespace rpksim::messages {

namespace {

enum HandshakeType : std::uint8_t {
  kClientHello = 1,
  kServerHello = 2,
  kEncryptedExtensions = 8,
  kCertificate = 11,
  kCertificateRequest = 13,
  kCertificateVerify = 15,
  kFinished = 20,
};

enum Tag : std::uint8_t {
  kRandom = 0x01,
  kDhPublic = 0x02,
  kServerName = 0x03,
  kServerCertType = 0x04,
  kClientCertType = 0x05,
  kDaneClientIdOffer = 0x06,
  kClientCertTypeAck = 0x07,
  kDaneClientIdRequest = 0x08,
  kRawKeyPayload = 0x09,
  kMiniCertPayload = 0x0a,
  kSubject = 0x0b,
  kPublicKey = 0x0c,
  kSelfSignature = 0x0d,
  kClientName = 0x0e,
  kClientDomain = 0x0f,
  kEncryptedInFlight = 0x10,
  kSignature = 0x11,
  kMac = 0x12,
  kServerCertTypeAck = 0x13,
};

constexpr std::string_view kServerVerifyLabel = "rpksim server CertificateVerify";
constexpr std::string_view kClientVerifyLabel = "rpksim client CertificateVerify";
constexpr std::string_view kMiniCertLabel = "rpksim mini-cert";

bool is_lowercase(std::string_view s) {
  return std::none_of(s.begin(), s.end(), [](unsigned char c) { return std::isupper(c); });
}

void put_bool(ByteWriter& w, std::uint8_t tag, bool v) {
  const std::uint8_t b = v ? 1 : 0;
  w.field(tag, ByteView(&b, 1));
}

bool get_bool(ByteReader& r, std::uint8_t tag, const char* name) {
  ByteView v = r.field(tag, name);
  if (v.size() != 1 || v[0] > 1) throw DecodeError(name, "not a boolean");
  return v[0] == 1;
}

CertificateType to_cert_type(std::uint8_t v, const char* name) {
  switch (v) {
    case static_cast<std::uint8_t>(CertificateType::kX509):
      return CertificateType::kX509;
    case static_cast<std::uint8_t>(CertificateType::kRawPublicKey):
      return CertificateType::kRawPublicKey;
    default:
      throw DecodeError(name, "unknown certificate type " + std::to_string(v));
  }
}

CertificateType get_cert_type(ByteReader& r, std::uint8_t tag, const char* name) {
  ByteView v = r.field(tag, name);
  if (v.size() != 1) throw DecodeError(name, "expected one octet");
  return to_cert_type(v[0], name);
}

void put_cert_type(ByteWriter& w, std::uint8_t tag, CertificateType t) {
  const auto b = static_cast<std::uint8_t>(t);
  w.field(tag, ByteView(&b, 1));
}

void put_type_ext(ByteWriter& w, std::uint8_t tag, const CertificateTypeExt& ext) {
  Bytes value;
  value.push_back(static_cast<std::uint8_t>(ext.kind));
  for (auto t : ext.types) value.push_back(static_cast<std::uint8_t>(t));
  w.field(tag, value);
}

CertificateTypeExt get_type_ext(ByteReader& r, std::uint8_t tag, const char* name) {
  ByteView v = r.field(tag, name);
  if (v.empty()) throw DecodeError(name, "missing kind");
  CertificateTypeKind kind;
  if (v[0] == static_cast<std::uint8_t>(CertificateTypeKind::kServer)) {
    kind = CertificateTypeKind::kServer;
  } else if (v[0] == static_cast<std::uint8_t>(CertificateTypeKind::kClient)) {
    kind = CertificateTypeKind::kClient;
  } else {
    throw DecodeError(name, "unknown extension kind");
  }
  std::vector<CertificateType> types;
  for (std::size_t i = 1; i < v.size(); ++i) types.push_back(to_cert_type(v[i], name));
  try {
    return CertificateTypeExt::make(kind, std::move(types));
  } catch (const std::invalid_argument& e) {
    throw DecodeError(name, e.what());
  }
}

Bytes get_exact(ByteReader& r, std::uint8_t tag, const char* name, std::size_t size) {
  ByteView v = r.field(tag, name);
  if (v.size() != size) throw DecodeError(name, "expected " + std::to_string(size) + " octets");
  return Bytes(v.begin(), v.end());
}

crypto::RawPublicKey get_key(ByteReader& r, std::uint8_t tag, const char* name) {
  ByteView v = r.field(tag, name);
  try {
    return crypto::RawPublicKey::decode(v);
  } catch (const DecodeError& e) {
    throw DecodeError(name, e.what());
  }
}

Bytes encode_body(const ClientHello& m) {
  ByteWriter w;
  w.field(kRandom, m.random);
  w.field(kDhPublic, m.dh_public);
  if (m.sni) w.field(kServerName, m.sni->host_name);
  put_type_ext(w, kServerCertType, m.server_cert_type);
  if (m.client_cert_type) put_type_ext(w, kClientCertType, *m.client_cert_type);
  put_bool(w, kDaneClientIdOffer, m.dane_clientid_offer);
  return std::move(w).bytes();
}

Bytes encode_body(const ServerHello& m) {
  ByteWriter w;
  w.field(kRandom, m.random);
  w.field(kDhPublic, m.dh_public);
  put_cert_type(w, kServerCertTypeAck, m.server_cert_type_ack);
  return std::move(w).bytes();
}

Bytes encode_body(const EncryptedExtensions&) { return {}; }

Bytes encode_body(const CertificateRequest& m) {
  ByteWriter w;
  put_cert_type(w, kClientCertTypeAck, m.client_cert_type_ack);
  put_bool(w, kDaneClientIdRequest, m.dane_clientid_request);
  return std::move(w).bytes();
}

Bytes encode_mini_cert(const MiniCert& c) {
  ByteWriter w;
  w.field(kSubject, c.subject);
  w.field(kPublicKey, c.public_key.encode());
  w.field(kSelfSignature, c.self_signature.bytes);
  return std::move(w).bytes();
}

Bytes encode_body(const Certificate& m) {
  ByteWriter w;
  if (const auto* key = std::get_if<crypto::RawPublicKey>(&m.payload)) {
    w.field(kRawKeyPayload, key->encode());
  } else {
    w.field(kMiniCertPayload, encode_mini_cert(std::get<MiniCert>(m.payload)));
  }
  if (m.client_name) {
    ByteWriter inner;
    inner.field(kClientDomain, m.client_name->client_domain);
    put_bool(inner, kEncryptedInFlight, m.client_name->encrypted_in_flight);
    w.field(kClientName, inner.bytes());
  }
  return std::move(w).bytes();
}

Bytes encode_body(const CertificateVerify& m) {
  ByteWriter w;
  w.field(kSignature, m.signature.bytes);
  return std::move(w).bytes();
}

Bytes encode_body(const Finished& m) {
  ByteWriter w;
  w.field(kMac, m.mac.view());
  return std::move(w).bytes();
}

std::uint8_t type_code(const HandshakeMessage& m) {
  static constexpr std::uint8_t codes[] = {kClientHello,  kServerHello,       kEncryptedExtensions, kCertificateRequest,
                                           kCertificate, kCertificateVerify, kFinished};
  return codes[m.index()];
}

ClientHello decode_client_hello(ByteReader& r) {
  ClientHello m;
  m.random = get_exact(r, kRandom, "client_hello.random", 32);
  m.dh_public = get_exact(r, kDhPublic, "client_hello.dh_public", 32);
  std::uint8_t tag = 0;
  if (r.peek_tag(tag) && tag == kServerName) {
    auto name = r.text_field(kServerName, "client_hello.server_name");
    if (name.empty()) throw DecodeError("client_hello.server_name", "empty host name");
    if (!is_lowercase(name)) throw DecodeError("client_hello.server_name", "host name not in canonical lowercase");
    m.sni = ServerNameExt{std::move(name)};
  }
  m.server_cert_type = get_type_ext(r, kServerCertType, "client_hello.server_certificate_type");
  if (m.server_cert_type.kind != CertificateTypeKind::kServer) {
    throw DecodeError("client_hello.server_certificate_type", "wrong extension kind");
  }
  if (r.peek_tag(tag) && tag == kClientCertType) {
    m.client_cert_type = get_type_ext(r, kClientCertType, "client_hello.client_certificate_type");
    if (m.client_cert_type->kind != CertificateTypeKind::kClient) {
      throw DecodeError("client_hello.client_certificate_type", "wrong extension kind");
    }
  }
  m.dane_clientid_offer = get_bool(r, kDaneClientIdOffer, "client_hello.dane_clientid");
  return m;
}

ServerHello decode_server_hello(ByteReader& r) {
  ServerHello m;
  m.random = get_exact(r, kRandom, "server_hello.random", 32);
  m.dh_public = get_exact(r, kDhPublic, "server_hello.dh_public", 32);
  m.server_cert_type_ack = get_cert_type(r, kServerCertTypeAck, "server_hello.server_certificate_type");
  return m;
}

CertificateRequest decode_certificate_request(ByteReader& r) {
  CertificateRequest m;
  m.client_cert_type_ack = get_cert_type(r, kClientCertTypeAck, "certificate_request.client_certificate_type");
  m.dane_clientid_request = get_bool(r, kDaneClientIdRequest, "certificate_request.dane_clientid");
  return m;
}

Certificate decode_certificate(ByteReader& r) {
  Certificate m;
  std::uint8_t tag = 0;
  if (!r.peek_tag(tag)) throw DecodeError("certificate.payload", "truncated");
  if (tag == kRawKeyPayload) {
    m.payload = get_key(r, kRawKeyPayload, "certificate.raw_public_key");
  } else if (tag == kMiniCertPayload) {
    ByteReader inner(r.field(kMiniCertPayload, "certificate.mini_cert"));
    MiniCert c;
    c.subject = inner.text_field(kSubject, "certificate.mini_cert.subject");
    c.public_key = get_key(inner, kPublicKey, "certificate.mini_cert.public_key");
    auto sig = inner.field(kSelfSignature, "certificate.mini_cert.self_signature");
    c.self_signature.bytes.assign(sig.begin(), sig.end());
    inner.expect_end("certificate.mini_cert");
    m.payload = std::move(c);
  } else {
    throw DecodeError("certificate.payload", "unexpected tag " + std::to_string(tag));
  }
  if (r.peek_tag(tag) && tag == kClientName) {
    ByteReader inner(r.field(kClientName, "certificate.client_name"));
    ClientNameExt ext;
    ext.client_domain = inner.text_field(kClientDomain, "certificate.client_name.domain");
    ext.encrypted_in_flight = get_bool(inner, kEncryptedInFlight, "certificate.client_name.encrypted");
    inner.expect_end("certificate.client_name");
    m.client_name = std::move(ext);
  }
  return m;
}

}  // namespace

std::string_view to_string(CertificateType type) {
  return type == CertificateType::kRawPublicKey ? "RawPublicKey" : "X509";
}

CertificateTypeExt CertificateTypeExt::make(CertificateTypeKind kind, std::vector<CertificateType> types) {
  if (types.empty()) throw std::invalid_argument("certificate type list is empty");
  for (std::size_t i = 0; i < types.size(); ++i) {
    for (std::size_t j = i + 1; j < types.size(); ++j) {
      if (types[i] == types[j]) throw std::invalid_argument("duplicate certificate type");
    }
  }
  return CertificateTypeExt{kind, std::move(types)};
}

bool CertificateTypeExt::offers(CertificateType type) const {
  return std::find(types.begin(), types.end(), type) != types.end();
}

ServerNameExt ServerNameExt::make(std::string_view host_name) {
  std::string lower(host_name);
  std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
  return ServerNameExt{std::move(lower)};
}

MiniCert MiniCert::issue(std::string_view subject, const crypto::KeyPair& keys) {
  MiniCert c;
  c.subject = std::string(subject);
  c.public_key = keys.public_key;
  c.self_signature = crypto::sign(keys.private_key, c.signed_content());
  return c;
}

Bytes MiniCert::signed_content() const {
  ByteWriter w;
  w.raw(to_bytes(kMiniCertLabel));
  w.field(kSubject, subject);
  w.field(kPublicKey, public_key.encode());
  return std::move(w).bytes();
}

bool MiniCert::self_signature_valid() const { return crypto::verify(public_key, signed_content(), self_signature); }

CertificateType Certificate::type() const {
  return std::holds_alternative<crypto::RawPublicKey>(payload) ? CertificateType::kRawPublicKey
                                                              : CertificateType::kX509;
}

const crypto::RawPublicKey& Certificate::public_key() const {
  if (const auto* key = std::get_if<crypto::RawPublicKey>(&payload)) return *key;
  return std::get<MiniCert>(payload).public_key;
}

std::string_view variant_name(const HandshakeMessage& message) {
  static constexpr std::string_view names[] = {"ClientHello", "ServerHello",       "EncryptedExtensions",
                                               "CertificateRequest", "Certificate", "CertificateVerify",
                                               "Finished"};
  return names[message.index()];
}

Bytes encode(const HandshakeMessage& message) {
  Bytes body = std::visit([](const auto& m) { return encode_body(m); }, message);
  ByteWriter w;
  w.u8(type_code(message));
  w.u32(static_cast<std::uint32_t>(body.size()));
  w.raw(body);
  return std::move(w).bytes();
}

HandshakeMessage decode(ByteView data) {
  ByteReader outer(data);
  std::uint8_t type = outer.u8("handshake.type");
  std::uint32_t len = outer.u32("handshake.length");
  ByteView body = outer.take(len, "handshake.body");
  outer.expect_end("handshake");

  ByteReader r(body);
  HandshakeMessage out;
  switch (type) {
    case kClientHello:
      out = decode_client_hello(r);
      break;
    case kServerHello:
      out = decode_server_hello(r);
      break;
    case kEncryptedExtensions:
      out = EncryptedExtensions{};
      break;
    case kCertificateRequest:
      out = decode_certificate_request(r);
      break;
    case kCertificate:
      out = decode_certificate(r);
      break;
    case kCertificateVerify: {
      auto sig = r.field(kSignature, "certificate_verify.signature");
      out = CertificateVerify{crypto::Signature{Bytes(sig.begin(), sig.end())}};
      break;
    }
    case kFinished: {
      Bytes mac = get_exact(r, kMac, "finished.mac", crypto::kDigestSize);
      Finished f;
      std::copy(mac.begin(), mac.end(), f.mac.bytes.begin());
      out = f;
      break;
    }
    default:
      throw DecodeError("handshake.type", "unknown message type " + std::to_string(type));
  }
  r.expect_end("handshake.body");
  return out;
}

Bytes certificate_verify_content(Signer signer, const crypto::Digest& transcript_digest) {
  Bytes out = to_bytes(signer == Signer::kServer ? kServerVerifyLabel : kClientVerifyLabel);
  out.push_back(0x00);
  append(out, transcript_digest.view());
  return out;
}

Bytes frame(ContentType type, ByteView body) {
  Bytes out;
  out.reserve(body.size() + 1);
  out.push_back(static_cast<std::uint8_t>(type));
  append(out, body);
  return out;
}

Record unframe(ByteView payload) {
  if (payload.empty()) throw DecodeError("record.type", "empty payload");
  const auto t = payload[0];
  if (t != static_cast<std::uint8_t>(ContentType::kAlert) && t != static_cast<std::uint8_t>(ContentType::kHandshake) &&
      t != static_cast<std::uint8_t>(ContentType::kEncrypted)) {
    throw DecodeError("record.type", "unknown content type " + std::to_string(t));
  }
  return Record{static_cast<ContentType>(t), Bytes(payload.begin() + 1, payload.end())};
}

std::string describe_payload(ByteView payload) {
  try {
    Record r = unframe(payload);
    switch (r.type) {
      case ContentType::kAlert:
        return "alert";
      case ContentType::kEncrypted:
        return "opaque";
      case ContentType::kHandshake:
        return std::string(variant_name(decode(r.body)));
    }
  } catch (const DecodeError&) {
  }
  return "malformed";
}

crypto::Digest Transcript::digest(std::size_t up_to) const {
  if (up_to > messages_.size()) throw std::out_of_range("transcript index out of range");
  Bytes all;
  for (std::size_t i = 0; i < up_to; ++i) rpksim::append(all, messages_[i]);
  return crypto::hash(all);
}

}  // namespace rpksim::messages
