#include "rpksim/crypto.hpp"

#include <sodium.h>

#include <array>
#include <mutex>

namespace rpksim::crypto {

namespace {

void ensure_sodium() {
  static std::once_flag once;
  std::call_once(once, [] {
    if (sodium_init() < 0) throw CryptoError("libsodium initialisation failed");
  });
}

constexpr std::array<std::string_view, 6> kLabels = {
    "dh-shared",        "handshake-traffic-client", "handshake-traffic-server",
    "finished-client",  "finished-server",          "master",
};

}  // namespace

Bytes RawPublicKey::encode() const {
  ByteWriter w;
  w.u8(static_cast<std::uint8_t>(algorithm));
  w.u32(static_cast<std::uint32_t>(key_bytes.size()));
  w.raw(key_bytes);
  return std::move(w).bytes();
}

RawPublicKey RawPublicKey::decode(ByteView data) {
  ByteReader r(data);
  auto alg = r.u8("spki.algorithm");
  if (alg != static_cast<std::uint8_t>(PublicKeyAlgorithm::kEd25519)) {
    throw DecodeError("spki.algorithm", "unknown algorithm " + std::to_string(alg));
  }
  auto len = r.u32("spki.key");
  if (len != crypto_sign_PUBLICKEYBYTES) throw DecodeError("spki.key", "bad key length");
  ByteView key = r.take(len, "spki.key");
  r.expect_end("spki");
  return RawPublicKey{PublicKeyAlgorithm::kEd25519, Bytes(key.begin(), key.end())};
}

KeyPair KeyPair::from_seed(ByteView seed32) {
  ensure_sodium();
  if (seed32.size() != crypto_sign_SEEDBYTES) throw CryptoError("signature seed must be 32 octets");
  Bytes pk(crypto_sign_PUBLICKEYBYTES);
  Bytes sk(crypto_sign_SECRETKEYBYTES);
  crypto_sign_seed_keypair(pk.data(), sk.data(), seed32.data());
  return KeyPair{RawPublicKey{PublicKeyAlgorithm::kEd25519, std::move(pk)}, std::move(sk)};
}

KeyPair KeyPair::generate(DeterministicRng& rng) { return from_seed(rng.bytes(crypto_sign_SEEDBYTES)); }

std::string_view purpose_label(KeyPurpose purpose) { return kLabels[static_cast<std::size_t>(purpose)]; }

std::optional<KeyPurpose> purpose_from_label(std::string_view label) {
  // Index 0 (dh-shared) is not a derivable label.
  for (std::size_t i = 1; i < kLabels.size(); ++i) {
    if (kLabels[i] == label) return static_cast<KeyPurpose>(i);
  }
  return std::nullopt;
}

Digest hash(ByteView data) {
  ensure_sodium();
  Digest d;
  crypto_hash_sha256(d.bytes.data(), data.data(), data.size());
  return d;
}

Digest hmac(const SymmetricKey& key, ByteView data) {
  ensure_sodium();
  crypto_auth_hmacsha256_state st;
  crypto_auth_hmacsha256_init(&st, key.bytes.data(), key.bytes.size());
  crypto_auth_hmacsha256_update(&st, data.data(), data.size());
  Digest d;
  crypto_auth_hmacsha256_final(&st, d.bytes.data());
  return d;
}

bool hmac_verify(const SymmetricKey& key, ByteView data, const Digest& mac) {
  Digest expected = hmac(key, data);
  return sodium_memcmp(expected.bytes.data(), mac.bytes.data(), kDigestSize) == 0;
}

SymmetricKey kdf_expand_label(const SymmetricKey& secret, std::string_view label, const Digest& context) {
  auto purpose = purpose_from_label(label);
  if (!purpose) throw CryptoError("unknown key schedule label '" + std::string(label) + "'");
  Bytes info = to_bytes("rpksim ");
  append(info, to_bytes(label));
  append(info, context.view());
  info.push_back(0x01);
  Digest block = hmac(secret, info);
  SymmetricKey out;
  out.purpose = *purpose;
  out.bytes = block.bytes;
  return out;
}

Signature sign(ByteView private_key, ByteView message) {
  ensure_sodium();
  if (private_key.size() != crypto_sign_SECRETKEYBYTES) throw CryptoError("bad signing key length");
  Bytes sig(crypto_sign_BYTES);
  crypto_sign_detached(sig.data(), nullptr, message.data(), message.size(), private_key.data());
  return Signature{std::move(sig)};
}

bool verify(const RawPublicKey& public_key, ByteView message, const Signature& signature) {
  ensure_sodium();
  if (public_key.algorithm != PublicKeyAlgorithm::kEd25519) return false;
  if (public_key.key_bytes.size() != crypto_sign_PUBLICKEYBYTES) return false;
  if (signature.bytes.size() != crypto_sign_BYTES) return false;
  return crypto_sign_verify_detached(signature.bytes.data(), message.data(), message.size(),
                                     public_key.key_bytes.data()) == 0;
}

DhKeyPair dh_keygen(DeterministicRng& rng) {
  ensure_sodium();
  DhKeyPair kp;
  kp.private_key = rng.bytes(crypto_scalarmult_SCALARBYTES);
  kp.public_key.resize(crypto_scalarmult_BYTES);
  crypto_scalarmult_base(kp.public_key.data(), kp.private_key.data());
  return kp;
}

SymmetricKey dh_shared(ByteView private_key, ByteView peer_public) {
  ensure_sodium();
  if (private_key.size() != crypto_scalarmult_SCALARBYTES) throw CryptoError("bad DH private key length");
  if (peer_public.size() != crypto_scalarmult_BYTES) throw CryptoError("degenerate DH share: bad length");
  SymmetricKey out;
  out.purpose = KeyPurpose::kDhShared;
  // libsodium refuses results that are all zero (low-order peer points).
  if (crypto_scalarmult(out.bytes.data(), private_key.data(), peer_public.data()) != 0) {
    throw CryptoError("degenerate DH share");
  }
  return out;
}

namespace {
std::array<std::uint8_t, crypto_aead_chacha20poly1305_ietf_NPUBBYTES> counter_nonce(std::uint64_t counter) {
  std::array<std::uint8_t, crypto_aead_chacha20poly1305_ietf_NPUBBYTES> nonce{};
  for (int i = 0; i < 8; ++i) {
    nonce[nonce.size() - 1 - i] = static_cast<std::uint8_t>(counter >> (8 * i));
  }
  return nonce;
}
}  // namespace

Bytes aead_seal(const SymmetricKey& key, std::uint64_t nonce, ByteView plaintext, ByteView aad) {
  ensure_sodium();
  auto n = counter_nonce(nonce);
  Bytes out(plaintext.size() + crypto_aead_chacha20poly1305_ietf_ABYTES);
  unsigned long long out_len = 0;
  crypto_aead_chacha20poly1305_ietf_encrypt(out.data(), &out_len, plaintext.data(), plaintext.size(), aad.data(),
                                            aad.size(), nullptr, n.data(), key.bytes.data());
  out.resize(out_len);
  return out;
}

std::optional<Bytes> aead_open(const SymmetricKey& key, std::uint64_t nonce, ByteView ciphertext, ByteView aad) {
  ensure_sodium();
  if (ciphertext.size() < crypto_aead_chacha20poly1305_ietf_ABYTES) return std::nullopt;
  auto n = counter_nonce(nonce);
  Bytes out(ciphertext.size() - crypto_aead_chacha20poly1305_ietf_ABYTES);
  unsigned long long out_len = 0;
  if (crypto_aead_chacha20poly1305_ietf_decrypt(out.data(), &out_len, nullptr, ciphertext.data(), ciphertext.size(),
                                                aad.data(), aad.size(), n.data(), key.bytes.data()) != 0) {
    return std::nullopt;
  }
  out.resize(out_len);
  return out;
}

}  // namespace rpksim::crypto
