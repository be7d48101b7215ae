#pragma once

// Primitive contracts used by the handshake. The concrete choices are fixed
// project-wide: SHA-256, HMAC-SHA-256, Ed25519, X25519 and
// ChaCha20-Poly1305 (IETF), all provided by libsodium.

#include <array>
#include <compare>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

#include "rpksim/bytes.hpp"
#include "rpksim/rng.hpp"

namespace rpksim::crypto {

inline constexpr std::size_t kDigestSize = 32;
inline constexpr std::size_t kKeySize = 32;

struct Digest {
  std::array<std::uint8_t, kDigestSize> bytes{};

  ByteView view() const { return bytes; }
  friend bool operator==(const Digest&, const Digest&) = default;
  friend auto operator<=>(const Digest&, const Digest&) = default;
};

enum class PublicKeyAlgorithm : std::uint8_t { kEd25519 = 1 };

// SubjectPublicKeyInfo role: algorithm identifier plus raw key octets.
struct RawPublicKey {
  PublicKeyAlgorithm algorithm = PublicKeyAlgorithm::kEd25519;
  Bytes key_bytes;

  // Canonical serialization; equality is defined on it.
  Bytes encode() const;
  static RawPublicKey decode(ByteView data);

  friend bool operator==(const RawPublicKey&, const RawPublicKey&) = default;
  friend auto operator<=>(const RawPublicKey&, const RawPublicKey&) = default;
};

struct Signature {
  Bytes bytes;
  friend bool operator==(const Signature&, const Signature&) = default;
};

struct KeyPair {
  RawPublicKey public_key;
  Bytes private_key;  // libsodium's 64-octet seed||public form

  static KeyPair generate(DeterministicRng& rng);
  static KeyPair from_seed(ByteView seed32);
};

enum class KeyPurpose : std::uint8_t {
  kDhShared = 0,
  kHandshakeTrafficClient,
  kHandshakeTrafficServer,
  kFinishedClient,
  kFinishedServer,
  kMaster,
};

// The label vocabulary accepted by kdf_expand_label (every purpose except
// kDhShared).
std::string_view purpose_label(KeyPurpose purpose);
std::optional<KeyPurpose> purpose_from_label(std::string_view label);

struct SymmetricKey {
  KeyPurpose purpose = KeyPurpose::kDhShared;
  std::array<std::uint8_t, kKeySize> bytes{};

  ByteView view() const { return bytes; }
  friend bool operator==(const SymmetricKey&, const SymmetricKey&) = default;
};

class CryptoError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

Digest hash(ByteView data);
Digest hmac(const SymmetricKey& key, ByteView data);
bool hmac_verify(const SymmetricKey& key, ByteView data, const Digest& mac);

// HKDF-Expand style single block: HMAC(secret, "rpksim " label || context || 0x01).
// Throws CryptoError for labels outside the purpose vocabulary.
SymmetricKey kdf_expand_label(const SymmetricKey& secret, std::string_view label, const Digest& context);

Signature sign(ByteView private_key, ByteView message);
// Malformed signatures or keys verify as false.
bool verify(const RawPublicKey& public_key, ByteView message, const Signature& signature);

struct DhKeyPair {
  Bytes private_key;  // 32 octets
  Bytes public_key;   // 32 octets
};

DhKeyPair dh_keygen(DeterministicRng& rng);
// Throws CryptoError when the peer value is degenerate (low order / wrong size).
SymmetricKey dh_shared(ByteView private_key, ByteView peer_public);

// Nonce is a per-direction message counter.
Bytes aead_seal(const SymmetricKey& key, std::uint64_t nonce, ByteView plaintext, ByteView aad);
// std::nullopt signals authentication failure.
std::optional<Bytes> aead_open(const SymmetricKey& key, std::uint64_t nonce, ByteView ciphertext, ByteView aad);

}  // namespace rpksim::crypto
