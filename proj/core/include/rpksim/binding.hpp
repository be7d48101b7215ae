#pragma once

#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "rpksim/crypto.hpp"
#include "rpksim/trace.hpp"

namespace rpksim::binding {

enum class BindingMode { kDane, kPreconfig };
std::string_view to_string(BindingMode mode);

enum class TlsaUsage { kDaneEeRpk, kPkixEeMiniCert };
std::string_view to_string(TlsaUsage usage);

class BindingError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Fingerprint form stored in digest-style TLSA records.
crypto::Digest key_digest(const crypto::RawPublicKey& key);

struct TlsaRecord {
  std::string owner_name;
  std::variant<crypto::RawPublicKey, crypto::Digest> key_ref;
  TlsaUsage usage = TlsaUsage::kDaneEeRpk;

  static TlsaRecord full(std::string owner, crypto::RawPublicKey key, TlsaUsage usage);
  static TlsaRecord digest(std::string owner, const crypto::RawPublicKey& key, TlsaUsage usage);

  bool matches(const crypto::RawPublicKey& key) const;
  // Hex fingerprint of the referenced key (digest form for full keys).
  std::string key_fingerprint() const;

  friend bool operator==(const TlsaRecord&, const TlsaRecord&) = default;
};

// Opaque update authorisation for one DNS name.
struct Credential {
  std::string token;
  friend bool operator==(const Credential&, const Credential&) = default;
};

struct UpdateAttempt {
  std::string name;
  Credential presented;
  TlsaRecord record;
  std::string registrant;
  bool accepted = false;
};

struct RegistryState {
  std::map<std::string, std::vector<TlsaRecord>> records;
  std::map<std::string, Credential> credentials;
  std::set<std::string> compromised;
  std::vector<UpdateAttempt> update_log;

  // Setup step: gives `name` an update credential.
  void add_domain(const std::string& name, Credential credential);
  bool has_mixed_usages(const std::string& name) const;
};

enum class UpdateResult { kAccepted, kRejected };

// Adds the record iff `credential` is the one held for `name`. No proof of
// possession of the private key is involved.
UpdateResult dns_update(const std::string& name, const Credential& credential, const TlsaRecord& record,
                        RegistryState& registry, const std::string& registrant, TraceSink* trace = nullptr);

std::vector<TlsaRecord> dns_query(const std::string& name, const RegistryState& registry);

// Hands the credential to the adversary and logs CompromiseDomain(name).
Credential compromise_domain(const std::string& name, RegistryState& registry, TraceSink& trace);

struct PreconfigTable {
  std::string owner;
  // When set, registration needs a signature by the registered key.
  bool require_proof_of_possession = false;
  std::map<std::string, std::vector<crypto::RawPublicKey>> entries;
};

enum class RegisterResult { kAccepted, kRejected };

Bytes proof_of_possession_content(const std::string& id, const crypto::RawPublicKey& key);

RegisterResult preconfig_register(const std::string& id, const crypto::RawPublicKey& key, PreconfigTable& table,
                                  TraceSink& trace, const std::string& registrant,
                                  const std::optional<crypto::Signature>& proof = std::nullopt);

std::vector<crypto::RawPublicKey> preconfig_lookup(const std::string& id, const PreconfigTable& table);

// Read-only view handed to handshake code.
class BindingView {
 public:
  static BindingView dane(const RegistryState& registry) { return BindingView(BindingMode::kDane, &registry, nullptr); }
  static BindingView preconfig(const PreconfigTable& table) {
    return BindingView(BindingMode::kPreconfig, nullptr, &table);
  }

  BindingMode mode() const noexcept { return mode_; }

  // DANE: some record for `identifier` with `usage` matches `key`.
  // PRECONFIG: `key` is among the entries for `identifier` (usage ignored).
  bool accepts(const std::string& identifier, const crypto::RawPublicKey& key, TlsaUsage usage) const;
  // Whether the identifier has any binding at all.
  bool knows(const std::string& identifier) const;

 private:
  BindingView(BindingMode mode, const RegistryState* registry, const PreconfigTable* table)
      : mode_(mode), registry_(registry), table_(table) {}

  BindingMode mode_;
  const RegistryState* registry_;
  const PreconfigTable* table_;
};

}  // namespace rpksim::binding
