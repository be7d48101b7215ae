#include "rpksim/binding.hpp"

#include <algorithm>

namespace rpksim::binding {

std::string_view to_string(BindingMode mode) { return mode == BindingMode::kDane ? "dane" : "preconfig"; }

std::string_view to_string(TlsaUsage usage) {
  return usage == TlsaUsage::kDaneEeRpk ? "dane-ee-rpk" : "pkix-ee-minicert";
}

crypto::Digest key_digest(const crypto::RawPublicKey& key) { return crypto::hash(key.encode()); }

TlsaRecord TlsaRecord::full(std::string owner, crypto::RawPublicKey key, TlsaUsage usage) {
  if (owner.empty()) throw BindingError("TLSA owner name is empty");
  return TlsaRecord{std::move(owner), std::move(key), usage};
}

TlsaRecord TlsaRecord::digest(std::string owner, const crypto::RawPublicKey& key, TlsaUsage usage) {
  if (owner.empty()) throw BindingError("TLSA owner name is empty");
  return TlsaRecord{std::move(owner), key_digest(key), usage};
}

bool TlsaRecord::matches(const crypto::RawPublicKey& key) const {
  if (const auto* full_key = std::get_if<crypto::RawPublicKey>(&key_ref)) return *full_key == key;
  return std::get<crypto::Digest>(key_ref) == key_digest(key);
}

std::string TlsaRecord::key_fingerprint() const {
  if (const auto* full_key = std::get_if<crypto::RawPublicKey>(&key_ref)) {
    return fingerprint(key_digest(*full_key).view());
  }
  return fingerprint(std::get<crypto::Digest>(key_ref).view());
}

void RegistryState::add_domain(const std::string& name, Credential credential) {
  credentials[name] = std::move(credential);
}

bool RegistryState::has_mixed_usages(const std::string& name) const {
  auto it = records.find(name);
  if (it == records.end()) return false;
  bool rpk = false, mini = false;
  for (const auto& r : it->second) (r.usage == TlsaUsage::kDaneEeRpk ? rpk : mini) = true;
  return rpk && mini;
}

UpdateResult dns_update(const std::string& name, const Credential& credential, const TlsaRecord& record,
                        RegistryState& registry, const std::string& registrant, TraceSink* trace) {
  UpdateAttempt attempt{name, credential, record, registrant, false};
  auto cred = registry.credentials.find(name);
  if (cred != registry.credentials.end() && cred->second == credential && record.owner_name == name) {
    auto& set = registry.records[name];
    if (std::find(set.begin(), set.end(), record) == set.end()) set.push_back(record);
    attempt.accepted = true;
    if (trace) {
      std::string target = "dns:" + std::string(to_string(record.usage));
      if (const auto* key = std::get_if<crypto::RawPublicKey>(&record.key_ref)) {
        trace->emit(TraceEvent::register_binding(name, *key, registrant, std::move(target)));
      } else {
        // Digest-only record: no key octets to log.
        TraceEvent e = TraceEvent::register_binding(name, {}, registrant, target + " digest " + record.key_fingerprint());
        e.server_key.reset();
        trace->emit(std::move(e));
      }
    }
  }
  registry.update_log.push_back(std::move(attempt));
  return registry.update_log.back().accepted ? UpdateResult::kAccepted : UpdateResult::kRejected;
}

std::vector<TlsaRecord> dns_query(const std::string& name, const RegistryState& registry) {
  auto it = registry.records.find(name);
  if (it == registry.records.end()) return {};
  return it->second;
}

Credential compromise_domain(const std::string& name, RegistryState& registry, TraceSink& trace) {
  auto it = registry.credentials.find(name);
  if (it == registry.credentials.end()) throw BindingError("cannot compromise unknown domain '" + name + "'");
  registry.compromised.insert(name);
  trace.emit(TraceEvent::compromise_domain(name));
  return it->second;
}

Bytes proof_of_possession_content(const std::string& id, const crypto::RawPublicKey& key) {
  ByteWriter w;
  w.raw(to_bytes("rpksim preconfig registration"));
  w.field(1, id);
  w.field(2, key.encode());
  return std::move(w).bytes();
}

RegisterResult preconfig_register(const std::string& id, const crypto::RawPublicKey& key, PreconfigTable& table,
                                  TraceSink& trace, const std::string& registrant,
                                  const std::optional<crypto::Signature>& proof) {
  if (table.require_proof_of_possession) {
    if (!proof || !crypto::verify(key, proof_of_possession_content(id, key), *proof)) {
      return RegisterResult::kRejected;
    }
  }
  auto& keys = table.entries[id];
  if (std::find(keys.begin(), keys.end(), key) == keys.end()) keys.push_back(key);
  trace.emit(TraceEvent::register_binding(id, key, registrant, "preconfig:" + table.owner));
  return RegisterResult::kAccepted;
}

std::vector<crypto::RawPublicKey> preconfig_lookup(const std::string& id, const PreconfigTable& table) {
  auto it = table.entries.find(id);
  if (it == table.entries.end()) return {};
  return it->second;
}

bool BindingView::accepts(const std::string& identifier, const crypto::RawPublicKey& key, TlsaUsage usage) const {
  if (mode_ == BindingMode::kDane) {
    auto records = dns_query(identifier, *registry_);
    return std::any_of(records.begin(), records.end(),
                       [&](const TlsaRecord& r) { return r.usage == usage && r.matches(key); });
  }
  auto keys = preconfig_lookup(identifier, *table_);
  return std::find(keys.begin(), keys.end(), key) != keys.end();
}

bool BindingView::knows(const std::string& identifier) const {
  if (mode_ == BindingMode::kDane) return !dns_query(identifier, *registry_).empty();
  return !preconfig_lookup(identifier, *table_).empty();
}

}  // namespace rpksim::binding
