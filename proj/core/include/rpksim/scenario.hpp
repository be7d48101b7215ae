#pragma once

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "rpksim/binding.hpp"
#include "rpksim/handshake.hpp"
#include "rpksim/netsim.hpp"

namespace rpksim::scenarios {

enum class Role { kClient, kServer };

struct EndpointDecl {
  Role role = Role::kClient;
  std::string name;
  std::string address;
  std::optional<std::string> key;  // anonymous client when absent
  handshake::ClientPolicy client_policy;  // intended_server is filled per session
  handshake::ServerPolicy server_policy;
  // Registration into this endpoint's pre-configured key table needs proof of
  // possession.
  bool strict_preconfig = false;
};

enum class Controller { kHonest, kAdversary };

// A DNS name that is not an endpoint (e.g. the adversary's own domain).
struct NameDecl {
  std::string name;
  std::string address;
  Controller controller = Controller::kHonest;
};

enum class KeyForm { kFull, kDigest };

struct DnsRecordDecl {
  std::string owner;
  std::string key;
  binding::TlsaUsage usage = binding::TlsaUsage::kDaneEeRpk;
  KeyForm form = KeyForm::kDigest;
};

struct PreconfigEntryDecl {
  std::string table;  // owning endpoint
  std::string id;
  std::string key;
};

struct Bindings {
  std::vector<DnsRecordDecl> dns;
  std::vector<PreconfigEntryDecl> preconfig;
};

struct AdversaryRegistration {
  enum class Kind { kDns, kPreconfig } kind = Kind::kDns;
  // dns: owner name; preconfig: identifier.
  std::string name;
  std::string key;
  binding::TlsaUsage usage = binding::TlsaUsage::kDaneEeRpk;
  KeyForm form = KeyForm::kDigest;
  std::string table;  // preconfig only
};

struct AdversaryDecl {
  std::vector<std::string> keys;  // keypairs the adversary generated itself
  std::vector<std::string> compromise;
  std::vector<AdversaryRegistration> registrations;
  netsim::AdversaryScript script;
  // Test fixture: hand every completed session's master secret to the adversary.
  bool leak_master_secrets = false;
};

struct SessionDecl {
  std::string client;
  std::string server;  // intended name
  std::optional<std::string> expected_abort;
};

enum class Query { kServerAuth, kClientAuth, kSecrecy };
std::string_view to_string(Query query);
std::optional<Query> query_from_string(std::string_view text);

enum class Expectation { kSat, kViolated };
std::string_view to_string(Expectation e);

enum class ScenarioKind { kHonest, kAttack, kMitigation, kNegative };
std::string_view to_string(ScenarioKind kind);

struct Scenario {
  std::string name;
  std::string description;
  std::string finding;
  ScenarioKind kind = ScenarioKind::kHonest;
  std::optional<std::string> variant_of;
  std::vector<std::string> keys;
  std::vector<EndpointDecl> endpoints;
  std::vector<NameDecl> names;
  Bindings bindings;
  AdversaryDecl adversary;
  std::vector<SessionDecl> sessions;
  std::vector<Query> queries;
  std::map<Query, Expectation> expected;

  const EndpointDecl* endpoint(const std::string& name) const;
};

class ScenarioParseError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

// JSON <-> Scenario. Field names follow the struct members above.
Scenario parse_scenario(const std::string& json_text);
std::string serialize_scenario(const Scenario& scenario);

// Referential integrity, policy consistency and adversary capability scoping.
// Returns every defect found; empty means valid.
std::vector<std::string> validate_scenario(const Scenario& scenario);

// Built-in library, in catalogue order.
std::vector<Scenario> builtin_scenarios();
std::optional<Scenario> find_builtin(const std::string& name);

}  // namespace rpksim::scenarios
