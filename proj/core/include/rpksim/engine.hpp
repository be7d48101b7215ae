#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "rpksim/crypto.hpp"
#include "rpksim/handshake.hpp"
#include "rpksim/netsim.hpp"
#include "rpksim/properties.hpp"
#include "rpksim/scenario.hpp"
#include "rpksim/trace.hpp"

namespace rpksim::engine {

class ScenarioInvalid : public std::runtime_error {
 public:
  explicit ScenarioInvalid(std::vector<std::string> defects);
  const std::vector<std::string>& defects() const noexcept { return defects_; }

 private:
  std::vector<std::string> defects_;
};

struct QueryResult {
  scenarios::Query query = scenarios::Query::kServerAuth;
  scenarios::Expectation expected = scenarios::Expectation::kSat;
  properties::Verdict verdict;

  bool matches() const { return verdict.satisfied == (expected == scenarios::Expectation::kSat); }
};

struct SessionReport {
  std::size_t index = 0;
  std::string client;
  std::string intended_server;
  std::uint64_t connection = 0;
  handshake::SessionOutcome client_outcome;
  // Endpoint that ended up holding the other half, if any did.
  std::optional<std::string> server_endpoint;
  std::optional<handshake::SessionOutcome> server_outcome;
  std::optional<std::string> expected_abort;

  // The reason that started the teardown: an endpoint's own abort reason
  // (client first), else the alert text one side received.
  std::optional<std::string> root_abort() const;
  bool outcome_matches() const;
};

struct DnsUpdateEntry {
  std::string name;
  std::string registrant;
  std::string usage;
  std::string key_fingerprint;
  bool accepted = false;
};

struct RegistryEntry {
  std::string name;
  std::string usage;
  std::string key_fingerprint;
};

struct PreconfigEntry {
  std::string table;
  std::string id;
  std::string key_fingerprint;
};

// Data kept for tests only; never serialized into reports.
struct RunArtifacts {
  std::map<std::string, crypto::KeyPair> keys;
  std::vector<Bytes> master_secrets;
  properties::AdversaryKnowledge knowledge;
};

struct RunReport {
  std::string scenario;
  scenarios::ScenarioKind kind = scenarios::ScenarioKind::kHonest;
  std::string description;
  std::string finding;
  std::uint64_t seed = 0;

  Trace trace;
  std::vector<QueryResult> verdicts;
  std::vector<SessionReport> sessions;
  std::vector<DnsUpdateEntry> dns_updates;
  std::vector<RegistryEntry> registry;
  std::vector<PreconfigEntry> preconfig;
  std::vector<std::string> mixed_usage_names;
  std::vector<netsim::DumpLine> messages;
  std::vector<std::string> notes;

  RunArtifacts artifacts;

  bool verdicts_match() const;
  bool outcomes_match() const;
  // Pass/fail follows verdicts only.
  bool passed() const { return verdicts_match(); }
  const QueryResult* verdict(scenarios::Query query) const;
};

struct RunOptions {
  properties::CheckOptions check;
};

// Throws ScenarioInvalid (listing every defect) when the scenario does not
// validate. Handshake failures are recorded as session outcomes.
RunReport run_scenario(const scenarios::Scenario& scenario, std::uint64_t seed, const RunOptions& options = {});

struct SuiteReport {
  std::uint64_t seed = 0;
  std::vector<RunReport> runs;

  bool passed() const;
};

SuiteReport run_suite(std::uint64_t seed);

}  // namespace rpksim::engine
