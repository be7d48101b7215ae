#include "rpksim/engine.hpp"

#include <algorithm>
#include <memory>
#include <set>

#include "rpksim/binding.hpp"

namespace rpksim::engine {

using scenarios::Controller;
using scenarios::KeyForm;
using scenarios::Query;
using scenarios::Role;
using scenarios::Scenario;

namespace {

std::string join(const std::vector<std::string>& parts) {
  std::string out;
  for (const auto& p : parts) out += (out.empty() ? "" : "; ") + p;
  return out;
}

constexpr const char* kAdversary = "adversary";

binding::TlsaRecord make_record(const std::string& owner, const crypto::RawPublicKey& key, binding::TlsaUsage usage,
                                KeyForm form) {
  return form == KeyForm::kFull ? binding::TlsaRecord::full(owner, key, usage)
                                : binding::TlsaRecord::digest(owner, key, usage);
}

}  // namespace

ScenarioInvalid::ScenarioInvalid(std::vector<std::string> defects)
    : std::runtime_error("scenario invalid: " + join(defects)), defects_(std::move(defects)) {}

std::optional<std::string> SessionReport::root_abort() const {
  auto own = [](const handshake::SessionOutcome& o) -> std::optional<std::string> {
    if (o.status != handshake::SessionStatus::kAborted || *o.reason == handshake::AbortReason::kPeerAlert) {
      return std::nullopt;
    }
    return std::string(handshake::to_string(*o.reason));
  };
  auto alert = [](const handshake::SessionOutcome& o) -> std::optional<std::string> {
    if (o.status != handshake::SessionStatus::kAborted || *o.reason != handshake::AbortReason::kPeerAlert) {
      return std::nullopt;
    }
    return o.detail;
  };
  if (auto r = own(client_outcome)) return r;
  if (server_outcome) {
    if (auto r = own(*server_outcome)) return r;
  }
  if (auto r = alert(client_outcome)) return r;
  if (server_outcome) return alert(*server_outcome);
  return std::nullopt;
}

bool SessionReport::outcome_matches() const {
  if (expected_abort) return root_abort() == expected_abort;
  return client_outcome.status == handshake::SessionStatus::kComplete &&
         (!server_outcome || server_outcome->status == handshake::SessionStatus::kComplete);
}

bool RunReport::verdicts_match() const {
  return std::all_of(verdicts.begin(), verdicts.end(), [](const QueryResult& q) { return q.matches(); });
}

bool RunReport::outcomes_match() const {
  return std::all_of(sessions.begin(), sessions.end(), [](const SessionReport& s) { return s.outcome_matches(); });
}

const QueryResult* RunReport::verdict(Query query) const {
  auto it = std::find_if(verdicts.begin(), verdicts.end(), [&](const QueryResult& q) { return q.query == query; });
  return it == verdicts.end() ? nullptr : &*it;
}

bool SuiteReport::passed() const {
  return std::all_of(runs.begin(), runs.end(), [](const RunReport& r) { return r.passed() && r.outcomes_match(); });
}

RunReport run_scenario(const Scenario& scenario, std::uint64_t seed, const RunOptions& options) {
  if (auto defects = scenarios::validate_scenario(scenario); !defects.empty()) throw ScenarioInvalid(std::move(defects));

  RunReport report;
  report.scenario = scenario.name;
  report.kind = scenario.kind;
  report.description = scenario.description;
  report.finding = scenario.finding;
  report.seed = seed;

  DeterministicRng rng(seed);
  TraceSink trace;

  auto& keys = report.artifacts.keys;
  for (const auto& k : scenario.keys) keys.emplace(k, crypto::KeyPair::generate(rng));

  // Names, credentials and who holds them.
  std::map<std::string, netsim::NameEntry> names;
  std::set<std::string> adversary_names;
  binding::RegistryState registry;
  for (const auto& e : scenario.endpoints) names[e.name] = netsim::NameEntry{netsim::Address{e.address}, false};
  for (const auto& n : scenario.names) {
    names[n.name] = netsim::NameEntry{netsim::Address{n.address}, n.controller == Controller::kAdversary};
    if (n.controller == Controller::kAdversary) adversary_names.insert(n.name);
  }
  for (const auto& [name, _] : names) registry.add_domain(name, binding::Credential{to_hex(rng.bytes(16))});

  std::map<std::string, binding::Credential> held;
  for (const auto& name : adversary_names) held[name] = registry.credentials.at(name);
  for (const auto& name : scenario.adversary.compromise) {
    held[name] = binding::compromise_domain(name, registry, trace);
    names[name].adversary_controlled = true;
  }

  std::map<std::string, binding::PreconfigTable> tables;
  for (const auto& e : scenario.endpoints) {
    tables[e.name] = binding::PreconfigTable{e.name, e.strict_preconfig, {}};
  }

  // Honest setup.
  for (const auto& r : scenario.bindings.dns) {
    const std::string registrant = adversary_names.count(r.owner) ? kAdversary : r.owner;
    binding::dns_update(r.owner, registry.credentials.at(r.owner),
                        make_record(r.owner, keys.at(r.key).public_key, r.usage, r.form), registry, registrant, &trace);
  }
  for (const auto& r : scenario.bindings.preconfig) {
    const auto& kp = keys.at(r.key);
    auto proof = crypto::sign(kp.private_key, binding::proof_of_possession_content(r.id, kp.public_key));
    binding::preconfig_register(r.id, kp.public_key, tables.at(r.table), trace, r.table, proof);
  }

  // Adversary setup.
  const std::set<std::string> own_keys(scenario.adversary.keys.begin(), scenario.adversary.keys.end());
  for (const auto& r : scenario.adversary.registrations) {
    const auto& kp = keys.at(r.key);
    if (r.kind == scenarios::AdversaryRegistration::Kind::kDns) {
      auto cred = held.count(r.name) ? held.at(r.name) : binding::Credential{"forged:" + r.name};
      binding::dns_update(r.name, cred, make_record(r.name, kp.public_key, r.usage, r.form), registry, kAdversary,
                          &trace);
    } else {
      std::optional<crypto::Signature> proof;
      if (own_keys.count(r.key)) {
        proof = crypto::sign(kp.private_key, binding::proof_of_possession_content(r.name, kp.public_key));
      }
      if (binding::preconfig_register(r.name, kp.public_key, tables.at(r.table), trace, kAdversary, proof) ==
          binding::RegisterResult::kRejected) {
        report.notes.push_back("preconfig registration of '" + r.name + "' into " + r.table +
                               " rejected: no proof of possession");
      }
    }
  }

  netsim::Network net(names, scenario.adversary.script);

  auto identity_of = [&](const scenarios::EndpointDecl& e) -> std::optional<handshake::EndpointIdentity> {
    if (!e.key) return std::nullopt;
    return handshake::EndpointIdentity{e.name, keys.at(*e.key)};
  };
  auto view_for = [&](binding::BindingMode mode, const std::string& owner) {
    return mode == binding::BindingMode::kDane ? binding::BindingView::dane(registry)
                                               : binding::BindingView::preconfig(tables.at(owner));
  };

  std::vector<std::pair<std::string, std::unique_ptr<handshake::ServerEndpoint>>> servers;
  std::map<std::string, std::unique_ptr<handshake::ClientEndpoint>> clients;
  for (const auto& e : scenario.endpoints) {
    if (e.role == Role::kServer) {
      servers.emplace_back(e.name, std::make_unique<handshake::ServerEndpoint>(
                                       net, netsim::Address{e.address}, *identity_of(e), e.server_policy,
                                       view_for(e.server_policy.client_binding_mode, e.name), trace, rng));
    } else {
      clients[e.name] =
          std::make_unique<handshake::ClientEndpoint>(net, netsim::Address{e.address}, identity_of(e), trace, rng);
    }
  }

  std::vector<handshake::ClientSession*> client_sessions;
  for (std::size_t i = 0; i < scenario.sessions.size(); ++i) {
    const auto& decl = scenario.sessions[i];
    const auto* endpoint = scenario.endpoint(decl.client);
    auto policy = endpoint->client_policy;
    policy.intended_server = decl.server;
    auto& session = clients.at(decl.client)->connect(policy, view_for(policy.binding_mode, decl.client), i + 1);
    net.run();
    client_sessions.push_back(&session);
  }

  for (std::size_t i = 0; i < scenario.sessions.size(); ++i) {
    SessionReport s;
    s.index = i;
    s.client = scenario.sessions[i].client;
    s.intended_server = scenario.sessions[i].server;
    s.connection = i + 1;
    s.client_outcome = client_sessions[i]->outcome();
    s.expected_abort = scenario.sessions[i].expected_abort;
    for (const auto& [name, server] : servers) {
      for (const auto& session : server->sessions()) {
        if (session->connection() == s.connection) {
          s.server_endpoint = name;
          s.server_outcome = session->outcome();
          break;
        }
      }
      if (s.server_endpoint) break;
    }
    report.sessions.push_back(std::move(s));
  }

  report.trace = trace.events();

  // What the adversary ends up holding.
  auto& knowledge = report.artifacts.knowledge;
  for (const auto& payload : net.observed_payloads()) knowledge.learn(payload);
  for (const auto& [name, cred] : held) knowledge.learn(to_bytes(cred.token));
  for (const auto& k : scenario.adversary.keys) knowledge.learn(keys.at(k).private_key);
  for (const auto& [_, kp] : keys) knowledge.learn(kp.public_key.encode());
  for (const auto& e : report.trace) {
    if (e.master_secret) {
      report.artifacts.master_secrets.push_back(*e.master_secret);
      if (scenario.adversary.leak_master_secrets) knowledge.learn(*e.master_secret);
    }
  }

  for (auto q : scenario.queries) {
    QueryResult result;
    result.query = q;
    result.expected = scenario.expected.at(q);
    switch (q) {
      case Query::kServerAuth:
        result.verdict = properties::check_server_auth(report.trace, options.check);
        break;
      case Query::kClientAuth:
        result.verdict = properties::check_client_auth(report.trace, options.check);
        break;
      case Query::kSecrecy:
        result.verdict = properties::check_secrecy(report.trace, knowledge);
        break;
    }
    report.verdicts.push_back(std::move(result));
  }

  for (const auto& attempt : registry.update_log) {
    report.dns_updates.push_back(DnsUpdateEntry{attempt.name, attempt.registrant,
                                                std::string(binding::to_string(attempt.record.usage)),
                                                attempt.record.key_fingerprint(), attempt.accepted});
  }
  for (const auto& [name, records] : registry.records) {
    for (const auto& r : records) {
      report.registry.push_back(RegistryEntry{name, std::string(binding::to_string(r.usage)), r.key_fingerprint()});
    }
    if (registry.has_mixed_usages(name)) {
      report.mixed_usage_names.push_back(name);
      report.notes.push_back("TLSA set for '" + name +
                             "' mixes dane-ee-rpk and pkix-ee-minicert; each session validates with one usage");
    }
  }
  for (const auto& [owner, table] : tables) {
    for (const auto& [id, table_keys] : table.entries) {
      for (const auto& k : table_keys) {
        report.preconfig.push_back(PreconfigEntry{owner, id, fingerprint(binding::key_digest(k).view())});
      }
    }
  }
  report.messages = net.dump();
  return report;
}

SuiteReport run_suite(std::uint64_t seed) {
  SuiteReport suite;
  suite.seed = seed;
  for (const auto& s : scenarios::builtin_scenarios()) suite.runs.push_back(run_scenario(s, seed));
  return suite;
}

}  // namespace rpksim::engine
