// Acceptance checks for the simulator. Prints one PASS/FAIL line per
// criterion and exits non-zero if any criterion fails.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>

#include "rpksim/engine.hpp"
#include "rpksim/properties.hpp"
#include "rpksim/report.hpp"
#include "test_support.hpp"

namespace {

using namespace rpksim;
using scenarios::Query;
using Clock = std::chrono::steady_clock;

struct Check {
  std::ostringstream detail;
  bool ok = true;

  void require(bool condition, const std::string& what) {
    if (!condition) {
      ok = false;
      detail << (detail.tellp() > 0 ? "; " : "") << what;
    }
  }
};

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

scenarios::Scenario builtin(const std::string& name) {
  auto s = scenarios::find_builtin(name);
  if (!s) throw std::runtime_error("missing built-in " + name);
  return *s;
}

bool sat(const engine::RunReport& r, Query q) {
  const auto* v = r.verdict(q);
  return v && v->verdict.satisfied;
}

bool violated(const engine::RunReport& r, Query q) {
  const auto* v = r.verdict(q);
  return v && !v->verdict.satisfied;
}

std::string honest_baselines(Check& c) {
  std::ostringstream info;
  for (const char* name : {"honest-dane-server-auth", "honest-mutual-dane", "honest-mutual-preconfig"}) {
    const auto start = Clock::now();
    auto r = engine::run_scenario(builtin(name), 42);
    const double took = seconds_since(start);
    for (const auto& s : r.sessions) {
      c.require(s.client_outcome.status == handshake::SessionStatus::kComplete &&
                    s.server_outcome && s.server_outcome->status == handshake::SessionStatus::kComplete,
                std::string(name) + " session " + std::to_string(s.index + 1) + " did not complete");
    }
    for (const auto& q : r.verdicts) {
      c.require(q.verdict.satisfied, std::string(name) + " " + std::string(scenarios::to_string(q.query)) + " VIOLATED");
    }
    c.require(took < 1.0, std::string(name) + " took " + std::to_string(took) + " s");
    info << name << " " << static_cast<int>(took * 1000) << " ms; ";
  }
  return info.str();
}

std::string dane_server_misbinding(Check& c) {
  auto attacker_owned = engine::run_scenario(builtin("dane-server-misbinding"), 42);
  const auto& server_key = attacker_owned.artifacts.keys.at("server").public_key;
  bool claim = false;
  bool partner = false;
  bool compromise_event = false;
  for (const auto& e : attacker_owned.trace) {
    claim = claim || (e.kind == EventKind::kClientFinished && e.domain == "other.example.org" &&
                      e.server_key == server_key && e.master_secret);
    partner = partner || (e.kind == EventKind::kServerFinished && e.domain == "other.example.org");
    compromise_event = compromise_event || e.kind == EventKind::kCompromiseDomain;
  }
  c.require(claim, "no ClientFinished(other.example.org, pk_server, ms)");
  c.require(!partner, "a ServerFinished for other.example.org exists");
  c.require(!compromise_event, "attacker-owned mode emitted CompromiseDomain");
  c.require(violated(attacker_owned, Query::kServerAuth), "server_auth not VIOLATED with attacker domain as honest");

  // Same attack, but the adversary obtained the name by compromising it.
  auto s = builtin("dane-server-misbinding");
  s.names[0].controller = scenarios::Controller::kHonest;
  s.adversary.compromise.push_back("other.example.org");
  auto compromised = engine::run_scenario(s, 42);
  const auto* v = compromised.verdict(Query::kServerAuth);
  c.require(v && v->verdict.satisfied && v->verdict.exception_used.has_value(),
            "server_auth not SAT-via-exception with CompromiseDomain(other.example.org)");
  properties::CheckOptions no_exception;
  no_exception.allow_compromise_exception = false;
  c.require(!properties::check_server_auth(compromised.trace, no_exception).satisfied,
            "exception-free check of the compromised run is not VIOLATED");
  return "attacker-owned: VIOLATED; compromised: SAT via exception";
}

std::string preconfig_server_misbinding(Check& c) {
  auto r = engine::run_scenario(builtin("preconfig-server-misbinding"), 42);
  std::set<std::string> claimed, served;
  for (const auto& e : r.trace) {
    if (e.kind == EventKind::kClientFinished && e.actor == "hub.iot") claimed.insert(e.domain);
    if (e.kind == EventKind::kServerFinished) served.insert(e.domain);
  }
  c.require(claimed == std::set<std::string>{"device2"}, "hub's ClientFinished does not name device2");
  c.require(served == std::set<std::string>{"device1"}, "ServerFinished not emitted by device1 alone");
  c.require(violated(r, Query::kServerAuth), "server_auth not VIOLATED");
  return "hub claims device2, only device1 finished";
}

std::string multiname_server_misbinding(Check& c) {
  const auto s = builtin("multiname-server-misbinding");
  c.require(s.endpoint("service1.example.com")->key == s.endpoint("service2.example.com")->key,
            "services do not share a keypair");
  bool rewrite = false;
  for (const auto& a : s.adversary.script.actions) rewrite = rewrite || std::holds_alternative<netsim::RewriteDst>(a);
  c.require(rewrite, "no RewriteDst in the script");
  c.require(s.adversary.registrations.empty(), "scenario declares adversary registrations");
  auto r = engine::run_scenario(s, 42);
  std::size_t adversary_updates = 0;
  for (const auto& u : r.dns_updates) adversary_updates += u.registrant == "adversary";
  c.require(adversary_updates == 0, "adversary performed dns_update");
  c.require(violated(r, Query::kServerAuth), "server_auth not VIOLATED");
  return "adversary dns_update count " + std::to_string(adversary_updates);
}

std::string preconfig_client_misbinding(Check& c) {
  const auto s = builtin("preconfig-client-misbinding");
  auto r = engine::run_scenario(s, 42);
  std::set<std::string> adversary_ids;
  for (const auto& reg : s.adversary.registrations) adversary_ids.insert(reg.name);
  const auto& device_key = r.artifacts.keys.at("device1").public_key;
  bool attributed = false;
  for (const auto& e : r.trace) {
    attributed = attributed || (e.kind == EventKind::kServerComplete && e.client_domain &&
                                adversary_ids.count(*e.client_domain) && e.client_key == device_key);
  }
  c.require(attributed, "no ServerComplete attributing device1's key to the adversary identity");
  c.require(violated(r, Query::kClientAuth), "client_auth not VIOLATED");
  return "ServerComplete names " + *adversary_ids.begin();
}

// Moves a script onto another scenario: addresses of the source's clients and
// servers map onto the target's, other addresses become adversary hosts.
netsim::AdversaryScript transplant(const scenarios::Scenario& from, scenarios::Scenario& to, bool map_roles) {
  std::map<std::string, std::string> role_map;
  if (map_roles) {
    for (const auto& e : from.endpoints) {
      for (const auto& t : to.endpoints) {
        if (t.role == e.role) role_map.emplace(e.address, t.address);
      }
    }
  }
  std::set<std::string> known;
  for (const auto& e : to.endpoints) known.insert(e.address);
  for (const auto& n : to.names) known.insert(n.address);
  auto map = [&](netsim::Address a) {
    if (auto it = role_map.find(a.value); it != role_map.end()) a.value = it->second;
    if (!known.count(a.value)) {
      to.names.push_back({"host-" + a.value + ".adversary", a.value, scenarios::Controller::kAdversary});
      known.insert(a.value);
    }
    return a;
  };
  netsim::AdversaryScript out;
  for (auto action : from.adversary.script.actions) {
    if (auto* a = std::get_if<netsim::RedirectName>(&action)) {
      if (!to.endpoint(a->name)) {
        bool declared = false;
        for (const auto& n : to.names) declared = declared || n.name == a->name;
        if (!declared) to.names.push_back({a->name, "10.0.0.254", scenarios::Controller::kAdversary});
      }
      a->to = map(a->to);
    } else if (auto* a = std::get_if<netsim::RewriteSrc>(&action)) {
      a->match_src = map(a->match_src);
      a->new_src = map(a->new_src);
    } else if (auto* a = std::get_if<netsim::RewriteDst>(&action)) {
      a->match_dst = map(a->match_dst);
      a->new_dst = map(a->new_dst);
    }
    out.actions.push_back(std::move(action));
  }
  return out;
}

std::string dane_client_auth(Check& c) {
  const auto base = builtin("dane-client-auth-no-misbinding");
  c.require(base.endpoint("client.example.net")->client_policy.send_client_name, "ClientName not mandatory");
  std::size_t runs = 0, completed = 0;
  for (const auto& source : scenarios::builtin_scenarios()) {
    if (source.adversary.script.empty()) continue;
    for (bool map_roles : {false, true}) {
      auto s = base;
      s.adversary.script = transplant(source, s, map_roles);
      if (auto defects = scenarios::validate_scenario(s); !defects.empty()) {
        c.require(false, "transplanted script from " + source.name + " invalid: " + defects.front());
        continue;
      }
      auto r = engine::run_scenario(s, 42);
      ++runs;
      for (const auto& e : r.trace) completed += e.kind == EventKind::kServerComplete;
      c.require(sat(r, Query::kClientAuth), "client_auth VIOLATED under script of " + source.name);
    }
  }
  c.require(completed > 0, "no run reached ServerComplete");
  return std::to_string(runs) + " script runs, " + std::to_string(completed) + " ServerComplete events";
}

std::string mitigations(Check& c) {
  std::ostringstream info;
  std::size_t variants = 0;
  const auto all = scenarios::builtin_scenarios();
  for (const auto& attack : all) {
    if (attack.kind != scenarios::ScenarioKind::kAttack) continue;
    std::size_t mine = 0;
    for (const auto& m : all) {
      if (m.variant_of != attack.name) continue;
      ++mine;
      ++variants;
      auto r = engine::run_scenario(m, 42);
      for (const auto& q : r.verdicts) {
        c.require(q.verdict.satisfied, m.name + " " + std::string(scenarios::to_string(q.query)) + " VIOLATED");
      }
      const auto& session = r.sessions.at(0);
      if (m.sessions[0].expected_abort) {
        c.require(session.root_abort() == m.sessions[0].expected_abort,
                  m.name + " aborted with " + session.root_abort().value_or("nothing") + ", documented " +
                      *m.sessions[0].expected_abort);
      } else {
        // Mandatory ClientName: the translated session completes, bound to the real client.
        c.require(session.outcome_matches(), m.name + " did not complete");
      }
    }
    c.require(mine >= 2, attack.name + " has fewer than two mitigated variants");
  }
  info << variants << " mitigated variants";
  return info.str();
}

std::string secrecy(Check& c) {
  std::size_t checked = 0;
  for (const auto& s : scenarios::builtin_scenarios()) {
    auto r = engine::run_scenario(s, 42);
    const auto v = properties::check_secrecy(r.trace, r.artifacts.knowledge);
    c.require(v.satisfied, s.name + " leaks a master secret");
    ++checked;
  }
  auto leak = scenarios::parse_scenario(testing::read_file(std::string(RPKSIM_FIXTURE_DIR) + "/leak-master-secret.json"));
  auto r = engine::run_scenario(leak, 42);
  c.require(violated(r, Query::kSecrecy), "leak fixture not VIOLATED");
  return std::to_string(checked) + " built-ins SAT; leak fixture VIOLATED";
}

std::string oracle_equivalence(Check& c) {
  testing::TraceGenerator gen(20240601);
  const int traces = 500;
  int disagreements = 0;
  int violations = 0;
  for (int i = 0; i < traces; ++i) {
    auto t = gen.next(12);
    std::vector<Bytes> knowledge;
    if (gen.pick(2)) knowledge.push_back(gen.secrets()[gen.pick(3)]);
    const bool sa = properties::check_server_auth(t).satisfied;
    const bool ca = properties::check_client_auth(t).satisfied;
    const bool se = properties::check_secrecy(t, properties::AdversaryKnowledge{knowledge}).satisfied;
    disagreements += sa != testing::oracle::server_auth(t);
    disagreements += ca != testing::oracle::client_auth(t);
    disagreements += se != testing::oracle::secrecy(t, knowledge);
    violations += !sa + !ca + !se;
  }
  c.require(disagreements == 0, std::to_string(disagreements) + " disagreements");
  return std::to_string(traces) + " traces, " + std::to_string(violations) + " violated verdicts, " +
         std::to_string(disagreements) + " disagreements";
}

std::string determinism(Check& c) {
  const auto start = Clock::now();
  const auto first = report::to_json(engine::run_suite(42));
  const double took = seconds_since(start);
  const auto second = report::to_json(engine::run_suite(42));
  c.require(first == second, "suite reports differ between runs");
  c.require(took < 30.0, "suite took " + std::to_string(took) + " s");
  std::ostringstream info;
  info << "suite " << static_cast<int>(took * 1000) << " ms, " << first.size() << " report bytes";
#ifdef RPKSIM_CLI_PATH
  const std::string a = "acceptance-suite-a.json";
  const std::string b = "acceptance-suite-b.json";
  const std::string cli = RPKSIM_CLI_PATH;
  const int rc_a = std::system((cli + " suite --seed 42 --report " + a + " > /dev/null").c_str());
  const int rc_b = std::system((cli + " suite --seed 42 --report " + b + " > /dev/null").c_str());
  c.require(rc_a == 0 && rc_b == 0, "`rpksim suite --seed 42` did not exit 0");
  const auto text_a = testing::read_file(a);
  c.require(!text_a.empty() && text_a == testing::read_file(b), "CLI suite reports differ");
  c.require(text_a == first, "CLI report differs from in-process report");
  std::remove(a.c_str());
  std::remove(b.c_str());
  info << "; CLI reports identical";
#endif
  return info.str();
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    std::function<std::string(Check&)> run;
  };
  const std::vector<Criterion> criteria = {
      {"honest baselines", honest_baselines},
      {"DANE server misbinding", dane_server_misbinding},
      {"pre-configuration server misbinding", preconfig_server_misbinding},
      {"multi-named server misbinding", multiname_server_misbinding},
      {"pre-configuration client misbinding", preconfig_client_misbinding},
      {"DANE client authentication", dane_client_auth},
      {"mitigations", mitigations},
      {"secrecy", secrecy},
      {"checker oracle equivalence", oracle_equivalence},
      {"determinism", determinism},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Check check;
    std::string info;
    try {
      info = criteria[i].run(check);
    } catch (const std::exception& e) {
      check.require(false, std::string("exception: ") + e.what());
    }
    std::cout << (check.ok ? "PASS" : "FAIL") << "  " << (i + 1) << ". " << criteria[i].name;
    if (!info.empty()) std::cout << " (" << info << ")";
    if (!check.ok) std::cout << " -- " << check.detail.str();
    std::cout << '\n';
    failed += !check.ok;
  }
  std::cout << (criteria.size() - failed) << "/" << criteria.size() << " criteria passed\n";
  return failed == 0 ? 0 : 1;
}
