#include <gtest/gtest.h>

#include <filesystem>
#include <set>

#include "rpksim/scenario.hpp"
#include "test_support.hpp"

namespace rpksim::scenarios {
namespace {

bool has_defect(const std::vector<std::string>& defects, const std::string& needle) {
  for (const auto& d : defects) {
    if (d.find(needle) != std::string::npos) return true;
  }
  return false;
}

TEST(Builtins, CatalogueShape) {
  auto all = builtin_scenarios();
  EXPECT_GE(all.size(), 13u);
  std::set<std::string> names;
  for (const auto& s : all) EXPECT_TRUE(names.insert(s.name).second) << s.name;
  for (const char* required :
       {"honest-dane-server-auth", "honest-mutual-dane", "honest-mutual-preconfig", "dane-server-misbinding",
        "preconfig-server-misbinding", "multiname-server-misbinding", "preconfig-client-misbinding",
        "dane-client-auth-no-misbinding"}) {
    EXPECT_TRUE(names.count(required)) << required;
  }
}

TEST(Builtins, EveryAttackHasMitigations) {
  auto all = builtin_scenarios();
  for (const auto& s : all) {
    if (s.kind != ScenarioKind::kAttack) continue;
    int variants = 0;
    for (const auto& m : all) variants += m.variant_of == s.name && m.kind == ScenarioKind::kMitigation;
    EXPECT_GE(variants, 2) << s.name;
  }
}

TEST(Builtins, ExpectedVerdictsFollowKind) {
  for (const auto& s : builtin_scenarios()) {
    EXPECT_TRUE(validate_scenario(s).empty()) << s.name;
    bool any_violated = false;
    for (const auto& [q, e] : s.expected) {
      if (e == Expectation::kViolated) any_violated = true;
      if (q == Query::kSecrecy) {
        EXPECT_EQ(e, Expectation::kSat) << s.name;
      }
    }
    if (s.kind == ScenarioKind::kAttack) {
      EXPECT_TRUE(any_violated) << s.name;
    } else {
      EXPECT_FALSE(any_violated) << s.name;
    }
    EXPECT_TRUE(std::find(s.queries.begin(), s.queries.end(), Query::kSecrecy) != s.queries.end()) << s.name;
  }
}

TEST(Builtins, MitigationsDocumentTheirAbort) {
  for (const auto& s : builtin_scenarios()) {
    if (s.kind != ScenarioKind::kMitigation || s.name.ends_with("-dane-clientid")) continue;
    ASSERT_FALSE(s.sessions.empty());
    EXPECT_TRUE(s.sessions[0].expected_abort.has_value()) << s.name;
  }
}

TEST(Builtins, ShippedFilesMatchCompiledCatalogue) {
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(RPKSIM_SCENARIO_DIR)) {
    if (entry.path().extension() == ".json") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  auto all = builtin_scenarios();
  ASSERT_EQ(files.size(), all.size());
  for (std::size_t i = 0; i < files.size(); ++i) {
    auto parsed = parse_scenario(testing::read_file(files[i].string()));
    EXPECT_EQ(serialize_scenario(parsed), serialize_scenario(all[i])) << files[i];
  }
}

TEST(Serialization, RoundTripsEveryBuiltin) {
  for (const auto& s : builtin_scenarios()) {
    auto text = serialize_scenario(s);
    EXPECT_EQ(serialize_scenario(parse_scenario(text)), text) << s.name;
  }
}

TEST(Serialization, ScriptActionsRoundTrip) {
  auto s = *find_builtin("honest-dane-server-auth");
  netsim::Match m;
  m.src = netsim::Address{"10.0.0.20"};
  m.kind = "opaque";
  m.nth = 3;
  s.adversary.script.actions = {netsim::Drop{m}, netsim::Tamper{m}, netsim::Observe{},
                                netsim::Inject{m, netsim::Envelope{netsim::Address{"a"}, netsim::Address{"b"}, 7,
                                                                   Bytes{1, 2}, 0}},
                                netsim::RewriteSrc{netsim::Address{"1"}, netsim::Address{"2"}},
                                netsim::RewriteDst{netsim::Address{"3"}, netsim::Address{"4"}}};
  auto back = parse_scenario(serialize_scenario(s));
  ASSERT_EQ(back.adversary.script.actions.size(), 6u);
  for (std::size_t i = 0; i < 6; ++i) {
    EXPECT_EQ(netsim::describe(back.adversary.script.actions[i]), netsim::describe(s.adversary.script.actions[i]));
  }
  auto inject = std::get<netsim::Inject>(back.adversary.script.actions[3]);
  EXPECT_EQ(inject.envelope.payload, (Bytes{1, 2}));
  EXPECT_EQ(inject.envelope.connection, 7u);
}

TEST(Parsing, Errors) {
  EXPECT_THROW(parse_scenario("{"), ScenarioParseError);
  EXPECT_THROW(parse_scenario("{}"), ScenarioParseError);
  EXPECT_THROW(parse_scenario(R"({"name":"x","kind":"weird"})"), ScenarioParseError);
  EXPECT_THROW(parse_scenario(R"({"name":"x","queries":["liveness"]})"), ScenarioParseError);
  EXPECT_THROW(parse_scenario(R"({"name":"x","queries":["secrecy"],"expected":{"secrecy":"MAYBE"}})"),
               ScenarioParseError);
  EXPECT_THROW(parse_scenario(R"({"name":"x","adversary":{"script":[{"action":"teleport"}]}})"),
               ScenarioParseError);
  EXPECT_THROW(parse_scenario(R"({"name":"x","endpoints":[{"role":"proxy","name":"p","address":"1"}]})"),
               ScenarioParseError);
}

TEST(Validation, WellFormedBuiltinIsOk) {
  EXPECT_TRUE(validate_scenario(*find_builtin("dane-server-misbinding")).empty());
}

TEST(Validation, FixtureListsEveryDefect) {
  auto s = parse_scenario(testing::read_file(std::string(RPKSIM_FIXTURE_DIR) + "/invalid-undeclared.json"));
  auto defects = validate_scenario(s);
  EXPECT_TRUE(has_defect(defects, "undeclared endpoint 'client.example.net'"));
  EXPECT_TRUE(has_defect(defects, "adversary does not control 'other.example.org'"));
  EXPECT_TRUE(has_defect(defects, "no expected verdict for query 'secrecy'"));
  EXPECT_EQ(defects.size(), 3u);
}

TEST(Validation, IndividualDefects) {
  auto base = *find_builtin("preconfig-client-misbinding");

  auto s = base;
  s.keys.push_back(s.keys.front());
  EXPECT_TRUE(has_defect(validate_scenario(s), "declared twice"));

  s = base;
  s.endpoints[1].key = "nokey";
  EXPECT_TRUE(has_defect(validate_scenario(s), "undeclared key 'nokey'"));

  s = base;
  s.endpoints[1].key.reset();
  EXPECT_TRUE(has_defect(validate_scenario(s), "server without a key"));

  s = base;
  s.endpoints[0].address = s.endpoints[1].address;
  EXPECT_TRUE(has_defect(validate_scenario(s), "reuses address"));

  s = base;
  s.endpoints[0].client_policy.send_client_name = true;
  EXPECT_TRUE(has_defect(validate_scenario(s), "send_client_name requires binding_mode dane"));

  s = base;
  s.adversary.script.actions.push_back(netsim::RewriteDst{netsim::Address{"10.9.9.9"}, netsim::Address{"10.0.0.1"}});
  EXPECT_TRUE(has_defect(validate_scenario(s), "undeclared address '10.9.9.9'"));

  s = base;
  s.adversary.compromise.push_back("nowhere.example");
  EXPECT_TRUE(has_defect(validate_scenario(s), "compromise of undeclared name"));

  s = base;
  s.adversary.registrations[0].table = "nobody";
  EXPECT_TRUE(has_defect(validate_scenario(s), "table of undeclared endpoint 'nobody'"));

  s = base;
  s.sessions[0].client = "hub.iot";
  EXPECT_TRUE(has_defect(validate_scenario(s), "not a client"));

  s = base;
  s.sessions[0].server = "nowhere.example";
  EXPECT_TRUE(has_defect(validate_scenario(s), "intends undeclared name"));

  s = base;
  s.expected.erase(Query::kClientAuth);
  EXPECT_TRUE(has_defect(validate_scenario(s), "no expected verdict for query 'client_auth'"));

  s = base;
  s.queries.pop_back();
  EXPECT_TRUE(has_defect(validate_scenario(s), "expected verdict for unlisted query"));

  s = base;
  s.endpoints[1].server_policy.request_client_auth = false;
  EXPECT_TRUE(has_defect(validate_scenario(s), "client_auth query without any server"));

  s = base;
  s.bindings.dns.push_back(DnsRecordDecl{"ghost.example", "hub", binding::TlsaUsage::kDaneEeRpk, KeyForm::kDigest});
  EXPECT_TRUE(has_defect(validate_scenario(s), "TLSA record for undeclared name 'ghost.example'"));
}

TEST(Validation, CompromiseGrantsRedirect) {
  auto s = *find_builtin("dane-server-misbinding");
  s.names[0].controller = Controller::kHonest;
  EXPECT_TRUE(has_defect(validate_scenario(s), "adversary does not control"));
  s.adversary.compromise.push_back("other.example.org");
  EXPECT_TRUE(validate_scenario(s).empty());
}

TEST(Lookup, FindBuiltin) {
  EXPECT_TRUE(find_builtin("multiname-server-misbinding").has_value());
  EXPECT_FALSE(find_builtin("no-such-scenario").has_value());
  EXPECT_EQ(query_from_string("client_auth"), Query::kClientAuth);
  EXPECT_FALSE(query_from_string("CLIENT_AUTH").has_value());
}

}  // namespace
}  // namespace rpksim::scenarios
