#include <gtest/gtest.h>

#include "rpksim/binding.hpp"
#include "test_support.hpp"

namespace rpksim::binding {
namespace {

using testing::key_from;

struct DnsWorld {
  RegistryState registry;
  TraceSink trace;
  crypto::KeyPair server = key_from(1);
  crypto::KeyPair attacker = key_from(2);

  DnsWorld() {
    registry.add_domain("server.example.com", Credential{"cred-server"});
    registry.add_domain("other.example.org", Credential{"cred-other"});
  }
};

TEST(DnsUpdate, OwnerRegistersOwnKey) {
  DnsWorld w;
  auto r = TlsaRecord::digest("server.example.com", w.server.public_key, TlsaUsage::kDaneEeRpk);
  EXPECT_EQ(dns_update("server.example.com", Credential{"cred-server"}, r, w.registry, "owner", &w.trace),
            UpdateResult::kAccepted);
  auto records = dns_query("server.example.com", w.registry);
  ASSERT_EQ(records.size(), 1u);
  EXPECT_TRUE(records[0].matches(w.server.public_key));
  EXPECT_FALSE(records[0].matches(w.attacker.public_key));
  ASSERT_EQ(w.trace.events().size(), 1u);
  EXPECT_EQ(w.trace.events()[0].kind, EventKind::kRegisterBinding);
}

TEST(DnsUpdate, NoProofOfPossessionNeeded) {
  DnsWorld w;
  auto r = TlsaRecord::full("other.example.org", w.server.public_key, TlsaUsage::kDaneEeRpk);
  EXPECT_EQ(dns_update("other.example.org", Credential{"cred-other"}, r, w.registry, "adversary"),
            UpdateResult::kAccepted);
  EXPECT_TRUE(dns_query("other.example.org", w.registry)[0].matches(w.server.public_key));
}

TEST(DnsUpdate, WrongCredentialRejectedWithoutStateChange) {
  DnsWorld w;
  auto r = TlsaRecord::digest("server.example.com", w.attacker.public_key, TlsaUsage::kDaneEeRpk);
  EXPECT_EQ(dns_update("server.example.com", Credential{"cred-other"}, r, w.registry, "adversary", &w.trace),
            UpdateResult::kRejected);
  EXPECT_TRUE(dns_query("server.example.com", w.registry).empty());
  EXPECT_TRUE(w.trace.events().empty());
  ASSERT_EQ(w.registry.update_log.size(), 1u);
  EXPECT_FALSE(w.registry.update_log[0].accepted);
}

TEST(DnsUpdate, RecordOwnerMustMatchName) {
  DnsWorld w;
  auto r = TlsaRecord::digest("server.example.com", w.attacker.public_key, TlsaUsage::kDaneEeRpk);
  EXPECT_EQ(dns_update("other.example.org", Credential{"cred-other"}, r, w.registry, "adversary"),
            UpdateResult::kRejected);
}

TEST(DnsQuery, UnknownNameEmptyAndSharedKeyMatchesBoth) {
  DnsWorld w;
  w.registry.add_domain("service1.example.com", Credential{"c1"});
  w.registry.add_domain("service2.example.com", Credential{"c2"});
  EXPECT_TRUE(dns_query("nowhere.example", w.registry).empty());
  for (auto [name, cred] : {std::pair{"service1.example.com", "c1"}, std::pair{"service2.example.com", "c2"}}) {
    dns_update(name, Credential{cred}, TlsaRecord::digest(name, w.server.public_key, TlsaUsage::kDaneEeRpk),
               w.registry, name);
  }
  EXPECT_TRUE(dns_query("service1.example.com", w.registry)[0].matches(w.server.public_key));
  EXPECT_TRUE(dns_query("service2.example.com", w.registry)[0].matches(w.server.public_key));
}

TEST(Compromise, CredentialScopedToDomain) {
  DnsWorld w;
  auto cred = compromise_domain("other.example.org", w.registry, w.trace);
  ASSERT_EQ(w.trace.events().size(), 1u);
  EXPECT_EQ(w.trace.events()[0].kind, EventKind::kCompromiseDomain);
  EXPECT_EQ(w.trace.events()[0].domain, "other.example.org");
  EXPECT_TRUE(w.registry.compromised.count("other.example.org"));

  auto own = TlsaRecord::digest("other.example.org", w.attacker.public_key, TlsaUsage::kDaneEeRpk);
  EXPECT_EQ(dns_update("other.example.org", cred, own, w.registry, "adversary"), UpdateResult::kAccepted);
  auto foreign = TlsaRecord::digest("server.example.com", w.attacker.public_key, TlsaUsage::kDaneEeRpk);
  EXPECT_EQ(dns_update("server.example.com", cred, foreign, w.registry, "adversary"), UpdateResult::kRejected);

  EXPECT_THROW(compromise_domain("nowhere.example", w.registry, w.trace), BindingError);
}

TEST(Tlsa, UsageSeparatesRecordsAndMixedSetsFlagged) {
  DnsWorld w;
  auto rpk = TlsaRecord::digest("server.example.com", w.server.public_key, TlsaUsage::kDaneEeRpk);
  auto mini = TlsaRecord::digest("server.example.com", w.server.public_key, TlsaUsage::kPkixEeMiniCert);
  dns_update("server.example.com", Credential{"cred-server"}, rpk, w.registry, "owner");
  auto view = BindingView::dane(w.registry);
  EXPECT_TRUE(view.accepts("server.example.com", w.server.public_key, TlsaUsage::kDaneEeRpk));
  EXPECT_FALSE(view.accepts("server.example.com", w.server.public_key, TlsaUsage::kPkixEeMiniCert));
  EXPECT_FALSE(w.registry.has_mixed_usages("server.example.com"));
  dns_update("server.example.com", Credential{"cred-server"}, mini, w.registry, "owner");
  EXPECT_TRUE(w.registry.has_mixed_usages("server.example.com"));
  EXPECT_THROW(TlsaRecord::digest("", w.server.public_key, TlsaUsage::kDaneEeRpk), BindingError);
}

TEST(Tlsa, FullAndDigestFormsAgreeOnFingerprint) {
  auto kp = key_from(5);
  auto full = TlsaRecord::full("a.example", kp.public_key, TlsaUsage::kDaneEeRpk);
  auto digest = TlsaRecord::digest("a.example", kp.public_key, TlsaUsage::kDaneEeRpk);
  EXPECT_EQ(full.key_fingerprint(), digest.key_fingerprint());
  EXPECT_TRUE(full.matches(kp.public_key));
  EXPECT_TRUE(digest.matches(kp.public_key));
}

TEST(Preconfig, RegistrationAndLookup) {
  TraceSink trace;
  PreconfigTable hub{"hub.iot", false, {}};
  auto pk1 = key_from(11).public_key;
  auto pk2 = key_from(12).public_key;
  EXPECT_EQ(preconfig_register("10.0.0.11", pk1, hub, trace, "hub.iot"), RegisterResult::kAccepted);
  EXPECT_EQ(preconfig_lookup("10.0.0.11", hub), std::vector<crypto::RawPublicKey>{pk1});
  // Anyone may register a new (possibly imaginary) device with someone else's key.
  EXPECT_EQ(preconfig_register("10.0.0.12", pk1, hub, trace, "adversary"), RegisterResult::kAccepted);
  EXPECT_EQ(preconfig_lookup("10.0.0.12", hub), std::vector<crypto::RawPublicKey>{pk1});
  EXPECT_TRUE(preconfig_lookup("10.0.0.99", hub).empty());
  preconfig_register("10.0.0.11", pk2, hub, trace, "hub.iot");
  EXPECT_EQ(preconfig_lookup("10.0.0.11", hub).size(), 2u);
  EXPECT_EQ(trace.events().size(), 3u);
}

TEST(Preconfig, StrictTableNeedsProofOfPossession) {
  TraceSink trace;
  PreconfigTable hub{"hub.iot", true, {}};
  auto device = key_from(11);
  auto attacker = key_from(66);
  EXPECT_EQ(preconfig_register("10.0.0.66", device.public_key, hub, trace, "adversary"), RegisterResult::kRejected);
  auto forged = crypto::sign(attacker.private_key, proof_of_possession_content("10.0.0.66", device.public_key));
  EXPECT_EQ(preconfig_register("10.0.0.66", device.public_key, hub, trace, "adversary", forged),
            RegisterResult::kRejected);
  auto proof = crypto::sign(device.private_key, proof_of_possession_content("10.0.0.11", device.public_key));
  EXPECT_EQ(preconfig_register("10.0.0.66", device.public_key, hub, trace, "adversary", proof),
            RegisterResult::kRejected)
      << "proof is bound to the identifier";
  EXPECT_EQ(preconfig_register("10.0.0.11", device.public_key, hub, trace, "hub.iot", proof),
            RegisterResult::kAccepted);
  EXPECT_TRUE(trace.events().size() == 1u);
}

TEST(BindingView, PreconfigIgnoresUsage) {
  TraceSink trace;
  PreconfigTable table{"hub.iot", false, {}};
  auto kp = key_from(1);
  preconfig_register("device1", kp.public_key, table, trace, "hub.iot");
  auto view = BindingView::preconfig(table);
  EXPECT_TRUE(view.accepts("device1", kp.public_key, TlsaUsage::kPkixEeMiniCert));
  EXPECT_TRUE(view.knows("device1"));
  EXPECT_FALSE(view.knows("device2"));
  EXPECT_FALSE(view.accepts("device1", key_from(2).public_key, TlsaUsage::kDaneEeRpk));
}

}  // namespace
}  // namespace rpksim::binding
