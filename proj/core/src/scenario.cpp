#include "rpksim/scenario.hpp"

#include <algorithm>
#include <set>

#include "json.hpp"

namespace rpksim::scenarios {

namespace detail {
const std::vector<std::string_view>& builtin_scenario_sources();
}

using json = nlohmann::ordered_json;

std::string_view to_string(Query query) {
  switch (query) {
    case Query::kServerAuth:
      return "server_auth";
    case Query::kClientAuth:
      return "client_auth";
    case Query::kSecrecy:
      return "secrecy";
  }
  return "?";
}

std::optional<Query> query_from_string(std::string_view text) {
  for (auto q : {Query::kServerAuth, Query::kClientAuth, Query::kSecrecy}) {
    if (to_string(q) == text) return q;
  }
  return std::nullopt;
}

std::string_view to_string(Expectation e) { return e == Expectation::kSat ? "SAT" : "VIOLATED"; }

std::string_view to_string(ScenarioKind kind) {
  switch (kind) {
    case ScenarioKind::kHonest:
      return "honest";
    case ScenarioKind::kAttack:
      return "attack";
    case ScenarioKind::kMitigation:
      return "mitigation";
    case ScenarioKind::kNegative:
      return "negative";
  }
  return "?";
}

const EndpointDecl* Scenario::endpoint(const std::string& endpoint_name) const {
  auto it = std::find_if(endpoints.begin(), endpoints.end(),
                         [&](const EndpointDecl& e) { return e.name == endpoint_name; });
  return it == endpoints.end() ? nullptr : &*it;
}

namespace {

binding::BindingMode parse_mode(const std::string& s) {
  if (s == "dane") return binding::BindingMode::kDane;
  if (s == "preconfig") return binding::BindingMode::kPreconfig;
  throw ScenarioParseError("unknown binding mode '" + s + "'");
}

binding::TlsaUsage parse_usage(const std::string& s) {
  if (s == "dane-ee-rpk") return binding::TlsaUsage::kDaneEeRpk;
  if (s == "pkix-ee-minicert") return binding::TlsaUsage::kPkixEeMiniCert;
  throw ScenarioParseError("unknown TLSA usage '" + s + "'");
}

KeyForm parse_form(const std::string& s) {
  if (s == "full") return KeyForm::kFull;
  if (s == "digest") return KeyForm::kDigest;
  throw ScenarioParseError("unknown key form '" + s + "'");
}

std::string_view form_name(KeyForm form) { return form == KeyForm::kFull ? "full" : "digest"; }

ScenarioKind parse_kind(const std::string& s) {
  for (auto k : {ScenarioKind::kHonest, ScenarioKind::kAttack, ScenarioKind::kMitigation, ScenarioKind::kNegative}) {
    if (to_string(k) == s) return k;
  }
  throw ScenarioParseError("unknown scenario kind '" + s + "'");
}

netsim::Match parse_match(const json& j) {
  netsim::Match m;
  if (j.contains("src")) m.src = netsim::Address{j.at("src").get<std::string>()};
  if (j.contains("dst")) m.dst = netsim::Address{j.at("dst").get<std::string>()};
  if (j.contains("kind")) m.kind = j.at("kind").get<std::string>();
  if (j.contains("nth")) m.nth = j.at("nth").get<std::uint32_t>();
  return m;
}

json match_json(const netsim::Match& m) {
  json j = json::object();
  if (m.src) j["src"] = m.src->value;
  if (m.dst) j["dst"] = m.dst->value;
  if (m.kind) j["kind"] = *m.kind;
  if (m.nth) j["nth"] = *m.nth;
  return j;
}

netsim::AdversaryAction parse_action(const json& j) {
  const auto action = j.at("action").get<std::string>();
  if (action == "redirect_name") {
    return netsim::RedirectName{j.at("name").get<std::string>(), netsim::Address{j.at("to").get<std::string>()}};
  }
  if (action == "rewrite_src") {
    return netsim::RewriteSrc{netsim::Address{j.at("match_src").get<std::string>()},
                              netsim::Address{j.at("new_src").get<std::string>()}};
  }
  if (action == "rewrite_dst") {
    return netsim::RewriteDst{netsim::Address{j.at("match_dst").get<std::string>()},
                              netsim::Address{j.at("new_dst").get<std::string>()}};
  }
  if (action == "drop") return netsim::Drop{parse_match(j.value("match", json::object()))};
  if (action == "tamper") return netsim::Tamper{parse_match(j.value("match", json::object()))};
  if (action == "observe") return netsim::Observe{parse_match(j.value("match", json::object()))};
  if (action == "inject") {
    const auto& e = j.at("envelope");
    netsim::Envelope env;
    env.src = netsim::Address{e.at("src").get<std::string>()};
    env.dst = netsim::Address{e.at("dst").get<std::string>()};
    env.connection = e.value("connection", std::uint64_t{0});
    env.payload = from_hex(e.value("payload_hex", std::string{}));
    return netsim::Inject{parse_match(j.value("trigger", json::object())), std::move(env)};
  }
  throw ScenarioParseError("unknown adversary action '" + action + "'");
}

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

json action_json(const netsim::AdversaryAction& action) {
  return std::visit(
      Overloaded{
          [](const netsim::RedirectName& a) {
            return json{{"action", "redirect_name"}, {"name", a.name}, {"to", a.to.value}};
          },
          [](const netsim::RewriteSrc& a) {
            return json{{"action", "rewrite_src"}, {"match_src", a.match_src.value}, {"new_src", a.new_src.value}};
          },
          [](const netsim::RewriteDst& a) {
            return json{{"action", "rewrite_dst"}, {"match_dst", a.match_dst.value}, {"new_dst", a.new_dst.value}};
          },
          [](const netsim::Drop& a) { return json{{"action", "drop"}, {"match", match_json(a.match)}}; },
          [](const netsim::Tamper& a) { return json{{"action", "tamper"}, {"match", match_json(a.match)}}; },
          [](const netsim::Observe& a) { return json{{"action", "observe"}, {"match", match_json(a.match)}}; },
          [](const netsim::Inject& a) {
            return json{{"action", "inject"},
                        {"trigger", match_json(a.trigger)},
                        {"envelope",
                         {{"src", a.envelope.src.value},
                          {"dst", a.envelope.dst.value},
                          {"connection", a.envelope.connection},
                          {"payload_hex", to_hex(a.envelope.payload)}}}};
          },
      },
      action);
}

Scenario parse_json(const json& j) {
  Scenario s;
  s.name = j.at("name").get<std::string>();
  s.description = j.value("description", std::string{});
  s.finding = j.value("finding", std::string{});
  s.kind = parse_kind(j.value("kind", std::string("honest")));
  if (j.contains("variant_of")) s.variant_of = j.at("variant_of").get<std::string>();
  s.keys = j.value("keys", std::vector<std::string>{});

  for (const auto& e : j.value("endpoints", json::array())) {
    EndpointDecl d;
    const auto role = e.at("role").get<std::string>();
    if (role == "client") {
      d.role = Role::kClient;
    } else if (role == "server") {
      d.role = Role::kServer;
    } else {
      throw ScenarioParseError("unknown role '" + role + "'");
    }
    d.name = e.at("name").get<std::string>();
    d.address = e.at("address").get<std::string>();
    if (e.contains("key") && !e.at("key").is_null()) d.key = e.at("key").get<std::string>();
    d.strict_preconfig = e.value("strict_preconfig", false);
    if (e.contains("client_policy")) {
      const auto& p = e.at("client_policy");
      d.client_policy.send_sni = p.value("send_sni", false);
      d.client_policy.binding_mode = parse_mode(p.value("binding_mode", std::string("dane")));
      d.client_policy.use_mini_cert = p.value("use_mini_cert", false);
      d.client_policy.send_client_name = p.value("send_client_name", false);
    }
    if (e.contains("server_policy")) {
      const auto& p = e.at("server_policy");
      d.server_policy.check_sni = p.value("check_sni", false);
      d.server_policy.request_client_auth = p.value("request_client_auth", false);
      d.server_policy.client_binding_mode = parse_mode(p.value("client_binding_mode", std::string("preconfig")));
      d.server_policy.accept_mini_cert = p.value("accept_mini_cert", false);
    }
    s.endpoints.push_back(std::move(d));
  }

  for (const auto& n : j.value("names", json::array())) {
    NameDecl d;
    d.name = n.at("name").get<std::string>();
    d.address = n.at("address").get<std::string>();
    const auto controller = n.value("controller", std::string("honest"));
    if (controller == "adversary") {
      d.controller = Controller::kAdversary;
    } else if (controller != "honest") {
      throw ScenarioParseError("unknown controller '" + controller + "'");
    }
    s.names.push_back(std::move(d));
  }

  if (j.contains("bindings")) {
    const auto& b = j.at("bindings");
    for (const auto& r : b.value("dns", json::array())) {
      s.bindings.dns.push_back(DnsRecordDecl{r.at("owner").get<std::string>(), r.at("key").get<std::string>(),
                                             parse_usage(r.value("usage", std::string("dane-ee-rpk"))),
                                             parse_form(r.value("form", std::string("digest")))});
    }
    for (const auto& r : b.value("preconfig", json::array())) {
      s.bindings.preconfig.push_back(PreconfigEntryDecl{r.at("table").get<std::string>(),
                                                        r.at("id").get<std::string>(),
                                                        r.at("key").get<std::string>()});
    }
  }

  if (j.contains("adversary")) {
    const auto& a = j.at("adversary");
    s.adversary.keys = a.value("keys", std::vector<std::string>{});
    s.adversary.compromise = a.value("compromise", std::vector<std::string>{});
    s.adversary.leak_master_secrets = a.value("leak_master_secrets", false);
    for (const auto& r : a.value("registrations", json::array())) {
      AdversaryRegistration reg;
      const auto kind = r.at("kind").get<std::string>();
      if (kind == "dns") {
        reg.kind = AdversaryRegistration::Kind::kDns;
      } else if (kind == "preconfig") {
        reg.kind = AdversaryRegistration::Kind::kPreconfig;
      } else {
        throw ScenarioParseError("unknown registration kind '" + kind + "'");
      }
      reg.name = r.at("name").get<std::string>();
      reg.key = r.at("key").get<std::string>();
      reg.usage = parse_usage(r.value("usage", std::string("dane-ee-rpk")));
      reg.form = parse_form(r.value("form", std::string("digest")));
      reg.table = r.value("table", std::string{});
      s.adversary.registrations.push_back(std::move(reg));
    }
    for (const auto& action : a.value("script", json::array())) s.adversary.script.actions.push_back(parse_action(action));
  }

  for (const auto& sess : j.value("sessions", json::array())) {
    SessionDecl d;
    d.client = sess.at("client").get<std::string>();
    d.server = sess.at("server").get<std::string>();
    if (sess.contains("expected_abort")) d.expected_abort = sess.at("expected_abort").get<std::string>();
    s.sessions.push_back(std::move(d));
  }

  for (const auto& q : j.value("queries", json::array())) {
    const auto text = q.get<std::string>();
    auto query = query_from_string(text);
    if (!query) throw ScenarioParseError("unknown query '" + text + "'");
    s.queries.push_back(*query);
  }
  const json expected = j.value("expected", json::object());
  for (const auto& [key, value] : expected.items()) {
    auto query = query_from_string(key);
    if (!query) throw ScenarioParseError("expected verdict for unknown query '" + key + "'");
    const auto text = value.get<std::string>();
    if (text == "SAT") {
      s.expected[*query] = Expectation::kSat;
    } else if (text == "VIOLATED") {
      s.expected[*query] = Expectation::kViolated;
    } else {
      throw ScenarioParseError("expected verdict must be SAT or VIOLATED, got '" + text + "'");
    }
  }
  return s;
}

}  // namespace

Scenario parse_scenario(const std::string& json_text) {
  try {
    return parse_json(json::parse(json_text));
  } catch (const json::exception& e) {
    throw ScenarioParseError(e.what());
  } catch (const DecodeError& e) {
    throw ScenarioParseError(e.what());
  }
}

std::string serialize_scenario(const Scenario& s) {
  json j;
  j["name"] = s.name;
  j["description"] = s.description;
  j["finding"] = s.finding;
  j["kind"] = to_string(s.kind);
  if (s.variant_of) j["variant_of"] = *s.variant_of;
  j["keys"] = s.keys;
  j["endpoints"] = json::array();
  for (const auto& e : s.endpoints) {
    json d;
    d["role"] = e.role == Role::kClient ? "client" : "server";
    d["name"] = e.name;
    d["address"] = e.address;
    d["key"] = e.key ? json(*e.key) : json(nullptr);
    if (e.role == Role::kClient) {
      d["client_policy"] = {{"send_sni", e.client_policy.send_sni},
                            {"binding_mode", binding::to_string(e.client_policy.binding_mode)},
                            {"use_mini_cert", e.client_policy.use_mini_cert},
                            {"send_client_name", e.client_policy.send_client_name}};
    } else {
      d["server_policy"] = {{"check_sni", e.server_policy.check_sni},
                            {"request_client_auth", e.server_policy.request_client_auth},
                            {"client_binding_mode", binding::to_string(e.server_policy.client_binding_mode)},
                            {"accept_mini_cert", e.server_policy.accept_mini_cert}};
    }
    d["strict_preconfig"] = e.strict_preconfig;
    j["endpoints"].push_back(std::move(d));
  }
  j["names"] = json::array();
  for (const auto& n : s.names) {
    j["names"].push_back({{"name", n.name},
                          {"address", n.address},
                          {"controller", n.controller == Controller::kAdversary ? "adversary" : "honest"}});
  }
  json bindings;
  bindings["dns"] = json::array();
  for (const auto& r : s.bindings.dns) {
    bindings["dns"].push_back(
        {{"owner", r.owner}, {"key", r.key}, {"usage", binding::to_string(r.usage)}, {"form", form_name(r.form)}});
  }
  bindings["preconfig"] = json::array();
  for (const auto& r : s.bindings.preconfig) {
    bindings["preconfig"].push_back({{"table", r.table}, {"id", r.id}, {"key", r.key}});
  }
  j["bindings"] = std::move(bindings);

  json adversary;
  adversary["keys"] = s.adversary.keys;
  adversary["compromise"] = s.adversary.compromise;
  adversary["registrations"] = json::array();
  for (const auto& r : s.adversary.registrations) {
    json reg{{"kind", r.kind == AdversaryRegistration::Kind::kDns ? "dns" : "preconfig"},
             {"name", r.name},
             {"key", r.key}};
    if (r.kind == AdversaryRegistration::Kind::kDns) {
      reg["usage"] = binding::to_string(r.usage);
      reg["form"] = form_name(r.form);
    } else {
      reg["table"] = r.table;
    }
    adversary["registrations"].push_back(std::move(reg));
  }
  adversary["script"] = json::array();
  for (const auto& a : s.adversary.script.actions) adversary["script"].push_back(action_json(a));
  adversary["leak_master_secrets"] = s.adversary.leak_master_secrets;
  j["adversary"] = std::move(adversary);

  j["sessions"] = json::array();
  for (const auto& sess : s.sessions) {
    json d{{"client", sess.client}, {"server", sess.server}};
    if (sess.expected_abort) d["expected_abort"] = *sess.expected_abort;
    j["sessions"].push_back(std::move(d));
  }
  j["queries"] = json::array();
  for (auto q : s.queries) j["queries"].push_back(to_string(q));
  j["expected"] = json::object();
  for (auto q : s.queries) {
    if (auto it = s.expected.find(q); it != s.expected.end()) j["expected"][std::string(to_string(q))] = to_string(it->second);
  }
  return j.dump(2) + "\n";
}

std::vector<std::string> validate_scenario(const Scenario& s) {
  std::vector<std::string> defects;
  auto defect = [&](std::string msg) { defects.push_back(std::move(msg)); };

  if (s.name.empty()) defect("scenario name is empty");

  std::set<std::string> keys;
  for (const auto& k : s.keys) {
    if (!keys.insert(k).second) defect("key '" + k + "' declared twice");
  }
  auto check_key = [&](const std::string& k, const std::string& where) {
    if (!keys.count(k)) defect(where + " references undeclared key '" + k + "'");
  };

  std::set<std::string> names;
  std::set<std::string> addresses;
  std::set<std::string> endpoint_addresses;
  for (const auto& e : s.endpoints) {
    const std::string where = "endpoint '" + e.name + "'";
    if (e.name.empty()) defect("endpoint with empty name");
    if (!names.insert(e.name).second) defect(where + " declared twice");
    if (e.address.empty()) defect(where + " has no address");
    if (!endpoint_addresses.insert(e.address).second) defect(where + " reuses address '" + e.address + "'");
    addresses.insert(e.address);
    if (e.key) {
      check_key(*e.key, where);
    } else if (e.role == Role::kServer) {
      defect(where + " is a server without a key");
    }
    if (e.role == Role::kClient) {
      auto policy = e.client_policy;
      policy.intended_server = "placeholder";
      for (const auto& d : policy.defects()) defect(where + ": " + d);
    }
  }
  std::set<std::string> adversary_names;
  for (const auto& n : s.names) {
    const std::string where = "name '" + n.name + "'";
    if (n.name.empty()) defect("declared name is empty");
    if (!names.insert(n.name).second) defect(where + " declared twice");
    if (n.address.empty()) defect(where + " has no address");
    addresses.insert(n.address);
    if (n.controller == Controller::kAdversary) adversary_names.insert(n.name);
  }

  for (const auto& r : s.bindings.dns) {
    if (!names.count(r.owner)) defect("TLSA record for undeclared name '" + r.owner + "'");
    check_key(r.key, "TLSA record for '" + r.owner + "'");
  }
  for (const auto& r : s.bindings.preconfig) {
    if (!s.endpoint(r.table)) defect("pre-configured entry in table of undeclared endpoint '" + r.table + "'");
    if (r.id.empty()) defect("pre-configured entry with empty identifier");
    check_key(r.key, "pre-configured entry '" + r.id + "'");
  }

  std::set<std::string> controlled = adversary_names;
  for (const auto& k : s.adversary.keys) check_key(k, "adversary");
  for (const auto& c : s.adversary.compromise) {
    if (!names.count(c)) {
      defect("compromise of undeclared name '" + c + "'");
    } else {
      controlled.insert(c);
    }
  }
  for (const auto& r : s.adversary.registrations) {
    check_key(r.key, "adversary registration for '" + r.name + "'");
    if (r.kind == AdversaryRegistration::Kind::kDns) {
      if (!names.count(r.name)) defect("adversary DNS registration for undeclared name '" + r.name + "'");
    } else if (!s.endpoint(r.table)) {
      defect("adversary registration into table of undeclared endpoint '" + r.table + "'");
    }
  }
  auto check_address = [&](const netsim::Address& a, const std::string& where) {
    if (!addresses.count(a.value)) defect(where + " references undeclared address '" + a.value + "'");
  };
  for (const auto& action : s.adversary.script.actions) {
    const std::string where = netsim::describe(action);
    if (const auto* a = std::get_if<netsim::RedirectName>(&action)) {
      if (!names.count(a->name)) {
        defect(where + " targets undeclared name '" + a->name + "'");
      } else if (!controlled.count(a->name)) {
        defect(where + ": adversary does not control '" + a->name + "'");
      }
      check_address(a->to, where);
    } else if (const auto* a = std::get_if<netsim::RewriteSrc>(&action)) {
      check_address(a->match_src, where);
      check_address(a->new_src, where);
    } else if (const auto* a = std::get_if<netsim::RewriteDst>(&action)) {
      check_address(a->match_dst, where);
      check_address(a->new_dst, where);
    }
  }

  bool any_mutual_server = false;
  for (const auto& e : s.endpoints) {
    if (e.role == Role::kServer && e.server_policy.request_client_auth) any_mutual_server = true;
  }
  for (std::size_t i = 0; i < s.sessions.size(); ++i) {
    const auto& sess = s.sessions[i];
    const std::string where = "session " + std::to_string(i + 1);
    const auto* client = s.endpoint(sess.client);
    if (!client) {
      defect(where + " uses undeclared endpoint '" + sess.client + "'");
    } else if (client->role != Role::kClient) {
      defect(where + " starts from '" + sess.client + "', which is not a client");
    }
    if (sess.server.empty()) {
      defect(where + " has no intended server");
    } else if (!names.count(sess.server)) {
      defect(where + " intends undeclared name '" + sess.server + "'");
    }
  }

  std::set<Query> listed;
  for (auto q : s.queries) {
    if (!listed.insert(q).second) defect("query '" + std::string(to_string(q)) + "' listed twice");
    if (!s.expected.count(q)) defect("no expected verdict for query '" + std::string(to_string(q)) + "'");
    if (q == Query::kClientAuth && !any_mutual_server) {
      defect("client_auth query without any server requesting client authentication");
    }
  }
  for (const auto& [q, _] : s.expected) {
    if (!listed.count(q)) defect("expected verdict for unlisted query '" + std::string(to_string(q)) + "'");
  }
  return defects;
}

std::vector<Scenario> builtin_scenarios() {
  std::vector<Scenario> out;
  for (auto source : detail::builtin_scenario_sources()) out.push_back(parse_scenario(std::string(source)));
  return out;
}

std::optional<Scenario> find_builtin(const std::string& name) {
  for (auto& s : builtin_scenarios()) {
    if (s.name == name) return s;
  }
  return std::nullopt;
}

}  // namespace rpksim::scenarios
