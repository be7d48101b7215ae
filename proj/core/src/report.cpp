#include "rpksim/report.hpp"

#include "json.hpp"

namespace rpksim::report {

using json = nlohmann::ordered_json;

namespace {

json line_of(std::size_t index) { return index + 1; }

json verdict_json(const engine::QueryResult& q) {
  json j;
  j["query"] = scenarios::to_string(q.query);
  j["verdict"] = q.verdict.satisfied ? "SAT" : "VIOLATED";
  j["expected"] = scenarios::to_string(q.expected);
  j["match"] = q.matches();
  j["witness_line"] = q.verdict.witness ? line_of(*q.verdict.witness) : json(nullptr);
  j["candidate_lines"] = json::array();
  for (auto c : q.verdict.candidates) j["candidate_lines"].push_back(line_of(c));
  j["exception_line"] = q.verdict.exception_used ? line_of(*q.verdict.exception_used) : json(nullptr);
  j["notes"] = q.verdict.notes;
  return j;
}

json outcome_json(const std::optional<handshake::SessionOutcome>& outcome) {
  return outcome ? json(outcome->describe()) : json(nullptr);
}

json run_json(const engine::RunReport& r, const ReportOptions& options) {
  json j;
  j["scenario"] = r.scenario;
  j["kind"] = scenarios::to_string(r.kind);
  j["description"] = r.description;
  j["finding"] = r.finding;
  j["seed"] = r.seed;
  j["result"] = r.passed() ? "PASS" : "FAIL";
  j["outcomes_match"] = r.outcomes_match();

  j["verdicts"] = json::array();
  for (const auto& q : r.verdicts) j["verdicts"].push_back(verdict_json(q));

  j["sessions"] = json::array();
  for (const auto& s : r.sessions) {
    json sj;
    sj["index"] = s.index + 1;
    sj["client"] = s.client;
    sj["intended_server"] = s.intended_server;
    sj["connection"] = s.connection;
    sj["client_outcome"] = s.client_outcome.describe();
    sj["server_endpoint"] = s.server_endpoint ? json(*s.server_endpoint) : json(nullptr);
    sj["server_outcome"] = outcome_json(s.server_outcome);
    sj["expected_abort"] = s.expected_abort ? json(*s.expected_abort) : json(nullptr);
    sj["outcome_match"] = s.outcome_matches();
    j["sessions"].push_back(std::move(sj));
  }

  json bindings;
  bindings["dns_updates"] = json::array();
  for (const auto& u : r.dns_updates) {
    bindings["dns_updates"].push_back({{"name", u.name},
                                       {"registrant", u.registrant},
                                       {"usage", u.usage},
                                       {"key", u.key_fingerprint},
                                       {"accepted", u.accepted}});
  }
  bindings["registry"] = json::array();
  for (const auto& e : r.registry) {
    bindings["registry"].push_back({{"name", e.name}, {"usage", e.usage}, {"key", e.key_fingerprint}});
  }
  bindings["preconfig"] = json::array();
  for (const auto& e : r.preconfig) {
    bindings["preconfig"].push_back({{"table", e.table}, {"id", e.id}, {"key", e.key_fingerprint}});
  }
  bindings["mixed_usage"] = r.mixed_usage_names;
  j["bindings"] = std::move(bindings);

  j["notes"] = r.notes;
  j["trace"] = format_trace(r.trace);

  if (options.include_messages) {
    j["message_dump"] = netsim::format_dump(r.messages);
    j["messages"] = json::array();
    for (const auto& m : r.messages) {
      j["messages"].push_back({{"seq", m.delivered ? json(m.seq) : json(nullptr)},
                               {"src", m.src.value},
                               {"dst", m.dst.value},
                               {"connection", m.connection},
                               {"kind", m.kind},
                               {"hex", to_hex(m.payload)}});
    }
  }
  return j;
}

}  // namespace

std::string to_json(const engine::RunReport& report, const ReportOptions& options) {
  return run_json(report, options).dump(2) + "\n";
}

std::string to_json(const engine::SuiteReport& suite, const ReportOptions& options) {
  json j;
  j["seed"] = suite.seed;
  j["result"] = suite.passed() ? "PASS" : "FAIL";
  j["scenarios"] = json::array();
  for (const auto& r : suite.runs) j["scenarios"].push_back(run_json(r, options));
  return j.dump(2) + "\n";
}

std::string summary_line(const engine::RunReport& report) {
  std::string line = report.passed() && report.outcomes_match() ? "PASS " : "FAIL ";
  line += report.scenario;
  for (const auto& q : report.verdicts) {
    line += ' ';
    line += scenarios::to_string(q.query);
    line += '=';
    line += q.verdict.satisfied ? "SAT" : "VIOLATED";
    if (!q.matches()) line += "(expected " + std::string(scenarios::to_string(q.expected)) + ")";
  }
  for (const auto& s : report.sessions) {
    if (!s.outcome_matches()) {
      line += " session" + std::to_string(s.index + 1) + "=" + s.client_outcome.describe();
      line += s.expected_abort ? " (expected " + *s.expected_abort + ")" : " (expected complete)";
    }
  }
  return line;
}

}  // namespace rpksim::report
