#pragma once

#include <string>

#include "rpksim/engine.hpp"

namespace rpksim::report {

struct ReportOptions {
  // Include the per-envelope dump with hex payloads.
  bool include_messages = false;
};

// Deterministic JSON; the trace is embedded as plain text, one event per line,
// and verdict witnesses point at 1-based lines of that text.
std::string to_json(const engine::RunReport& report, const ReportOptions& options = {});
std::string to_json(const engine::SuiteReport& suite, const ReportOptions& options = {});

// One line for terminal output, e.g. "PASS dane-server-misbinding server_auth=VIOLATED ...".
std::string summary_line(const engine::RunReport& report);

}  // namespace rpksim::report
