// rpksim: run misbinding scenarios and check their correspondence properties.
//
// Exit codes: 0 every verdict and session outcome as expected, 1 mismatch,
// 2 invalid scenario or usage error.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "rpksim/engine.hpp"
#include "rpksim/report.hpp"
#include "rpksim/scenario.hpp"

namespace {

using namespace rpksim;

constexpr int kMatch = 0;
constexpr int kMismatch = 1;
constexpr int kInvalid = 2;

struct LoadFailure {
  std::vector<std::string> defects;
};

scenarios::Scenario load_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw LoadFailure{{"cannot open '" + path + "'"}};
  std::stringstream buf;
  buf << in.rdbuf();
  try {
    return scenarios::parse_scenario(buf.str());
  } catch (const scenarios::ScenarioParseError& e) {
    throw LoadFailure{{path + ": " + e.what()}};
  }
}

scenarios::Scenario load(const std::string& target) {
  if (std::filesystem::exists(target)) return load_file(target);
  if (auto builtin = scenarios::find_builtin(target)) return *builtin;
  throw LoadFailure{{"'" + target + "' is neither a file nor a built-in scenario (see `rpksim list`)"}};
}

int report_defects(const std::vector<std::string>& defects) {
  for (const auto& d : defects) std::cerr << "defect: " << d << '\n';
  return kInvalid;
}

bool write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) {
    std::cerr << "cannot write '" << path << "'\n";
    return false;
  }
  return true;
}

int cmd_run(const std::string& target, std::uint64_t seed, const std::string& report_path, bool dump_messages) {
  scenarios::Scenario scenario;
  try {
    scenario = load(target);
  } catch (const LoadFailure& f) {
    return report_defects(f.defects);
  }
  engine::RunReport run;
  try {
    run = engine::run_scenario(scenario, seed);
  } catch (const engine::ScenarioInvalid& e) {
    return report_defects(e.defects());
  }
  const report::ReportOptions options{dump_messages};
  if (!report_path.empty()) {
    if (!write_file(report_path, report::to_json(run, options))) return kInvalid;
    std::cout << report::summary_line(run) << '\n';
  } else {
    std::cout << report::to_json(run, options);
  }
  return run.passed() && run.outcomes_match() ? kMatch : kMismatch;
}

int cmd_list() {
  for (const auto& s : scenarios::builtin_scenarios()) {
    std::string summary = s.description.substr(0, s.description.find(". ") + 1);
    std::cout << s.name << "  [" << scenarios::to_string(s.kind) << ": " << s.finding << "]\n";
    if (!summary.empty()) std::cout << "    " << summary << '\n';
  }
  return kMatch;
}

int cmd_suite(std::uint64_t seed, const std::string& report_path) {
  engine::SuiteReport suite;
  try {
    suite = engine::run_suite(seed);
  } catch (const engine::ScenarioInvalid& e) {
    return report_defects(e.defects());
  }
  for (const auto& run : suite.runs) std::cout << report::summary_line(run) << '\n';
  if (!report_path.empty() && !write_file(report_path, report::to_json(suite))) return kInvalid;
  std::size_t passed = 0;
  for (const auto& run : suite.runs) passed += run.passed() && run.outcomes_match();
  std::cout << passed << "/" << suite.runs.size() << " scenarios as expected\n";
  return suite.passed() ? kMatch : kMismatch;
}

int cmd_validate(const std::string& path) {
  try {
    auto defects = scenarios::validate_scenario(load_file(path));
    if (!defects.empty()) return report_defects(defects);
  } catch (const LoadFailure& f) {
    return report_defects(f.defects);
  }
  std::cout << "ok\n";
  return kMatch;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"TLS raw-public-key misbinding simulator"};
  app.require_subcommand(1);

  std::string target;
  std::string report_path;
  std::uint64_t seed = 42;
  bool dump_messages = false;

  auto* run = app.add_subcommand("run", "Run one scenario file or built-in");
  run->add_option("scenario", target, "Scenario file or built-in name")->required();
  run->add_option("--seed", seed, "Seed for keys and nonces")->capture_default_str();
  run->add_option("--report", report_path, "Write the JSON report here instead of stdout");
  run->add_flag("--dump-messages", dump_messages, "Include every envelope, hex encoded, in the report");

  auto* list = app.add_subcommand("list", "List built-in scenarios");

  auto* suite = app.add_subcommand("suite", "Run every built-in scenario");
  suite->add_option("--seed", seed, "Seed for keys and nonces")->capture_default_str();
  suite->add_option("--report", report_path, "Write the combined JSON report here");

  std::string validate_path;
  auto* validate = app.add_subcommand("validate", "Check a scenario file without running it");
  validate->add_option("file", validate_path, "Scenario file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kMatch : kInvalid;
  }

  if (*run) return cmd_run(target, seed, report_path, dump_messages);
  if (*list) return cmd_list();
  if (*suite) return cmd_suite(seed, report_path);
  if (*validate) return cmd_validate(validate_path);
  return kInvalid;
}
