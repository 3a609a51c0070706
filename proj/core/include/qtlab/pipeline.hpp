#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "qtlab/report.hpp"
#include "qtlab/scenario.hpp"

namespace qtlab {

inline constexpr const char* kToolVersion = "0.3.0";

/// check-axioms, build-quasitree, special-path, verify-fibers,
/// verify-coneoff, verify-embedding, distortion, all.
const std::vector<std::string>& commands();

/// Commands that apply to a scenario kind, in `all` order.
std::vector<std::string> applicable_commands(ScenarioKind kind);

struct StepOutput {
  std::string command;
  bool pass = true;
  std::vector<std::string> checks;  // one "PASS ..." / "FAIL ..." line per hard assertion
  std::vector<Report> reports;
};

/// Runs one command (not `all`). Throws ConfigInvalid when the command does
/// not apply to the scenario kind; module errors propagate.
StepOutput run_step(const std::string& command, const Scenario& s);

struct RunOptions {
  Format format = Format::Json;
  std::filesystem::path out = "out";
  bool timestamps = true;  // manifest only; reports never carry them
};

/// Runs `command` and writes its reports plus manifest.json under `out`.
/// Exit status: 0 all checks pass, 1 a hard assertion failed,
/// 2 ConfigInvalid, 3 any other error.
int run(const std::string& command, const Scenario& s, const RunOptions& opts, std::ostream& log);

/// As above, loading the scenario first (so a bad file also maps to 2).
int run(const std::string& command, const std::string& scenario_path, const Overrides& overrides,
        const RunOptions& opts, std::ostream& log);

}  // namespace qtlab
