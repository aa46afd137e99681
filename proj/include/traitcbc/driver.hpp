#pragma once

#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

namespace tcbc {

using Report = nlohmann::ordered_json;

inline constexpr int kReportSchemaVersion = 1;

namespace exit_code {
inline constexpr int kOk = 0;
inline constexpr int kVerification = 1;
inline constexpr int kComposition = 2;
inline constexpr int kInput = 3;  // parse, type, well-formedness, I/O
inline constexpr int kCircularity = 4;
inline constexpr int kStuck = 5;
inline constexpr int kOutOfFuel = 6;
}  // namespace exit_code

/// The most severe code: 3 > 2 > 4 > 1 > 5 > 6 > 0.
int most_severe(const std::vector<int>& codes);

/// Exit code implied by a report document.
int exit_code_of(const Report& report);

struct CommandResult {
  int exit_code = 0;
  Report report;
  std::string text;  // human-readable summary
};

struct VerifyOptions {
  std::string backend = "builtin";  // builtin | smtlib
  bool strict = false;
  bool recheck_flattened = false;
  bool allow_spec_cycles = false;
  bool timing = false;
  std::string out_dir;      // smtlib: keep scripts here
  std::string axioms_file;  // smtlib: extra declarations and assertions
};

CommandResult cmd_check(const std::string& file);
CommandResult cmd_verify(const std::string& file, const VerifyOptions& options);
/// Writes `<emit_dir>/<Name>.tcbc` for every flattened definition when
/// `emit_dir` is not empty.
CommandResult cmd_flatten(const std::string& file, const std::string& emit_dir);
/// Writes `<out_dir>/<Definition>.<method>.vc` and `.smt2` per concrete
/// method, optionally only for definition `only`.
CommandResult cmd_vcs(const std::string& file, const std::string& out_dir, const std::string& only = {},
                      const std::string& axioms_file = {});
CommandResult cmd_graph(const std::string& file, bool dot, const std::string& only = {});
CommandResult cmd_run(const std::string& file, const std::optional<std::string>& expr, long fuel);

struct TestkitOptions {
  std::string seeds = "1..100";  // inclusive range `a..b`
  std::string config_file;       // JSON object with generator bounds
  std::string out_dir;           // shrunk repro files of failing seeds
  std::vector<std::string> harnesses{"flatten", "compose", "abstract", "chain"};
};

/// Runs the property harnesses over a seed range; exit 1 when any fails.
CommandResult cmd_testkit_run(const TestkitOptions& options);

}  // namespace tcbc
