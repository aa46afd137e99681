// Command-line front end.

#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "traitcbc/driver.hpp"
#include "traitcbc/runtime.hpp"

namespace {

int emit(const tcbc::CommandResult& r, const std::string& report_path) {
  std::cout << r.text;
  if (report_path == "-") {
    std::cout << r.report.dump(2) << "\n";
  } else if (!report_path.empty()) {
    std::ofstream out(report_path, std::ios::binary);
    if (!out) {
      std::cerr << "cannot write report " << report_path << "\n";
      return tcbc::exit_code::kInput;
    }
    out << r.report.dump(2) << "\n";
  }
  return r.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Trait-based correctness-by-construction toolchain"};
  app.require_subcommand(1);
  app.fallthrough();
  std::string report_path;
  app.add_option("--report", report_path, "write the JSON report to a file, or - for stdout");

  std::string file;
  auto* check = app.add_subcommand("check", "parse and check well-formedness");
  check->add_option("file", file)->required();

  tcbc::VerifyOptions vopts;
  auto* verify = app.add_subcommand("verify", "flatten, verify every method and check specification cycles");
  verify->add_option("file", file)->required();
  verify->add_option("--backend", vopts.backend)->check(CLI::IsMember({"builtin", "smtlib"}));
  verify->add_flag("--strict", vopts.strict, "count Unknown as failure");
  verify->add_flag("--recheck-flattened", vopts.recheck_flattened, "re-verify every flattened body");
  verify->add_flag("--allow-spec-cycles", vopts.allow_spec_cycles, "report specification cycles as warnings");
  verify->add_flag("--timing", vopts.timing, "record wall-clock time in the report");
  verify->add_option("--out", vopts.out_dir, "keep SMT-LIB scripts here");
  verify->add_option("--axioms", vopts.axioms_file, "extra SMT-LIB declarations and assertions");

  std::string emit_dir;
  auto* flatten = app.add_subcommand("flatten", "flatten every definition");
  flatten->add_option("file", file)->required();
  flatten->add_option("--emit", emit_dir, "write one .tcbc file per flattened definition");

  std::string out_dir, only, axioms;
  auto* vcs = app.add_subcommand("vcs", "export proof obligations");
  vcs->add_option("file", file)->required();
  vcs->add_option("--out", out_dir)->required();
  vcs->add_option("--only", only, "restrict to one definition");
  vcs->add_option("--axioms", axioms, "extra SMT-LIB declarations and assertions");

  bool dot = false;
  auto* graph = app.add_subcommand("graph", "print the specification graph");
  graph->add_option("file", file)->required();
  graph->add_flag("--dot", dot, "emit Graphviz DOT");
  graph->add_option("--only", only, "restrict to one definition");

  std::optional<std::string> expr;
  long fuel = tcbc::kDefaultFuel;
  auto* run = app.add_subcommand("run", "evaluate the main expression");
  run->add_option("file", file)->required();
  run->add_option("-e,--expr", expr, "expression to evaluate instead of main");
  run->add_option("--fuel", fuel, "maximum number of reduction steps")->check(CLI::PositiveNumber);

  tcbc::TestkitOptions topts;
  std::vector<std::string> harnesses;
  auto* testkit = app.add_subcommand("testkit", "generated-program property harnesses");
  testkit->require_subcommand(1);
  testkit->fallthrough();
  auto* trun = testkit->add_subcommand("run", "run the harnesses over a seed range");
  trun->add_option("--seeds", topts.seeds, "inclusive range a..b");
  trun->add_option("--config", topts.config_file, "JSON generator bounds");
  trun->add_option("--out", topts.out_dir, "directory for shrunk repro files");
  trun->add_option("--harness", harnesses, "flatten, compose, abstract or chain (default: all)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : tcbc::exit_code::kInput;
  }

  tcbc::CommandResult result;
  if (*check) {
    result = tcbc::cmd_check(file);
  } else if (*verify) {
    result = tcbc::cmd_verify(file, vopts);
  } else if (*flatten) {
    result = tcbc::cmd_flatten(file, emit_dir);
  } else if (*vcs) {
    result = tcbc::cmd_vcs(file, out_dir, only, axioms);
  } else if (*graph) {
    result = tcbc::cmd_graph(file, dot, only);
  } else if (*run) {
    result = tcbc::cmd_run(file, expr, fuel);
  } else {
    if (!harnesses.empty()) topts.harnesses = harnesses;
    result = tcbc::cmd_testkit_run(topts);
  }
  return emit(result, report_path);
}
