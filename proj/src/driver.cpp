#include "traitcbc/driver.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <memory>
#include <sstream>

#include "traitcbc/flatten.hpp"
#include "traitcbc/parser.hpp"
#include "traitcbc/printer.hpp"
#include "traitcbc/runtime.hpp"
#include "traitcbc/smtlib.hpp"
#include "traitcbc/spec_graph.hpp"
#include "traitcbc/testkit.hpp"
#include "traitcbc/wellformed.hpp"

namespace tcbc {

namespace fs = std::filesystem;

int most_severe(const std::vector<int>& codes) {
  static const int order[] = {3, 2, 4, 1, 5, 6};
  for (int c : order) {
    if (std::find(codes.begin(), codes.end(), c) != codes.end()) return c;
  }
  return 0;
}

namespace {

bool method_fails(const Report& m, bool strict) {
  if (m.contains("type_error")) return false;
  const std::string r = m.value("result", "Valid");
  return r == "Invalid" || (strict && r == "Unknown");
}

}  // namespace

int exit_code_of(const Report& report) {
  std::vector<int> codes;
  if (report.contains("diagnostics") && !report["diagnostics"].empty()) codes.push_back(exit_code::kInput);
  bool strict = report.contains("options") && report["options"].value("strict", false);
  bool allow_cycles = report.contains("options") && report["options"].value("allow_spec_cycles", false);
  bool verdicts = report.value("command", "") == "verify";
  auto scan_methods = [&](const Report& methods) {
    for (const auto& m : methods) {
      if (m.contains("type_error")) codes.push_back(exit_code::kInput);
      if (verdicts && method_fails(m, strict)) codes.push_back(exit_code::kVerification);
    }
  };
  if (report.contains("definitions")) {
    for (const auto& d : report["definitions"]) {
      if (!d["errors"].empty()) codes.push_back(exit_code::kComposition);
      for (const auto& b : d["bodies"]) scan_methods(b["methods"]);
      if (verdicts && !allow_cycles) {
        for (const auto& c : d["cycles"]) {
          if (!c["abstract_only"].get<bool>()) codes.push_back(exit_code::kCircularity);
        }
      }
    }
  }
  if (report.contains("recheck")) {
    for (const auto& b : report["recheck"]) scan_methods(b["methods"]);
  }
  if (report.contains("harnesses")) {
    for (const auto& h : report["harnesses"]) {
      if (!h["failures"].empty()) codes.push_back(exit_code::kVerification);
    }
  }
  if (report.contains("run")) {
    const std::string outcome = report["run"].value("outcome", "");
    if (outcome == "Stuck") codes.push_back(exit_code::kStuck);
    if (outcome == "OutOfFuel") codes.push_back(exit_code::kOutOfFuel);
  }
  return most_severe(codes);
}

namespace {

Report base_report(const std::string& command, const std::string& file) {
  Report r;
  r["schema_version"] = kReportSchemaVersion;
  r["command"] = command;
  r["file"] = file;
  r["diagnostics"] = Report::array();
  return r;
}

void diagnostic(Report& r, const std::string& kind, const std::string& message, int line = 0, int column = 0) {
  Report d;
  d["kind"] = kind;
  d["message"] = message;
  if (line > 0) {
    d["line"] = line;
    d["column"] = column;
  }
  r["diagnostics"].push_back(d);
}

// Parses and checks well-formedness; records diagnostics on failure.
std::optional<Program> load(const std::string& file, Report& report, std::ostringstream& text) {
  std::ifstream in(file, std::ios::binary);
  if (!in) {
    diagnostic(report, "io", "cannot read " + file);
    text << file << ": cannot read file\n";
    return std::nullopt;
  }
  std::ostringstream os;
  os << in.rdbuf();
  Program p;
  try {
    p = parse_program(os.str());
  } catch (const ParseError& e) {
    diagnostic(report, "parse", e.what(), e.line(), e.column());
    text << file << ":" << e.line() << ":" << e.column() << ": " << e.what() << "\n";
    return std::nullopt;
  }
  auto errors = check_well_formed(p);
  for (const auto& e : errors) {
    diagnostic(report, "well-formedness", e.message());
    text << file << ": " << e.message() << "\n";
  }
  if (!errors.empty()) return std::nullopt;
  return p;
}

CommandResult finish(Report report, std::ostringstream& text) {
  CommandResult out;
  out.exit_code = exit_code_of(report);
  report["exit_code"] = out.exit_code;
  out.report = std::move(report);
  out.text = text.str();
  return out;
}

// Never lets an unavailable external solver abort a run.
class GuardedBackend : public Backend {
 public:
  explicit GuardedBackend(std::unique_ptr<Backend> inner) : inner_(std::move(inner)) {}
  std::string name() const override { return inner_->name(); }

 protected:
  VerificationResult run(const Obligation& ob) override {
    try {
      return inner_->discharge(ob);
    } catch (const BackendUnavailable& e) {
      return VerificationResult::unknown(std::string("backend unavailable: ") + e.what());
    }
  }

 private:
  std::unique_ptr<Backend> inner_;
};

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

Report method_json(const MethodCheck& c) {
  Report m;
  m["name"] = c.method;
  m["abstract"] = c.is_abstract;
  if (c.type_error) {
    m["type_error"] = *c.type_error;
  } else {
    m["result"] = to_string(c.result.kind);
    if (!c.result.detail.empty()) m["detail"] = c.result.detail;
  }
  return m;
}

Report bodies_json(const std::vector<CheckedBody>& bodies) {
  Report out = Report::array();
  for (const auto& b : bodies) {
    Report j;
    j["definition"] = b.definition;
    j["methods"] = Report::array();
    for (const auto& c : b.checks) j["methods"].push_back(method_json(c));
    out.push_back(j);
  }
  return out;
}

Report definitions_json(const FlattenResult& flat) {
  Report defs = Report::array();
  for (const auto& d : flat.definitions) {
    Report j;
    j["name"] = d.name;
    j["kind"] = to_string(d.kind);
    if (!d.skipped.empty()) {
      j["status"] = "skipped";
      j["skipped_because"] = d.skipped;
    } else {
      j["status"] = d.flattened ? "flattened" : "composition_error";
    }
    j["errors"] = Report::array();
    for (const auto& e : d.errors) {
      Report ej;
      ej["kind"] = to_string(e.kind);
      if (!e.method.empty()) ej["method"] = e.method;
      if (!e.detail.empty()) ej["detail"] = e.detail;
      if (!e.methods.empty()) ej["methods"] = e.methods;
      j["errors"].push_back(ej);
    }
    j["bodies"] = bodies_json(d.bodies);
    j["cycles"] = Report::array();
    for (const auto& c : d.cycles) {
      Report cj;
      cj["methods"] = Report::array();
      for (const auto& n : c.nodes) cj["methods"].push_back(n.method);
      cj["abstract_only"] = c.abstract_only;
      j["cycles"].push_back(cj);
    }
    defs.push_back(j);
  }
  return defs;
}

void describe(const FlattenResult& flat, bool verdicts, std::ostringstream& text) {
  for (const auto& d : flat.definitions) {
    if (!d.skipped.empty()) text << d.name << ": skipped, depends on " << d.skipped << "\n";
    for (const auto& e : d.errors) text << e.message() << "\n";
    for (const auto& b : d.bodies) {
      for (const auto& c : b.checks) {
        if (c.is_abstract) continue;
        if (c.type_error) {
          text << b.definition << "." << c.method << ": type error: " << *c.type_error << "\n";
        } else if (verdicts) {
          text << b.definition << "." << c.method << ": " << to_string(c.result.kind);
          if (!c.result.detail.empty()) text << " (" << c.result.detail << ")";
          text << "\n";
        }
      }
    }
    for (const auto& c : d.cycles) {
      text << d.name << ": " << (c.abstract_only ? "abstract " : "") << "specification cycle";
      for (const auto& n : c.nodes) text << " " << n.method;
      text << "\n";
    }
  }
}

}  // namespace

CommandResult cmd_check(const std::string& file) {
  Report report = base_report("check", file);
  std::ostringstream text;
  if (auto p = load(file, report, text)) {
    report["definitions"] = Report::array();
    for (const auto& d : p->definitions) {
      Report j;
      j["name"] = d.name;
      j["kind"] = to_string(d.kind);
      j["errors"] = Report::array();
      j["bodies"] = Report::array();
      j["cycles"] = Report::array();
      report["definitions"].push_back(j);
    }
    text << file << ": " << p->definitions.size() << " definitions, well formed\n";
  }
  return finish(std::move(report), text);
}

CommandResult cmd_verify(const std::string& file, const VerifyOptions& options) {
  Report report = base_report("verify", file);
  report["backend"] = options.backend;
  report["options"] = {{"strict", options.strict},
                       {"recheck_flattened", options.recheck_flattened},
                       {"allow_spec_cycles", options.allow_spec_cycles}};
  std::ostringstream text;
  auto program = load(file, report, text);
  if (!program) return finish(std::move(report), text);
  std::unique_ptr<Backend> inner;
  if (options.backend == "smtlib") {
    SmtLibBackend::Options so;
    so.solver = solver_from_env();
    so.out_dir = options.out_dir;
    if (!options.axioms_file.empty()) {
      try {
        so.axioms = read_text(options.axioms_file);
      } catch (const std::exception& e) {
        diagnostic(report, "io", e.what());
        return finish(std::move(report), text);
      }
    }
    if (!so.out_dir.empty()) fs::create_directories(so.out_dir);
    inner = std::make_unique<SmtLibBackend>(so);
  } else if (options.backend == "builtin") {
    inner = std::make_unique<BuiltinBackend>();
  } else {
    diagnostic(report, "usage", "unknown backend " + options.backend);
    return finish(std::move(report), text);
  }
  GuardedBackend backend(std::move(inner));
  auto start = std::chrono::steady_clock::now();
  FlattenResult flat = flatten_program(*program, backend);
  report["definitions"] = definitions_json(flat);
  report["composition"] = {{"fast_path", flat.fast_path}, {"prover_calls", flat.composition_prover_calls}};
  describe(flat, true, text);
  if (options.recheck_flattened) {
    auto rechecked = recheck_flattened(flat.table, backend);
    report["recheck"] = bodies_json(rechecked);
    for (const auto& b : rechecked) {
      for (const auto& c : b.checks) {
        if (!c.ok() && !c.is_abstract) {
          text << "recheck " << b.definition << "." << c.method << ": "
               << (c.type_error ? "type error" : to_string(c.result.kind)) << "\n";
        }
      }
    }
  }
  if (options.allow_spec_cycles) {
    for (const auto& d : flat.definitions) {
      for (const auto& c : d.cycles) {
        if (!c.abstract_only) report["warnings"].push_back(d.name + ": specification cycle allowed");
      }
    }
  }
  report["prover_calls"] = backend.calls();
  if (options.timing) {
    auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - start);
    report["timing_ms"] = ms.count();
  }
  CommandResult out = finish(std::move(report), text);
  out.text += "exit " + std::to_string(out.exit_code) + "\n";
  return out;
}

CommandResult cmd_flatten(const std::string& file, const std::string& emit_dir) {
  Report report = base_report("flatten", file);
  std::ostringstream text;
  auto program = load(file, report, text);
  if (!program) return finish(std::move(report), text);
  BuiltinBackend backend;
  FlattenResult flat = flatten_program(*program, backend);
  report["definitions"] = definitions_json(flat);
  report["composition"] = {{"fast_path", flat.fast_path}, {"prover_calls", flat.composition_prover_calls}};
  describe(flat, false, text);
  report["emitted"] = Report::array();
  if (!emit_dir.empty()) fs::create_directories(emit_dir);
  for (const auto& d : program->definitions) {
    auto it = flat.table.find(d.name);
    if (it == flat.table.end()) continue;
    std::string body = std::string(to_string(d.kind)) + " " + d.name + " = " + to_string(it->second.body) + ";\n";
    if (!emit_dir.empty()) {
      std::string path = (fs::path(emit_dir) / (d.name + ".tcbc")).string();
      std::ofstream(path, std::ios::binary) << body;
      report["emitted"].push_back(path);
    } else {
      text << body << "\n";
    }
  }
  return finish(std::move(report), text);
}

CommandResult cmd_vcs(const std::string& file, const std::string& out_dir, const std::string& only,
                      const std::string& axioms_file) {
  Report report = base_report("vcs", file);
  std::ostringstream text;
  auto program = load(file, report, text);
  if (!program) return finish(std::move(report), text);
  std::string axioms;
  if (!axioms_file.empty()) {
    try {
      axioms = read_text(axioms_file);
    } catch (const std::exception& e) {
      diagnostic(report, "io", e.what());
      return finish(std::move(report), text);
    }
  }
  BuiltinBackend backend;
  FlattenResult flat = flatten_program(*program, backend);
  report["definitions"] = definitions_json(flat);
  for (auto& d : report["definitions"]) {
    for (auto& b : d["bodies"]) {
      for (auto& m : b["methods"]) m.erase("result"), m.erase("detail");
    }
  }
  if (!out_dir.empty()) fs::create_directories(out_dir);
  report["obligations"] = Report::array();
  for (const auto& d : flat.definitions) {
    if (!only.empty() && d.name != only) continue;
    for (const auto& b : d.bodies) {
      Scope scope{&flat.table, b.definition, &b.body};
      for (const auto& m : b.body.methods) {
        if (m.is_abstract()) continue;
        Obligation ob;
        try {
          ob = method_obligation(scope, m);
        } catch (const TypeError&) {
          continue;
        }
        std::string vc = render_vc(ob);
        std::string smt = emit_smtlib(ob, axioms);
        Report oj;
        oj["label"] = ob.label;
        auto issues = lint_smtlib(smt);
        if (!issues.empty()) oj["lint"] = issues;
        if (!out_dir.empty()) {
          std::string stem = (fs::path(out_dir) / ob.label).string();
          std::ofstream(stem + ".vc", std::ios::binary) << vc;
          std::ofstream(stem + ".smt2", std::ios::binary) << smt;
          oj["vc"] = stem + ".vc";
          oj["smt2"] = stem + ".smt2";
        } else {
          text << vc << "\n";
        }
        report["obligations"].push_back(oj);
      }
    }
  }
  if (!out_dir.empty()) text << report["obligations"].size() << " obligations written to " << out_dir << "\n";
  return finish(std::move(report), text);
}

CommandResult cmd_graph(const std::string& file, bool dot, const std::string& only) {
  Report report = base_report("graph", file);
  std::ostringstream text;
  auto program = load(file, report, text);
  if (!program) return finish(std::move(report), text);
  BuiltinBackend backend;
  FlattenResult flat = flatten_program(*program, backend);
  report["graphs"] = Report::array();
  for (const auto& d : program->definitions) {
    auto it = flat.table.find(d.name);
    if (it == flat.table.end()) continue;
    if (only.empty() ? d.kind != DefKind::Class : d.name != only) continue;
    SpecGraph g = build_spec_graph(it->second.body, d.name);
    Report gj;
    gj["definition"] = d.name;
    gj["edges"] = Report::array();
    for (const auto& [a, b] : g.edges) gj["edges"].push_back({g.nodes[a].method, g.nodes[b].method});
    gj["cycles"] = Report::array();
    for (const auto& c : detect_circularity(g)) {
      Report cj = Report::array();
      for (const auto& n : c) cj.push_back(n.method);
      gj["cycles"].push_back(cj);
    }
    report["graphs"].push_back(gj);
    if (dot) {
      text << to_dot(g, d.name);
    } else {
      for (const auto& [a, b] : g.edges) text << d.name << "." << g.nodes[a].method << " -> " << g.nodes[b].method << "\n";
    }
  }
  return finish(std::move(report), text);
}

CommandResult cmd_run(const std::string& file, const std::optional<std::string>& expr, long fuel) {
  Report report = base_report("run", file);
  report["options"] = {{"fuel", fuel}};
  std::ostringstream text;
  auto program = load(file, report, text);
  if (!program) return finish(std::move(report), text);
  std::optional<Expr> e = program->main;
  if (expr) {
    try {
      e = parse_expression(*expr);
    } catch (const ParseError& err) {
      diagnostic(report, "parse", std::string("expression: ") + err.what(), err.line(), err.column());
      text << "expression: " << err.what() << "\n";
      return finish(std::move(report), text);
    }
  }
  if (!e) {
    diagnostic(report, "usage", "no main expression and no -e given");
    text << file << ": nothing to run\n";
    return finish(std::move(report), text);
  }
  BuiltinBackend backend;
  FlattenResult flat = flatten_program(*program, backend);
  report["definitions"] = definitions_json(flat);
  for (auto& d : report["definitions"]) {
    d["cycles"] = Report::array();
    for (auto& b : d["bodies"]) {
      for (auto& m : b["methods"]) m.erase("result"), m.erase("detail");
    }
  }
  describe(flat, false, text);
  EvalOutcome out = eval(flat.table, *e, fuel);
  Report rj;
  rj["outcome"] = to_string(out.kind);
  rj["steps"] = out.steps;
  if (out.kind == EvalOutcome::Kind::Done) {
    rj["value"] = to_string(out.residual);
    text << to_string(out.residual) << "\n";
  } else if (out.kind == EvalOutcome::Kind::Stuck) {
    rj["reason"] = out.reason;
    rj["residual"] = to_string(out.residual);
    text << "stuck: " << out.reason << "\n";
  } else {
    text << "out of fuel after " << out.steps << " steps\n";
  }
  report["run"] = rj;
  return finish(std::move(report), text);
}

namespace {

std::optional<std::pair<std::uint64_t, std::uint64_t>> seed_range(const std::string& text) {
  auto dots = text.find("..");
  if (dots == std::string::npos) return std::nullopt;
  try {
    std::size_t used = 0;
    std::string a = text.substr(0, dots), b = text.substr(dots + 2);
    std::uint64_t lo = std::stoull(a, &used);
    if (used != a.size()) return std::nullopt;
    std::uint64_t hi = std::stoull(b, &used);
    if (used != b.size() || hi < lo) return std::nullopt;
    return std::make_pair(lo, hi);
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

void read_config(const std::string& path, testkit::GenConfig& cfg) {
  nlohmann::json j = nlohmann::json::parse(read_text(path));
  if (!j.is_object()) throw std::runtime_error(path + ": expected a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (key == "max_defs") cfg.max_defs = value.get<int>();
    else if (key == "max_methods_per_body") cfg.max_methods_per_body = value.get<int>();
    else if (key == "max_params") cfg.max_params = value.get<int>();
    else if (key == "max_expr_depth") cfg.max_expr_depth = value.get<int>();
    else if (key == "compose_probability") cfg.compose_probability = value.get<double>();
    else if (key == "conditionals") cfg.conditionals = value.get<bool>();
    else throw std::runtime_error(path + ": unknown key " + key);
  }
  if (cfg.max_defs < 1 || cfg.max_methods_per_body < 1 || cfg.max_params < 1 || cfg.max_expr_depth < 1) {
    throw std::runtime_error(path + ": bounds must be at least 1");
  }
}

}  // namespace

CommandResult cmd_testkit_run(const TestkitOptions& options) {
  Report report = base_report("testkit", options.config_file);
  std::ostringstream text;
  auto range = seed_range(options.seeds);
  if (!range) {
    diagnostic(report, "usage", "seed range must look like a..b, got " + options.seeds);
    text << "bad seed range " << options.seeds << "\n";
    return finish(std::move(report), text);
  }
  testkit::GenConfig cfg;
  if (!options.config_file.empty()) {
    try {
      read_config(options.config_file, cfg);
    } catch (const std::exception& e) {
      diagnostic(report, "config", e.what());
      text << e.what() << "\n";
      return finish(std::move(report), text);
    }
  }
  report["seeds"] = {{"first", range->first}, {"last", range->second}};
  report["config"] = {{"max_defs", cfg.max_defs},
                      {"max_methods_per_body", cfg.max_methods_per_body},
                      {"max_params", cfg.max_params},
                      {"max_expr_depth", cfg.max_expr_depth},
                      {"compose_probability", cfg.compose_probability},
                      {"conditionals", cfg.conditionals}};
  using Harness = testkit::HarnessSummary (*)(std::uint64_t, std::uint64_t, const testkit::GenConfig&, Backend&);
  const std::vector<std::pair<std::string, Harness>> known{{"flatten", testkit::flatten_harness},
                                                           {"compose", testkit::compose_harness},
                                                           {"abstract", testkit::abstract_harness},
                                                           {"chain", testkit::chain_harness}};
  report["harnesses"] = Report::array();
  BuiltinBackend backend;
  char line[128];
  std::snprintf(line, sizeof line, "%-10s %8s %8s %8s\n", "harness", "cases", "checked", "failed");
  text << line;
  for (const auto& wanted : options.harnesses) {
    auto it = std::find_if(known.begin(), known.end(), [&](const auto& k) { return k.first == wanted; });
    if (it == known.end()) {
      diagnostic(report, "usage", "unknown harness " + wanted);
      continue;
    }
    testkit::HarnessSummary s = it->second(range->first, range->second, cfg, backend);
    Report h;
    h["name"] = s.name;
    h["cases"] = s.cases;
    h["checked"] = s.checked;
    h["failures"] = Report::array();
    for (const auto& f : s.failures) {
      Report fj;
      fj["seed"] = f.seed;
      fj["what"] = f.what;
      if (!options.out_dir.empty()) {
        fs::create_directories(options.out_dir);
        std::string path = (fs::path(options.out_dir) / (s.name + "-seed" + std::to_string(f.seed) + ".tcbc")).string();
        std::ofstream(path, std::ios::binary) << f.repro;
        fj["repro_file"] = path;
      }
      h["failures"].push_back(fj);
    }
    std::snprintf(line, sizeof line, "%-10s %8ld %8ld %8zu\n", s.name.c_str(), s.cases, s.checked,
                  s.failures.size());
    text << line;
    for (const auto& f : s.failures) text << "  seed " << f.seed << ": " << f.what << "\n";
    report["harnesses"].push_back(h);
  }
  return finish(std::move(report), text);
}

}  // namespace tcbc
