#pragma once

#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "traitcbc/prover.hpp"

namespace tcbc {

/// SMT-LIB 2 script for one obligation: sorts per class (`Num` as Int,
/// `Bool` as Bool), one function per (receiver class, method), the
/// hypotheses, the negated goal and a final `(check-sat)`. `axioms` is
/// inserted verbatim after the declarations.
std::string emit_smtlib(const Obligation& ob, const std::string& axioms = {});

/// Problems found in an SMT-LIB script: unbalanced parentheses, a missing,
/// repeated or non-final `(check-sat)`, or symbols used before declaration.
/// Empty when the script is clean.
std::vector<std::string> lint_smtlib(const std::string& text);

/// Solver command from the `TCBC_SMT_SOLVER` environment variable.
std::optional<std::string> solver_from_env();

/// Writes one script per obligation and, when a solver command is given,
/// runs it: `unsat` is Valid, `sat` is Invalid, anything else Unknown.
class SmtLibBackend : public Backend {
 public:
  struct Options {
    std::optional<std::string> solver;
    std::string axioms;   // SMT-LIB text appended after the declarations
    std::string out_dir;  // keep scripts here as <label>.<k>.smt2; temporary files otherwise
  };

  explicit SmtLibBackend(Options options) : options_(std::move(options)) {}
  std::string name() const override { return "smtlib"; }

  /// Paths of the scripts written so far, in call order.
  std::vector<std::string> written() const;

 protected:
  VerificationResult run(const Obligation& ob) override;

 private:
  std::string next_path(const std::string& label);

  Options options_;
  mutable std::mutex mu_;
  std::map<std::string, int> counters_;
  std::vector<std::string> written_;
};

}  // namespace tcbc
