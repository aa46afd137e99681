#pragma once

#include <atomic>
#include <map>
#include <memory>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "traitcbc/formula.hpp"

namespace tcbc {

struct VerificationResult {
  enum class Kind { Valid, Invalid, Unknown };

  Kind kind = Kind::Unknown;
  std::string detail;  // countermodel for Invalid, reason for Unknown

  static VerificationResult valid() { return {Kind::Valid, {}}; }
  static VerificationResult invalid(std::string model) { return {Kind::Invalid, std::move(model)}; }
  static VerificationResult unknown(std::string reason) { return {Kind::Unknown, std::move(reason)}; }

  bool is_valid() const { return kind == Kind::Valid; }
  bool operator==(const VerificationResult&) const = default;
};

const char* to_string(VerificationResult::Kind kind);

/// Parameter and result classes of a method, keyed by (class, method).
struct MethodSig {
  std::vector<std::string> params;
  std::string result;
};
using SignatureTable = std::map<std::pair<std::string, std::string>, MethodSig>;

/// One verifier call: hypotheses (plus background contract facts) entail goal.
struct Obligation {
  std::string label;                                        // "<definition>.<method>"
  std::vector<std::pair<std::string, std::string>> sorts;  // free variable -> class
  std::vector<Formula> hypotheses;
  std::vector<Formula> background;
  Formula goal = top();
  SignatureTable signatures;
};

class BackendUnavailable : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class Backend {
 public:
  virtual ~Backend() = default;
  virtual std::string name() const = 0;

  VerificationResult discharge(const Obligation& ob) {
    ++calls_;
    return run(ob);
  }
  long calls() const { return calls_; }

 protected:
  virtual VerificationResult run(const Obligation& ob) = 0;

 private:
  std::atomic<long> calls_{0};
};

/// Congruence closure plus linear integer arithmetic, with shallow
/// instantiation of quantified hypotheses.
class BuiltinBackend : public Backend {
 public:
  std::string name() const override { return "builtin"; }

 protected:
  VerificationResult run(const Obligation& ob) override;
};

/// The built-in decision procedure: does the conjunction of `hypotheses`
/// entail `goal`? Valid answers are sound; Invalid answers carry a model and
/// are only given when no quantifier or non-linear term was involved.
VerificationResult prove(const std::vector<Formula>& hypotheses, const Formula& goal);

/// Convenience wrapper building an anonymous obligation for `backend`.
VerificationResult implies(const std::vector<Formula>& hypotheses, const Formula& goal,
                           Backend& backend);

}  // namespace tcbc
