#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "traitcbc/ast.hpp"
#include "traitcbc/prover.hpp"
#include "traitcbc/spec_graph.hpp"
#include "traitcbc/typing.hpp"

namespace tcbc {

enum class CompositionKind {
  ConflictingConcrete,
  IncompatibleSpecs,
  SignatureMismatch,
  NotInstantiable,
  MissingMethod,
  UnknownInterface,
  CyclicInterfaces,
};

const char* to_string(CompositionKind kind);

struct CompositionError {
  CompositionKind kind;
  std::string method;                // empty for NotInstantiable / interface errors
  std::string detail;                // direction, offending methods, interface name
  std::string definition;            // filled in by flatten_program
  std::vector<std::string> methods;  // NotInstantiable only

  std::string message() const;
  bool operator==(const CompositionError&) const = default;
};

class CompositionFailure : public std::runtime_error {
 public:
  explicit CompositionFailure(std::vector<CompositionError> errors);
  const std::vector<CompositionError>& errors() const { return errors_; }

 private:
  std::vector<CompositionError> errors_;
};

/// Decides the contract implications of method composition. Syntactic cases
/// (alpha-equal, false premise, true conclusion) never reach the backend.
class ImplicationOracle {
 public:
  ImplicationOracle(const ClassTable& table, std::string owner, Backend& backend)
      : table_(&table), owner_(std::move(owner)), backend_(&backend) {}

  /// `premise ==> conclusion` for a method with header `h`. Contracts of
  /// `premise_body` describe `this` calls in the premise.
  VerificationResult implies(const Formula& premise, const Formula& conclusion, const MethodHeader& h,
                             const Body* premise_body);

  long fast_path() const { return fast_path_; }
  long prover_calls() const { return prover_calls_; }

 private:
  const ClassTable* table_;
  std::string owner_;
  Backend* backend_;
  long fast_path_ = 0;
  long prover_calls_ = 0;
};

/// Headers of every method named `m`, in input order.
std::vector<MethodHeader> all_meth(const std::string& m, const std::vector<Body>& bodies);

/// `m2`'s specification with its parameters renamed to `m1`'s, by position.
Spec rename_params(const MethodHeader& from, const MethodHeader& to);

/// Throws CompositionFailure.
Method method_plus(const Method& m1, const Method& m2, ImplicationOracle& oracle, const Body* b1 = nullptr,
                   const Body* b2 = nullptr);
std::vector<Method> methods_plus(const std::vector<Method>& ms1, const std::vector<Method>& ms2,
                                 ImplicationOracle& oracle, const Body* b1 = nullptr, const Body* b2 = nullptr);
Body body_plus(const Body& b1, const Body& b2, ImplicationOracle& oracle);
Body make_abstract(const Body& b, const std::string& m);

/// A body literal after interface import, as checked under its definition.
struct CheckedBody {
  std::string definition;
  Body body;
  std::vector<MethodCheck> checks;
};

/// Reduces `e` against `table`. Each body literal met on the way is
/// appended to `literals` after interface import.
Body flatten_expr(const ClassTable& table, const std::string& owner, const TraitExpr& e, ImplicationOracle& oracle,
                  std::vector<CheckedBody>* literals = nullptr);

struct Cycle {
  std::vector<SpecNode> nodes;
  bool abstract_only = false;  // every method on the cycle is abstract
};

struct DefinitionReport {
  std::string name;
  DefKind kind = DefKind::Trait;
  bool flattened = false;
  std::string skipped;  // dependency that failed, when not attempted
  std::vector<CompositionError> errors;
  std::vector<CheckedBody> bodies;
  std::vector<Cycle> cycles;
};

struct FlattenResult {
  ClassTable table;
  std::vector<DefinitionReport> definitions;  // program order
  long fast_path = 0;
  long composition_prover_calls = 0;

  const DefinitionReport* find(const std::string& name) const;
};

/// Flattening order: referenced and implemented names first, ties broken
/// by program order. Names on a cycle come last, in program order.
std::vector<std::string> flattening_order(const Program& p);

/// Flattens and verifies every definition. Expects a well-formed program.
FlattenResult flatten_program(const Program& p, Backend& backend);

/// Re-runs check_body on every flattened table entry.
std::vector<CheckedBody> recheck_flattened(const ClassTable& table, Backend& backend);

}  // namespace tcbc
