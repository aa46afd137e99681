#pragma once

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "traitcbc/ast.hpp"
#include "traitcbc/prover.hpp"

namespace tcbc {

/// A flattened definition.
struct ClassInfo {
  DefKind kind = DefKind::Trait;
  Body body;
};

/// Flattened definitions by name.
using ClassTable = std::map<std::string, ClassInfo>;

class TypeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// `x1:C1 ... xn:Cn`, `this` first.
using TypeEnv = std::vector<std::pair<std::string, std::string>>;

/// `C -| P |= P'`: type, knowledge and obligation of an expression.
struct TypedResult {
  std::string type;
  Formula knowledge = top();
  Formula obligation = top();
};

/// Method resolution for one check: calls on `this` see the body under
/// check, every other class is looked up in the flattened table.
struct Scope {
  const ClassTable* table = nullptr;
  std::string owner;
  const Body* self = nullptr;

  const Body* body_of(const std::string& cls) const;
  const MethodHeader* find(const std::string& cls, const std::string& method) const;
  bool is_class(const std::string& name) const;
  SignatureTable signatures() const;
};

/// Reflexive-transitive closure of `implements`.
bool instance_of(const ClassTable& table, const std::string& sub, const std::string& sup);

/// Issues `_f0, _f1, ...`.
class FreshVars {
 public:
  std::string next(const std::string& cls);
  const std::vector<std::pair<std::string, std::string>>& issued() const { return issued_; }

 private:
  std::vector<std::pair<std::string, std::string>> issued_;
};

TypedResult type_expr(const Scope& scope, const TypeEnv& env, const Expr& e, FreshVars& fresh);

/// Facts `Pre(S)[..] ==> Post(S)[.., result := t]` for every application
/// term t in `formulas` whose method can be resolved, repeated for the terms
/// those facts introduce (two rounds). `exclude` is never axiomatized.
std::vector<Formula> contract_axioms(const Scope& scope,
                                     const std::map<std::string, std::string>& sorts,
                                     const std::vector<Formula>& formulas,
                                     const std::optional<Term>& exclude = std::nullopt);

/// The single verifier call of a concrete method. Throws TypeError.
Obligation method_obligation(const Scope& scope, const Method& m);

struct MethodCheck {
  std::string method;
  bool is_abstract = false;
  std::optional<std::string> type_error;
  VerificationResult result;

  bool ok() const { return !type_error && result.is_valid(); }
};

MethodCheck check_method(const Scope& scope, const Method& m, Backend& backend);

/// One entry per method in declaration order.
std::vector<MethodCheck> check_body(const ClassTable& table, const std::string& owner, const Body& body,
                                    Backend& backend);

/// Stable text form of an obligation for golden files.
std::string render_vc(const Obligation& ob);

}  // namespace tcbc
