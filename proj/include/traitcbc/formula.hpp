#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <variant>
#include <vector>

namespace tcbc {

// Terms and formulas of the specification logic: first-order logic with
// equality, linear integer arithmetic and uninterpreted method applications.
// Both are immutable trees shared through reference-counted nodes; equality
// is structural.

struct TermNode;
struct FormulaNode;

class Term {
 public:
  explicit Term(std::shared_ptr<const TermNode> node) : node_(std::move(node)) {}
  const TermNode& node() const { return *node_; }
  bool operator==(const Term& other) const;
  bool operator<(const Term& other) const;

 private:
  std::shared_ptr<const TermNode> node_;
};

class Formula {
 public:
  explicit Formula(std::shared_ptr<const FormulaNode> node) : node_(std::move(node)) {}
  const FormulaNode& node() const { return *node_; }
  bool operator==(const Formula& other) const;

 private:
  std::shared_ptr<const FormulaNode> node_;
};

enum class ArithOp { Add, Sub, Mul };
enum class Rel { Eq, Ne, Lt, Le, Gt, Ge };
enum class Quantifier { Forall, Exists };

namespace term {
struct Var {
  std::string name;
  bool operator==(const Var&) const = default;
};
struct Int {
  std::int64_t value;
  bool operator==(const Int&) const = default;
};
/// `receiver.method(args)`, uninterpreted.
struct App {
  Term receiver;
  std::string method;
  std::vector<Term> args;
  bool operator==(const App&) const = default;
};
struct Arith {
  ArithOp op;
  Term lhs;
  Term rhs;
  bool operator==(const Arith&) const = default;
};
/// `new C(args)`; only produced when runtime values flow into guards.
struct New {
  std::string cls;
  std::vector<Term> args;
  bool operator==(const New&) const = default;
};
}  // namespace term

struct TermNode {
  std::variant<term::Var, term::Int, term::App, term::Arith, term::New> v;
};

namespace formula {
struct True {
  bool operator==(const True&) const = default;
};
struct False {
  bool operator==(const False&) const = default;
};
struct Cmp {
  Rel rel;
  Term lhs;
  Term rhs;
  bool operator==(const Cmp&) const = default;
};
/// A boolean-valued application used as an atom, e.g. `list.contains(n)`.
struct Pred {
  Term term;
  bool operator==(const Pred&) const = default;
};
struct And {
  Formula lhs;
  Formula rhs;
  bool operator==(const And&) const = default;
};
struct Or {
  Formula lhs;
  Formula rhs;
  bool operator==(const Or&) const = default;
};
struct Implies {
  Formula lhs;
  Formula rhs;
  bool operator==(const Implies&) const = default;
};
struct Not {
  Formula arg;
  bool operator==(const Not&) const = default;
};
struct Quant {
  Quantifier kind;
  std::string var;
  std::string cls;
  Formula body;
  bool operator==(const Quant&) const = default;
};
/// `term : C`; a sort declaration, always discharged by construction.
struct HasType {
  Term term;
  std::string cls;
  bool operator==(const HasType&) const = default;
};
}  // namespace formula

struct FormulaNode {
  std::variant<formula::True, formula::False, formula::Cmp, formula::Pred, formula::And,
               formula::Or, formula::Implies, formula::Not, formula::Quant, formula::HasType>
      v;
};

// Reserved variable names.
inline const std::string kThis = "this";
inline const std::string kResult = "result";

// Term constructors.
Term var(std::string name);
Term int_const(std::int64_t value);
Term app(Term receiver, std::string method, std::vector<Term> args = {});
Term arith(ArithOp op, Term lhs, Term rhs);
Term ctor(std::string cls, std::vector<Term> args);

// Formula constructors. These do not simplify.
Formula top();
Formula bottom();
Formula cmp(Rel rel, Term lhs, Term rhs);
Formula eq(Term lhs, Term rhs);
Formula pred(Term t);
Formula conj(Formula lhs, Formula rhs);
Formula disj(Formula lhs, Formula rhs);
Formula imp(Formula lhs, Formula rhs);
Formula neg(Formula arg);
Formula forall(std::string var, std::string cls, Formula body);
Formula exists(std::string var, std::string cls, Formula body);
Formula has_type(Term t, std::string cls);

/// Left-nested conjunction of `fs`; `true` when empty.
Formula conj_all(const std::vector<Formula>& fs);

bool is_true(const Formula& f);
bool is_false(const Formula& f);

/// Flattens nested conjunctions into their conjuncts, dropping `true`.
std::vector<Formula> conjuncts(const Formula& f);

using Substitution = std::map<std::string, Term>;

std::set<std::string> free_vars(const Term& t);
std::set<std::string> free_vars(const Formula& f);

/// Capture-avoiding simultaneous substitution.
Term substitute(const Term& t, const Substitution& s);
Formula substitute(const Formula& f, const Substitution& s);

/// Equality up to renaming of bound variables.
bool alpha_equal(const Formula& f, const Formula& g);

/// Every application term occurring in `f` or `t`, outermost first, without
/// duplicates. Applications mentioning bound variables are included.
void collect_apps(const Term& t, std::vector<Term>& out);
void collect_apps(const Formula& f, std::vector<Term>& out);

bool is_quantifier_free(const Formula& f);

const char* rel_symbol(Rel rel);
Rel flip(Rel rel);    // a rel b  <=>  b flip(rel) a
Rel negate(Rel rel);  // !(a rel b) <=> a negate(rel) b

/// Concrete syntax; re-parses to an equal formula.
std::string to_string(const Term& t);
std::string to_string(const Formula& f);

struct Spec {
  Formula pre = top();
  Formula post = top();
  bool operator==(const Spec&) const = default;
};

}  // namespace tcbc
