#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "traitcbc/formula.hpp"

namespace tcbc {

// Built-in classes. `Num` holds integer literals, `Bool` types predicate
// methods that only appear inside specifications and guards.
inline const std::string kNum = "Num";
inline const std::string kBool = "Bool";

bool is_builtin_class(const std::string& name);

struct ExprNode;

class Expr {
 public:
  explicit Expr(std::shared_ptr<const ExprNode> node) : node_(std::move(node)) {}
  const ExprNode& node() const { return *node_; }
  bool operator==(const Expr& other) const;

 private:
  std::shared_ptr<const ExprNode> node_;
};

namespace expr {
struct Var {
  std::string name;
  bool operator==(const Var&) const = default;
};
struct Call {
  Expr receiver;
  std::string method;
  std::vector<Expr> args;
  bool operator==(const Call&) const = default;
};
struct New {
  std::string cls;
  std::vector<Expr> args;
  bool operator==(const New&) const = default;
};
struct IntLit {
  std::int64_t value;
  bool operator==(const IntLit&) const = default;
};
/// `if (guard) {then} else {else}`; typed as the built-in call-by-name
/// `ite` method.
struct If {
  Formula guard;
  Expr then_branch;
  Expr else_branch;
  bool operator==(const If&) const = default;
};
}  // namespace expr

struct ExprNode {
  std::variant<expr::Var, expr::Call, expr::New, expr::IntLit, expr::If> v;
};

Expr evar(std::string name);
Expr ecall(Expr receiver, std::string method, std::vector<Expr> args = {});
Expr enew(std::string cls, std::vector<Expr> args = {});
Expr eint(std::int64_t value);
Expr eif(Formula guard, Expr then_branch, Expr else_branch);

/// `new C(vs)` with value arguments, or an integer literal.
bool is_value(const Expr& e);

struct Param {
  std::string type;
  std::string name;
  bool operator==(const Param&) const = default;
};

struct MethodHeader {
  Spec spec;
  std::string return_type;
  std::string name;
  std::vector<Param> params;
  bool operator==(const MethodHeader&) const = default;
};

struct Method {
  MethodHeader header;
  std::optional<Expr> body;  // absent: abstract

  bool is_abstract() const { return !body.has_value(); }
  const std::string& name() const { return header.name; }
  bool operator==(const Method&) const = default;
};

struct Body {
  bool is_interface = false;
  std::vector<std::string> interfaces;
  std::vector<Method> methods;

  const Method* find(const std::string& name) const;
  bool operator==(const Body&) const = default;
};

/// Abstract methods, in declaration order.
std::vector<const Method*> abstract_methods(const Body& body);

/// No-argument abstract methods, in declaration order.
std::vector<const Method*> getters(const Body& body);

struct TraitExprNode;

class TraitExpr {
 public:
  explicit TraitExpr(std::shared_ptr<const TraitExprNode> node) : node_(std::move(node)) {}
  const TraitExprNode& node() const { return *node_; }
  bool operator==(const TraitExpr& other) const;

 private:
  std::shared_ptr<const TraitExprNode> node_;
};

namespace texpr {
struct BodyLit {
  Body body;
  bool operator==(const BodyLit&) const = default;
};
struct Ref {
  std::string name;
  bool operator==(const Ref&) const = default;
};
struct Plus {
  TraitExpr lhs;
  TraitExpr rhs;
  bool operator==(const Plus&) const = default;
};
struct MakeAbstract {
  TraitExpr inner;
  std::string method;
  bool operator==(const MakeAbstract&) const = default;
};
}  // namespace texpr

struct TraitExprNode {
  std::variant<texpr::BodyLit, texpr::Ref, texpr::Plus, texpr::MakeAbstract> v;
};

TraitExpr tbody(Body body);
TraitExpr tref(std::string name);
TraitExpr tplus(TraitExpr lhs, TraitExpr rhs);
TraitExpr tabstract(TraitExpr inner, std::string method);

/// Names referenced by `Ref` nodes, in first-occurrence order.
std::vector<std::string> referenced_names(const TraitExpr& e);

enum class DefKind { Trait, Class };

const char* to_string(DefKind kind);

struct Definition {
  std::string name;
  DefKind kind = DefKind::Trait;
  TraitExpr expr;
  int line = 0;  // 1-based source line of the header, 0 when synthesized
  bool operator==(const Definition& o) const {
    return name == o.name && kind == o.kind && expr == o.expr;
  }
};

struct Program {
  std::vector<Definition> definitions;
  std::optional<Expr> main;

  const Definition* find(const std::string& name) const;
  bool operator==(const Program&) const = default;
};

}  // namespace tcbc
