#include "traitcbc/ast.hpp"

#include <algorithm>

namespace tcbc {

bool is_builtin_class(const std::string& name) { return name == kNum || name == kBool; }

bool Expr::operator==(const Expr& other) const {
  return node_ == other.node_ || node_->v == other.node_->v;
}

Expr evar(std::string name) {
  return Expr(std::make_shared<const ExprNode>(ExprNode{expr::Var{std::move(name)}}));
}
Expr ecall(Expr receiver, std::string method, std::vector<Expr> args) {
  return Expr(std::make_shared<const ExprNode>(
      ExprNode{expr::Call{std::move(receiver), std::move(method), std::move(args)}}));
}
Expr enew(std::string cls, std::vector<Expr> args) {
  return Expr(
      std::make_shared<const ExprNode>(ExprNode{expr::New{std::move(cls), std::move(args)}}));
}
Expr eint(std::int64_t value) {
  return Expr(std::make_shared<const ExprNode>(ExprNode{expr::IntLit{value}}));
}
Expr eif(Formula guard, Expr then_branch, Expr else_branch) {
  return Expr(std::make_shared<const ExprNode>(
      ExprNode{expr::If{std::move(guard), std::move(then_branch), std::move(else_branch)}}));
}

bool is_value(const Expr& e) {
  if (std::holds_alternative<expr::IntLit>(e.node().v)) return true;
  if (const auto* n = std::get_if<expr::New>(&e.node().v)) {
    return std::all_of(n->args.begin(), n->args.end(), [](const Expr& a) { return is_value(a); });
  }
  return false;
}

const Method* Body::find(const std::string& name) const {
  for (const auto& m : methods) {
    if (m.name() == name) return &m;
  }
  return nullptr;
}

std::vector<const Method*> abstract_methods(const Body& body) {
  std::vector<const Method*> out;
  for (const auto& m : body.methods) {
    if (m.is_abstract()) out.push_back(&m);
  }
  return out;
}

std::vector<const Method*> getters(const Body& body) {
  std::vector<const Method*> out;
  for (const auto& m : body.methods) {
    if (m.is_abstract() && m.header.params.empty()) out.push_back(&m);
  }
  return out;
}

bool TraitExpr::operator==(const TraitExpr& other) const {
  return node_ == other.node_ || node_->v == other.node_->v;
}

TraitExpr tbody(Body body) {
  return TraitExpr(std::make_shared<const TraitExprNode>(TraitExprNode{texpr::BodyLit{std::move(body)}}));
}
TraitExpr tref(std::string name) {
  return TraitExpr(std::make_shared<const TraitExprNode>(TraitExprNode{texpr::Ref{std::move(name)}}));
}
TraitExpr tplus(TraitExpr lhs, TraitExpr rhs) {
  return TraitExpr(std::make_shared<const TraitExprNode>(
      TraitExprNode{texpr::Plus{std::move(lhs), std::move(rhs)}}));
}
TraitExpr tabstract(TraitExpr inner, std::string method) {
  return TraitExpr(std::make_shared<const TraitExprNode>(
      TraitExprNode{texpr::MakeAbstract{std::move(inner), std::move(method)}}));
}

namespace {
void collect_refs(const TraitExpr& e, std::vector<std::string>& out) {
  const auto& v = e.node().v;
  if (const auto* r = std::get_if<texpr::Ref>(&v)) {
    if (std::find(out.begin(), out.end(), r->name) == out.end()) out.push_back(r->name);
  } else if (const auto* p = std::get_if<texpr::Plus>(&v)) {
    collect_refs(p->lhs, out);
    collect_refs(p->rhs, out);
  } else if (const auto* a = std::get_if<texpr::MakeAbstract>(&v)) {
    collect_refs(a->inner, out);
  }
}
}  // namespace

std::vector<std::string> referenced_names(const TraitExpr& e) {
  std::vector<std::string> out;
  collect_refs(e, out);
  return out;
}

const char* to_string(DefKind kind) { return kind == DefKind::Trait ? "trait" : "class"; }

const Definition* Program::find(const std::string& name) const {
  for (const auto& d : definitions) {
    if (d.name == name) return &d;
  }
  return nullptr;
}

}  // namespace tcbc
