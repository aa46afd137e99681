#include "traitcbc/printer.hpp"

#include <sstream>

namespace tcbc {

namespace {

void print_expr(std::ostream& os, const Expr& e);

void print_expr_args(std::ostream& os, const std::vector<Expr>& args) {
  os << '(';
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (i) os << ", ";
    print_expr(os, args[i]);
  }
  os << ')';
}

void print_expr(std::ostream& os, const Expr& e) {
  const auto& v = e.node().v;
  if (const auto* x = std::get_if<expr::Var>(&v)) {
    os << x->name;
  } else if (const auto* c = std::get_if<expr::Call>(&v)) {
    print_expr(os, c->receiver);
    os << '.' << c->method;
    print_expr_args(os, c->args);
  } else if (const auto* n = std::get_if<expr::New>(&v)) {
    os << "new " << n->cls;
    print_expr_args(os, n->args);
  } else if (const auto* i = std::get_if<expr::IntLit>(&v)) {
    os << i->value;
  } else if (const auto* f = std::get_if<expr::If>(&v)) {
    os << "if (" << to_string(f->guard) << ") {";
    print_expr(os, f->then_branch);
    os << '}';
    const Expr* rest = &f->else_branch;
    while (const auto* g = std::get_if<expr::If>(&rest->node().v)) {
      os << " elseif (" << to_string(g->guard) << ") {";
      print_expr(os, g->then_branch);
      os << '}';
      rest = &g->else_branch;
    }
    os << " else {";
    print_expr(os, *rest);
    os << '}';
  }
}

std::string pad(int indent) { return std::string(static_cast<std::size_t>(indent), ' '); }

void print_trait_expr(std::ostream& os, const TraitExpr& e, int indent, bool operand) {
  const auto& v = e.node().v;
  if (const auto* b = std::get_if<texpr::BodyLit>(&v)) {
    os << to_string(b->body, indent);
  } else if (const auto* r = std::get_if<texpr::Ref>(&v)) {
    os << r->name;
  } else if (const auto* p = std::get_if<texpr::Plus>(&v)) {
    if (operand) os << '(';
    print_trait_expr(os, p->lhs, indent, false);
    os << " + ";
    print_trait_expr(os, p->rhs, indent, true);
    if (operand) os << ')';
  } else if (const auto* a = std::get_if<texpr::MakeAbstract>(&v)) {
    print_trait_expr(os, a->inner, indent, true);
    os << "[makeAbstract " << a->method << ']';
  }
}

}  // namespace

std::string to_string(const Expr& e) {
  std::ostringstream os;
  print_expr(os, e);
  return os.str();
}

std::string signature_string(const MethodHeader& h) {
  std::ostringstream os;
  os << h.return_type << ' ' << h.name << '(';
  for (std::size_t i = 0; i < h.params.size(); ++i) {
    if (i) os << ", ";
    os << h.params[i].type << ' ' << h.params[i].name;
  }
  os << ')';
  return os.str();
}

std::string to_string(const Method& m, int indent) {
  std::ostringstream os;
  if (!is_true(m.header.spec.pre)) os << pad(indent) << "@Pre: " << to_string(m.header.spec.pre) << '\n';
  if (!is_true(m.header.spec.post)) os << pad(indent) << "@Post: " << to_string(m.header.spec.post) << '\n';
  os << pad(indent);
  if (m.is_abstract()) os << "abstract ";
  os << signature_string(m.header);
  if (m.body) os << " = " << to_string(*m.body);
  os << ";\n";
  return os.str();
}

std::string to_string(const Body& b, int indent) {
  std::ostringstream os;
  if (!b.is_interface && b.interfaces.empty() && b.methods.empty()) return "{}";
  os << "{\n";
  if (b.is_interface) os << pad(indent + 2) << "interface\n";
  if (!b.interfaces.empty()) {
    os << pad(indent + 2) << "implements ";
    for (std::size_t i = 0; i < b.interfaces.size(); ++i) {
      if (i) os << ", ";
      os << b.interfaces[i];
    }
    os << '\n';
  }
  for (std::size_t i = 0; i < b.methods.size(); ++i) {
    if (i) os << '\n';
    os << to_string(b.methods[i], indent + 2);
  }
  os << pad(indent) << '}';
  return os.str();
}

std::string to_string(const TraitExpr& e, int indent) {
  std::ostringstream os;
  print_trait_expr(os, e, indent, false);
  return os.str();
}

std::string pretty_print(const Program& p) {
  std::ostringstream os;
  for (std::size_t i = 0; i < p.definitions.size(); ++i) {
    const auto& d = p.definitions[i];
    if (i) os << '\n';
    os << to_string(d.kind) << ' ' << d.name << " = " << to_string(d.expr) << ";\n";
  }
  if (p.main) {
    if (!p.definitions.empty()) os << '\n';
    os << "main = " << to_string(*p.main) << ";\n";
  }
  return os.str();
}

}  // namespace tcbc
