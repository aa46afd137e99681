#include "traitcbc/runtime.hpp"

#include <stdexcept>

#include "traitcbc/printer.hpp"

namespace tcbc {

const char* to_string(EvalOutcome::Kind kind) {
  switch (kind) {
    case EvalOutcome::Kind::Done: return "Done";
    case EvalOutcome::Kind::Stuck: return "Stuck";
    case EvalOutcome::Kind::OutOfFuel: return "OutOfFuel";
  }
  return "?";
}

namespace {

struct Stuck {
  std::string reason;
};
struct NoFuel {};

Term value_term(const Expr& v) {
  if (const auto* k = std::get_if<expr::IntLit>(&v.node().v)) return int_const(k->value);
  const auto& n = std::get<expr::New>(v.node().v);
  std::vector<Term> args;
  for (const auto& a : n.args) args.push_back(value_term(a));
  return ctor(n.cls, std::move(args));
}

}  // namespace

Expr substitute_expr(const Expr& e, const std::map<std::string, Expr>& s) {
  const auto& v = e.node().v;
  if (const auto* x = std::get_if<expr::Var>(&v)) {
    auto it = s.find(x->name);
    return it == s.end() ? e : it->second;
  }
  if (std::holds_alternative<expr::IntLit>(v)) return e;
  if (const auto* c = std::get_if<expr::Call>(&v)) {
    std::vector<Expr> args;
    for (const auto& a : c->args) args.push_back(substitute_expr(a, s));
    return ecall(substitute_expr(c->receiver, s), c->method, std::move(args));
  }
  if (const auto* n = std::get_if<expr::New>(&v)) {
    std::vector<Expr> args;
    for (const auto& a : n->args) args.push_back(substitute_expr(a, s));
    return enew(n->cls, std::move(args));
  }
  const auto& i = std::get<expr::If>(v);
  Substitution fs;
  for (const auto& [name, value] : s) fs.insert_or_assign(name, value_term(value));
  return eif(substitute(i.guard, fs), substitute_expr(i.then_branch, s), substitute_expr(i.else_branch, s));
}

namespace {

class Machine {
 public:
  Machine(const ClassTable& table, long fuel) : table_(table), fuel_(fuel) {}

  long steps() const { return steps_; }

  // Reduces the unique redex of a non-value `e`.
  Expr reduce(const Expr& e) {
    const auto& v = e.node().v;
    if (const auto* x = std::get_if<expr::Var>(&v)) throw Stuck{"free variable " + x->name};
    if (const auto* c = std::get_if<expr::Call>(&v)) {
      if (!is_value(c->receiver)) {
        return ecall(reduce(c->receiver), c->method, c->args);
      }
      for (std::size_t i = 0; i < c->args.size(); ++i) {
        if (!is_value(c->args[i])) {
          std::vector<Expr> args = c->args;
          args[i] = reduce(args[i]);
          return ecall(c->receiver, c->method, std::move(args));
        }
      }
      return invoke(c->receiver, c->method, c->args);
    }
    if (const auto* n = std::get_if<expr::New>(&v)) {
      for (std::size_t i = 0; i < n->args.size(); ++i) {
        if (!is_value(n->args[i])) {
          std::vector<Expr> args = n->args;
          args[i] = reduce(args[i]);
          return enew(n->cls, std::move(args));
        }
      }
      throw Stuck{"reduction of a value"};
    }
    if (std::holds_alternative<expr::IntLit>(v)) throw Stuck{"reduction of a value"};
    const auto& i = std::get<expr::If>(v);
    return truth(i.guard) ? i.then_branch : i.else_branch;
  }

  Expr run(Expr e) {
    while (!is_value(e)) {
      if (steps_ >= fuel_) throw NoFuel{};
      ++steps_;
      e = reduce(e);
    }
    return e;
  }

 private:
  Expr invoke(const Expr& recv, const std::string& method, const std::vector<Expr>& args) {
    const auto* obj = std::get_if<expr::New>(&recv.node().v);
    if (!obj) throw Stuck{"method " + method + " called on a number"};
    auto it = table_.find(obj->cls);
    if (it == table_.end()) throw Stuck{"unknown class " + obj->cls};
    const Body& body = it->second.body;
    const Method* m = body.find(method);
    if (!m) throw Stuck{"class " + obj->cls + " has no method " + method};
    if (m->is_abstract()) {
      if (!m->header.params.empty()) throw Stuck{"abstract method " + method + " takes arguments"};
      auto abs = abstract_methods(body);
      std::size_t index = 0;
      while (index < abs.size() && abs[index] != m) ++index;
      if (index >= obj->args.size()) throw Stuck{"getter " + method + " has no constructor argument"};
      return obj->args[index];
    }
    if (m->header.params.size() != args.size()) throw Stuck{"arity mismatch calling " + method};
    std::map<std::string, Expr> s;
    s.emplace(kThis, recv);
    for (std::size_t i = 0; i < args.size(); ++i) s.insert_or_assign(m->header.params[i].name, args[i]);
    return substitute_expr(*m->body, s);
  }

  Expr value_of(const Term& t) {
    const auto& v = t.node().v;
    if (const auto* x = std::get_if<term::Var>(&v)) throw Stuck{"free variable " + x->name + " in condition"};
    if (const auto* k = std::get_if<term::Int>(&v)) return eint(k->value);
    if (const auto* a = std::get_if<term::Arith>(&v)) {
      std::int64_t l = number(value_of(a->lhs));
      std::int64_t r = number(value_of(a->rhs));
      std::int64_t out = 0;
      bool overflow = false;
      switch (a->op) {
        case ArithOp::Add: overflow = __builtin_add_overflow(l, r, &out); break;
        case ArithOp::Sub: overflow = __builtin_sub_overflow(l, r, &out); break;
        case ArithOp::Mul: overflow = __builtin_mul_overflow(l, r, &out); break;
      }
      if (overflow) throw Stuck{"arithmetic overflow in condition"};
      return eint(out);
    }
    if (const auto* n = std::get_if<term::New>(&v)) {
      std::vector<Expr> args;
      for (const auto& x : n->args) args.push_back(value_of(x));
      return enew(n->cls, std::move(args));
    }
    const auto& a = std::get<term::App>(v);
    Expr recv = value_of(a.receiver);
    std::vector<Expr> args;
    for (const auto& x : a.args) args.push_back(value_of(x));
    if (depth_ >= kMaxGuardDepth) throw Stuck{"conditions nested deeper than " + std::to_string(kMaxGuardDepth)};
    ++depth_;
    Expr out = run(ecall(recv, a.method, std::move(args)));
    --depth_;
    return out;
  }

  static std::int64_t number(const Expr& v) {
    if (const auto* k = std::get_if<expr::IntLit>(&v.node().v)) return k->value;
    throw Stuck{"object used as a number in condition"};
  }

  bool truth(const Formula& f) {
    const auto& v = f.node().v;
    if (std::holds_alternative<formula::True>(v)) return true;
    if (std::holds_alternative<formula::False>(v)) return false;
    if (const auto* c = std::get_if<formula::Cmp>(&v)) {
      Expr l = value_of(c->lhs);
      Expr r = value_of(c->rhs);
      if (c->rel == Rel::Eq) return l == r;
      if (c->rel == Rel::Ne) return !(l == r);
      std::int64_t a = number(l), b = number(r);
      switch (c->rel) {
        case Rel::Lt: return a < b;
        case Rel::Le: return a <= b;
        case Rel::Gt: return a > b;
        case Rel::Ge: return a >= b;
        default: break;
      }
      return false;
    }
    if (const auto* a = std::get_if<formula::And>(&v)) return truth(a->lhs) && truth(a->rhs);
    if (const auto* o = std::get_if<formula::Or>(&v)) return truth(o->lhs) || truth(o->rhs);
    if (const auto* i = std::get_if<formula::Implies>(&v)) return !truth(i->lhs) || truth(i->rhs);
    if (const auto* n = std::get_if<formula::Not>(&v)) return !truth(n->arg);
    if (std::holds_alternative<formula::Pred>(v)) throw Stuck{"predicate " + to_string(f) + " in condition"};
    if (std::holds_alternative<formula::Quant>(v)) throw Stuck{"quantifier in condition"};
    throw Stuck{"type assertion in condition"};
  }

  static constexpr int kMaxGuardDepth = 2000;

  const ClassTable& table_;
  long fuel_;
  long steps_ = 0;
  int depth_ = 0;
};

}  // namespace

StepResult step(const ClassTable& table, const Expr& e, long fuel) {
  StepResult out;
  if (is_value(e)) return out;
  Machine m(table, fuel);
  try {
    out.next = m.reduce(e);
  } catch (const Stuck& s) {
    out.stuck = s.reason;
  } catch (const NoFuel&) {
    out.out_of_fuel = true;
  }
  out.guard_steps = m.steps();
  return out;
}

EvalOutcome eval(const ClassTable& table, const Expr& e, long fuel) {
  EvalOutcome out{EvalOutcome::Kind::Done, e, {}, 0};
  while (!is_value(out.residual)) {
    if (out.steps >= fuel) {
      out.kind = EvalOutcome::Kind::OutOfFuel;
      return out;
    }
    StepResult r = step(table, out.residual, fuel - out.steps - 1);
    out.steps += 1 + r.guard_steps;
    if (r.out_of_fuel) {
      out.steps = fuel;
      out.kind = EvalOutcome::Kind::OutOfFuel;
      return out;
    }
    if (!r.next) {
      out.kind = EvalOutcome::Kind::Stuck;
      out.reason = r.stuck;
      out.steps -= 1;
      return out;
    }
    out.residual = *r.next;
  }
  return out;
}

namespace {

bool is_redex(const Expr& e) {
  const auto& v = e.node().v;
  if (std::holds_alternative<expr::If>(v)) return true;
  if (const auto* c = std::get_if<expr::Call>(&v)) {
    if (!is_value(c->receiver)) return false;
    for (const auto& a : c->args) {
      if (!is_value(a)) return false;
    }
    return true;
  }
  return false;
}

void all_positions(const Expr& e, std::vector<int>& path, std::vector<std::pair<std::vector<int>, Expr>>& out) {
  out.emplace_back(path, e);
  const auto& v = e.node().v;
  std::vector<Expr> kids;
  if (const auto* c = std::get_if<expr::Call>(&v)) {
    kids.push_back(c->receiver);
    kids.insert(kids.end(), c->args.begin(), c->args.end());
  } else if (const auto* n = std::get_if<expr::New>(&v)) {
    kids = n->args;
  } else if (const auto* i = std::get_if<expr::If>(&v)) {
    kids = {i->then_branch, i->else_branch};
  }
  for (std::size_t k = 0; k < kids.size(); ++k) {
    path.push_back(static_cast<int>(k));
    all_positions(kids[k], path, out);
    path.pop_back();
  }
}

// Every ancestor is a call or constructor whose earlier children are values.
bool in_context(const Expr& root, const std::vector<int>& path) {
  Expr cur = root;
  for (int k : path) {
    const auto& v = cur.node().v;
    std::vector<Expr> kids;
    if (const auto* c = std::get_if<expr::Call>(&v)) {
      kids.push_back(c->receiver);
      kids.insert(kids.end(), c->args.begin(), c->args.end());
    } else if (const auto* n = std::get_if<expr::New>(&v)) {
      kids = n->args;
    } else {
      return false;
    }
    for (int j = 0; j < k; ++j) {
      if (!is_value(kids[j])) return false;
    }
    cur = kids[k];
  }
  return true;
}

}  // namespace

std::vector<std::vector<int>> redex_positions(const Expr& e) {
  std::vector<std::pair<std::vector<int>, Expr>> all;
  std::vector<int> path;
  all_positions(e, path, all);
  std::vector<std::vector<int>> out;
  for (const auto& [p, sub] : all) {
    if (is_redex(sub) && in_context(e, p)) out.push_back(p);
  }
  return out;
}

}  // namespace tcbc
