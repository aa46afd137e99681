#pragma once

// Reference implementations used as test oracles. They work directly on the
// syntax trees and deliberately share no logic with the library.

#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "traitcbc/formula.hpp"

namespace tcbc::oracle {

// ---- nameless (de Bruijn) rendering -----------------------------------------

inline std::string nameless(const Term& t, const std::vector<std::string>& env,
                            const Substitution* s);

inline std::string nameless_args(const std::vector<Term>& ts, const std::vector<std::string>& env,
                                 const Substitution* s) {
  std::string out = "(";
  for (const auto& t : ts) out += nameless(t, env, s) + ",";
  return out + ")";
}

// Bound variables become their binder distance; free variables keep their
// name, or are replaced by the (closed-world) rendering of s[x].
inline std::string nameless(const Term& t, const std::vector<std::string>& env,
                            const Substitution* s) {
  const auto& v = t.node().v;
  if (const auto* x = std::get_if<term::Var>(&v)) {
    for (std::size_t i = env.size(); i-- > 0;) {
      if (env[i] == x->name) return "#" + std::to_string(env.size() - 1 - i);
    }
    if (s) {
      auto it = s->find(x->name);
      if (it != s->end()) return nameless(it->second, {}, nullptr);
    }
    return "$" + x->name;
  }
  if (const auto* i = std::get_if<term::Int>(&v)) return std::to_string(i->value);
  if (const auto* a = std::get_if<term::App>(&v)) {
    return "app(" + nameless(a->receiver, env, s) + "." + a->method + nameless_args(a->args, env, s) + ")";
  }
  if (const auto* a = std::get_if<term::Arith>(&v)) {
    return "op" + std::to_string(static_cast<int>(a->op)) + "(" + nameless(a->lhs, env, s) + "," +
           nameless(a->rhs, env, s) + ")";
  }
  const auto& n = std::get<term::New>(v);
  return "new " + n.cls + nameless_args(n.args, env, s);
}

inline std::string nameless(const Formula& f, std::vector<std::string>& env,
                            const Substitution* s) {
  const auto& v = f.node().v;
  if (std::holds_alternative<formula::True>(v)) return "T";
  if (std::holds_alternative<formula::False>(v)) return "F";
  if (const auto* c = std::get_if<formula::Cmp>(&v)) {
    return "cmp" + std::to_string(static_cast<int>(c->rel)) + "(" + nameless(c->lhs, env, s) + "," +
           nameless(c->rhs, env, s) + ")";
  }
  if (const auto* p = std::get_if<formula::Pred>(&v)) return "pred(" + nameless(p->term, env, s) + ")";
  if (const auto* a = std::get_if<formula::And>(&v)) {
    return "and(" + nameless(a->lhs, env, s) + "," + nameless(a->rhs, env, s) + ")";
  }
  if (const auto* o = std::get_if<formula::Or>(&v)) {
    return "or(" + nameless(o->lhs, env, s) + "," + nameless(o->rhs, env, s) + ")";
  }
  if (const auto* i = std::get_if<formula::Implies>(&v)) {
    return "imp(" + nameless(i->lhs, env, s) + "," + nameless(i->rhs, env, s) + ")";
  }
  if (const auto* n = std::get_if<formula::Not>(&v)) return "not(" + nameless(n->arg, env, s) + ")";
  if (const auto* h = std::get_if<formula::HasType>(&v)) {
    return "type(" + nameless(h->term, env, s) + "," + h->cls + ")";
  }
  const auto& q = std::get<formula::Quant>(v);
  env.push_back(q.var);
  std::string body = nameless(q.body, env, s);
  env.pop_back();
  return std::string(q.kind == Quantifier::Forall ? "all:" : "ex:") + q.cls + "(" + body + ")";
}

inline std::string nameless(const Formula& f, const Substitution* s = nullptr) {
  std::vector<std::string> env;
  return nameless(f, env, s);
}

// ---- evaluation over a bounded domain ---------------------------------------

// Unary observer `x.f()` is interpreted by a table indexed by the receiver's
// value; every other application is out of scope for the oracle.
struct Interpretation {
  std::map<std::string, std::int64_t> vars;
  std::map<std::string, std::map<std::int64_t, std::int64_t>> unary;  // method -> table
};

inline std::optional<std::int64_t> eval(const Term& t, const Interpretation& I) {
  const auto& v = t.node().v;
  if (const auto* x = std::get_if<term::Var>(&v)) {
    auto it = I.vars.find(x->name);
    if (it == I.vars.end()) return std::nullopt;
    return it->second;
  }
  if (const auto* i = std::get_if<term::Int>(&v)) return i->value;
  if (const auto* a = std::get_if<term::Arith>(&v)) {
    auto l = eval(a->lhs, I);
    auto r = eval(a->rhs, I);
    if (!l || !r) return std::nullopt;
    switch (a->op) {
      case ArithOp::Add: return *l + *r;
      case ArithOp::Sub: return *l - *r;
      case ArithOp::Mul: return *l * *r;
    }
  }
  if (const auto* a = std::get_if<term::App>(&v)) {
    if (!a->args.empty()) return std::nullopt;
    auto recv = eval(a->receiver, I);
    auto table = I.unary.find(a->method);
    if (!recv || table == I.unary.end()) return std::nullopt;
    auto it = table->second.find(*recv);
    if (it == table->second.end()) return std::nullopt;
    return it->second;
  }
  return std::nullopt;
}

// Quantifiers range over `domain`. Returns nullopt when something outside
// the oracle's language is met.
inline std::optional<bool> holds(const Formula& f, Interpretation& I,
                                 const std::vector<std::int64_t>& domain) {
  const auto& v = f.node().v;
  if (std::holds_alternative<formula::True>(v)) return true;
  if (std::holds_alternative<formula::False>(v)) return false;
  if (std::holds_alternative<formula::HasType>(v)) return true;
  if (const auto* c = std::get_if<formula::Cmp>(&v)) {
    auto l = eval(c->lhs, I);
    auto r = eval(c->rhs, I);
    if (!l || !r) return std::nullopt;
    switch (c->rel) {
      case Rel::Eq: return *l == *r;
      case Rel::Ne: return *l != *r;
      case Rel::Lt: return *l < *r;
      case Rel::Le: return *l <= *r;
      case Rel::Gt: return *l > *r;
      case Rel::Ge: return *l >= *r;
    }
  }
  if (const auto* p = std::get_if<formula::Pred>(&v)) {
    auto t = eval(p->term, I);
    if (!t) return std::nullopt;
    return *t >= 1;
  }
  if (const auto* n = std::get_if<formula::Not>(&v)) {
    auto a = holds(n->arg, I, domain);
    if (!a) return std::nullopt;
    return !*a;
  }
  auto binary = [&](const Formula& l, const Formula& r, auto op) -> std::optional<bool> {
    auto a = holds(l, I, domain);
    auto b = holds(r, I, domain);
    if (!a || !b) return std::nullopt;
    return op(*a, *b);
  };
  if (const auto* a = std::get_if<formula::And>(&v)) return binary(a->lhs, a->rhs, [](bool x, bool y) { return x && y; });
  if (const auto* o = std::get_if<formula::Or>(&v)) return binary(o->lhs, o->rhs, [](bool x, bool y) { return x || y; });
  if (const auto* i = std::get_if<formula::Implies>(&v)) return binary(i->lhs, i->rhs, [](bool x, bool y) { return !x || y; });
  const auto& q = std::get<formula::Quant>(v);
  auto saved = I.vars.find(q.var) == I.vars.end() ? std::optional<std::int64_t>{} : I.vars[q.var];
  bool forall_kind = q.kind == Quantifier::Forall;
  std::optional<bool> result = forall_kind;
  for (std::int64_t d : domain) {
    I.vars[q.var] = d;
    auto b = holds(q.body, I, domain);
    if (!b) {
      result = std::nullopt;
      break;
    }
    if (forall_kind && !*b) {
      result = false;
      break;
    }
    if (!forall_kind && *b) {
      result = true;
      break;
    }
  }
  if (saved) {
    I.vars[q.var] = *saved;
  } else {
    I.vars.erase(q.var);
  }
  return result;
}

/// Searches vars (and the listed unary observers, as total tables on the
/// domain) for an interpretation making every hypothesis true and the goal
/// false. Returns the counterexample, if any.
inline std::optional<Interpretation> find_countermodel(const std::vector<Formula>& hyps,
                                                       const Formula& goal,
                                                       const std::vector<std::string>& vars,
                                                       const std::vector<std::string>& observers,
                                                       std::int64_t lo, std::int64_t hi) {
  std::vector<std::int64_t> domain;
  for (std::int64_t d = lo; d <= hi; ++d) domain.push_back(d);
  std::size_t n = domain.size();
  std::size_t table_slots = observers.size() * n;
  std::vector<std::size_t> digits(vars.size() + table_slots, 0);
  for (;;) {
    Interpretation I;
    for (std::size_t i = 0; i < vars.size(); ++i) I.vars[vars[i]] = domain[digits[i]];
    for (std::size_t o = 0; o < observers.size(); ++o) {
      auto& table = I.unary[observers[o]];
      for (std::size_t k = 0; k < n; ++k) table[domain[k]] = domain[digits[vars.size() + o * n + k]];
    }
    bool all = true;
    for (const auto& h : hyps) {
      auto b = holds(h, I, domain);
      if (!b || !*b) {
        all = false;
        break;
      }
    }
    if (all) {
      auto g = holds(goal, I, domain);
      if (g && !*g) return I;
    }
    std::size_t i = 0;
    while (i < digits.size() && ++digits[i] == n) digits[i++] = 0;
    if (i == digits.size()) return std::nullopt;
  }
}

// ---- random formulas ---------------------------------------------------------

class FormulaGen {
 public:
  FormulaGen(std::uint64_t seed, std::vector<std::string> vars, std::vector<std::string> observers = {},
             bool quantifiers = false)
      : rng_(seed), vars_(std::move(vars)), observers_(std::move(observers)), quantifiers_(quantifiers) {}

  int pick(int n) { return static_cast<int>(rng_() % static_cast<std::uint64_t>(n)); }

  Term term(int depth) {
    int choice = depth <= 0 ? pick(2) : pick(observers_.empty() ? 5 : 6);
    switch (choice) {
      case 0: return var(vars_[pick(static_cast<int>(vars_.size()))]);
      case 1: return int_const(pick(9) - 4);
      case 2: return arith(ArithOp::Add, term(depth - 1), term(depth - 1));
      case 3: return arith(ArithOp::Sub, term(depth - 1), term(depth - 1));
      case 4: return arith(ArithOp::Mul, int_const(pick(5) - 2), term(depth - 1));
      default:
        return app(var(vars_[pick(static_cast<int>(vars_.size()))]),
                   observers_[pick(static_cast<int>(observers_.size()))]);
    }
  }

  Formula atom() {
    static const Rel rels[] = {Rel::Eq, Rel::Ne, Rel::Lt, Rel::Le, Rel::Gt, Rel::Ge};
    return cmp(rels[pick(6)], term(1), term(1));
  }

  Formula formula(int depth) {
    if (depth <= 0) return atom();
    switch (pick(quantifiers_ ? 8 : 6)) {
      case 0: return atom();
      case 1: return conj(formula(depth - 1), formula(depth - 1));
      case 2: return disj(formula(depth - 1), formula(depth - 1));
      case 3: return imp(formula(depth - 1), formula(depth - 1));
      case 4: return neg(formula(depth - 1));
      case 5: return atom();
      case 6: return forall(vars_[pick(static_cast<int>(vars_.size()))], "Num", formula(depth - 1));
      default: return exists(vars_[pick(static_cast<int>(vars_.size()))], "Num", formula(depth - 1));
    }
  }

 private:
  std::mt19937_64 rng_;
  std::vector<std::string> vars_;
  std::vector<std::string> observers_;
  bool quantifiers_;
};

}  // namespace tcbc::oracle
