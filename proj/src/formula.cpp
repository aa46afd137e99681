#include "traitcbc/formula.hpp"

#include <algorithm>
#include <sstream>

namespace tcbc {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

Term make_term(auto&& v) {
  return Term(std::make_shared<const TermNode>(TermNode{std::forward<decltype(v)>(v)}));
}

Formula make_formula(auto&& v) {
  return Formula(std::make_shared<const FormulaNode>(FormulaNode{std::forward<decltype(v)>(v)}));
}

int compare_terms(const Term& a, const Term& b);

int compare_term_lists(const std::vector<Term>& a, const std::vector<Term>& b) {
  if (a.size() != b.size()) return a.size() < b.size() ? -1 : 1;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (int c = compare_terms(a[i], b[i]); c != 0) return c;
  }
  return 0;
}

int compare_strings(const std::string& a, const std::string& b) {
  int c = a.compare(b);
  return c < 0 ? -1 : (c > 0 ? 1 : 0);
}

int compare_terms(const Term& a, const Term& b) {
  const auto& va = a.node().v;
  const auto& vb = b.node().v;
  if (&va == &vb) return 0;
  if (va.index() != vb.index()) return va.index() < vb.index() ? -1 : 1;
  return std::visit(
      Overloaded{
          [&](const term::Var& x) { return compare_strings(x.name, std::get<term::Var>(vb).name); },
          [&](const term::Int& x) {
            auto y = std::get<term::Int>(vb).value;
            return x.value == y ? 0 : (x.value < y ? -1 : 1);
          },
          [&](const term::App& x) {
            const auto& y = std::get<term::App>(vb);
            if (int c = compare_strings(x.method, y.method); c != 0) return c;
            if (int c = compare_terms(x.receiver, y.receiver); c != 0) return c;
            return compare_term_lists(x.args, y.args);
          },
          [&](const term::Arith& x) {
            const auto& y = std::get<term::Arith>(vb);
            if (x.op != y.op) return x.op < y.op ? -1 : 1;
            if (int c = compare_terms(x.lhs, y.lhs); c != 0) return c;
            return compare_terms(x.rhs, y.rhs);
          },
          [&](const term::New& x) {
            const auto& y = std::get<term::New>(vb);
            if (int c = compare_strings(x.cls, y.cls); c != 0) return c;
            return compare_term_lists(x.args, y.args);
          },
      },
      va);
}

}  // namespace

bool Term::operator==(const Term& other) const {
  return node_ == other.node_ || node_->v == other.node_->v;
}

bool Term::operator<(const Term& other) const { return compare_terms(*this, other) < 0; }

bool Formula::operator==(const Formula& other) const {
  return node_ == other.node_ || node_->v == other.node_->v;
}

Term var(std::string name) { return make_term(term::Var{std::move(name)}); }
Term int_const(std::int64_t value) { return make_term(term::Int{value}); }
Term app(Term receiver, std::string method, std::vector<Term> args) {
  return make_term(term::App{std::move(receiver), std::move(method), std::move(args)});
}
Term arith(ArithOp op, Term lhs, Term rhs) {
  return make_term(term::Arith{op, std::move(lhs), std::move(rhs)});
}
Term ctor(std::string cls, std::vector<Term> args) {
  return make_term(term::New{std::move(cls), std::move(args)});
}

Formula top() { return make_formula(formula::True{}); }
Formula bottom() { return make_formula(formula::False{}); }
Formula cmp(Rel rel, Term lhs, Term rhs) {
  return make_formula(formula::Cmp{rel, std::move(lhs), std::move(rhs)});
}
Formula eq(Term lhs, Term rhs) { return cmp(Rel::Eq, std::move(lhs), std::move(rhs)); }
Formula pred(Term t) { return make_formula(formula::Pred{std::move(t)}); }
Formula conj(Formula lhs, Formula rhs) {
  return make_formula(formula::And{std::move(lhs), std::move(rhs)});
}
Formula disj(Formula lhs, Formula rhs) {
  return make_formula(formula::Or{std::move(lhs), std::move(rhs)});
}
Formula imp(Formula lhs, Formula rhs) {
  return make_formula(formula::Implies{std::move(lhs), std::move(rhs)});
}
Formula neg(Formula arg) { return make_formula(formula::Not{std::move(arg)}); }
Formula forall(std::string v, std::string cls, Formula body) {
  return make_formula(formula::Quant{Quantifier::Forall, std::move(v), std::move(cls), std::move(body)});
}
Formula exists(std::string v, std::string cls, Formula body) {
  return make_formula(formula::Quant{Quantifier::Exists, std::move(v), std::move(cls), std::move(body)});
}
Formula has_type(Term t, std::string cls) {
  return make_formula(formula::HasType{std::move(t), std::move(cls)});
}

Formula conj_all(const std::vector<Formula>& fs) {
  if (fs.empty()) return top();
  Formula acc = fs.front();
  for (std::size_t i = 1; i < fs.size(); ++i) acc = conj(acc, fs[i]);
  return acc;
}

bool is_true(const Formula& f) { return std::holds_alternative<formula::True>(f.node().v); }
bool is_false(const Formula& f) { return std::holds_alternative<formula::False>(f.node().v); }

namespace {
void flatten_conj(const Formula& f, std::vector<Formula>& out) {
  if (const auto* a = std::get_if<formula::And>(&f.node().v)) {
    flatten_conj(a->lhs, out);
    flatten_conj(a->rhs, out);
  } else if (!is_true(f)) {
    out.push_back(f);
  }
}
}  // namespace

std::vector<Formula> conjuncts(const Formula& f) {
  std::vector<Formula> out;
  flatten_conj(f, out);
  return out;
}

// ---------------------------------------------------------------------------
// Free variables and substitution

namespace {

void term_free_vars(const Term& t, std::set<std::string>& out) {
  std::visit(Overloaded{
                 [&](const term::Var& x) { out.insert(x.name); },
                 [&](const term::Int&) {},
                 [&](const term::App& x) {
                   term_free_vars(x.receiver, out);
                   for (const auto& a : x.args) term_free_vars(a, out);
                 },
                 [&](const term::Arith& x) {
                   term_free_vars(x.lhs, out);
                   term_free_vars(x.rhs, out);
                 },
                 [&](const term::New& x) {
                   for (const auto& a : x.args) term_free_vars(a, out);
                 },
             },
             t.node().v);
}

void formula_free_vars(const Formula& f, std::set<std::string>& out) {
  std::visit(Overloaded{
                 [&](const formula::True&) {},
                 [&](const formula::False&) {},
                 [&](const formula::Cmp& x) {
                   term_free_vars(x.lhs, out);
                   term_free_vars(x.rhs, out);
                 },
                 [&](const formula::Pred& x) { term_free_vars(x.term, out); },
                 [&](const formula::And& x) {
                   formula_free_vars(x.lhs, out);
                   formula_free_vars(x.rhs, out);
                 },
                 [&](const formula::Or& x) {
                   formula_free_vars(x.lhs, out);
                   formula_free_vars(x.rhs, out);
                 },
                 [&](const formula::Implies& x) {
                   formula_free_vars(x.lhs, out);
                   formula_free_vars(x.rhs, out);
                 },
                 [&](const formula::Not& x) { formula_free_vars(x.arg, out); },
                 [&](const formula::Quant& x) {
                   std::set<std::string> inner;
                   formula_free_vars(x.body, inner);
                   inner.erase(x.var);
                   out.insert(inner.begin(), inner.end());
                 },
                 [&](const formula::HasType& x) { term_free_vars(x.term, out); },
             },
             f.node().v);
}

std::vector<Term> subst_list(const std::vector<Term>& ts, const Substitution& s) {
  std::vector<Term> out;
  out.reserve(ts.size());
  for (const auto& t : ts) out.push_back(substitute(t, s));
  return out;
}

std::string fresh_binder(const std::string& base, const std::set<std::string>& avoid) {
  for (int i = 1;; ++i) {
    std::string candidate = base + std::to_string(i);
    if (!avoid.count(candidate)) return candidate;
  }
}

}  // namespace

std::set<std::string> free_vars(const Term& t) {
  std::set<std::string> out;
  term_free_vars(t, out);
  return out;
}

std::set<std::string> free_vars(const Formula& f) {
  std::set<std::string> out;
  formula_free_vars(f, out);
  return out;
}

Term substitute(const Term& t, const Substitution& s) {
  if (s.empty()) return t;
  return std::visit(Overloaded{
                        [&](const term::Var& x) -> Term {
                          auto it = s.find(x.name);
                          return it == s.end() ? t : it->second;
                        },
                        [&](const term::Int&) -> Term { return t; },
                        [&](const term::App& x) -> Term {
                          return app(substitute(x.receiver, s), x.method, subst_list(x.args, s));
                        },
                        [&](const term::Arith& x) -> Term {
                          return arith(x.op, substitute(x.lhs, s), substitute(x.rhs, s));
                        },
                        [&](const term::New& x) -> Term { return ctor(x.cls, subst_list(x.args, s)); },
                    },
                    t.node().v);
}

Formula substitute(const Formula& f, const Substitution& s) {
  if (s.empty()) return f;
  return std::visit(
      Overloaded{
          [&](const formula::True&) -> Formula { return f; },
          [&](const formula::False&) -> Formula { return f; },
          [&](const formula::Cmp& x) -> Formula {
            return cmp(x.rel, substitute(x.lhs, s), substitute(x.rhs, s));
          },
          [&](const formula::Pred& x) -> Formula { return pred(substitute(x.term, s)); },
          [&](const formula::And& x) -> Formula {
            return conj(substitute(x.lhs, s), substitute(x.rhs, s));
          },
          [&](const formula::Or& x) -> Formula {
            return disj(substitute(x.lhs, s), substitute(x.rhs, s));
          },
          [&](const formula::Implies& x) -> Formula {
            return imp(substitute(x.lhs, s), substitute(x.rhs, s));
          },
          [&](const formula::Not& x) -> Formula { return neg(substitute(x.arg, s)); },
          [&](const formula::Quant& x) -> Formula {
            // Only the part of the mapping that reaches free variables of the
            // body matters; the binder shadows its own name.
            std::set<std::string> body_free = free_vars(x.body);
            Substitution inner;
            for (const auto& [name, repl] : s) {
              if (name != x.var && body_free.count(name)) inner.emplace(name, repl);
            }
            if (inner.empty()) return f;
            std::set<std::string> range_vars;
            for (const auto& [name, repl] : inner) {
              auto fv = free_vars(repl);
              range_vars.insert(fv.begin(), fv.end());
            }
            std::string binder = x.var;
            Formula body = x.body;
            if (range_vars.count(binder)) {
              std::set<std::string> avoid = body_free;
              avoid.insert(range_vars.begin(), range_vars.end());
              for (const auto& [name, repl] : inner) avoid.insert(name);
              binder = fresh_binder(x.var, avoid);
              body = substitute(body, Substitution{{x.var, var(binder)}});
            }
            return make_formula(formula::Quant{x.kind, binder, x.cls, substitute(body, inner)});
          },
          [&](const formula::HasType& x) -> Formula {
            return has_type(substitute(x.term, s), x.cls);
          },
      },
      f.node().v);
}

// ---------------------------------------------------------------------------
// Alpha equivalence

namespace {

using Binders = std::vector<std::string>;

// Index of the innermost binder for `name`, counted from the inside.
int binder_index(const Binders& env, const std::string& name) {
  for (std::size_t i = env.size(); i-- > 0;) {
    if (env[i] == name) return static_cast<int>(env.size() - 1 - i);
  }
  return -1;
}

bool alpha_terms(const Term& a, const Binders& ea, const Term& b, const Binders& eb);

bool alpha_term_lists(const std::vector<Term>& a, const Binders& ea, const std::vector<Term>& b,
                      const Binders& eb) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!alpha_terms(a[i], ea, b[i], eb)) return false;
  }
  return true;
}

bool alpha_terms(const Term& a, const Binders& ea, const Term& b, const Binders& eb) {
  const auto& va = a.node().v;
  const auto& vb = b.node().v;
  if (va.index() != vb.index()) return false;
  return std::visit(
      Overloaded{
          [&](const term::Var& x) {
            const auto& y = std::get<term::Var>(vb);
            int ia = binder_index(ea, x.name);
            int ib = binder_index(eb, y.name);
            if (ia != ib) return false;
            return ia >= 0 || x.name == y.name;
          },
          [&](const term::Int& x) { return x.value == std::get<term::Int>(vb).value; },
          [&](const term::App& x) {
            const auto& y = std::get<term::App>(vb);
            return x.method == y.method && alpha_terms(x.receiver, ea, y.receiver, eb) &&
                   alpha_term_lists(x.args, ea, y.args, eb);
          },
          [&](const term::Arith& x) {
            const auto& y = std::get<term::Arith>(vb);
            return x.op == y.op && alpha_terms(x.lhs, ea, y.lhs, eb) &&
                   alpha_terms(x.rhs, ea, y.rhs, eb);
          },
          [&](const term::New& x) {
            const auto& y = std::get<term::New>(vb);
            return x.cls == y.cls && alpha_term_lists(x.args, ea, y.args, eb);
          },
      },
      va);
}

bool alpha_formulas(const Formula& f, Binders& ef, const Formula& g, Binders& eg) {
  const auto& vf = f.node().v;
  const auto& vg = g.node().v;
  if (vf.index() != vg.index()) return false;
  return std::visit(
      Overloaded{
          [&](const formula::True&) { return true; },
          [&](const formula::False&) { return true; },
          [&](const formula::Cmp& x) {
            const auto& y = std::get<formula::Cmp>(vg);
            return x.rel == y.rel && alpha_terms(x.lhs, ef, y.lhs, eg) &&
                   alpha_terms(x.rhs, ef, y.rhs, eg);
          },
          [&](const formula::Pred& x) {
            return alpha_terms(x.term, ef, std::get<formula::Pred>(vg).term, eg);
          },
          [&](const formula::And& x) {
            const auto& y = std::get<formula::And>(vg);
            return alpha_formulas(x.lhs, ef, y.lhs, eg) && alpha_formulas(x.rhs, ef, y.rhs, eg);
          },
          [&](const formula::Or& x) {
            const auto& y = std::get<formula::Or>(vg);
            return alpha_formulas(x.lhs, ef, y.lhs, eg) && alpha_formulas(x.rhs, ef, y.rhs, eg);
          },
          [&](const formula::Implies& x) {
            const auto& y = std::get<formula::Implies>(vg);
            return alpha_formulas(x.lhs, ef, y.lhs, eg) && alpha_formulas(x.rhs, ef, y.rhs, eg);
          },
          [&](const formula::Not& x) {
            return alpha_formulas(x.arg, ef, std::get<formula::Not>(vg).arg, eg);
          },
          [&](const formula::Quant& x) {
            const auto& y = std::get<formula::Quant>(vg);
            if (x.kind != y.kind || x.cls != y.cls) return false;
            ef.push_back(x.var);
            eg.push_back(y.var);
            bool same = alpha_formulas(x.body, ef, y.body, eg);
            ef.pop_back();
            eg.pop_back();
            return same;
          },
          [&](const formula::HasType& x) {
            const auto& y = std::get<formula::HasType>(vg);
            return x.cls == y.cls && alpha_terms(x.term, ef, y.term, eg);
          },
      },
      vf);
}

}  // namespace

bool alpha_equal(const Formula& f, const Formula& g) {
  Binders ef;
  Binders eg;
  return alpha_formulas(f, ef, g, eg);
}

// ---------------------------------------------------------------------------
// Traversals

void collect_apps(const Term& t, std::vector<Term>& out) {
  std::visit(Overloaded{
                 [&](const term::Var&) {},
                 [&](const term::Int&) {},
                 [&](const term::App& x) {
                   if (std::find(out.begin(), out.end(), t) == out.end()) out.push_back(t);
                   collect_apps(x.receiver, out);
                   for (const auto& a : x.args) collect_apps(a, out);
                 },
                 [&](const term::Arith& x) {
                   collect_apps(x.lhs, out);
                   collect_apps(x.rhs, out);
                 },
                 [&](const term::New& x) {
                   for (const auto& a : x.args) collect_apps(a, out);
                 },
             },
             t.node().v);
}

void collect_apps(const Formula& f, std::vector<Term>& out) {
  std::visit(Overloaded{
                 [&](const formula::True&) {},
                 [&](const formula::False&) {},
                 [&](const formula::Cmp& x) {
                   collect_apps(x.lhs, out);
                   collect_apps(x.rhs, out);
                 },
                 [&](const formula::Pred& x) { collect_apps(x.term, out); },
                 [&](const formula::And& x) {
                   collect_apps(x.lhs, out);
                   collect_apps(x.rhs, out);
                 },
                 [&](const formula::Or& x) {
                   collect_apps(x.lhs, out);
                   collect_apps(x.rhs, out);
                 },
                 [&](const formula::Implies& x) {
                   collect_apps(x.lhs, out);
                   collect_apps(x.rhs, out);
                 },
                 [&](const formula::Not& x) { collect_apps(x.arg, out); },
                 [&](const formula::Quant& x) { collect_apps(x.body, out); },
                 [&](const formula::HasType& x) { collect_apps(x.term, out); },
             },
             f.node().v);
}

bool is_quantifier_free(const Formula& f) {
  return std::visit(Overloaded{
                        [](const formula::And& x) {
                          return is_quantifier_free(x.lhs) && is_quantifier_free(x.rhs);
                        },
                        [](const formula::Or& x) {
                          return is_quantifier_free(x.lhs) && is_quantifier_free(x.rhs);
                        },
                        [](const formula::Implies& x) {
                          return is_quantifier_free(x.lhs) && is_quantifier_free(x.rhs);
                        },
                        [](const formula::Not& x) { return is_quantifier_free(x.arg); },
                        [](const formula::Quant&) { return false; },
                        [](const auto&) { return true; },
                    },
                    f.node().v);
}

const char* rel_symbol(Rel rel) {
  switch (rel) {
    case Rel::Eq: return "==";
    case Rel::Ne: return "!=";
    case Rel::Lt: return "<";
    case Rel::Le: return "<=";
    case Rel::Gt: return ">";
    case Rel::Ge: return ">=";
  }
  return "?";
}

Rel flip(Rel rel) {
  switch (rel) {
    case Rel::Lt: return Rel::Gt;
    case Rel::Le: return Rel::Ge;
    case Rel::Gt: return Rel::Lt;
    case Rel::Ge: return Rel::Le;
    default: return rel;
  }
}

Rel negate(Rel rel) {
  switch (rel) {
    case Rel::Eq: return Rel::Ne;
    case Rel::Ne: return Rel::Eq;
    case Rel::Lt: return Rel::Ge;
    case Rel::Le: return Rel::Gt;
    case Rel::Gt: return Rel::Le;
    case Rel::Ge: return Rel::Lt;
  }
  return rel;
}

// ---------------------------------------------------------------------------
// Printing

namespace {

// Term precedence: 1 additive, 2 multiplicative, 3 postfix/primary.
void print_term(std::ostream& os, const Term& t, int ctx);

void print_args(std::ostream& os, const std::vector<Term>& args) {
  os << '(';
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (i) os << ", ";
    print_term(os, args[i], 0);
  }
  os << ')';
}

void print_term(std::ostream& os, const Term& t, int ctx) {
  std::visit(Overloaded{
                 [&](const term::Var& x) { os << x.name; },
                 [&](const term::Int& x) {
                   if (x.value < 0 && ctx >= 3) {
                     os << '(' << x.value << ')';
                   } else {
                     os << x.value;
                   }
                 },
                 [&](const term::App& x) {
                   print_term(os, x.receiver, 3);
                   os << '.' << x.method;
                   print_args(os, x.args);
                 },
                 [&](const term::Arith& x) {
                   int prec = x.op == ArithOp::Mul ? 2 : 1;
                   bool paren = prec < ctx;
                   if (paren) os << '(';
                   print_term(os, x.lhs, prec);
                   os << (x.op == ArithOp::Add ? " + " : x.op == ArithOp::Sub ? " - " : " * ");
                   print_term(os, x.rhs, prec + 1);
                   if (paren) os << ')';
                 },
                 [&](const term::New& x) {
                   os << "new " << x.cls;
                   print_args(os, x.args);
                 },
             },
             t.node().v);
}

// Formula precedence: 0 top, 1 implication, 2 or, 3 and, 4 not, 5 atom.
void print_formula(std::ostream& os, const Formula& f, int ctx) {
  auto binary = [&](const Formula& l, const Formula& r, const char* op, int prec, bool right_assoc) {
    bool paren = prec < ctx;
    if (paren) os << '(';
    print_formula(os, l, right_assoc ? prec + 1 : prec);
    os << op;
    print_formula(os, r, right_assoc ? prec : prec + 1);
    if (paren) os << ')';
  };
  std::visit(Overloaded{
                 [&](const formula::True&) { os << "true"; },
                 [&](const formula::False&) { os << "false"; },
                 [&](const formula::Cmp& x) {
                   bool paren = ctx > 5;
                   if (paren) os << '(';
                   print_term(os, x.lhs, 0);
                   os << ' ' << rel_symbol(x.rel) << ' ';
                   print_term(os, x.rhs, 0);
                   if (paren) os << ')';
                 },
                 [&](const formula::Pred& x) { print_term(os, x.term, 0); },
                 [&](const formula::And& x) { binary(x.lhs, x.rhs, " & ", 3, false); },
                 [&](const formula::Or& x) { binary(x.lhs, x.rhs, " | ", 2, false); },
                 [&](const formula::Implies& x) { binary(x.lhs, x.rhs, " ==> ", 1, true); },
                 [&](const formula::Not& x) {
                   os << '!';
                   print_formula(os, x.arg, 4);
                 },
                 [&](const formula::Quant& x) {
                   bool paren = ctx > 0;
                   if (paren) os << '(';
                   os << (x.kind == Quantifier::Forall ? "forall " : "exists ") << x.cls << ' '
                      << x.var << ": ";
                   print_formula(os, x.body, 0);
                   if (paren) os << ')';
                 },
                 [&](const formula::HasType& x) {
                   bool paren = ctx > 5;
                   if (paren) os << '(';
                   print_term(os, x.term, 0);
                   os << " : " << x.cls;
                   if (paren) os << ')';
                 },
             },
             f.node().v);
}

}  // namespace

std::string to_string(const Term& t) {
  std::ostringstream os;
  print_term(os, t, 0);
  return os.str();
}

std::string to_string(const Formula& f) {
  std::ostringstream os;
  print_formula(os, f, 0);
  return os.str();
}

}  // namespace tcbc
