#include "traitcbc/prover.hpp"

#include <algorithm>
#include <optional>
#include <set>
#include <sstream>

#include "traitcbc/lia.hpp"

namespace tcbc {

const char* to_string(VerificationResult::Kind kind) {
  switch (kind) {
    case VerificationResult::Kind::Valid: return "Valid";
    case VerificationResult::Kind::Invalid: return "Invalid";
    case VerificationResult::Kind::Unknown: return "Unknown";
  }
  return "?";
}

namespace {

Formula mk_and(Formula a, Formula b) {
  if (is_false(a) || is_false(b)) return bottom();
  if (is_true(a)) return b;
  if (is_true(b)) return a;
  return conj(std::move(a), std::move(b));
}

Formula mk_or(Formula a, Formula b) {
  if (is_true(a) || is_true(b)) return top();
  if (is_false(a)) return b;
  if (is_false(b)) return a;
  return disj(std::move(a), std::move(b));
}

Formula canonical_cmp(Rel rel, Term a, Term b) {
  switch (rel) {
    case Rel::Gt: return cmp(Rel::Lt, std::move(b), std::move(a));
    case Rel::Ge: return cmp(Rel::Le, std::move(b), std::move(a));
    case Rel::Eq:
    case Rel::Ne:
      if (b < a) std::swap(a, b);
      return cmp(rel, std::move(a), std::move(b));
    default: return cmp(rel, std::move(a), std::move(b));
  }
}

bool is_literal(const Formula& f) {
  const auto& v = f.node().v;
  if (std::holds_alternative<formula::Cmp>(v) || std::holds_alternative<formula::Pred>(v)) return true;
  if (const auto* n = std::get_if<formula::Not>(&v)) {
    return std::holds_alternative<formula::Pred>(n->arg.node().v);
  }
  return false;
}

Formula complement(const Formula& lit) {
  const auto& v = lit.node().v;
  if (const auto* c = std::get_if<formula::Cmp>(&v)) {
    switch (c->rel) {
      case Rel::Eq: return cmp(Rel::Ne, c->lhs, c->rhs);
      case Rel::Ne: return cmp(Rel::Eq, c->lhs, c->rhs);
      case Rel::Lt: return cmp(Rel::Le, c->rhs, c->lhs);
      case Rel::Le: return cmp(Rel::Lt, c->rhs, c->lhs);
      default: return canonical_cmp(negate(c->rel), c->lhs, c->rhs);
    }
  }
  if (std::holds_alternative<formula::Pred>(v)) return neg(lit);
  return std::get<formula::Not>(v).arg;
}

bool contains(const std::vector<Formula>& fs, const Formula& f) {
  return std::find(fs.begin(), fs.end(), f) != fs.end();
}

// ---------------------------------------------------------------------------
// Negation normal form, skolemization and instantiation

struct Preprocessor {
  int next_skolem = 0;
  int next_binder = 0;
  std::vector<std::pair<std::string, std::string>> skolems;  // name, class
  bool quantified = false;
  bool dropped = false;

  Formula nnf(const Formula& f, bool pos, std::vector<std::string>& universals) {
    const auto& v = f.node().v;
    if (std::holds_alternative<formula::True>(v)) return pos ? top() : bottom();
    if (std::holds_alternative<formula::False>(v)) return pos ? bottom() : top();
    if (std::holds_alternative<formula::HasType>(v)) return pos ? top() : bottom();
    if (const auto* c = std::get_if<formula::Cmp>(&v)) {
      return canonical_cmp(pos ? c->rel : negate(c->rel), c->lhs, c->rhs);
    }
    if (std::holds_alternative<formula::Pred>(v)) return pos ? f : neg(f);
    if (const auto* n = std::get_if<formula::Not>(&v)) return nnf(n->arg, !pos, universals);
    if (const auto* a = std::get_if<formula::And>(&v)) {
      Formula l = nnf(a->lhs, pos, universals);
      Formula r = nnf(a->rhs, pos, universals);
      return pos ? mk_and(l, r) : mk_or(l, r);
    }
    if (const auto* o = std::get_if<formula::Or>(&v)) {
      Formula l = nnf(o->lhs, pos, universals);
      Formula r = nnf(o->rhs, pos, universals);
      return pos ? mk_or(l, r) : mk_and(l, r);
    }
    if (const auto* i = std::get_if<formula::Implies>(&v)) {
      Formula l = nnf(i->lhs, !pos, universals);
      Formula r = nnf(i->rhs, pos, universals);
      return pos ? mk_or(l, r) : mk_and(l, r);
    }
    const auto& q = std::get<formula::Quant>(v);
    quantified = true;
    bool universal = (q.kind == Quantifier::Forall) == pos;
    if (universal) {
      std::string name = "_q" + std::to_string(next_binder++);
      Formula body = substitute(q.body, Substitution{{q.var, var(name)}});
      universals.push_back(name);
      Formula inner = nnf(body, pos, universals);
      universals.pop_back();
      if (is_true(inner)) return top();
      return forall(name, q.cls, inner);
    }
    auto fv = free_vars(q.body);
    for (const auto& u : universals) {
      if (fv.count(u)) {
        dropped = true;
        return top();
      }
    }
    std::string name = "_sk" + std::to_string(next_skolem++);
    skolems.emplace_back(name, q.cls);
    return nnf(substitute(q.body, Substitution{{q.var, var(name)}}), pos, universals);
  }
};

bool mentions_binder(const Term& t) {
  for (const auto& v : free_vars(t)) {
    if (v.rfind("_q", 0) == 0) return true;
  }
  return false;
}

class Instantiator {
 public:
  Instantiator(std::vector<Term> pool, std::vector<std::pair<std::string, std::string>> constants)
      : pool_(std::move(pool)), constants_(std::move(constants)) {}

  bool dropped = false;

  Formula run(const Formula& f, int depth) {
    const auto& v = f.node().v;
    if (const auto* a = std::get_if<formula::And>(&v)) return mk_and(run(a->lhs, depth), run(a->rhs, depth));
    if (const auto* o = std::get_if<formula::Or>(&v)) return mk_or(run(o->lhs, depth), run(o->rhs, depth));
    const auto* q = std::get_if<formula::Quant>(&v);
    if (!q) return f;
    if (depth >= kMaxDepth) {
      dropped = true;
      return top();
    }
    Formula out = top();
    for (const auto& t : candidates(*q)) {
      out = mk_and(out, run(substitute(q->body, Substitution{{q->var, t}}), depth + 1));
    }
    return out;
  }

 private:
  static constexpr int kMaxDepth = 2;
  static constexpr std::size_t kMaxInstances = 32;

  std::vector<Term> candidates(const formula::Quant& q) {
    std::vector<Term> out;
    auto add = [&](const Term& t) {
      if (out.size() < kMaxInstances && !mentions_binder(t) &&
          std::find(out.begin(), out.end(), t) == out.end()) {
        out.push_back(t);
      } else if (out.size() >= kMaxInstances) {
        dropped = true;
      }
    };
    std::vector<Term> body_apps;
    collect_apps(q.body, body_apps);
    Term x = var(q.var);
    for (const auto& pattern : body_apps) {
      const auto& pa = std::get<term::App>(pattern.node().v);
      for (const auto& g : pool_) {
        const auto& ga = std::get<term::App>(g.node().v);
        if (ga.method != pa.method || ga.args.size() != pa.args.size()) continue;
        if (pa.receiver == x) add(ga.receiver);
        for (std::size_t i = 0; i < pa.args.size(); ++i) {
          if (pa.args[i] == x) add(ga.args[i]);
        }
      }
    }
    for (const auto& [name, cls] : constants_) {
      if (cls == q.cls) add(var(name));
    }
    return out;
  }

  std::vector<Term> pool_;
  std::vector<std::pair<std::string, std::string>> constants_;
};

// ---------------------------------------------------------------------------
// Theory reasoning over a conjunction of literals

struct ArithOverflow {};

std::int64_t checked_add(std::int64_t a, std::int64_t b) {
  std::int64_t r;
  if (__builtin_add_overflow(a, b, &r)) throw ArithOverflow{};
  return r;
}

std::int64_t checked_mul(std::int64_t a, std::int64_t b) {
  std::int64_t r;
  if (__builtin_mul_overflow(a, b, &r)) throw ArithOverflow{};
  return r;
}

struct Lin {
  std::map<int, std::int64_t> coeffs;
  std::int64_t constant = 0;

  bool is_constant() const { return coeffs.empty(); }
};

Lin scaled(const Lin& a, std::int64_t k) {
  Lin out;
  for (const auto& [v, c] : a.coeffs) {
    std::int64_t s = checked_mul(c, k);
    if (s != 0) out.coeffs[v] = s;
  }
  out.constant = checked_mul(a.constant, k);
  return out;
}

Lin sum(const Lin& a, const Lin& b, std::int64_t kb = 1) {
  Lin out = a;
  for (const auto& [v, c] : b.coeffs) {
    std::int64_t s = checked_add(out.coeffs[v], checked_mul(c, kb));
    if (s == 0) {
      out.coeffs.erase(v);
    } else {
      out.coeffs[v] = s;
    }
  }
  out.constant = checked_add(out.constant, checked_mul(b.constant, kb));
  return out;
}

lia::Constraint geq(const Lin& l, std::int64_t shift = 0) {
  return lia::Constraint{l.coeffs, checked_add(l.constant, shift), false};
}

enum class Sat { Yes, No, Unknown };

struct TheoryOutcome {
  Sat sat = Sat::Unknown;
  std::string detail;  // model or reason
  bool nonlinear = false;
};

class Theory {
 public:
  explicit Theory(const std::set<Term>& booleans) : booleans_(booleans) {}

  TheoryOutcome check(const std::vector<Formula>& lits) {
    try {
      std::vector<lia::Constraint> cs;
      for (const auto& l : lits) encode(l, cs);
      for (const auto& [t, id] : ids_) {
        if (booleans_.count(t)) {
          cs.push_back(lia::Constraint{{{id, 1}}, 0, false});
          cs.push_back(lia::Constraint{{{id, -1}}, 1, false});
        }
      }
      TheoryOutcome out = branch(std::move(cs), 0);
      out.nonlinear = nonlinear_;
      return out;
    } catch (const ArithOverflow&) {
      return {Sat::Unknown, "integer overflow in arithmetic reasoning", nonlinear_};
    }
  }

 private:
  static constexpr int kMaxSplits = 48;

  int atom(const Term& t) {
    auto it = ids_.find(t);
    if (it != ids_.end()) return it->second;
    int id = static_cast<int>(ids_.size());
    ids_.emplace(t, id);
    if (const auto* a = std::get_if<term::App>(&t.node().v)) {
      std::vector<Lin> positions;
      positions.push_back(linearize(a->receiver));
      for (const auto& arg : a->args) positions.push_back(linearize(arg));
      apps_.push_back(AppAtom{id, a->method, std::move(positions)});
    }
    return id;
  }

  Lin linearize(const Term& t) {
    const auto& v = t.node().v;
    if (const auto* i = std::get_if<term::Int>(&v)) return Lin{{}, i->value};
    if (const auto* a = std::get_if<term::Arith>(&v)) {
      Lin l = linearize(a->lhs);
      Lin r = linearize(a->rhs);
      switch (a->op) {
        case ArithOp::Add: return sum(l, r);
        case ArithOp::Sub: return sum(l, r, -1);
        case ArithOp::Mul:
          if (l.is_constant()) return scaled(r, l.constant);
          if (r.is_constant()) return scaled(l, r.constant);
          nonlinear_ = true;
          break;
      }
    }
    return Lin{{{atom(t), 1}}, 0};
  }

  void encode(const Formula& lit, std::vector<lia::Constraint>& cs) {
    const auto& v = lit.node().v;
    if (const auto* p = std::get_if<formula::Pred>(&v)) {
      cs.push_back(geq(linearize(p->term), -1));
      booleans_.insert(p->term);
      return;
    }
    if (const auto* n = std::get_if<formula::Not>(&v)) {
      const auto& p = std::get<formula::Pred>(n->arg.node().v);
      cs.push_back(geq(scaled(linearize(p.term), -1)));
      booleans_.insert(p.term);
      return;
    }
    const auto& c = std::get<formula::Cmp>(v);
    Lin d = sum(linearize(c.lhs), linearize(c.rhs), -1);  // lhs - rhs
    switch (c.rel) {
      case Rel::Eq: cs.push_back(lia::Constraint{d.coeffs, d.constant, true}); break;
      case Rel::Ne: diseqs_.push_back(d); break;
      case Rel::Lt: cs.push_back(geq(scaled(d, -1), -1)); break;
      case Rel::Le: cs.push_back(geq(scaled(d, -1))); break;
      case Rel::Gt: cs.push_back(geq(d, -1)); break;
      case Rel::Ge: cs.push_back(geq(d)); break;
    }
  }

  static std::int64_t value(const Lin& l, const std::map<int, std::int64_t>& m) {
    std::int64_t v = l.constant;
    for (const auto& [var, c] : l.coeffs) {
      auto it = m.find(var);
      v = checked_add(v, checked_mul(c, it == m.end() ? 0 : it->second));
    }
    return v;
  }

  TheoryOutcome split(const std::vector<lia::Constraint>& cs,
                      const std::vector<lia::Constraint>& options, int depth) {
    TheoryOutcome result{Sat::No, {}, false};
    for (const auto& o : options) {
      std::vector<lia::Constraint> next = cs;
      next.push_back(o);
      TheoryOutcome r = branch(std::move(next), depth + 1);
      if (r.sat == Sat::Yes) return r;
      if (r.sat == Sat::Unknown) result = r;
    }
    return result;
  }

  TheoryOutcome branch(std::vector<lia::Constraint> cs, int depth) {
    if (depth > kMaxSplits) return {Sat::Unknown, "case-split limit reached", false};
    lia::Result r = lia::solve(cs);
    if (r.status == lia::Status::Unsat) return {Sat::No, {}, false};
    if (r.status == lia::Status::Unknown) return {Sat::Unknown, r.reason, false};
    const auto& m = r.model;

    for (const auto& d : diseqs_) {
      if (value(d, m) != 0) continue;
      return split(cs, {geq(d, -1), geq(scaled(d, -1), -1)}, depth);
    }

    for (std::size_t i = 0; i < apps_.size(); ++i) {
      for (std::size_t j = i + 1; j < apps_.size(); ++j) {
        const AppAtom& p = apps_[i];
        const AppAtom& q = apps_[j];
        if (p.method != q.method || p.positions.size() != q.positions.size()) continue;
        Lin pv{{{p.id, 1}}, 0};
        Lin qv{{{q.id, 1}}, 0};
        if (value(pv, m) == value(qv, m)) continue;
        bool same_args = true;
        for (std::size_t k = 0; k < p.positions.size() && same_args; ++k) {
          same_args = value(p.positions[k], m) == value(q.positions[k], m);
        }
        if (!same_args) continue;
        std::vector<lia::Constraint> options;
        for (std::size_t k = 0; k < p.positions.size(); ++k) {
          Lin d = sum(p.positions[k], q.positions[k], -1);
          if (d.is_constant() && d.constant == 0) continue;
          options.push_back(geq(d, -1));
          options.push_back(geq(scaled(d, -1), -1));
        }
        Lin same = sum(pv, qv, -1);
        options.push_back(lia::Constraint{same.coeffs, same.constant, true});
        return split(cs, options, depth);
      }
    }
    return {Sat::Yes, render(m), false};
  }

  std::string render(const std::map<int, std::int64_t>& m) const {
    std::vector<std::string> parts;
    for (const auto& [t, id] : ids_) {
      if (std::holds_alternative<term::Arith>(t.node().v)) continue;
      auto it = m.find(id);
      parts.push_back(to_string(t) + " = " + std::to_string(it == m.end() ? 0 : it->second));
    }
    std::sort(parts.begin(), parts.end());
    std::string out;
    for (const auto& p : parts) out += (out.empty() ? "" : ", ") + p;
    return out;
  }

  struct AppAtom {
    int id;
    std::string method;
    std::vector<Lin> positions;  // receiver, then arguments
  };

  std::set<Term> booleans_;
  std::map<Term, int> ids_;
  std::vector<AppAtom> apps_;
  std::vector<Lin> diseqs_;
  bool nonlinear_ = false;
};

// ---------------------------------------------------------------------------
// Boolean search

void disjuncts(const Formula& f, std::vector<Formula>& out) {
  if (const auto* o = std::get_if<formula::Or>(&f.node().v)) {
    disjuncts(o->lhs, out);
    disjuncts(o->rhs, out);
  } else {
    out.push_back(f);
  }
}

void collect_booleans(const Formula& f, std::set<Term>& out) {
  const auto& v = f.node().v;
  if (const auto* p = std::get_if<formula::Pred>(&v)) {
    out.insert(p->term);
  } else if (const auto* n = std::get_if<formula::Not>(&v)) {
    collect_booleans(n->arg, out);
  } else if (const auto* a = std::get_if<formula::And>(&v)) {
    collect_booleans(a->lhs, out);
    collect_booleans(a->rhs, out);
  } else if (const auto* o = std::get_if<formula::Or>(&v)) {
    collect_booleans(o->lhs, out);
    collect_booleans(o->rhs, out);
  }
}

class Search {
 public:
  explicit Search(std::set<Term> booleans) : booleans_(std::move(booleans)) {}

  TheoryOutcome run(const Formula& f) { return expand({}, {}, {f}); }

 private:
  static constexpr long kMaxNodes = 20000;

  TheoryOutcome expand(std::vector<Formula> lits, std::vector<std::vector<Formula>> ors,
                       std::vector<Formula> pending) {
    if (++nodes_ > kMaxNodes) return {Sat::Unknown, "case analysis budget exhausted", false};
    for (;;) {
      while (!pending.empty()) {
        Formula f = pending.back();
        pending.pop_back();
        const auto& v = f.node().v;
        if (std::holds_alternative<formula::True>(v)) continue;
        if (std::holds_alternative<formula::False>(v)) return {Sat::No, {}, false};
        if (const auto* a = std::get_if<formula::And>(&v)) {
          pending.push_back(a->rhs);
          pending.push_back(a->lhs);
        } else if (std::holds_alternative<formula::Or>(v)) {
          std::vector<Formula> ds;
          disjuncts(f, ds);
          ors.push_back(std::move(ds));
        } else {
          if (contains(lits, complement(f))) return {Sat::No, {}, false};
          if (!contains(lits, f)) lits.push_back(f);
        }
      }
      for (auto it = ors.begin(); it != ors.end();) {
        std::vector<Formula> kept;
        bool satisfied = false;
        for (const auto& d : *it) {
          if (is_literal(d)) {
            if (contains(lits, d)) {
              satisfied = true;
              break;
            }
            if (contains(lits, complement(d))) continue;
          }
          kept.push_back(d);
        }
        if (satisfied) {
          it = ors.erase(it);
        } else if (kept.empty()) {
          return {Sat::No, {}, false};
        } else if (kept.size() == 1) {
          pending.push_back(kept.front());
          it = ors.erase(it);
        } else {
          *it = std::move(kept);
          ++it;
        }
      }
      if (pending.empty()) break;
    }

    Theory theory(booleans_);
    TheoryOutcome t = theory.check(lits);
    if (t.sat == Sat::No || ors.empty()) return t;

    auto pick = std::min_element(ors.begin(), ors.end(), [](const auto& a, const auto& b) {
      return a.size() < b.size();
    });
    std::vector<Formula> choice = *pick;
    ors.erase(pick);
    TheoryOutcome result{Sat::No, {}, false};
    std::vector<Formula> refuted;
    for (const auto& d : choice) {
      std::vector<Formula> next_pending = refuted;
      next_pending.push_back(d);
      TheoryOutcome r = expand(lits, ors, std::move(next_pending));
      if (r.sat == Sat::Yes) return r;
      if (r.sat == Sat::Unknown) result = r;
      if (is_literal(d)) refuted.push_back(complement(d));
    }
    return result;
  }

  std::set<Term> booleans_;
  long nodes_ = 0;
};

}  // namespace

VerificationResult prove(const std::vector<Formula>& hypotheses, const Formula& goal) {
  // The hypotheses are ordered canonically so that the answer, including any
  // model, does not depend on the order they were given in.
  std::vector<std::pair<std::string, Formula>> ordered;
  for (const auto& h : hypotheses) ordered.emplace_back(to_string(h), h);
  std::stable_sort(ordered.begin(), ordered.end(),
                   [](const auto& a, const auto& b) { return a.first < b.first; });
  Formula problem = neg(goal);
  for (auto it = ordered.rbegin(); it != ordered.rend(); ++it) problem = conj(it->second, problem);

  Preprocessor pre;
  std::vector<std::string> universals;
  Formula f = pre.nnf(problem, true, universals);

  bool dropped = pre.dropped;
  if (pre.quantified) {
    std::vector<Term> apps, pool;
    collect_apps(f, apps);
    for (const auto& a : apps) {
      if (!mentions_binder(a)) pool.push_back(a);
    }
    Instantiator inst(std::move(pool), pre.skolems);
    f = inst.run(f, 0);
    dropped = dropped || inst.dropped;
  }

  std::set<Term> booleans;
  collect_booleans(f, booleans);
  Search search(std::move(booleans));
  TheoryOutcome out = search.run(f);
  switch (out.sat) {
    case Sat::No: return VerificationResult::valid();
    case Sat::Unknown: return VerificationResult::unknown(out.detail);
    case Sat::Yes:
      if (pre.quantified || dropped) {
        return VerificationResult::unknown("quantified formula outside the decidable fragment");
      }
      if (out.nonlinear) return VerificationResult::unknown("non-linear arithmetic");
      return VerificationResult::invalid(out.detail);
  }
  return VerificationResult::unknown("unreachable");
}

VerificationResult BuiltinBackend::run(const Obligation& ob) {
  std::vector<Formula> hyps = ob.hypotheses;
  hyps.insert(hyps.end(), ob.background.begin(), ob.background.end());
  return prove(hyps, ob.goal);
}

VerificationResult implies(const std::vector<Formula>& hypotheses, const Formula& goal,
                           Backend& backend) {
  Obligation ob;
  ob.label = "obligation";
  ob.hypotheses = hypotheses;
  ob.goal = goal;
  return backend.discharge(ob);
}

}  // namespace tcbc
