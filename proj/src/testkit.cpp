#include "traitcbc/testkit.hpp"

#include <algorithm>
#include <optional>
#include <random>
#include <set>
#include <stdexcept>

#include "traitcbc/flatten.hpp"
#include "traitcbc/printer.hpp"
#include "traitcbc/wellformed.hpp"

namespace tcbc::testkit {

namespace {

const std::string kCell = "Cell";

struct Case {
  Formula guard;
  Rel rel;
  Term atom;
};

struct Canon {
  std::string name;
  std::vector<std::string> params;
  std::optional<int> min0;  // precondition `x0 >= min0`
  std::vector<Case> cases;
  Expr body = eint(0);
  std::set<int> callees;
};

struct Typed {
  Expr e;
  std::vector<Case> cases;
};

Formula and_guard(const Formula& a, const Formula& b) {
  if (is_true(a)) return b;
  if (is_true(b)) return a;
  return conj(a, b);
}

Formula post_of(const std::vector<Case>& cases) {
  std::vector<Formula> parts;
  for (const auto& c : cases) {
    Formula atom = cmp(c.rel, var(kResult), c.atom);
    parts.push_back(is_true(c.guard) ? atom : imp(c.guard, atom));
  }
  return conj_all(parts);
}

Formula pre_of(const Canon& c) {
  if (!c.min0) return top();
  return cmp(Rel::Ge, var(c.params[0]), int_const(*c.min0));
}

class Gen {
 public:
  explicit Gen(const GenConfig& cfg) : cfg_(cfg), rng_(cfg.seed * 0x9E3779B97F4A7C15ULL + 7) {}

  int pick(int n) { return n <= 1 ? 0 : static_cast<int>(rng_() % static_cast<std::uint64_t>(n)); }
  bool chance(double p) { return std::uniform_real_distribution<double>(0.0, 1.0)(rng_) < p; }

  std::vector<Canon> canons(int n, bool weaken) {
    std::vector<Canon> out;
    for (int i = 0; i < n; ++i) out.push_back(canon(out, i, weaken));
    return out;
  }

  // Abstract header for `c`: exact, or weaker in pre and/or post, or (when
  // compatibility is not drawn) with a stronger, unrelated post.
  MethodHeader variant(const Canon& c) {
    MethodHeader h = header(c);
    if (!chance(cfg_.compose_probability)) {
      h.spec.post = conj(h.spec.post, cmp(Rel::Eq, var(kResult), int_const(99)));
      return h;
    }
    switch (pick(4)) {
      case 0: return h;
      case 1:
        if (!c.params.empty()) {
          h.spec.pre = cmp(Rel::Ge, var(c.params[0]), int_const(c.min0.value_or(-3) + 1 + pick(3)));
        }
        return h;
      case 2: {
        auto cases = c.cases;
        if (cases.size() > 1 && chance(0.5)) {
          cases.pop_back();
        } else if (cases[0].rel == Rel::Eq) {
          cases[0].rel = chance(0.5) ? Rel::Ge : Rel::Le;
        }
        h.spec.post = post_of(cases);
        return h;
      }
      default:
        h.spec.post = top();
        return h;
    }
  }

  static MethodHeader header(const Canon& c) {
    MethodHeader h;
    h.spec = Spec{pre_of(c), post_of(c.cases)};
    h.return_type = kNum;
    h.name = c.name;
    for (const auto& p : c.params) h.params.push_back(Param{kNum, p});
    return h;
  }

 private:
  Canon canon(const std::vector<Canon>& before, int i, bool weaken) {
    Canon c;
    c.name = "m" + std::to_string(i);
    int np = pick(cfg_.max_params + 1);
    for (int k = 0; k < np; ++k) c.params.push_back("x" + std::to_string(k));
    if (np > 0 && chance(0.3)) c.min0 = pick(5) - 2;
    Typed t = expr(before, c, std::max(1, cfg_.max_expr_depth));
    c.body = t.e;
    c.cases = t.cases;
    if (weaken) {
      for (auto& cs : c.cases) {
        if (cs.rel == Rel::Eq && chance(0.15)) cs.rel = chance(0.5) ? Rel::Ge : Rel::Le;
      }
    }
    return c;
  }

  std::pair<Term, Expr> atom(const Canon& c) {
    if (!c.params.empty() && chance(0.7)) {
      const auto& p = c.params[pick(static_cast<int>(c.params.size()))];
      return {var(p), evar(p)};
    }
    int k = pick(11) - 5;
    return {int_const(k), eint(k)};
  }

  Typed leaf(const Canon& c) {
    auto [t, e] = atom(c);
    return {e, {Case{top(), Rel::Eq, t}}};
  }

  Typed expr(const std::vector<Canon>& before, Canon& c, int depth) {
    if (depth <= 0) return leaf(c);
    int choice = pick(cfg_.conditionals ? 4 : 3);
    if (choice == 1 && !before.empty()) {
      int j = pick(static_cast<int>(before.size()));
      const Canon& callee = before[j];
      std::vector<Expr> args;
      Substitution s;
      for (std::size_t k = 0; k < callee.params.size(); ++k) {
        std::pair<Term, Expr> a = atom(c);
        if (k == 0 && callee.min0) {
          int v = *callee.min0 + pick(4);
          a = {int_const(v), eint(v)};
        }
        s.insert_or_assign(callee.params[k], a.first);
        args.push_back(a.second);
      }
      c.callees.insert(j);
      Typed out{ecall(evar(kThis), callee.name, std::move(args)), {}};
      for (const auto& cs : callee.cases) {
        out.cases.push_back(Case{substitute(cs.guard, s), cs.rel, substitute(cs.atom, s)});
      }
      return out;
    }
    if (choice == 2) {
      Typed a = expr(before, c, depth - 1);
      Typed b = expr(before, c, depth - 1);
      bool first = chance(0.5);
      Typed out{ecall(enew(kCell, {a.e, b.e}), first ? "val" : "aux"), first ? a.cases : b.cases};
      return out;
    }
    if (choice == 3) {
      static const Rel rels[] = {Rel::Lt, Rel::Le, Rel::Gt, Rel::Ge, Rel::Eq, Rel::Ne};
      Formula g = cmp(rels[pick(6)], atom(c).first, atom(c).first);
      Typed a = expr(before, c, depth - 1);
      Typed b = expr(before, c, depth - 1);
      Typed out{eif(g, a.e, b.e), {}};
      for (const auto& cs : a.cases) out.cases.push_back(Case{and_guard(g, cs.guard), cs.rel, cs.atom});
      for (const auto& cs : b.cases) out.cases.push_back(Case{and_guard(neg(g), cs.guard), cs.rel, cs.atom});
      return out;
    }
    return leaf(c);
  }

  const GenConfig& cfg_;
  std::mt19937_64 rng_;
};

Definition cell_definition() {
  Body b;
  for (const char* g : {"val", "aux"}) {
    Spec s{top(), eq(var(kResult), app(var(kThis), g))};
    b.methods.push_back(Method{MethodHeader{s, kNum, g, {}}, std::nullopt});
  }
  return Definition{kCell, DefKind::Class, tbody(b), 0};
}

Method concrete(const Canon& c) { return Method{Gen::header(c), c.body}; }
Method abstract_exact(const Canon& c) { return Method{Gen::header(c), std::nullopt}; }

}  // namespace

Program gen_program(const GenConfig& cfg) {
  Gen g(cfg);
  int n = std::max(1, cfg.max_methods_per_body) + 2;
  std::vector<Canon> cs = g.canons(n, true);
  Program p;
  p.definitions.push_back(cell_definition());
  int max_defs = std::max(1, cfg.max_defs);
  int nbase = 1 + g.pick(std::max(1, (max_defs + 1) / 2));
  std::vector<std::set<std::string>> names;  // per definition after Cell
  std::vector<std::set<std::string>> concrete_names;
  for (int t = 0; t < nbase; ++t) {
    std::set<int> conc;
    int want = 1 + g.pick(std::max(1, cfg.max_methods_per_body));
    for (int k = 0; k < want; ++k) conc.insert(g.pick(n));
    std::set<int> need;
    for (int i : conc) {
      for (int j : cs[i].callees) {
        if (!conc.count(j)) need.insert(j);
      }
    }
    std::optional<int> extra;
    if (g.chance(0.5)) {
      int e = g.pick(n);
      if (!conc.count(e) && !need.count(e)) extra = e;
    }
    Body b;
    std::set<std::string> ns, cns;
    for (int i = 0; i < n; ++i) {
      if (conc.count(i)) {
        b.methods.push_back(concrete(cs[i]));
        cns.insert(cs[i].name);
      } else if (need.count(i)) {
        b.methods.push_back(abstract_exact(cs[i]));
      } else if (extra && *extra == i) {
        b.methods.push_back(Method{g.variant(cs[i]), std::nullopt});
      } else {
        continue;
      }
      ns.insert(cs[i].name);
    }
    if (g.chance(0.5)) std::reverse(b.methods.begin(), b.methods.end());
    p.definitions.push_back(Definition{"T" + std::to_string(t), DefKind::Trait, tbody(b), 0});
    names.push_back(ns);
    concrete_names.push_back(cns);
  }
  for (int d = nbase; d < max_defs; ++d) {
    int avail = static_cast<int>(names.size());
    auto operand = [&](std::set<std::string>& ns, std::set<std::string>& cns) {
      int k = g.pick(avail);
      TraitExpr e = tref(p.definitions[k + 1].name);
      ns.insert(names[k].begin(), names[k].end());
      cns.insert(concrete_names[k].begin(), concrete_names[k].end());
      if (!concrete_names[k].empty() && g.chance(0.25)) {
        auto it = concrete_names[k].begin();
        std::advance(it, g.pick(static_cast<int>(concrete_names[k].size())));
        std::string m = *it;
        e = tabstract(e, m);
        if (!concrete_names[k].count(m)) return e;
      }
      return e;
    };
    std::set<std::string> ns, cns;
    TraitExpr e = operand(ns, cns);
    int ops = 1 + g.pick(2);
    for (int k = 0; k < ops; ++k) e = tplus(e, operand(ns, cns));
    DefKind kind = g.chance(0.4) ? DefKind::Class : DefKind::Trait;
    std::string name = (kind == DefKind::Class ? "K" : "C") + std::to_string(d);
    p.definitions.push_back(Definition{name, kind, e, 0});
    names.push_back(ns);
    concrete_names.push_back(cns);
  }
  return p;
}

RefinementChain gen_refinement_chain(const GenConfig& cfg) {
  Gen g(cfg);
  int n = std::max(1, cfg.max_methods_per_body) + 1;
  std::vector<Canon> cs = g.canons(n, false);
  int top = n - 1;
  RefinementChain out;
  out.program.definitions.push_back(cell_definition());
  Body t0;
  t0.methods.push_back(abstract_exact(cs[top]));
  out.program.definitions.push_back(Definition{"T0", DefKind::Trait, tbody(t0), 0});
  out.stages.push_back("T0");
  std::vector<int> open{top};
  std::set<int> opened{top};
  while (!open.empty()) {
    int take = std::min<int>(static_cast<int>(open.size()), 1 + g.pick(2));
    std::vector<int> now(open.begin(), open.begin() + take);
    open.erase(open.begin(), open.begin() + take);
    Body b;
    std::set<int> declared(now.begin(), now.end());
    for (int i : now) b.methods.push_back(concrete(cs[i]));
    for (int i : now) {
      for (int j : cs[i].callees) {
        if (declared.insert(j).second) b.methods.push_back(abstract_exact(cs[j]));
        if (opened.insert(j).second) open.push_back(j);
      }
    }
    std::string name = "T" + std::to_string(out.stages.size());
    out.program.definitions.push_back(Definition{name, DefKind::Trait, tbody(b), 0});
    out.stages.push_back(name);
  }
  TraitExpr e = tref(out.stages[0]);
  for (std::size_t i = 1; i < out.stages.size(); ++i) e = tplus(e, tref(out.stages[i]));
  out.cls = "Chain";
  out.program.definitions.push_back(Definition{out.cls, DefKind::Class, e, 0});
  return out;
}

namespace {

Formula weaken_first(const Formula& f, bool& done) {
  if (done) return f;
  const auto& v = f.node().v;
  if (const auto* c = std::get_if<formula::Cmp>(&v)) {
    if (c->rel == Rel::Eq) {
      done = true;
      return cmp(Rel::Ge, c->lhs, c->rhs);
    }
    return f;
  }
  if (const auto* a = std::get_if<formula::And>(&v)) {
    Formula l = weaken_first(a->lhs, done);
    return conj(l, weaken_first(a->rhs, done));
  }
  if (const auto* i = std::get_if<formula::Implies>(&v)) return imp(i->lhs, weaken_first(i->rhs, done));
  return f;
}

}  // namespace

RefinementChain weaken_first_stage(const RefinementChain& chain) {
  RefinementChain out = chain;
  if (chain.stages.size() < 2) return out;
  for (auto& d : out.program.definitions) {
    if (d.name != chain.stages[1]) continue;
    Body b = std::get<texpr::BodyLit>(d.expr.node().v).body;
    for (auto& m : b.methods) {
      if (m.is_abstract()) continue;
      bool done = false;
      m.header.spec.post = weaken_first(m.header.spec.post, done);
      break;
    }
    d.expr = tbody(b);
  }
  return out;
}

// ---- shrinking ----------------------------------------------------------------

namespace {

void expr_variants(const Expr& e, std::vector<Expr>& out) {
  const auto& v = e.node().v;
  std::vector<Expr> kids;
  if (const auto* c = std::get_if<expr::Call>(&v)) {
    kids.push_back(c->receiver);
    kids.insert(kids.end(), c->args.begin(), c->args.end());
    for (std::size_t i = 0; i < kids.size(); ++i) {
      std::vector<Expr> sub;
      expr_variants(kids[i], sub);
      for (auto& s : sub) {
        auto copy = kids;
        copy[i] = s;
        std::vector<Expr> args(copy.begin() + 1, copy.end());
        out.push_back(ecall(copy[0], c->method, std::move(args)));
      }
    }
  } else if (const auto* n = std::get_if<expr::New>(&v)) {
    kids = n->args;
    for (std::size_t i = 0; i < kids.size(); ++i) {
      std::vector<Expr> sub;
      expr_variants(kids[i], sub);
      for (auto& s : sub) {
        auto copy = kids;
        copy[i] = s;
        out.push_back(enew(n->cls, std::move(copy)));
      }
    }
  } else if (const auto* i = std::get_if<expr::If>(&v)) {
    kids = {i->then_branch, i->else_branch};
    std::vector<Expr> sub;
    expr_variants(i->then_branch, sub);
    for (auto& s : sub) out.push_back(eif(i->guard, s, i->else_branch));
    sub.clear();
    expr_variants(i->else_branch, sub);
    for (auto& s : sub) out.push_back(eif(i->guard, i->then_branch, s));
  } else {
    return;
  }
  out.insert(out.begin(), kids.begin(), kids.end());
  out.insert(out.begin(), eint(0));
}

void texpr_variants(const Program& prog, const TraitExpr& e, std::vector<TraitExpr>& out) {
  const auto& v = e.node().v;
  if (const auto* b = std::get_if<texpr::BodyLit>(&v)) {
    for (std::size_t i = 0; i < b->body.methods.size(); ++i) {
      Body copy = b->body;
      copy.methods.erase(copy.methods.begin() + static_cast<long>(i));
      out.push_back(tbody(copy));
    }
    for (std::size_t i = 0; i < b->body.methods.size(); ++i) {
      const Spec& spec = b->body.methods[i].header.spec;
      if (!is_true(spec.pre) || !is_true(spec.post)) {
        Body copy = b->body;
        copy.methods[i].header.spec = Spec{top(), top()};
        out.push_back(tbody(copy));
      }
    }
    for (std::size_t i = 0; i < b->body.methods.size(); ++i) {
      const Method& m = b->body.methods[i];
      if (m.is_abstract()) continue;
      Body copy = b->body;
      copy.methods[i].body.reset();
      out.push_back(tbody(copy));
      std::vector<Expr> sub;
      expr_variants(*m.body, sub);
      for (auto& s : sub) {
        Body c2 = b->body;
        c2.methods[i].body = s;
        out.push_back(tbody(c2));
      }
    }
  } else if (const auto* p = std::get_if<texpr::Plus>(&v)) {
    out.push_back(p->lhs);
    out.push_back(p->rhs);
    std::vector<TraitExpr> sub;
    texpr_variants(prog, p->lhs, sub);
    for (auto& s : sub) out.push_back(tplus(s, p->rhs));
    sub.clear();
    texpr_variants(prog, p->rhs, sub);
    for (auto& s : sub) out.push_back(tplus(p->lhs, s));
  } else if (const auto* a = std::get_if<texpr::MakeAbstract>(&v)) {
    out.push_back(a->inner);
    std::vector<TraitExpr> sub;
    texpr_variants(prog, a->inner, sub);
    for (auto& s : sub) out.push_back(tabstract(s, a->method));
  }
}

TraitExpr inline_ref(const TraitExpr& e, const std::string& name, const TraitExpr& with) {
  const auto& v = e.node().v;
  if (const auto* r = std::get_if<texpr::Ref>(&v)) return r->name == name ? with : e;
  if (const auto* p = std::get_if<texpr::Plus>(&v)) {
    return tplus(inline_ref(p->lhs, name, with), inline_ref(p->rhs, name, with));
  }
  if (const auto* a = std::get_if<texpr::MakeAbstract>(&v)) return tabstract(inline_ref(a->inner, name, with), a->method);
  return e;
}

}  // namespace

std::vector<Program> shrink_candidates(const Program& p) {
  std::vector<Program> out;
  std::size_t n = p.definitions.size();
  for (std::size_t i = 0; n > 1 && i < n; ++i) {
    Program q = p;
    q.definitions.erase(q.definitions.begin() + static_cast<long>(i));
    out.push_back(q);
  }
  // Drop definition i, pointing its users at j instead (or at its own
  // expression when that is itself a composition).
  for (std::size_t i = 0; n > 1 && i < n; ++i) {
    const Definition& d = p.definitions[i];
    std::vector<TraitExpr> replacements;
    if (!std::holds_alternative<texpr::BodyLit>(d.expr.node().v)) replacements.push_back(d.expr);
    for (std::size_t j = 0; j < n; ++j) {
      if (j != i) replacements.push_back(tref(p.definitions[j].name));
    }
    for (const auto& with : replacements) {
      Program q = p;
      q.definitions.erase(q.definitions.begin() + static_cast<long>(i));
      bool used = false;
      for (auto& other : q.definitions) {
        TraitExpr e = inline_ref(other.expr, d.name, with);
        used = used || !(e == other.expr);
        other.expr = e;
      }
      if (used) out.push_back(q);
    }
  }
  if (p.main) {
    Program q = p;
    q.main.reset();
    out.push_back(q);
    std::vector<Expr> sub;
    expr_variants(*p.main, sub);
    for (auto& s : sub) {
      Program r = p;
      r.main = s;
      out.push_back(r);
    }
  }
  for (std::size_t i = 0; i < p.definitions.size(); ++i) {
    std::vector<TraitExpr> sub;
    texpr_variants(p, p.definitions[i].expr, sub);
    for (auto& s : sub) {
      Program q = p;
      q.definitions[i].expr = s;
      out.push_back(q);
    }
  }
  return out;
}

Program shrink(const Program& p, const std::function<bool(const Program&)>& passes) {
  if (passes(p)) throw std::invalid_argument("shrink: the predicate does not fail on the input");
  Program cur = p;
  bool progress = true;
  while (progress) {
    progress = false;
    for (auto& cand : shrink_candidates(cur)) {
      if (cand == cur) continue;
      if (!passes(cand)) {
        cur = std::move(cand);
        progress = true;
        break;
      }
    }
  }
  return cur;
}

// ---- harnesses -----------------------------------------------------------------

namespace {

bool all_ok(const std::vector<MethodCheck>& checks) {
  return std::all_of(checks.begin(), checks.end(), [](const MethodCheck& c) { return c.ok(); });
}

std::string first_failure(const std::vector<MethodCheck>& checks) {
  for (const auto& c : checks) {
    if (!c.ok()) return c.method + ": " + (c.type_error ? *c.type_error : to_string(c.result.kind));
  }
  return {};
}

GenConfig with_seed(const GenConfig& base, std::uint64_t seed) {
  GenConfig cfg = base;
  cfg.seed = seed;
  return cfg;
}

// The generated methods themselves must verify.
std::optional<std::string> generator_fault(const FlattenResult& flat) {
  for (const auto& d : flat.definitions) {
    for (const auto& b : d.bodies) {
      if (!all_ok(b.checks)) return "generated " + d.name + "." + first_failure(b.checks) + " does not verify";
    }
  }
  return std::nullopt;
}

}  // namespace

HarnessSummary flatten_harness(std::uint64_t first_seed, std::uint64_t last_seed, const GenConfig& base, Backend& backend) {
  HarnessSummary out{"flatten", 0, 0, {}};
  auto recheck_holds = [&backend](const Program& p) {
    if (!check_well_formed(p).empty()) return true;
    FlattenResult flat = flatten_program(p, backend);
    for (const auto& cb : recheck_flattened(flat.table, backend)) {
      if (!all_ok(cb.checks)) return false;
    }
    return true;
  };
  for (std::uint64_t seed = first_seed; seed <= last_seed; ++seed) {
    Program p = gen_program(with_seed(base, seed));
    ++out.cases;
    FlattenResult flat = flatten_program(p, backend);
    if (auto fault = generator_fault(flat)) {
      out.failures.push_back({seed, *fault, pretty_print(p)});
      continue;
    }
    out.checked += static_cast<long>(flat.table.size());
    for (const auto& cb : recheck_flattened(flat.table, backend)) {
      if (all_ok(cb.checks)) continue;
      Program small = shrink(p, recheck_holds);
      out.failures.push_back({seed, cb.definition + "." + first_failure(cb.checks), pretty_print(small)});
      break;
    }
  }
  return out;
}

namespace {

struct VerifiedBodies {
  Program program;
  FlattenResult flat;
  std::vector<std::pair<std::string, Body>> bodies;  // base traits that verified
};

VerifiedBodies verified_bodies(const GenConfig& cfg, Backend& backend) {
  VerifiedBodies v{gen_program(cfg), {}, {}};
  v.flat = flatten_program(v.program, backend);
  for (const auto& d : v.flat.definitions) {
    if (d.name == kCell || d.bodies.size() != 1 || !d.flattened) continue;
    if (all_ok(d.bodies[0].checks)) v.bodies.emplace_back(d.name, v.flat.table.at(d.name).body);
  }
  return v;
}

}  // namespace

HarnessSummary compose_harness(std::uint64_t first_seed, std::uint64_t last_seed, const GenConfig& base, Backend& backend) {
  HarnessSummary out{"compose", 0, 0, {}};
  for (std::uint64_t seed = first_seed; seed <= last_seed; ++seed) {
    VerifiedBodies v = verified_bodies(with_seed(base, seed), backend);
    for (std::size_t i = 0; i < v.bodies.size(); ++i) {
      for (std::size_t j = 0; j < v.bodies.size(); ++j) {
        if (i == j) continue;
        ++out.cases;
        ImplicationOracle oracle(v.flat.table, "Pair", backend);
        Body composite;
        try {
          composite = body_plus(v.bodies[i].second, v.bodies[j].second, oracle);
        } catch (const CompositionFailure&) {
          continue;
        }
        ++out.checked;
        auto checks = check_body(v.flat.table, "Pair", composite, backend);
        if (!all_ok(checks)) {
          Program repro = v.program;
          repro.definitions.push_back(
              Definition{"Pair", DefKind::Trait, tplus(tref(v.bodies[i].first), tref(v.bodies[j].first)), 0});
          out.failures.push_back({seed, v.bodies[i].first + " + " + v.bodies[j].first + ": " + first_failure(checks),
                                  pretty_print(repro)});
        }
      }
    }
  }
  return out;
}

HarnessSummary abstract_harness(std::uint64_t first_seed, std::uint64_t last_seed, const GenConfig& base, Backend& backend) {
  HarnessSummary out{"abstract", 0, 0, {}};
  for (std::uint64_t seed = first_seed; seed <= last_seed; ++seed) {
    VerifiedBodies v = verified_bodies(with_seed(base, seed), backend);
    for (const auto& [name, body] : v.bodies) {
      ++out.cases;
      for (const auto& m : body.methods) {
        ++out.checked;
        Body b = make_abstract(body, m.name());
        auto checks = check_body(v.flat.table, name, b, backend);
        if (!all_ok(checks)) {
          Program repro = v.program;
          repro.definitions.push_back(Definition{"Abs", DefKind::Trait, tabstract(tref(name), m.name()), 0});
          out.failures.push_back({seed, name + "[makeAbstract " + m.name() + "]: " + first_failure(checks),
                                  pretty_print(repro)});
        }
      }
    }
  }
  return out;
}

namespace {

// Composes the stages left to right; the index of the first stage whose
// composition fails, or the stage count.
std::size_t composing_prefix(const RefinementChain& chain, Backend& backend) {
  Program p;
  p.definitions.push_back(chain.program.definitions[0]);
  for (const auto& d : chain.program.definitions) {
    if (std::find(chain.stages.begin(), chain.stages.end(), d.name) != chain.stages.end()) p.definitions.push_back(d);
  }
  FlattenResult flat = flatten_program(p, backend);
  Body acc = flat.table.at(chain.stages[0]).body;
  for (std::size_t i = 1; i < chain.stages.size(); ++i) {
    ImplicationOracle oracle(flat.table, "Prefix" + std::to_string(i), backend);
    try {
      acc = body_plus(acc, flat.table.at(chain.stages[i]).body, oracle);
    } catch (const CompositionFailure&) {
      return i;
    }
  }
  return chain.stages.size();
}

bool class_verifies(const RefinementChain& chain, Backend& backend) {
  FlattenResult flat = flatten_program(chain.program, backend);
  for (const auto& d : flat.definitions) {
    if (!d.flattened || !d.errors.empty()) return false;
    for (const auto& b : d.bodies) {
      if (!all_ok(b.checks)) return false;
    }
  }
  BuiltinBackend recheck_backend;
  auto checks = check_body(flat.table, chain.cls, flat.table.at(chain.cls).body, recheck_backend);
  return all_ok(checks);
}

}  // namespace

HarnessSummary chain_harness(std::uint64_t first_seed, std::uint64_t last_seed, const GenConfig& base, Backend& backend) {
  HarnessSummary out{"chain", 0, 0, {}};
  for (std::uint64_t seed = first_seed; seed <= last_seed; ++seed) {
    RefinementChain chain = gen_refinement_chain(with_seed(base, seed));
    for (const RefinementChain& c : {chain, weaken_first_stage(chain)}) {
      ++out.cases;
      bool stages = composing_prefix(c, backend) == c.stages.size();
      bool verifies = class_verifies(c, backend);
      if (stages) ++out.checked;
      if (stages != verifies) {
        out.failures.push_back({seed,
                                std::string("stages ") + (stages ? "compose" : "fail") + " but the class " +
                                    (verifies ? "verifies" : "does not verify"),
                                pretty_print(c.program)});
      }
    }
  }
  return out;
}

}  // namespace tcbc::testkit
