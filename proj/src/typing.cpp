#include "traitcbc/typing.hpp"

#include <algorithm>
#include <deque>
#include <set>
#include <sstream>

#include "traitcbc/printer.hpp"

namespace tcbc {

const Body* Scope::body_of(const std::string& cls) const {
  if (self && cls == owner) return self;
  if (!table) return nullptr;
  auto it = table->find(cls);
  return it == table->end() ? nullptr : &it->second.body;
}

const MethodHeader* Scope::find(const std::string& cls, const std::string& method) const {
  const Body* b = body_of(cls);
  if (!b) return nullptr;
  const Method* m = b->find(method);
  return m ? &m->header : nullptr;
}

bool Scope::is_class(const std::string& name) const {
  return is_builtin_class(name) || name == owner || (table && table->count(name));
}

SignatureTable Scope::signatures() const {
  SignatureTable out;
  auto add = [&](const std::string& cls, const Body& b) {
    for (const auto& m : b.methods) {
      MethodSig sig;
      for (const auto& p : m.header.params) sig.params.push_back(p.type);
      sig.result = m.header.return_type;
      out[{cls, m.name()}] = sig;
    }
  };
  if (table) {
    for (const auto& [name, info] : *table) {
      if (!(self && name == owner)) add(name, info.body);
    }
  }
  if (self) add(owner, *self);
  return out;
}

namespace {

bool scope_instance_of(const Scope& scope, const std::string& sub, const std::string& sup) {
  std::set<std::string> seen{sub};
  std::deque<std::string> todo{sub};
  while (!todo.empty()) {
    std::string c = todo.front();
    todo.pop_front();
    if (c == sup) return true;
    const Body* b = scope.body_of(c);
    if (!b) continue;
    for (const auto& i : b->interfaces) {
      if (seen.insert(i).second) todo.push_back(i);
    }
  }
  return false;
}

Formula rename_result(const Formula& f, const std::string& x) { return substitute(f, {{kResult, var(x)}}); }

Formula conj_nontrivial(const std::vector<Formula>& parts) {
  std::vector<Formula> keep;
  for (const auto& p : parts) {
    for (auto& c : conjuncts(p)) keep.push_back(c);
  }
  return conj_all(keep);
}

std::string join(const Scope& scope, const std::string& a, const std::string& b) {
  if (scope_instance_of(scope, a, b)) return b;
  if (scope_instance_of(scope, b, a)) return a;
  throw TypeError("branches have incompatible types " + a + " and " + b);
}

}  // namespace

bool instance_of(const ClassTable& table, const std::string& sub, const std::string& sup) {
  Scope scope;
  scope.table = &table;
  return scope_instance_of(scope, sub, sup);
}

std::string FreshVars::next(const std::string& cls) {
  std::string name = "_f" + std::to_string(issued_.size());
  issued_.emplace_back(name, cls);
  return name;
}

TypedResult type_expr(const Scope& scope, const TypeEnv& env, const Expr& e, FreshVars& fresh) {
  const auto& v = e.node().v;
  if (const auto* x = std::get_if<expr::Var>(&v)) {
    for (const auto& [name, cls] : env) {
      if (name == x->name) return {cls, conj(has_type(var(kResult), cls), eq(var(kResult), var(name))), top()};
    }
    throw TypeError("unknown variable " + x->name);
  }
  if (const auto* k = std::get_if<expr::IntLit>(&v)) {
    return {kNum, conj(has_type(var(kResult), kNum), eq(var(kResult), int_const(k->value))), top()};
  }
  if (const auto* c = std::get_if<expr::Call>(&v)) {
    std::vector<TypedResult> parts;
    parts.push_back(type_expr(scope, env, c->receiver, fresh));
    for (const auto& a : c->args) parts.push_back(type_expr(scope, env, a, fresh));
    const std::string& cls = parts[0].type;
    const MethodHeader* h = scope.find(cls, c->method);
    if (!h) throw TypeError("class " + cls + " has no method " + c->method);
    if (h->params.size() != c->args.size()) {
      throw TypeError("method " + cls + "." + c->method + " expects " + std::to_string(h->params.size()) +
                      " arguments, got " + std::to_string(c->args.size()));
    }
    for (std::size_t i = 0; i < h->params.size(); ++i) {
      if (!scope_instance_of(scope, parts[i + 1].type, h->params[i].type)) {
        throw TypeError("argument " + std::to_string(i + 1) + " of " + cls + "." + c->method + " has type " +
                        parts[i + 1].type + ", expected " + h->params[i].type);
      }
    }
    std::vector<std::string> xs;
    for (const auto& p : parts) xs.push_back(fresh.next(p.type));
    Substitution s{{kThis, var(xs[0])}};
    for (std::size_t i = 0; i < h->params.size(); ++i) s.insert_or_assign(h->params[i].name, var(xs[i + 1]));
    Formula pre = substitute(h->spec.pre, s);
    Formula post = substitute(h->spec.post, s);
    std::vector<Formula> know{has_type(var(kResult), h->return_type)};
    std::vector<Formula> obl;
    for (std::size_t i = 0; i < parts.size(); ++i) {
      know.push_back(rename_result(parts[i].knowledge, xs[i]));
      obl.push_back(rename_result(parts[i].obligation, xs[i]));
    }
    know.push_back(imp(pre, post));
    obl.push_back(pre);
    return {h->return_type, conj_all(know), conj_nontrivial(obl)};
  }
  if (const auto* n = std::get_if<expr::New>(&v)) {
    const auto* info = scope.table ? (scope.table->count(n->cls) ? &scope.table->at(n->cls) : nullptr) : nullptr;
    if (!info) throw TypeError("unknown class " + n->cls);
    if (info->kind != DefKind::Class) throw TypeError(n->cls + " is a trait and cannot be instantiated");
    if (info->body.is_interface) throw TypeError(n->cls + " is an interface and cannot be instantiated");
    for (const Method* m : abstract_methods(info->body)) {
      if (!m->header.params.empty()) {
        throw TypeError(n->cls + " has abstract method " + m->name() + " that is not a getter");
      }
    }
    auto gs = getters(info->body);
    if (gs.size() != n->args.size()) {
      throw TypeError("new " + n->cls + " expects " + std::to_string(gs.size()) + " arguments, got " +
                      std::to_string(n->args.size()));
    }
    std::vector<TypedResult> parts;
    for (const auto& a : n->args) parts.push_back(type_expr(scope, env, a, fresh));
    for (std::size_t i = 0; i < gs.size(); ++i) {
      if (!scope_instance_of(scope, parts[i].type, gs[i]->header.return_type)) {
        throw TypeError("argument " + std::to_string(i + 1) + " of new " + n->cls + " has type " + parts[i].type +
                        ", expected " + gs[i]->header.return_type);
      }
    }
    std::vector<std::string> xs;
    for (const auto& p : parts) xs.push_back(fresh.next(p.type));
    std::vector<Formula> know{has_type(var(kResult), n->cls)};
    std::vector<Formula> obl;
    for (std::size_t i = 0; i < gs.size(); ++i) {
      Formula pre = substitute(gs[i]->header.spec.pre, {{kThis, var(kResult)}});
      know.push_back(rename_result(parts[i].knowledge, xs[i]));
      know.push_back(imp(pre, eq(app(var(kResult), gs[i]->name()), var(xs[i]))));
      obl.push_back(rename_result(parts[i].obligation, xs[i]));
      obl.push_back(pre);
    }
    return {n->cls, conj_all(know), conj_nontrivial(obl)};
  }
  const auto& i = std::get<expr::If>(v);
  for (const auto& fv : free_vars(i.guard)) {
    bool bound = std::any_of(env.begin(), env.end(), [&](const auto& p) { return p.first == fv; });
    if (!bound) throw TypeError("unknown variable " + fv + " in condition");
  }
  TypedResult t = type_expr(scope, env, i.then_branch, fresh);
  TypedResult f = type_expr(scope, env, i.else_branch, fresh);
  std::string cls = join(scope, t.type, f.type);
  std::string x1 = fresh.next(t.type);
  std::string x2 = fresh.next(f.type);
  const Formula& g = i.guard;
  Formula know = conj_all({has_type(var(kResult), cls), imp(g, rename_result(t.knowledge, x1)),
                           imp(neg(g), rename_result(f.knowledge, x2)), imp(g, eq(var(kResult), var(x1))),
                           imp(neg(g), eq(var(kResult), var(x2)))});
  std::vector<Formula> obl;
  Formula o1 = rename_result(t.obligation, x1);
  Formula o2 = rename_result(f.obligation, x2);
  if (!is_true(o1)) obl.push_back(imp(g, o1));
  if (!is_true(o2)) obl.push_back(imp(neg(g), o2));
  return {cls, know, conj_all(obl)};
}

namespace {

std::optional<std::string> sort_of(const Scope& scope, const std::map<std::string, std::string>& sorts,
                                   const Term& t) {
  const auto& v = t.node().v;
  if (const auto* x = std::get_if<term::Var>(&v)) {
    auto it = sorts.find(x->name);
    if (it == sorts.end()) return std::nullopt;
    return it->second;
  }
  if (std::holds_alternative<term::Int>(v) || std::holds_alternative<term::Arith>(v)) return kNum;
  if (const auto* n = std::get_if<term::New>(&v)) return n->cls;
  const auto& a = std::get<term::App>(v);
  auto rc = sort_of(scope, sorts, a.receiver);
  if (!rc) return std::nullopt;
  const MethodHeader* h = scope.find(*rc, a.method);
  if (!h) return std::nullopt;
  return h->return_type;
}

bool trivial(const Formula& f) {
  if (is_true(f)) return true;
  if (const auto* c = std::get_if<formula::Cmp>(&f.node().v)) {
    return c->lhs == c->rhs && (c->rel == Rel::Eq || c->rel == Rel::Le || c->rel == Rel::Ge);
  }
  return false;
}

}  // namespace

std::vector<Formula> contract_axioms(const Scope& scope, const std::map<std::string, std::string>& sorts,
                                     const std::vector<Formula>& formulas, const std::optional<Term>& exclude) {
  std::vector<Formula> out;
  std::set<std::string> seen_terms;
  std::set<std::string> seen_axioms;
  std::vector<Formula> frontier = formulas;
  for (int round = 0; round < 2 && !frontier.empty(); ++round) {
    std::vector<Term> apps;
    for (const auto& f : frontier) collect_apps(f, apps);
    std::vector<Formula> added;
    for (const auto& t : apps) {
      if (exclude && t == *exclude) continue;
      if (!seen_terms.insert(to_string(t)).second) continue;
      const auto& a = std::get<term::App>(t.node().v);
      bool ground = true;
      for (const auto& fv : free_vars(t)) {
        if (!sorts.count(fv)) ground = false;
      }
      if (!ground) continue;
      auto rc = sort_of(scope, sorts, a.receiver);
      if (!rc) continue;
      const MethodHeader* h = scope.find(*rc, a.method);
      if (!h || h->params.size() != a.args.size()) continue;
      Substitution s{{kThis, a.receiver}};
      for (std::size_t i = 0; i < a.args.size(); ++i) s.insert_or_assign(h->params[i].name, a.args[i]);
      Formula pre = substitute(h->spec.pre, s);
      s.insert_or_assign(kResult, t);
      std::vector<Formula> post;
      for (auto& c : conjuncts(substitute(h->spec.post, s))) {
        if (!trivial(c)) post.push_back(c);
      }
      if (post.empty()) continue;
      Formula ax = is_true(pre) ? conj_all(post) : imp(pre, conj_all(post));
      if (!seen_axioms.insert(to_string(ax)).second) continue;
      out.push_back(ax);
      added.push_back(ax);
    }
    frontier = std::move(added);
  }
  return out;
}

namespace {

void check_header(const Scope& scope, const Method& m) {
  if (!scope.is_class(m.header.return_type)) throw TypeError("unknown class " + m.header.return_type);
  std::set<std::string> allowed{kThis};
  for (const auto& p : m.header.params) {
    if (!scope.is_class(p.type)) throw TypeError("unknown class " + p.type);
    allowed.insert(p.name);
  }
  for (const auto& fv : free_vars(m.header.spec.pre)) {
    if (!allowed.count(fv)) throw TypeError("precondition mentions unknown variable " + fv);
  }
  allowed.insert(kResult);
  for (const auto& fv : free_vars(m.header.spec.post)) {
    if (!allowed.count(fv)) throw TypeError("postcondition mentions unknown variable " + fv);
  }
}

}  // namespace

Obligation method_obligation(const Scope& scope, const Method& m) {
  check_header(scope, m);
  if (m.is_abstract()) throw TypeError("method " + m.name() + " is abstract");
  TypeEnv env{{kThis, scope.owner}};
  for (const auto& p : m.header.params) env.emplace_back(p.name, p.type);
  FreshVars fresh;
  TypedResult r = type_expr(scope, env, *m.body, fresh);
  if (!scope_instance_of(scope, r.type, m.header.return_type)) {
    throw TypeError("body of " + m.name() + " has type " + r.type + ", expected " + m.header.return_type);
  }
  Obligation ob;
  ob.label = scope.owner + "." + m.name();
  ob.sorts = env;
  ob.sorts.emplace_back(kResult, m.header.return_type);
  for (const auto& f : fresh.issued()) ob.sorts.push_back(f);
  for (const auto& [x, cls] : env) ob.hypotheses.push_back(has_type(var(x), cls));
  for (auto& c : conjuncts(m.header.spec.pre)) ob.hypotheses.push_back(c);
  for (auto& c : conjuncts(r.knowledge)) ob.hypotheses.push_back(c);
  ob.goal = conj_nontrivial({r.obligation, m.header.spec.post});
  std::map<std::string, std::string> sorts(ob.sorts.begin(), ob.sorts.end());
  std::vector<Formula> all = ob.hypotheses;
  all.push_back(ob.goal);
  std::vector<Term> self_args;
  for (const auto& p : m.header.params) self_args.push_back(var(p.name));
  ob.background = contract_axioms(scope, sorts, all, app(var(kThis), m.name(), self_args));
  ob.signatures = scope.signatures();
  return ob;
}

MethodCheck check_method(const Scope& scope, const Method& m, Backend& backend) {
  MethodCheck out;
  out.method = m.name();
  out.is_abstract = m.is_abstract();
  try {
    if (m.is_abstract()) {
      check_header(scope, m);
      out.result = VerificationResult::valid();
      return out;
    }
    Obligation ob = method_obligation(scope, m);
    out.result = backend.discharge(ob);
  } catch (const TypeError& e) {
    out.type_error = e.what();
    out.result = VerificationResult::unknown("type error");
  }
  return out;
}

std::vector<MethodCheck> check_body(const ClassTable& table, const std::string& owner, const Body& body,
                                    Backend& backend) {
  Scope scope{&table, owner, &body};
  std::vector<MethodCheck> out;
  for (const auto& m : body.methods) out.push_back(check_method(scope, m, backend));
  return out;
}

std::string render_vc(const Obligation& ob) {
  std::ostringstream os;
  os << "// " << ob.label << "\nsorts:\n";
  for (const auto& [x, cls] : ob.sorts) os << "  " << x << " : " << cls << "\n";
  os << "assume:\n";
  for (const auto& h : ob.hypotheses) os << "  " << to_string(h) << "\n";
  if (!ob.background.empty()) {
    os << "background:\n";
    for (const auto& b : ob.background) os << "  " << to_string(b) << "\n";
  }
  os << "prove:\n";
  for (const auto& g : conjuncts(ob.goal)) os << "  " << to_string(g) << "\n";
  if (is_true(ob.goal)) os << "  true\n";
  return os.str();
}

}  // namespace tcbc
