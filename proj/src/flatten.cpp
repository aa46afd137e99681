#include "traitcbc/flatten.hpp"

#include <algorithm>
#include <map>
#include <set>

namespace tcbc {

const char* to_string(CompositionKind kind) {
  switch (kind) {
    case CompositionKind::ConflictingConcrete: return "ConflictingConcrete";
    case CompositionKind::IncompatibleSpecs: return "IncompatibleSpecs";
    case CompositionKind::SignatureMismatch: return "SignatureMismatch";
    case CompositionKind::NotInstantiable: return "NotInstantiable";
    case CompositionKind::MissingMethod: return "MissingMethod";
    case CompositionKind::UnknownInterface: return "UnknownInterface";
    case CompositionKind::CyclicInterfaces: return "CyclicInterfaces";
  }
  return "?";
}

std::string CompositionError::message() const {
  std::string out;
  if (!definition.empty()) out += definition + ": ";
  out += to_string(kind);
  if (!method.empty()) out += " " + method;
  if (!detail.empty()) out += ": " + detail;
  return out;
}

namespace {
std::string join_messages(const std::vector<CompositionError>& errors) {
  std::string out;
  for (const auto& e : errors) out += (out.empty() ? "" : "; ") + e.message();
  return out;
}
}  // namespace

CompositionFailure::CompositionFailure(std::vector<CompositionError> errors)
    : std::runtime_error(join_messages(errors)), errors_(std::move(errors)) {}

VerificationResult ImplicationOracle::implies(const Formula& premise, const Formula& conclusion,
                                              const MethodHeader& h, const Body* premise_body) {
  if (alpha_equal(premise, conclusion) || is_false(premise) || is_true(conclusion)) {
    ++fast_path_;
    return VerificationResult::valid();
  }
  Scope scope{table_, owner_, premise_body};
  Obligation ob;
  ob.label = owner_ + "." + h.name + ".compose";
  ob.sorts.emplace_back(kThis, owner_);
  for (const auto& p : h.params) ob.sorts.emplace_back(p.name, p.type);
  ob.sorts.emplace_back(kResult, h.return_type);
  for (const auto& [x, cls] : ob.sorts) ob.hypotheses.push_back(has_type(var(x), cls));
  for (auto& c : conjuncts(premise)) ob.hypotheses.push_back(c);
  ob.goal = conclusion;
  std::map<std::string, std::string> sorts(ob.sorts.begin(), ob.sorts.end());
  std::vector<Formula> all = ob.hypotheses;
  all.push_back(conclusion);
  ob.background = contract_axioms(scope, sorts, all);
  ob.signatures = scope.signatures();
  ++prover_calls_;
  return backend_->discharge(ob);
}

std::vector<MethodHeader> all_meth(const std::string& m, const std::vector<Body>& bodies) {
  std::vector<MethodHeader> out;
  for (const auto& b : bodies) {
    if (const Method* x = b.find(m)) out.push_back(x->header);
  }
  return out;
}

Spec rename_params(const MethodHeader& from, const MethodHeader& to) {
  Substitution s;
  for (std::size_t i = 0; i < from.params.size() && i < to.params.size(); ++i) {
    if (from.params[i].name != to.params[i].name) s.insert_or_assign(from.params[i].name, var(to.params[i].name));
  }
  if (s.empty()) return from.spec;
  return {substitute(from.spec.pre, s), substitute(from.spec.post, s)};
}

namespace {

std::optional<std::string> signature_mismatch(const MethodHeader& a, const MethodHeader& b) {
  if (a.return_type != b.return_type) return "return types " + a.return_type + " and " + b.return_type;
  if (a.params.size() != b.params.size()) {
    return "arities " + std::to_string(a.params.size()) + " and " + std::to_string(b.params.size());
  }
  for (std::size_t i = 0; i < a.params.size(); ++i) {
    if (a.params[i].type != b.params[i].type) {
      return "parameter " + std::to_string(i + 1) + " types " + a.params[i].type + " and " + b.params[i].type;
    }
  }
  return std::nullopt;
}

std::string verdict_suffix(const VerificationResult& r) {
  if (r.kind == VerificationResult::Kind::Unknown) return " (unknown: " + r.detail + ")";
  return "";
}

// `concrete` may replace `abstract`.
void liskov(const Method& concrete, const Body* concrete_body, const Method& abstract, const Body* abstract_body,
            ImplicationOracle& oracle) {
  Spec a = rename_params(abstract.header, concrete.header);
  const Spec& c = concrete.header.spec;
  std::vector<std::string> failed;
  auto pre = oracle.implies(a.pre, c.pre, concrete.header, abstract_body);
  if (!pre.is_valid()) {
    failed.push_back("precondition of the abstract method does not imply the concrete precondition" +
                     verdict_suffix(pre));
  }
  auto post = oracle.implies(c.post, a.post, concrete.header, concrete_body);
  if (!post.is_valid()) {
    failed.push_back("concrete postcondition does not imply the abstract postcondition" + verdict_suffix(post));
  }
  if (failed.empty()) return;
  std::string detail;
  for (const auto& f : failed) detail += (detail.empty() ? "" : "; ") + f;
  throw CompositionFailure({{CompositionKind::IncompatibleSpecs, concrete.name(), detail, {}, {}}});
}

}  // namespace

Method method_plus(const Method& m1, const Method& m2, ImplicationOracle& oracle, const Body* b1, const Body* b2) {
  if (auto mismatch = signature_mismatch(m1.header, m2.header)) {
    throw CompositionFailure({{CompositionKind::SignatureMismatch, m1.name(), *mismatch, {}, {}}});
  }
  if (!m1.is_abstract() && !m2.is_abstract()) {
    throw CompositionFailure({{CompositionKind::ConflictingConcrete, m1.name(), "both operands implement it", {}, {}}});
  }
  if (!m1.is_abstract()) {
    liskov(m1, b1, m2, b2, oracle);
    return m1;
  }
  if (!m2.is_abstract()) {
    liskov(m2, b2, m1, b1, oracle);
    return m2;
  }
  const Spec& s = m1.header.spec;
  Spec s2 = rename_params(m2.header, m1.header);
  if (oracle.implies(s2.pre, s.pre, m1.header, b2).is_valid() &&
      oracle.implies(s.post, s2.post, m1.header, b1).is_valid()) {
    return m1;
  }
  if (oracle.implies(s.pre, s2.pre, m1.header, b1).is_valid() &&
      oracle.implies(s2.post, s.post, m1.header, b2).is_valid()) {
    Method out = m1;
    out.header.spec = s2;
    return out;
  }
  throw CompositionFailure(
      {{CompositionKind::IncompatibleSpecs, m1.name(), "neither specification refines the other", {}, {}}});
}

std::vector<Method> methods_plus(const std::vector<Method>& ms1, const std::vector<Method>& ms2,
                                 ImplicationOracle& oracle, const Body* b1, const Body* b2) {
  std::vector<Method> out;
  std::vector<CompositionError> errors;
  auto find = [](const std::vector<Method>& ms, const std::string& name) -> const Method* {
    for (const auto& m : ms) {
      if (m.name() == name) return &m;
    }
    return nullptr;
  };
  for (const auto& m : ms1) {
    const Method* other = find(ms2, m.name());
    if (!other) {
      out.push_back(m);
      continue;
    }
    try {
      out.push_back(method_plus(m, *other, oracle, b1, b2));
    } catch (const CompositionFailure& f) {
      errors.insert(errors.end(), f.errors().begin(), f.errors().end());
    }
  }
  for (const auto& m : ms2) {
    if (!find(ms1, m.name())) out.push_back(m);
  }
  if (!errors.empty()) throw CompositionFailure(std::move(errors));
  return out;
}

Body body_plus(const Body& b1, const Body& b2, ImplicationOracle& oracle) {
  Body out;
  out.is_interface = b1.is_interface && b2.is_interface;
  out.interfaces = b1.interfaces;
  for (const auto& i : b2.interfaces) {
    if (std::find(out.interfaces.begin(), out.interfaces.end(), i) == out.interfaces.end()) {
      out.interfaces.push_back(i);
    }
  }
  out.methods = methods_plus(b1.methods, b2.methods, oracle, &b1, &b2);
  return out;
}

Body make_abstract(const Body& b, const std::string& m) {
  Body out = b;
  for (auto& x : out.methods) {
    if (x.name() == m) {
      x.body.reset();
      return out;
    }
  }
  throw CompositionFailure({{CompositionKind::MissingMethod, m, "no such method to make abstract", {}, {}}});
}

namespace {

Body import_interfaces(const ClassTable& table, const Body& body, ImplicationOracle& oracle) {
  std::vector<CompositionError> errors;
  std::vector<const Body*> ifaces;
  for (const auto& name : body.interfaces) {
    auto it = table.find(name);
    if (it == table.end()) {
      errors.push_back({CompositionKind::UnknownInterface, {}, name + " is not defined", {}, {}});
    } else if (!it->second.body.is_interface) {
      errors.push_back({CompositionKind::UnknownInterface, {}, name + " is not an interface", {}, {}});
    } else {
      ifaces.push_back(&it->second.body);
    }
  }
  if (!errors.empty()) throw CompositionFailure(std::move(errors));
  Body out = body;
  std::set<std::string> seen;
  for (const auto& m : body.methods) seen.insert(m.name());
  for (const Body* iface : ifaces) {
    for (const auto& m : iface->methods) {
      if (!seen.insert(m.name()).second) continue;
      std::optional<Method> acc;
      const Body* acc_body = nullptr;
      for (const Body* other : ifaces) {
        const Method* x = other->find(m.name());
        if (!x) continue;
        Method abstract{x->header, std::nullopt};
        if (!acc) {
          acc = abstract;
          acc_body = other;
          continue;
        }
        try {
          acc = method_plus(*acc, abstract, oracle, acc_body, other);
        } catch (const CompositionFailure& f) {
          errors.insert(errors.end(), f.errors().begin(), f.errors().end());
          break;
        }
      }
      if (acc) out.methods.push_back(*acc);
    }
  }
  for (const auto& m : body.methods) {
    for (const Body* iface : ifaces) {
      const Method* x = iface->find(m.name());
      if (!x) continue;
      if (auto mismatch = signature_mismatch(m.header, x->header)) {
        errors.push_back({CompositionKind::SignatureMismatch, m.name(), *mismatch, {}, {}});
        continue;
      }
      try {
        liskov(m, &out, Method{x->header, std::nullopt}, iface, oracle);
      } catch (const CompositionFailure& f) {
        errors.insert(errors.end(), f.errors().begin(), f.errors().end());
      }
    }
  }
  if (!errors.empty()) throw CompositionFailure(std::move(errors));
  return out;
}

}  // namespace

Body flatten_expr(const ClassTable& table, const std::string& owner, const TraitExpr& e, ImplicationOracle& oracle,
                  std::vector<CheckedBody>* literals) {
  const auto& v = e.node().v;
  if (const auto* b = std::get_if<texpr::BodyLit>(&v)) {
    Body out = import_interfaces(table, b->body, oracle);
    if (literals) literals->push_back({owner, out, {}});
    return out;
  }
  if (const auto* r = std::get_if<texpr::Ref>(&v)) {
    auto it = table.find(r->name);
    if (it == table.end()) throw std::logic_error("flatten_expr: " + r->name + " is not flattened yet");
    return it->second.body;
  }
  if (const auto* p = std::get_if<texpr::Plus>(&v)) {
    std::vector<CompositionError> errors;
    std::optional<Body> lhs;
    std::optional<Body> rhs;
    try {
      lhs = flatten_expr(table, owner, p->lhs, oracle, literals);
    } catch (const CompositionFailure& f) {
      errors = f.errors();
    }
    try {
      rhs = flatten_expr(table, owner, p->rhs, oracle, literals);
    } catch (const CompositionFailure& f) {
      errors.insert(errors.end(), f.errors().begin(), f.errors().end());
    }
    if (!errors.empty()) throw CompositionFailure(std::move(errors));
    return body_plus(*lhs, *rhs, oracle);
  }
  const auto& a = std::get<texpr::MakeAbstract>(v);
  return make_abstract(flatten_expr(table, owner, a.inner, oracle, literals), a.method);
}

const DefinitionReport* FlattenResult::find(const std::string& name) const {
  for (const auto& d : definitions) {
    if (d.name == name) return &d;
  }
  return nullptr;
}

namespace {

void collect_deps(const TraitExpr& e, std::vector<std::string>& out) {
  const auto& v = e.node().v;
  auto add = [&](const std::string& n) {
    if (std::find(out.begin(), out.end(), n) == out.end()) out.push_back(n);
  };
  if (const auto* b = std::get_if<texpr::BodyLit>(&v)) {
    for (const auto& i : b->body.interfaces) add(i);
  } else if (const auto* r = std::get_if<texpr::Ref>(&v)) {
    add(r->name);
  } else if (const auto* p = std::get_if<texpr::Plus>(&v)) {
    collect_deps(p->lhs, out);
    collect_deps(p->rhs, out);
  } else {
    collect_deps(std::get<texpr::MakeAbstract>(v).inner, out);
  }
}

std::vector<std::string> dependencies(const Program& p, const Definition& d) {
  std::vector<std::string> all;
  collect_deps(d.expr, all);
  std::vector<std::string> out;
  for (const auto& n : all) {
    if (p.find(n) && n != d.name) out.push_back(n);
  }
  return out;
}

}  // namespace

std::vector<std::string> flattening_order(const Program& p) {
  std::vector<std::string> order;
  std::set<std::string> done;
  std::vector<bool> placed(p.definitions.size(), false);
  bool progress = true;
  while (progress) {
    progress = false;
    for (std::size_t i = 0; i < p.definitions.size(); ++i) {
      if (placed[i]) continue;
      auto deps = dependencies(p, p.definitions[i]);
      if (std::all_of(deps.begin(), deps.end(), [&](const std::string& n) { return done.count(n) > 0; })) {
        placed[i] = true;
        done.insert(p.definitions[i].name);
        order.push_back(p.definitions[i].name);
        progress = true;
        break;
      }
    }
  }
  for (std::size_t i = 0; i < p.definitions.size(); ++i) {
    if (!placed[i]) order.push_back(p.definitions[i].name);
  }
  return order;
}

FlattenResult flatten_program(const Program& p, Backend& backend) {
  FlattenResult out;
  std::map<std::string, DefinitionReport> reports;
  std::set<std::string> failed;
  std::set<std::string> done;
  for (const auto& name : flattening_order(p)) {
    const Definition& d = *p.find(name);
    DefinitionReport& rep = reports[name];
    rep.name = name;
    rep.kind = d.kind;
    auto deps = dependencies(p, d);
    for (const auto& dep : deps) {
      if (failed.count(dep)) {
        rep.skipped = dep;
        break;
      }
    }
    if (!rep.skipped.empty()) {
      failed.insert(name);
      continue;
    }
    if (std::any_of(deps.begin(), deps.end(), [&](const std::string& n) { return !done.count(n); })) {
      rep.errors.push_back({CompositionKind::CyclicInterfaces, {}, "implements chain leads back to " + name, name, {}});
      failed.insert(name);
      continue;
    }
    ImplicationOracle oracle(out.table, name, backend);
    try {
      Body body = flatten_expr(out.table, name, d.expr, oracle, &rep.bodies);
      if (d.kind == DefKind::Class && !body.is_interface) {
        std::vector<std::string> bad;
        for (const Method* m : abstract_methods(body)) {
          if (!m->header.params.empty()) bad.push_back(m->name());
        }
        if (!bad.empty()) {
          std::string detail = "abstract methods with parameters:";
          for (const auto& b : bad) detail += " " + b;
          throw CompositionFailure({{CompositionKind::NotInstantiable, {}, detail, {}, bad}});
        }
      }
      out.table[name] = ClassInfo{d.kind, std::move(body)};
      rep.flattened = true;
      done.insert(name);
    } catch (const CompositionFailure& f) {
      for (auto e : f.errors()) {
        e.definition = name;
        rep.errors.push_back(std::move(e));
      }
      failed.insert(name);
    }
    out.fast_path += oracle.fast_path();
    out.composition_prover_calls += oracle.prover_calls();
  }
  for (const auto& d : p.definitions) {
    DefinitionReport& rep = reports[d.name];
    for (auto& lit : rep.bodies) lit.checks = check_body(out.table, lit.definition, lit.body, backend);
    if (rep.flattened && d.kind == DefKind::Class) {
      const Body& body = out.table.at(d.name).body;
      for (auto& nodes : detect_circularity(build_spec_graph(body, d.name))) {
        bool abstract_only = std::all_of(nodes.begin(), nodes.end(), [&](const SpecNode& n) {
          const Method* m = body.find(n.method);
          return m && m->is_abstract();
        });
        rep.cycles.push_back({std::move(nodes), abstract_only});
      }
    }
    out.definitions.push_back(std::move(rep));
  }
  return out;
}

std::vector<CheckedBody> recheck_flattened(const ClassTable& table, Backend& backend) {
  std::vector<CheckedBody> out;
  for (const auto& [name, info] : table) {
    out.push_back({name, info.body, check_body(table, name, info.body, backend)});
  }
  return out;
}

}  // namespace tcbc
