#include "traitcbc/wellformed.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <set>

namespace tcbc {

const char* to_string(WellFormednessKind kind) {
  switch (kind) {
    case WellFormednessKind::DuplicateDefinition: return "DuplicateDefinition";
    case WellFormednessKind::CircularTraitDefinition: return "CircularTraitDefinition";
    case WellFormednessKind::DuplicateInterface: return "DuplicateInterface";
    case WellFormednessKind::DuplicateMethod: return "DuplicateMethod";
    case WellFormednessKind::DuplicateParameter: return "DuplicateParameter";
    case WellFormednessKind::ParameterNamedThis: return "ParameterNamedThis";
    case WellFormednessKind::DanglingReference: return "DanglingReference";
  }
  return "?";
}

std::string WellFormednessError::message() const {
  switch (kind) {
    case WellFormednessKind::DuplicateDefinition:
      return "definition '" + subject + "' is defined more than once";
    case WellFormednessKind::CircularTraitDefinition: {
      std::string names;
      for (const auto& n : cycle) names += (names.empty() ? "" : ", ") + n;
      return "circular trait definition among {" + names + "}";
    }
    case WellFormednessKind::DuplicateInterface:
      return "interface '" + subject + "' listed more than once in " + definition;
    case WellFormednessKind::DuplicateMethod:
      return "method '" + subject + "' declared more than once in " + definition;
    case WellFormednessKind::DuplicateParameter:
      return "duplicate parameter '" + subject + "' in " + definition;
    case WellFormednessKind::ParameterNamedThis:
      return "parameter named 'this' in " + definition + "." + subject;
    case WellFormednessKind::DanglingReference:
      return definition + " refers to undefined '" + subject + "'";
  }
  return {};
}

namespace {

void check_body(const std::string& owner, const Body& b, std::vector<WellFormednessError>& out) {
  std::set<std::string> seen;
  for (const auto& i : b.interfaces) {
    if (!seen.insert(i).second) {
      out.push_back({WellFormednessKind::DuplicateInterface, owner, i, {}});
    }
  }
  std::set<std::string> methods;
  for (const auto& m : b.methods) {
    if (!methods.insert(m.name()).second) {
      out.push_back({WellFormednessKind::DuplicateMethod, owner, m.name(), {}});
    }
    std::set<std::string> params;
    for (const auto& p : m.header.params) {
      if (p.name == kThis) {
        out.push_back({WellFormednessKind::ParameterNamedThis, owner, m.name(), {}});
      } else if (!params.insert(p.name).second) {
        out.push_back({WellFormednessKind::DuplicateParameter, owner, m.name() + "." + p.name, {}});
      }
    }
  }
}

void check_expr(const std::string& owner, const TraitExpr& e,
                std::vector<WellFormednessError>& out) {
  const auto& v = e.node().v;
  if (const auto* b = std::get_if<texpr::BodyLit>(&v)) {
    check_body(owner, b->body, out);
  } else if (const auto* p = std::get_if<texpr::Plus>(&v)) {
    check_expr(owner, p->lhs, out);
    check_expr(owner, p->rhs, out);
  } else if (const auto* a = std::get_if<texpr::MakeAbstract>(&v)) {
    check_expr(owner, a->inner, out);
  }
}

// Strongly connected components of the reference graph (Tarjan). Only
// components with a cycle are returned.
std::vector<std::vector<std::string>> reference_cycles(
    const std::map<std::string, std::vector<std::string>>& edges) {
  std::map<std::string, int> index, low;
  std::set<std::string> on_stack;
  std::vector<std::string> stack;
  std::vector<std::vector<std::string>> out;
  int counter = 0;

  std::function<void(const std::string&)> visit = [&](const std::string& v) {
    index[v] = low[v] = counter++;
    stack.push_back(v);
    on_stack.insert(v);
    for (const auto& w : edges.at(v)) {
      if (!edges.count(w)) continue;
      if (!index.count(w)) {
        visit(w);
        low[v] = std::min(low[v], low[w]);
      } else if (on_stack.count(w)) {
        low[v] = std::min(low[v], index[w]);
      }
    }
    if (low[v] != index[v]) return;
    std::vector<std::string> comp;
    for (;;) {
      std::string w = stack.back();
      stack.pop_back();
      on_stack.erase(w);
      comp.push_back(w);
      if (w == v) break;
    }
    const auto& self = edges.at(v);
    bool cyclic = comp.size() > 1 || std::find(self.begin(), self.end(), v) != self.end();
    if (cyclic) {
      std::sort(comp.begin(), comp.end());
      out.push_back(std::move(comp));
    }
  };
  for (const auto& [name, _] : edges) {
    if (!index.count(name)) visit(name);
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

std::vector<WellFormednessError> check_well_formed(const Program& p) {
  std::vector<WellFormednessError> out;
  std::set<std::string> names;
  std::map<std::string, std::vector<std::string>> edges;
  for (const auto& d : p.definitions) {
    if (!names.insert(d.name).second) {
      out.push_back({WellFormednessKind::DuplicateDefinition, d.name, d.name, {}});
    }
    auto& targets = edges[d.name];
    for (const auto& r : referenced_names(d.expr)) targets.push_back(r);
  }
  for (const auto& d : p.definitions) {
    check_expr(d.name, d.expr, out);
    for (const auto& r : referenced_names(d.expr)) {
      if (!names.count(r)) out.push_back({WellFormednessKind::DanglingReference, d.name, r, {}});
    }
  }
  for (auto& cycle : reference_cycles(edges)) {
    WellFormednessError e{WellFormednessKind::CircularTraitDefinition, cycle.front(), cycle.front(), {}};
    e.cycle = std::move(cycle);
    out.push_back(std::move(e));
  }
  return out;
}

}  // namespace tcbc
