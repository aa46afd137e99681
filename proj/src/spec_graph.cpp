#include "traitcbc/spec_graph.hpp"

#include <algorithm>
#include <functional>
#include <sstream>

namespace tcbc {

std::vector<int> SpecGraph::successors(int node) const {
  std::vector<int> out;
  for (auto it = edges.lower_bound({node, -1}); it != edges.end() && it->first == node; ++it) {
    out.push_back(it->second);
  }
  return out;
}

SpecGraph build_spec_graph(const Body& body, const std::string& owner) {
  SpecGraph g;
  for (const auto& m : body.methods) g.nodes.push_back({owner, m.name()});
  auto index_of = [&](const std::string& name) {
    for (std::size_t i = 0; i < body.methods.size(); ++i) {
      if (body.methods[i].name() == name) return static_cast<int>(i);
    }
    return -1;
  };
  Term self = var(kThis);
  for (std::size_t i = 0; i < body.methods.size(); ++i) {
    const Spec& s = body.methods[i].header.spec;
    std::vector<Term> apps;
    collect_apps(s.pre, apps);
    collect_apps(s.post, apps);
    for (const auto& a : apps) {
      const auto& app_node = std::get<term::App>(a.node().v);
      if (!(app_node.receiver == self)) continue;
      int j = index_of(app_node.method);
      if (j >= 0) g.edges.insert({static_cast<int>(i), j});
    }
  }
  return g;
}

std::vector<std::vector<SpecNode>> detect_circularity(const SpecGraph& g) {
  std::vector<std::vector<int>> cycles;
  const int n = static_cast<int>(g.nodes.size());
  std::vector<int> path;
  std::vector<bool> on_path(static_cast<std::size_t>(n), false);

  // Cycles whose smallest node is `start`: search only through larger nodes.
  std::function<void(int, int)> dfs = [&](int start, int v) {
    for (int w : g.successors(v)) {
      if (w == start) {
        cycles.push_back(path);
      } else if (w > start && !on_path[static_cast<std::size_t>(w)]) {
        on_path[static_cast<std::size_t>(w)] = true;
        path.push_back(w);
        dfs(start, w);
        path.pop_back();
        on_path[static_cast<std::size_t>(w)] = false;
      }
    }
  };
  for (int s = 0; s < n; ++s) {
    path = {s};
    on_path[static_cast<std::size_t>(s)] = true;
    dfs(s, s);
    on_path[static_cast<std::size_t>(s)] = false;
  }
  std::sort(cycles.begin(), cycles.end());
  std::vector<std::vector<SpecNode>> out;
  for (const auto& c : cycles) {
    std::vector<SpecNode> nodes;
    for (int i : c) nodes.push_back(g.nodes[static_cast<std::size_t>(i)]);
    out.push_back(std::move(nodes));
  }
  return out;
}

std::string to_dot(const SpecGraph& g, const std::string& name) {
  std::ostringstream os;
  os << "digraph \"" << name << "\" {\n";
  for (const auto& node : g.nodes) os << "  \"" << node.definition << '.' << node.method << "\";\n";
  for (const auto& [from, to] : g.edges) {
    const auto& a = g.nodes[static_cast<std::size_t>(from)];
    const auto& b = g.nodes[static_cast<std::size_t>(to)];
    os << "  \"" << a.definition << '.' << a.method << "\" -> \"" << b.definition << '.' << b.method << "\";\n";
  }
  os << "}\n";
  return os.str();
}

}  // namespace tcbc
