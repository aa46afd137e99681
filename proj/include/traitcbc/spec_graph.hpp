#pragma once

#include <set>
#include <string>
#include <utility>
#include <vector>

#include "traitcbc/ast.hpp"

namespace tcbc {

struct SpecNode {
  std::string definition;
  std::string method;
  auto operator<=>(const SpecNode&) const = default;
};

/// Which methods' contracts mention which other methods of the same body.
struct SpecGraph {
  std::vector<SpecNode> nodes;           // declaration order
  std::set<std::pair<int, int>> edges;  // caller index -> callee index

  std::vector<int> successors(int node) const;
};

/// Edge m -> n whenever `this.n(...)` occurs in the pre- or postcondition of m
/// and n is a method of `body`.
SpecGraph build_spec_graph(const Body& body, const std::string& owner);

/// Every elementary cycle, once each, rotated to start at its earliest node.
/// Cycles are ordered by their node index sequences.
std::vector<std::vector<SpecNode>> detect_circularity(const SpecGraph& g);

/// Graphviz rendering.
std::string to_dot(const SpecGraph& g, const std::string& name = "spec");

}  // namespace tcbc
