#pragma once

#include <string>

#include "traitcbc/ast.hpp"

namespace tcbc {

/// Concrete syntax for a whole program. Output re-parses to an equal Program.
std::string pretty_print(const Program& p);

std::string to_string(const Expr& e);
std::string to_string(const TraitExpr& e, int indent = 0);
std::string to_string(const Body& b, int indent = 0);
std::string to_string(const Method& m, int indent = 0);

/// `Num m(Num x)`, without contracts.
std::string signature_string(const MethodHeader& h);

}  // namespace tcbc
