#pragma once

#include <string>
#include <vector>

#include "traitcbc/ast.hpp"

namespace tcbc {

enum class WellFormednessKind {
  DuplicateDefinition,
  CircularTraitDefinition,
  DuplicateInterface,
  DuplicateMethod,
  DuplicateParameter,
  ParameterNamedThis,
  DanglingReference,
};

const char* to_string(WellFormednessKind kind);

struct WellFormednessError {
  WellFormednessKind kind;
  std::string definition;
  std::string subject;  // the offending name: definition, interface, method, parameter or target
  std::vector<std::string> cycle;  // CircularTraitDefinition only, sorted

  std::string message() const;
  bool operator==(const WellFormednessError&) const = default;
};

/// Every violation in `p`; empty when the program is well formed.
std::vector<WellFormednessError> check_well_formed(const Program& p);

}  // namespace tcbc
