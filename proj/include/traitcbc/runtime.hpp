#pragma once

#include <string>
#include <vector>

#include "traitcbc/ast.hpp"
#include "traitcbc/typing.hpp"

namespace tcbc {

inline constexpr long kDefaultFuel = 100000;

struct EvalOutcome {
  enum class Kind { Done, Stuck, OutOfFuel };

  Kind kind = Kind::Done;
  Expr residual;       // the value when Done
  std::string reason;  // Stuck only
  long steps = 0;
};

const char* to_string(EvalOutcome::Kind kind);

struct StepResult {
  std::optional<Expr> next;  // absent when stuck or already a value
  std::string stuck;
  long guard_steps = 0;  // steps spent evaluating an `if` condition
  bool out_of_fuel = false;
};

/// One reduction at the unique redex. `fuel` bounds the evaluation of an
/// `if` condition.
StepResult step(const ClassTable& table, const Expr& e, long fuel = kDefaultFuel);

/// Steps until a value, a stuck state, or `fuel` steps (condition
/// evaluation included).
EvalOutcome eval(const ClassTable& table, const Expr& e, long fuel = kDefaultFuel);

/// Child-index paths of every subexpression that is a redex in an
/// evaluation context. A closed non-value has exactly one.
std::vector<std::vector<int>> redex_positions(const Expr& e);

/// `e` with variables replaced by values, including inside conditions.
Expr substitute_expr(const Expr& e, const std::map<std::string, Expr>& s);

}  // namespace tcbc
