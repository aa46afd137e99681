#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "traitcbc/ast.hpp"

namespace tcbc {

class ParseError : public std::runtime_error {
 public:
  ParseError(int line, int column, std::vector<std::string> expected, std::string found);

  int line() const { return line_; }
  int column() const { return column_; }
  const std::vector<std::string>& expected() const { return expected_; }
  const std::string& found() const { return found_; }

 private:
  int line_;
  int column_;
  std::vector<std::string> expected_;
  std::string found_;
};

/// Parses a `.tcbc` program. Throws ParseError on malformed input.
Program parse_program(std::string_view text);

/// Parses a standalone formula, e.g. for command-line expressions and tests.
Formula parse_formula(std::string_view text);

/// Parses a standalone expression (`run -e`).
Expr parse_expression(std::string_view text);

}  // namespace tcbc
