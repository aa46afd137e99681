#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace tcbc::lia {

// Linear constraints over integer variables identified by index:
// sum(coeffs[i] * x_i) + constant  (= 0 | >= 0).
struct Constraint {
  std::map<int, std::int64_t> coeffs;
  std::int64_t constant = 0;
  bool is_equality = false;
};

enum class Status { Sat, Unsat, Unknown };

struct Result {
  Status status = Status::Unknown;
  std::map<int, std::int64_t> model;  // Sat only; covers every variable mentioned
  std::string reason;                 // Unknown only
};

/// Decides integer feasibility with the Omega test. Returns Unknown only on
/// arithmetic overflow or when the work budget is exhausted.
Result solve(const std::vector<Constraint>& constraints);

/// True when `model` satisfies every constraint (missing variables read as 0).
bool satisfies(const std::vector<Constraint>& constraints, const std::map<int, std::int64_t>& model);

}  // namespace tcbc::lia
