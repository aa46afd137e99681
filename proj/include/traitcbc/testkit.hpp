#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "traitcbc/ast.hpp"
#include "traitcbc/prover.hpp"

namespace tcbc::testkit {

struct GenConfig {
  std::uint64_t seed = 1;
  int max_defs = 6;
  int max_methods_per_body = 3;
  int max_params = 2;
  int max_expr_depth = 2;
  double compose_probability = 0.7;  // chance that a shared name keeps a compatible contract
  bool conditionals = true;          // allow `if` in bodies (guarded postconditions)
};

/// Well-formed program whose concrete methods verify by construction. Every
/// program defines `class Cell = { Num val(); Num aux(); }` first.
Program gen_program(const GenConfig& cfg);

struct RefinementChain {
  Program program;                  // t0..tn plus the composed class, in that order
  std::vector<std::string> stages;  // t0..tn
  std::string cls;                  // name of `t0 + ... + tn`
};

/// `t0` holds one abstract method; each later stage implements open methods
/// and may open the helpers it calls.
RefinementChain gen_refinement_chain(const GenConfig& cfg);

/// `chain` with the postcondition of the first concrete method of stage 1
/// weakened (`==` becomes `>=` in its first case).
RefinementChain weaken_first_stage(const RefinementChain& chain);

/// Smallest program reachable by single removals on which `passes` is still
/// false. Throws std::invalid_argument when `passes(p)` holds.
Program shrink(const Program& p, const std::function<bool(const Program&)>& passes);

/// Every program obtained from `p` by one shrinking step.
std::vector<Program> shrink_candidates(const Program& p);

struct HarnessFailure {
  std::uint64_t seed = 0;
  std::string what;
  std::string repro;  // shrunk program text
};

struct HarnessSummary {
  std::string name;
  long cases = 0;   // programs, pairs or bodies examined
  long checked = 0; // cases where the premise held (flattened, composed, ...)
  std::vector<HarnessFailure> failures;
};

/// Programs that flatten re-verify entry by entry.
HarnessSummary flatten_harness(std::uint64_t first_seed, std::uint64_t last_seed, const GenConfig& base, Backend& backend);
/// Successfully composed pairs of verified bodies verify.
HarnessSummary compose_harness(std::uint64_t first_seed, std::uint64_t last_seed, const GenConfig& base, Backend& backend);
/// make_abstract keeps verified bodies verified.
HarnessSummary abstract_harness(std::uint64_t first_seed, std::uint64_t last_seed, const GenConfig& base, Backend& backend);
/// A refinement chain's class verifies exactly when every stage composes.
HarnessSummary chain_harness(std::uint64_t first_seed, std::uint64_t last_seed, const GenConfig& base, Backend& backend);

}  // namespace tcbc::testkit
