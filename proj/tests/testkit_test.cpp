#include <gtest/gtest.h>

#include <algorithm>
#include <set>

#include "oracles.hpp"
#include "traitcbc/flatten.hpp"
#include "traitcbc/parser.hpp"
#include "traitcbc/printer.hpp"
#include "traitcbc/prover.hpp"
#include "traitcbc/testkit.hpp"
#include "traitcbc/wellformed.hpp"

namespace tcbc {
namespace {

using testkit::GenConfig;

GenConfig seeded(std::uint64_t seed) {
  GenConfig cfg;
  cfg.seed = seed;
  return cfg;
}

std::size_t size_of(const Expr& e) {
  const auto& v = e.node().v;
  std::size_t n = 1;
  if (const auto* c = std::get_if<expr::Call>(&v)) {
    n += size_of(c->receiver);
    for (const auto& a : c->args) n += size_of(a);
  } else if (const auto* k = std::get_if<expr::New>(&v)) {
    for (const auto& a : k->args) n += size_of(a);
  } else if (const auto* i = std::get_if<expr::If>(&v)) {
    n += size_of(i->then_branch) + size_of(i->else_branch);
  } else if (std::holds_alternative<expr::IntLit>(v) && std::get<expr::IntLit>(v).value == 0) {
    n = 0;
  }
  return n;
}

std::size_t size_of(const TraitExpr& e) {
  const auto& v = e.node().v;
  if (const auto* b = std::get_if<texpr::BodyLit>(&v)) {
    std::size_t n = 1;
    for (const auto& m : b->body.methods) {
      n += 1 + (m.body ? 1 + size_of(*m.body) : 0);
      n += (is_true(m.header.spec.pre) ? 0 : 1) + (is_true(m.header.spec.post) ? 0 : 1);
    }
    return n;
  }
  if (const auto* p = std::get_if<texpr::Plus>(&v)) return 1 + size_of(p->lhs) + size_of(p->rhs);
  if (const auto* a = std::get_if<texpr::MakeAbstract>(&v)) return 1 + size_of(a->inner);
  return 1;
}

// (definitions, node count); the literal 0 counts as nothing so that
// replacing a leaf by it is progress.
std::pair<std::size_t, std::size_t> size_of(const Program& p) {
  std::size_t n = p.main ? 1 + size_of(*p.main) : 0;
  for (const auto& d : p.definitions) n += size_of(d.expr);
  return {p.definitions.size(), n};
}

void expect_clean(const testkit::HarnessSummary& s) {
  for (const auto& f : s.failures) ADD_FAILURE() << s.name << " seed " << f.seed << ": " << f.what << "\n" << f.repro;
}

TEST(Generator, DeterministicAndWellFormed) {
  for (std::uint64_t seed = 1; seed <= 500; ++seed) {
    Program p = testkit::gen_program(seeded(seed));
    ASSERT_EQ(p, testkit::gen_program(seeded(seed))) << seed;
    ASSERT_FALSE(p.definitions.empty());
    EXPECT_EQ(p.definitions[0].name, "Cell");
    EXPECT_TRUE(check_well_formed(p).empty()) << seed << "\n" << pretty_print(p);
    std::string text = pretty_print(p);
    EXPECT_EQ(pretty_print(parse_program(text)), text) << seed;
  }
}

TEST(Generator, SeedsDiffer) {
  std::set<std::string> texts;
  for (std::uint64_t seed = 1; seed <= 50; ++seed) texts.insert(pretty_print(testkit::gen_program(seeded(seed))));
  EXPECT_GT(texts.size(), 45u);
}

// Across seeds the generator must reach both outcomes of composition and
// every expression form, otherwise the harnesses test little.
TEST(Generator, Coverage) {
  BuiltinBackend backend;
  int composed = 0, failed = 0, abstracted = 0, conditionals = 0, classes = 0;
  for (std::uint64_t seed = 1; seed <= 200; ++seed) {
    Program p = testkit::gen_program(seeded(seed));
    std::string text = pretty_print(p);
    if (text.find("makeAbstract") != std::string::npos) ++abstracted;
    if (text.find("if (") != std::string::npos) ++conditionals;
    FlattenResult flat = flatten_program(p, backend);
    for (const auto& d : flat.definitions) {
      if (std::holds_alternative<texpr::BodyLit>(p.definitions[0].expr.node().v) && d.name == "Cell") continue;
      if (!d.errors.empty()) ++failed;
      if (d.flattened && d.name[0] != 'T') ++composed;
      if (d.flattened && d.kind == DefKind::Class && d.name != "Cell") ++classes;
    }
  }
  EXPECT_GT(composed, 50);
  EXPECT_GT(failed, 50);
  EXPECT_GT(abstracted, 20);
  EXPECT_GT(conditionals, 50);
  EXPECT_GT(classes, 10);
}

TEST(Generator, ConditionalsCanBeDisabled) {
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    GenConfig cfg = seeded(seed);
    cfg.conditionals = false;
    EXPECT_EQ(pretty_print(testkit::gen_program(cfg)).find("if ("), std::string::npos);
  }
}

TEST(Harness, FlatteningPreservesVerification) {
  BuiltinBackend backend;
  auto s = testkit::flatten_harness(1, 500, GenConfig{}, backend);
  EXPECT_EQ(s.cases, 500);
  EXPECT_GT(s.checked, 1000);
  expect_clean(s);
}

TEST(Harness, CompositionOfVerifiedBodies) {
  BuiltinBackend backend;
  auto s = testkit::compose_harness(1, 300, GenConfig{}, backend);
  EXPECT_GE(s.cases, 200);
  EXPECT_GT(s.checked, 100);
  expect_clean(s);
}

TEST(Harness, MakeAbstractPreservesVerification) {
  BuiltinBackend backend;
  auto s = testkit::abstract_harness(1, 300, GenConfig{}, backend);
  EXPECT_GE(s.cases, 200);
  expect_clean(s);
}

TEST(Harness, RefinementChains) {
  BuiltinBackend backend;
  auto s = testkit::chain_harness(1, 300, GenConfig{}, backend);
  EXPECT_EQ(s.cases, 600);
  expect_clean(s);
}

TEST(Chain, Shape) {
  std::set<std::size_t> lengths;
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    auto chain = testkit::gen_refinement_chain(seeded(seed));
    lengths.insert(chain.stages.size());
    EXPECT_EQ(std::get<texpr::BodyLit>(chain.program.definitions[1].expr.node().v).body.methods.size(), 1u);
    ASSERT_GE(chain.stages.size(), 2u);
    EXPECT_EQ(chain.stages[0], "T0");
    EXPECT_EQ(chain.program.definitions.back().name, chain.cls);
    EXPECT_TRUE(check_well_formed(chain.program).empty());
    BuiltinBackend backend;
    FlattenResult flat = flatten_program(chain.program, backend);
    const DefinitionReport* cls = flat.find(chain.cls);
    ASSERT_NE(cls, nullptr);
    EXPECT_TRUE(cls->flattened) << seed << "\n" << pretty_print(chain.program);
    for (const auto& m : flat.table.at(chain.cls).body.methods) EXPECT_FALSE(m.is_abstract()) << m.name();
    for (const auto& d : flat.definitions) {
      for (const auto& b : d.bodies) {
        for (const auto& c : b.checks) EXPECT_TRUE(c.ok()) << seed << " " << d.name << "." << c.method;
      }
    }
  }
  // Both the single-step implementation and longer refinements occur.
  EXPECT_TRUE(lengths.count(2));
  EXPECT_GE(*lengths.rbegin(), 4u);
}

const Method& method_in(const Program& p, const std::string& def, const std::string& name) {
  for (const auto& d : p.definitions) {
    if (d.name != def) continue;
    for (const auto& m : std::get<texpr::BodyLit>(d.expr.node().v).body.methods) {
      if (m.name() == name) return m;
    }
  }
  throw std::runtime_error("no method " + def + "." + name);
}

// The weakened first stage no longer refines the top contract exactly when
// a bounded countermodel to Post(stage) ==> Post(top) exists.
TEST(Chain, WeakenedFirstStageAgreesWithEnumeration) {
  BuiltinBackend backend;
  int rejected = 0;
  for (std::uint64_t seed = 1; seed <= 150; ++seed) {
    auto chain = testkit::weaken_first_stage(testkit::gen_refinement_chain(seeded(seed)));
    const auto& top_abstract = std::get<texpr::BodyLit>(chain.program.definitions[1].expr.node().v).body.methods[0];
    const Method& impl = method_in(chain.program, "T1", top_abstract.name());
    std::vector<std::string> vars{"result"};
    for (const auto& p : impl.header.params) vars.push_back(p.name);
    bool counter = oracle::find_countermodel({impl.header.spec.post}, top_abstract.header.spec.post, vars, {}, -7, 7)
                       .has_value();
    FlattenResult flat = flatten_program(chain.program, backend);
    const DefinitionReport* cls = flat.find(chain.cls);
    ASSERT_NE(cls, nullptr);
    if (counter) {
      ++rejected;
      ASSERT_FALSE(cls->flattened) << seed;
      ASSERT_FALSE(cls->errors.empty());
      EXPECT_EQ(cls->errors[0].kind, CompositionKind::IncompatibleSpecs);
      EXPECT_EQ(cls->errors[0].method, top_abstract.name());
    } else {
      EXPECT_TRUE(cls->flattened) << seed << "\n" << pretty_print(chain.program);
    }
  }
  EXPECT_GT(rejected, 75);
}

bool has_conflict(const Program& p) {
  if (!check_well_formed(p).empty()) return false;
  BuiltinBackend backend;
  for (const auto& d : flatten_program(p, backend).definitions) {
    for (const auto& e : d.errors) {
      if (e.kind == CompositionKind::ConflictingConcrete) return true;
    }
  }
  return false;
}

TEST(Shrink, ReachesLocalMinimum) {
  int shrunk = 0;
  for (std::uint64_t seed = 1; seed <= 40 && shrunk < 8; ++seed) {
    Program p = testkit::gen_program(seeded(seed));
    if (!has_conflict(p)) continue;
    ++shrunk;
    auto passes = [](const Program& q) { return !has_conflict(q); };
    Program small = testkit::shrink(p, passes);
    EXPECT_TRUE(has_conflict(small));
    EXPECT_LE(size_of(small), size_of(p));
    for (const auto& cand : testkit::shrink_candidates(small)) {
      if (cand == small) continue;
      EXPECT_FALSE(has_conflict(cand)) << "not minimal:\n" << pretty_print(small) << "\ncandidate:\n"
                                       << pretty_print(cand);
    }
    EXPECT_EQ(small.definitions.size(), 2u) << pretty_print(small);
  }
  EXPECT_GT(shrunk, 3);
}

TEST(Shrink, AlwaysFailingShrinksToOneDefinition) {
  Program p = testkit::gen_program(seeded(3));
  Program small = testkit::shrink(p, [](const Program&) { return false; });
  EXPECT_EQ(small.definitions.size(), 1u);
  EXPECT_FALSE(small.main.has_value());
  EXPECT_TRUE(testkit::shrink_candidates(small).empty() ||
              std::all_of(testkit::shrink_candidates(small).begin(), testkit::shrink_candidates(small).end(),
                          [](const Program& c) { return c.definitions.size() == 1; }));
}

const Body& body_of(const Definition& d) { return std::get<texpr::BodyLit>(d.expr.node().v).body; }

// A conflict injected into a large program shrinks to one trait and one
// self-composition, each with the single colliding method.
TEST(Shrink, InjectedConflict) {
  BuiltinBackend backend;
  int done = 0;
  for (std::uint64_t seed = 1; seed <= 60 && done < 10; ++seed) {
    GenConfig cfg = seeded(seed);
    cfg.max_defs = 10;
    Program p = testkit::gen_program(cfg);
    if (p.definitions.size() < 10) continue;
    const Definition* donor = nullptr;
    for (const auto& d : p.definitions) {
      if (std::holds_alternative<texpr::BodyLit>(d.expr.node().v) && d.name != "Cell") donor = &d;
    }
    ASSERT_NE(donor, nullptr);
    Definition copy = *donor;
    copy.name = "Copy";
    std::string target = donor->name;
    p.definitions.push_back(copy);
    p.definitions.push_back(Definition{"Clash", DefKind::Trait, tplus(tref(target), tref("Copy")), 0});
    ASSERT_TRUE(has_conflict(p));
    ++done;
    Program small = testkit::shrink(p, [](const Program& q) { return !has_conflict(q); });
    ASSERT_EQ(small.definitions.size(), 2u) << pretty_print(small);
    const auto& base = small.definitions[0];
    ASSERT_TRUE(std::holds_alternative<texpr::BodyLit>(base.expr.node().v)) << pretty_print(small);
    EXPECT_EQ(body_of(base).methods.size(), 1u) << pretty_print(small);
    for (const auto& cand : testkit::shrink_candidates(small)) EXPECT_FALSE(has_conflict(cand));
    FlattenResult flat = flatten_program(small, backend);
    ASSERT_EQ(flat.definitions[1].errors.size(), 1u);
    EXPECT_EQ(flat.definitions[1].errors[0].kind, CompositionKind::ConflictingConcrete);
  }
  EXPECT_GE(done, 5);
}

TEST(Shrink, RejectsPassingInput) {
  Program p = testkit::gen_program(seeded(3));
  EXPECT_THROW(testkit::shrink(p, [](const Program&) { return true; }), std::invalid_argument);
}

TEST(Shrink, CandidatesAreSmaller) {
  for (std::uint64_t seed = 1; seed <= 30; ++seed) {
    Program p = testkit::gen_program(seeded(seed));
    for (const auto& c : testkit::shrink_candidates(p)) EXPECT_TRUE(size_of(c) < size_of(p));
  }
}

}  // namespace
}  // namespace tcbc
