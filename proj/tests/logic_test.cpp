#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "oracles.hpp"
#include "traitcbc/lia.hpp"
#include "traitcbc/parser.hpp"
#include "traitcbc/prover.hpp"

using namespace tcbc;
using oracle::FormulaGen;
using oracle::nameless;

namespace {

Formula F(const char* text) { return parse_formula(text); }
Term T(const char* text) {
  Formula f = parse_formula(text);
  return std::get<formula::Pred>(f.node().v).term;
}

using Kind = VerificationResult::Kind;

Kind verdict(std::vector<const char*> hyps, const char* goal) {
  std::vector<Formula> hs;
  for (const char* h : hyps) hs.push_back(F(h));
  return prove(hs, F(goal)).kind;
}

std::vector<Formula> box(const std::vector<std::string>& vars, int lo, int hi) {
  std::vector<Formula> out;
  for (const auto& v : vars) {
    out.push_back(cmp(Rel::Ge, var(v), int_const(lo)));
    out.push_back(cmp(Rel::Le, var(v), int_const(hi)));
  }
  return out;
}

}  // namespace

// ---- substitution and alpha-equivalence ---------------------------------------

TEST(Substitute, RenamesReceiver) {
  Formula f = F("result == list.element()");
  EXPECT_EQ(substitute(f, {{"list", var("_x")}}), eq(var("result"), app(var("_x"), "element")));
}

TEST(Substitute, EmptyMappingIsIdentity) {
  Formula f = F("forall Num n: list.contains(n) ==> result >= n");
  EXPECT_EQ(substitute(f, {}), f);
}

TEST(Substitute, BoundVariablesAreUntouched) {
  Formula f = F("forall Num n: n > x");
  EXPECT_EQ(substitute(f, {{"n", var("y")}}), f);
}

TEST(Substitute, AvoidsCapture) {
  Formula f = F("forall Num n: n > x");
  Formula g = substitute(f, {{"x", var("n")}});
  EXPECT_TRUE(alpha_equal(g, F("forall Num m: m > n")));
  EXPECT_FALSE(alpha_equal(g, F("forall Num n: n > n")));
  Substitution s{{"x", var("n")}};
  EXPECT_EQ(nameless(g), nameless(f, &s));
}

TEST(Substitute, SimultaneousNotSequential) {
  Formula f = F("x < y");
  EXPECT_EQ(substitute(f, {{"x", var("y")}, {"y", var("x")}}), F("y < x"));
}

TEST(Substitute, MatchesNamelessReferenceOnRandomFormulas) {
  std::vector<std::string> names = {"x", "y", "z", "n"};
  for (std::uint64_t seed = 0; seed < 400; ++seed) {
    FormulaGen gen(seed, names, {"f"}, true);
    Formula f = gen.formula(4);
    Substitution s;
    for (const auto& n : names) {
      if (gen.pick(2)) s.emplace(n, gen.term(2));
    }
    Formula g = substitute(f, s);
    EXPECT_EQ(nameless(g), nameless(f, &s)) << to_string(f);
  }
}

TEST(Substitute, ComposesWhenDomainsAreDisjointFromRanges) {
  for (std::uint64_t seed = 0; seed < 300; ++seed) {
    FormulaGen gen(seed, {"x", "y", "z"}, {}, true);
    FormulaGen range_gen(seed + 1000, {"a", "b"});
    Formula f = gen.formula(4);
    Substitution m1{{"x", range_gen.term(2)}};
    Substitution m2{{"y", range_gen.term(2)}};
    // Ranges only mention a and b, outside both domains, so m1;m2 is their union.
    Substitution both = m1;
    both.insert(m2.begin(), m2.end());
    EXPECT_TRUE(alpha_equal(substitute(substitute(f, m1), m2), substitute(f, both)));
  }
}

TEST(AlphaEqual, Examples) {
  Formula max_post = F("list.contains(result) & (forall Num n: list.contains(n) ==> result >= n)");
  EXPECT_TRUE(alpha_equal(max_post,
                          F("list.contains(result) & (forall Num n: list.contains(n) ==> result >= n)")));
  EXPECT_TRUE(alpha_equal(F("forall Num n: n >= 0"), F("forall Num k: k >= 0")));
  EXPECT_FALSE(alpha_equal(F("x > 0"), F("x >= 0")));
  EXPECT_FALSE(alpha_equal(F("forall Num n: n >= 0"), F("forall List n: n >= 0")));
  EXPECT_FALSE(alpha_equal(F("forall Num n: forall Num m: n < m"), F("forall Num n: forall Num m: m < n")));
}

TEST(AlphaEqual, AgreesWithNamelessOracleAndIsAnEquivalence) {
  std::vector<Formula> pool;
  for (std::uint64_t seed = 0; seed < 120; ++seed) {
    FormulaGen gen(seed % 40, {"x", "y"}, {}, true);
    Formula f = gen.formula(3);
    // Half of the pool are renamed copies.
    if (seed >= 40) {
      std::vector<std::string> names = {"p", "q", "r"};
      FormulaGen renamer(seed, names);
      f = substitute(f, {{"zz", var(names[renamer.pick(3)])}});
    }
    pool.push_back(f);
  }
  for (const auto& f : pool) {
    EXPECT_TRUE(alpha_equal(f, f));
    for (const auto& g : pool) {
      bool fg = alpha_equal(f, g);
      EXPECT_EQ(fg, nameless(f) == nameless(g));
      EXPECT_EQ(fg, alpha_equal(g, f));
    }
  }
  for (std::size_t i = 0; i < pool.size(); i += 7) {
    for (std::size_t j = 0; j < pool.size(); j += 3) {
      for (std::size_t k = 0; k < pool.size(); k += 5) {
        if (alpha_equal(pool[i], pool[j]) && alpha_equal(pool[j], pool[k])) {
          EXPECT_TRUE(alpha_equal(pool[i], pool[k]));
        }
      }
    }
  }
}

TEST(FreeVars, RespectsBinders) {
  EXPECT_EQ(free_vars(F("forall Num n: n > x & list.contains(n)")),
            (std::set<std::string>{"list", "x"}));
}

// ---- linear integer arithmetic -------------------------------------------------

TEST(Lia, SimpleCases) {
  using lia::Constraint;
  // 2x = 1 has no integer solution.
  EXPECT_EQ(lia::solve({Constraint{{{0, 2}}, -1, true}}).status, lia::Status::Unsat);
  // 1 <= 3x <= 2
  EXPECT_EQ(lia::solve({Constraint{{{0, 3}}, -1, false}, Constraint{{{0, -3}}, 2, false}}).status,
            lia::Status::Unsat);
  // 2 <= 3x <= 4 gives x = 1
  auto r = lia::solve({Constraint{{{0, 3}}, -2, false}, Constraint{{{0, -3}}, 4, false}});
  ASSERT_EQ(r.status, lia::Status::Sat);
  EXPECT_EQ(r.model.at(0), 1);
  // 3x + 5y = 1 is solvable.
  EXPECT_EQ(lia::solve({Constraint{{{0, 3}, {1, 5}}, -1, true}}).status, lia::Status::Sat);
  // Omega's classic: 27 <= 11x + 13y <= 45, -10 <= 7x - 9y <= 4 has no integer point.
  EXPECT_EQ(lia::solve({Constraint{{{0, 11}, {1, 13}}, -27, false},
                        Constraint{{{0, -11}, {1, -13}}, 45, false},
                        Constraint{{{0, 7}, {1, -9}}, 10, false},
                        Constraint{{{0, -7}, {1, 9}}, 4, false}})
                .status,
            lia::Status::Unsat);
}

TEST(Lia, AgreesWithBruteForce) {
  std::mt19937_64 rng(42);
  auto rnd = [&](int lo, int hi) { return lo + static_cast<int>(rng() % static_cast<unsigned>(hi - lo + 1)); };
  const int kVars = 3;
  const int kBound = 5;
  for (int iter = 0; iter < 600; ++iter) {
    std::vector<lia::Constraint> cs;
    for (int v = 0; v < kVars; ++v) {
      cs.push_back(lia::Constraint{{{v, 1}}, kBound, false});
      cs.push_back(lia::Constraint{{{v, -1}}, kBound, false});
    }
    int n = rnd(1, 4);
    for (int i = 0; i < n; ++i) {
      lia::Constraint c;
      for (int v = 0; v < kVars; ++v) {
        int a = rnd(-6, 6);
        if (a != 0 && rnd(0, 2) > 0) c.coeffs[v] = a;
      }
      c.constant = rnd(-12, 12);
      c.is_equality = rnd(0, 3) == 0;
      cs.push_back(c);
    }
    bool feasible = false;
    for (int x = -kBound; x <= kBound && !feasible; ++x) {
      for (int y = -kBound; y <= kBound && !feasible; ++y) {
        for (int z = -kBound; z <= kBound && !feasible; ++z) {
          feasible = lia::satisfies(cs, {{0, x}, {1, y}, {2, z}});
        }
      }
    }
    lia::Result r = lia::solve(cs);
    ASSERT_NE(r.status, lia::Status::Unknown);
    EXPECT_EQ(r.status == lia::Status::Sat, feasible) << "iteration " << iter;
    if (r.status == lia::Status::Sat) EXPECT_TRUE(lia::satisfies(cs, r.model));
  }
}

// ---- built-in prover -------------------------------------------------------------

TEST(Prover, AccessHeadObligation) {
  EXPECT_EQ(verdict({"x0 = list", "true ==> result = x0.element()"}, "result = list.element()"),
            Kind::Valid);
}

TEST(Prover, Reflexivity) {
  EXPECT_EQ(verdict({"x.f(y) > 3 | p"}, "x.f(y) > 3 | p"), Kind::Valid);
  EXPECT_EQ(verdict({}, "true"), Kind::Valid);
}

TEST(Prover, IntervalExamples) {
  EXPECT_EQ(verdict({"x > 1"}, "x > 0"), Kind::Valid);
  VerificationResult r = prove({F("x > 0")}, F("x > 1"));
  EXPECT_EQ(r.kind, Kind::Invalid);
  EXPECT_EQ(r.detail, "x = 1");
  // Cross-check both with the enumeration oracle.
  EXPECT_FALSE(oracle::find_countermodel({F("x > 1")}, F("x > 0"), {"x"}, {}, -8, 8));
  EXPECT_TRUE(oracle::find_countermodel({F("x > 0")}, F("x > 1"), {"x"}, {}, -8, 8));
}

TEST(Prover, Congruence) {
  EXPECT_EQ(verdict({"a = b", "b = c"}, "a.f(1) = c.f(1)"), Kind::Valid);
  EXPECT_EQ(verdict({"a.f(x) != a.f(y)"}, "x != y"), Kind::Valid);
  EXPECT_EQ(verdict({"a.f() = 1", "b.f() = 2"}, "a != b"), Kind::Valid);
  EXPECT_EQ(verdict({"a.f() = 1"}, "b.f() = 1"), Kind::Invalid);
  EXPECT_EQ(verdict({"a.g().h() = 3", "a = b"}, "b.g().h() >= 3"), Kind::Valid);
}

TEST(Prover, PredicatesAreBooleanValued) {
  EXPECT_EQ(verdict({"l.contains(x)", "x = y"}, "l.contains(y)"), Kind::Valid);
  EXPECT_EQ(verdict({"l.contains(x)", "!k.contains(x)"}, "l != k"), Kind::Valid);
  EXPECT_EQ(verdict({"l.contains(x) = l.contains(y)", "l.contains(x)"}, "l.contains(y)"), Kind::Valid);
}

TEST(Prover, QuantifiedGoalsAreNotDecided) {
  VerificationResult r =
      prove({F("list.size() > 0")}, F("forall Num n: list.contains(n) ==> list.element() >= n"));
  EXPECT_EQ(r.kind, Kind::Unknown);
}

TEST(Prover, QuantifiedHypothesesAreInstantiated) {
  EXPECT_EQ(verdict({"forall Num n: l.contains(n) ==> r >= n", "l.contains(5)"}, "r >= 5"), Kind::Valid);
  EXPECT_EQ(verdict({"forall Num n: l.contains(n) ==> r >= n"},
                    "forall Num m: l.contains(m) ==> r + 1 > m"),
            Kind::Valid);
  EXPECT_EQ(verdict({"exists Num n: n > x & n < y"}, "x + 1 < y"), Kind::Valid);
}

TEST(Prover, NonLinearIsUnknown) {
  EXPECT_EQ(verdict({}, "x * x >= 0"), Kind::Unknown);
  EXPECT_EQ(verdict({"x * y = 2", "x * y = 3"}, "false"), Kind::Valid);
  EXPECT_EQ(verdict({"x = 3"}, "2 * x + (x - 1) * 4 = 14"), Kind::Valid);
}

TEST(Prover, DisequalitiesNeedCaseSplits) {
  EXPECT_EQ(verdict({"x != 0", "x >= 0", "x <= 1"}, "x = 1"), Kind::Valid);
  EXPECT_EQ(verdict({"x != y", "y != z", "x >= 0", "x <= 1", "y >= 0", "y <= 1", "z >= 0", "z <= 1"},
                    "x = z"),
            Kind::Valid);
}

TEST(Prover, SoundAndCompleteAgainstEnumerationOnLinearFormulas) {
  std::vector<std::string> vars = {"x", "y", "z"};
  int valid = 0, invalid = 0;
  for (std::uint64_t seed = 0; seed < 400; ++seed) {
    FormulaGen gen(seed, vars);
    std::vector<Formula> hyps = box(vars, -8, 8);
    int n = gen.pick(3);
    for (int i = 0; i < n; ++i) hyps.push_back(gen.formula(2));
    Formula goal = gen.formula(2);
    VerificationResult r = prove(hyps, goal);
    bool counter = oracle::find_countermodel(hyps, goal, vars, {}, -8, 8).has_value();
    ASSERT_NE(r.kind, Kind::Unknown) << to_string(goal);
    if (r.kind == Kind::Valid) {
      ++valid;
      EXPECT_FALSE(counter) << "seed " << seed;
    } else {
      ++invalid;
      EXPECT_TRUE(counter) << "seed " << seed;
    }
  }
  EXPECT_GT(valid, 20);
  EXPECT_GT(invalid, 20);
}

TEST(Prover, SoundAndCompleteAgainstEnumerationWithObservers) {
  std::vector<std::string> vars = {"x", "y"};
  for (std::uint64_t seed = 0; seed < 120; ++seed) {
    FormulaGen gen(seed, vars, {"f"});
    std::vector<Formula> hyps = box(vars, -2, 2);
    hyps.push_back(cmp(Rel::Ge, app(var("x"), "f"), int_const(-2)));
    hyps.push_back(cmp(Rel::Le, app(var("x"), "f"), int_const(2)));
    hyps.push_back(cmp(Rel::Ge, app(var("y"), "f"), int_const(-2)));
    hyps.push_back(cmp(Rel::Le, app(var("y"), "f"), int_const(2)));
    hyps.push_back(gen.formula(2));
    Formula goal = gen.formula(2);
    VerificationResult r = prove(hyps, goal);
    bool counter = oracle::find_countermodel(hyps, goal, vars, {"f"}, -2, 2).has_value();
    ASSERT_NE(r.kind, Kind::Unknown) << to_string(goal);
    EXPECT_EQ(r.kind == Kind::Valid, !counter) << "seed " << seed << ": " << to_string(goal);
  }
}

TEST(Prover, HypothesisOrderDoesNotMatter) {
  std::vector<std::string> vars = {"x", "y"};
  std::mt19937_64 rng(5);
  for (std::uint64_t seed = 0; seed < 150; ++seed) {
    FormulaGen gen(seed, vars, {"f"});
    std::vector<Formula> hyps;
    for (int i = 0; i < 4; ++i) hyps.push_back(gen.formula(2));
    Formula goal = gen.formula(1);
    VerificationResult base = prove(hyps, goal);
    for (int k = 0; k < 3; ++k) {
      std::shuffle(hyps.begin(), hyps.end(), rng);
      EXPECT_EQ(prove(hyps, goal), base);
    }
  }
}

TEST(Prover, BackendCountsCalls) {
  BuiltinBackend b;
  EXPECT_EQ(implies({F("x > 1")}, F("x > 0"), b).kind, Kind::Valid);
  EXPECT_EQ(implies({F("x > 0")}, F("x > 1"), b).kind, Kind::Invalid);
  EXPECT_EQ(b.calls(), 2);
}
