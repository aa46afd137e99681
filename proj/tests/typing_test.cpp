#include <gtest/gtest.h>

#include <algorithm>
#include <random>
#include <set>

#include "oracles.hpp"
#include "test_util.hpp"
#include "traitcbc/flatten.hpp"
#include "traitcbc/parser.hpp"
#include "traitcbc/printer.hpp"
#include "traitcbc/typing.hpp"

using namespace tcbc;

namespace {

Formula F(const char* text) { return parse_formula(text); }

std::set<std::string> strings(const std::vector<Formula>& fs) {
  std::set<std::string> out;
  for (const auto& f : fs) out.insert(to_string(f));
  return out;
}

struct Fixture {
  Program program;
  FlattenResult flat;
  BuiltinBackend backend;

  explicit Fixture(const std::string& text) : program(parse_program(text)) {
    flat = flatten_program(program, backend);
  }

  Body body(const std::string& def) const {
    const auto* rep = flat.find(def);
    return rep->bodies.at(0).body;
  }
};

const char* kPair = R"(
class Pair = {
  @Post: result >= 0
  Num fst();

  @Pre: this.fst() > 0
  Num snd();
}

trait Maker = {
  Pair make(Num a, Num b) = new Pair(a, b)

  @Post: result == x
  Num id(Num x) = x

  Pair twice(Num a) = new Pair(id(a), a)
}
)";

}  // namespace

TEST(Typing, VariableRule) {
  Fixture fx(kPair);
  Body self = fx.body("Maker");
  Scope scope{&fx.flat.table, "Maker", &self};
  FreshVars fresh;
  TypeEnv env{{"this", "Maker"}, {"a", "Num"}};
  TypedResult r = type_expr(scope, env, evar("a"), fresh);
  EXPECT_EQ(r.type, "Num");
  EXPECT_EQ(to_string(r.knowledge), "result : Num & result == a");
  EXPECT_TRUE(is_true(r.obligation));
  EXPECT_TRUE(fresh.issued().empty());
}

TEST(Typing, IntegerLiteral) {
  Fixture fx(kPair);
  Scope scope{&fx.flat.table, "Maker", nullptr};
  FreshVars fresh;
  TypedResult r = type_expr(scope, {{"this", "Maker"}}, eint(7), fresh);
  EXPECT_EQ(r.type, "Num");
  EXPECT_EQ(to_string(r.knowledge), "result : Num & result == 7");
}

TEST(Typing, UnknownVariableIsTypeError) {
  Fixture fx(kPair);
  Scope scope{&fx.flat.table, "Maker", nullptr};
  FreshVars fresh;
  EXPECT_THROW(type_expr(scope, {{"this", "Maker"}}, evar("nope"), fresh), TypeError);
}

TEST(Typing, AccessHeadObligation) {
  Program p = tcbc::testing::load_corpus("maxe.tcbc");
  BuiltinBackend backend;
  FlattenResult flat = flatten_program(p, backend);
  Body self = flat.find("MaxETrait3")->bodies.at(0).body;
  Scope scope{&flat.table, "MaxETrait3", &self};
  Obligation ob = method_obligation(scope, *self.find("accessHead"));
  std::set<std::string> expected{"this : MaxETrait3", "list : List",  "list.size() > 0", "result : Num",
                                 "_f0 : List",        "_f0 == list",  "true ==> result == _f0.element()"};
  EXPECT_EQ(strings(ob.hypotheses), expected);
  EXPECT_EQ(to_string(ob.goal), "result == list.element()");
  EXPECT_TRUE(backend.discharge(ob).is_valid());
}

TEST(Typing, FreshVariablesFollowSubexpressions) {
  Fixture fx(kPair);
  Body self = fx.body("Maker");
  Scope scope{&fx.flat.table, "Maker", &self};
  FreshVars fresh;
  TypeEnv env{{"this", "Maker"}, {"a", "Num"}};
  type_expr(scope, env, parse_expression("this.id(this.id(a))"), fresh);
  // inner call: this -> _f0, a -> _f1; outer: this -> _f2, inner result -> _f3
  ASSERT_EQ(fresh.issued().size(), 4u);
  EXPECT_EQ(fresh.issued()[2].second, "Maker");
  EXPECT_EQ(fresh.issued()[3].second, "Num");
}

TEST(Typing, NewRequiresGetterPreconditions) {
  Fixture fx(kPair);
  Body self = fx.body("Maker");
  Scope scope{&fx.flat.table, "Maker", &self};
  FreshVars fresh;
  TypeEnv env{{"this", "Maker"}, {"a", "Num"}, {"b", "Num"}};
  TypedResult r = type_expr(scope, env, parse_expression("new Pair(a, b)"), fresh);
  EXPECT_EQ(r.type, "Pair");
  auto know = strings(conjuncts(r.knowledge));
  EXPECT_TRUE(know.count("true ==> result.fst() == _f0"));
  EXPECT_TRUE(know.count("result.fst() > 0 ==> result.snd() == _f1"));
  EXPECT_EQ(to_string(r.obligation), "result.fst() > 0");
  const auto* maker = fx.flat.find("Maker");
  auto checks = maker->bodies.at(0).checks;
  auto make = std::find_if(checks.begin(), checks.end(), [](const MethodCheck& c) { return c.method == "make"; });
  EXPECT_EQ(make->result.kind, VerificationResult::Kind::Invalid);
}

TEST(Typing, NewRejections) {
  Fixture fx(R"(
class Pair = { Num fst(); Num snd(); }
trait T = { Num x(); }
class Open = { Num f(Num a); }
class I = { interface Num f(); }
)");
  Scope scope{&fx.flat.table, "T", nullptr};
  TypeEnv env{{"this", "T"}};
  for (const char* e : {"new Pair(1)", "new T()", "new Open()", "new I(1)", "new Nowhere()", "new Pair(1, new Pair(1, 2))"}) {
    FreshVars fresh;
    EXPECT_THROW(type_expr(scope, env, parse_expression(e), fresh), TypeError) << e;
  }
}

TEST(Typing, CallErrors) {
  Fixture fx(kPair);
  Body self = fx.body("Maker");
  Scope scope{&fx.flat.table, "Maker", &self};
  TypeEnv env{{"this", "Maker"}, {"a", "Num"}, {"p", "Pair"}};
  for (const char* e : {"a.fst()", "p.third()", "this.id()", "this.id(p)", "this.make(1)"}) {
    FreshVars fresh;
    EXPECT_THROW(type_expr(scope, env, parse_expression(e), fresh), TypeError) << e;
  }
}

TEST(Typing, ConditionalGuardsObligations) {
  Fixture fx(kPair);
  Body self = fx.body("Maker");
  Scope scope{&fx.flat.table, "Maker", &self};
  FreshVars fresh;
  TypeEnv env{{"this", "Maker"}, {"a", "Num"}};
  TypedResult r = type_expr(scope, env, parse_expression("if (a > 0) {new Pair(a, a)} else {new Pair(1, 1)}"), fresh);
  EXPECT_EQ(r.type, "Pair");
  auto obl = conjuncts(r.obligation);
  ASSERT_EQ(obl.size(), 2u);
  EXPECT_TRUE(std::holds_alternative<formula::Implies>(obl[0].node().v));
  EXPECT_TRUE(std::holds_alternative<formula::Implies>(obl[1].node().v));
  FreshVars again;
  EXPECT_THROW(type_expr(scope, env, parse_expression("if (a > 0) {a} else {new Pair(1, 1)}"), again), TypeError);
  FreshVars third;
  EXPECT_THROW(type_expr(scope, env, parse_expression("if (zz > 0) {a} else {a}"), third), TypeError);
}

TEST(Typing, HeaderErrors) {
  BuiltinBackend backend;
  for (const char* text : {"trait T = { Nope m() = 1 }", "trait T = { Num m(Nope x) = 1 }",
                           "trait T = { @Pre: y > 0\n Num m(Num x) = x }",
                           "trait T = { @Post: result == y\n Num m(Num x) = x }",
                           "class P = { Num f(); }\ntrait T = { Num m() = new P(1) }"}) {
    Program p = parse_program(text);
    FlattenResult flat = flatten_program(p, backend);
    const auto& checks = flat.find("T")->bodies.at(0).checks;
    ASSERT_EQ(checks.size(), 1u) << text;
    EXPECT_TRUE(checks[0].type_error.has_value()) << text;
  }
}

TEST(Typing, ConditionalVerifiesBothBranches) {
  Fixture fx(R"(
trait Abs = {
  @Post: result >= 0 & (result == x | result == 0 - x)
  Num abs(Num x) = if (x >= 0) {x} else {this.neg(x)}

  @Post: result == 0 - x
  Num neg(Num x);
}
)");
  const auto& checks = fx.flat.find("Abs")->bodies.at(0).checks;
  EXPECT_TRUE(checks[0].ok()) << to_string(checks[0].result.kind) << " " << checks[0].result.detail;
}

TEST(Typing, SubtypingAtArgumentsAndReturn) {
  Fixture fx(R"(
class Shape = { interface @Post: result >= 0 Num area(); }
class Sq = { implements Shape Num side(); @Post: result >= 0 Num area() = 0 }
trait User = {
  Num use(Shape s) = s.area()
  Shape wrap() = new Sq(2)
  Num direct() = this.use(new Sq(3))
  Sq bad(Shape s) = s
}
)");
  const auto& checks = fx.flat.find("User")->bodies.at(0).checks;
  ASSERT_EQ(checks.size(), 4u);
  for (int i = 0; i < 3; ++i) EXPECT_TRUE(checks[i].ok()) << checks[i].method << (checks[i].type_error ? *checks[i].type_error : "");
  EXPECT_TRUE(checks[3].type_error.has_value());
}

// Floyd-Warshall closure over random implements graphs.
TEST(Typing, InstanceOfMatchesTransitiveClosure) {
  std::mt19937_64 rng(11);
  for (int round = 0; round < 200; ++round) {
    int n = 2 + static_cast<int>(rng() % 6);
    ClassTable table;
    std::vector<std::vector<bool>> reach(n, std::vector<bool>(n, false));
    for (int i = 0; i < n; ++i) {
      ClassInfo info;
      info.kind = DefKind::Class;
      for (int j = 0; j < n; ++j) {
        if (i != j && rng() % 3 == 0) {
          info.body.interfaces.push_back("C" + std::to_string(j));
          reach[i][j] = true;
        }
      }
      reach[i][i] = true;
      table["C" + std::to_string(i)] = info;
    }
    for (int k = 0; k < n; ++k)
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
          if (reach[i][k] && reach[k][j]) reach[i][j] = true;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        EXPECT_EQ(instance_of(table, "C" + std::to_string(i), "C" + std::to_string(j)), reach[i][j]);
    EXPECT_FALSE(instance_of(table, "C0", "Num"));
    EXPECT_TRUE(instance_of(table, "Num", "Num"));
  }
}

TEST(Typing, OneVerifierCallPerConcreteMethod) {
  Program p = tcbc::testing::load_corpus("maxe.tcbc");
  BuiltinBackend flat_backend;
  FlattenResult flat = flatten_program(p, flat_backend);
  const auto& lit = flat.find("MaxETrait2")->bodies.at(0);
  BuiltinBackend backend;
  auto first = check_body(flat.table, "MaxETrait2", lit.body, backend);
  EXPECT_EQ(backend.calls(), 1);
  auto second = check_body(flat.table, "MaxETrait2", lit.body, backend);
  EXPECT_EQ(backend.calls(), 2);
  ASSERT_EQ(first.size(), second.size());
  for (std::size_t i = 0; i < first.size(); ++i) EXPECT_EQ(first[i].result, second[i].result);
}

TEST(Typing, ObligationRenderingIsDeterministic) {
  Program p = tcbc::testing::load_corpus("maxe.tcbc");
  BuiltinBackend backend;
  FlattenResult a = flatten_program(p, backend);
  FlattenResult b = flatten_program(tcbc::testing::load_corpus("maxe.tcbc"), backend);
  for (const char* def : {"MaxETrait2", "MaxETrait3", "MaxETrait4"}) {
    Body ba = a.find(def)->bodies.at(0).body;
    Body bb = b.find(def)->bodies.at(0).body;
    Scope sa{&a.table, def, &ba};
    Scope sb{&b.table, def, &bb};
    for (const auto& m : ba.methods) {
      if (m.is_abstract()) continue;
      EXPECT_EQ(render_vc(method_obligation(sa, m)), render_vc(method_obligation(sb, *bb.find(m.name()))));
    }
  }
}

TEST(Typing, ContractAxiomsSkipTheMethodItself) {
  Fixture fx(R"(
trait R = {
  @Post: result == 3
  Num m(Num x) = this.m(x)

  @Post: result == 3
  Num n(Num x) = this.m(x)
}
)");
  const auto& checks = fx.flat.find("R")->bodies.at(0).checks;
  EXPECT_TRUE(checks[0].ok());
  EXPECT_TRUE(checks[1].ok());
  Body self = fx.body("R");
  Scope scope{&fx.flat.table, "R", &self};
  Obligation ob = method_obligation(scope, *self.find("m"));
  for (const auto& b : ob.background) EXPECT_EQ(to_string(b).find("this.m(x)"), std::string::npos) << to_string(b);
  auto ax = contract_axioms(scope, {{"this", "R"}, {"y", "Num"}}, {F("this.m(y) > 0")});
  ASSERT_EQ(ax.size(), 1u);
  EXPECT_EQ(to_string(ax[0]), "this.m(y) == 3");
}

// Identity-like methods with random linear contracts: the verdict must agree
// with bounded enumeration whenever it claims validity.
TEST(Typing, VerdictsAgreeWithEnumeration) {
  oracle::FormulaGen gen(5, {"x", "result"});
  BuiltinBackend backend;
  int valid = 0;
  for (int i = 0; i < 150; ++i) {
    Formula pre = gen.formula(1);
    Formula post = gen.formula(1);
    if (free_vars(pre).count("result")) continue;
    Method m{MethodHeader{Spec{pre, post}, "Num", "f", {Param{"Num", "x"}}}, evar("x")};
    Body body;
    body.methods.push_back(m);
    ClassTable table;
    Scope scope{&table, "T", &body};
    MethodCheck c = check_method(scope, m, backend);
    ASSERT_FALSE(c.type_error) << *c.type_error;
    auto cm = oracle::find_countermodel({pre, F("result == x")}, post, {"x", "result"}, {}, -6, 6);
    if (c.result.is_valid()) {
      ++valid;
      EXPECT_FALSE(cm.has_value()) << to_string(pre) << " / " << to_string(post);
    }
    if (cm) EXPECT_FALSE(c.result.is_valid());
  }
  EXPECT_GT(valid, 10);
}
