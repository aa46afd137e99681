#include "traitcbc/parser.hpp"

#include <array>
#include <cctype>
#include <limits>
#include <optional>
#include <sstream>

namespace tcbc {

namespace {

std::string describe(int line, int column, const std::vector<std::string>& expected,
                     const std::string& found) {
  std::ostringstream os;
  os << line << ':' << column << ": expected ";
  if (expected.size() == 1) {
    os << expected.front();
  } else {
    os << "one of ";
    for (std::size_t i = 0; i < expected.size(); ++i) {
      if (i) os << ", ";
      os << expected[i];
    }
  }
  os << ", found " << found;
  return os.str();
}

}  // namespace

ParseError::ParseError(int line, int column, std::vector<std::string> expected, std::string found)
    : std::runtime_error(describe(line, column, expected, found)),
      line_(line),
      column_(column),
      expected_(std::move(expected)),
      found_(std::move(found)) {}

namespace {

enum class Tok { Ident, Int, Punct, End };

struct Token {
  Tok kind;
  std::string text;
  std::int64_t value = 0;
  int line = 1;
  int column = 1;
};

constexpr std::array<std::string_view, 13> kKeywords = {
    "trait", "class", "interface", "implements", "abstract", "new",  "if",
    "elseif", "else", "forall",  "exists",     "true",     "false"};

bool is_keyword(std::string_view s) {
  for (auto k : kKeywords) {
    if (k == s) return true;
  }
  return s == "makeAbstract";
}

// Longest first so that "==>" wins over "==" and "=".
constexpr std::array<std::string_view, 26> kPuncts = {
    "==>", "==", "!=", "<=", ">=", "{", "}", "(", ")", "[", "]", ",", ";",
    ".",   ":",  "=",  "<",  ">",  "+", "-", "*", "&", "|", "!", "@", "/"};

class Lexer {
 public:
  explicit Lexer(std::string_view src) : src_(src) {}

  std::vector<Token> run() {
    std::vector<Token> out;
    for (;;) {
      skip_space();
      Token t;
      t.line = line_;
      t.column = col_;
      if (pos_ >= src_.size()) {
        t.kind = Tok::End;
        t.text = "end of input";
        out.push_back(t);
        return out;
      }
      char c = src_[pos_];
      if (std::isalpha(static_cast<unsigned char>(c))) {
        std::size_t start = pos_;
        while (pos_ < src_.size() &&
               (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_')) {
          advance();
        }
        t.kind = Tok::Ident;
        t.text = std::string(src_.substr(start, pos_ - start));
      } else if (c == '_') {
        throw ParseError(t.line, t.column, {"identifier"},
                         "'_' (identifiers starting with '_' are reserved)");
      } else if (std::isdigit(static_cast<unsigned char>(c))) {
        std::size_t start = pos_;
        std::int64_t value = 0;
        while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) {
          int d = src_[pos_] - '0';
          if (value > (std::numeric_limits<std::int64_t>::max() - d) / 10) {
            throw ParseError(t.line, t.column, {"integer literal"}, "integer out of range");
          }
          value = value * 10 + d;
          advance();
        }
        t.kind = Tok::Int;
        t.value = value;
        t.text = std::string(src_.substr(start, pos_ - start));
      } else {
        bool matched = false;
        for (auto p : kPuncts) {
          if (src_.substr(pos_, p.size()) == p) {
            t.kind = Tok::Punct;
            t.text = std::string(p);
            for (std::size_t i = 0; i < p.size(); ++i) advance();
            matched = true;
            break;
          }
        }
        if (!matched || t.text == "/") {
          std::string found = "'";
          found += c;
          found += "'";
          if (!std::isprint(static_cast<unsigned char>(c))) found = "byte " + std::to_string(static_cast<unsigned char>(c));
          throw ParseError(t.line, t.column, {"token"}, found);
        }
      }
      out.push_back(std::move(t));
    }
  }

 private:
  void advance() {
    if (src_[pos_] == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    ++pos_;
  }

  void skip_space() {
    while (pos_ < src_.size()) {
      char c = src_[pos_];
      if (std::isspace(static_cast<unsigned char>(c))) {
        advance();
      } else if (c == '/' && pos_ + 1 < src_.size() && src_[pos_ + 1] == '/') {
        while (pos_ < src_.size() && src_[pos_] != '\n') advance();
      } else {
        break;
      }
    }
  }

  std::string_view src_;
  std::size_t pos_ = 0;
  int line_ = 1;
  int col_ = 1;
};

constexpr int kMaxDepth = 200;

class Parser {
 public:
  explicit Parser(std::string_view src) : toks_(Lexer(src).run()) {}

  Program program() {
    Program p;
    while (at_ident("trait") || at_ident("class")) p.definitions.push_back(definition());
    if (at_ident("main")) {
      next();
      expect("=");
      p.main = expression();
      accept(";");
    }
    if (peek().kind != Tok::End) fail({"'trait'", "'class'", "'main'", "end of input"});
    return p;
  }

  Formula whole_formula() {
    Formula f = formula();
    if (peek().kind != Tok::End) fail({"end of input"});
    return f;
  }

  Expr whole_expression() {
    Expr e = expression();
    if (peek().kind != Tok::End) fail({"end of input"});
    return e;
  }

 private:
  struct DepthGuard {
    explicit DepthGuard(Parser& p) : p(p) {
      if (++p.depth_ > kMaxDepth) p.fail({"shallower nesting"});
    }
    ~DepthGuard() { --p.depth_; }
    Parser& p;
  };

  const Token& peek(std::size_t ahead = 0) const {
    std::size_t i = std::min(pos_ + ahead, toks_.size() - 1);
    return toks_[i];
  }
  const Token& next() {
    const Token& t = toks_[pos_];
    if (pos_ + 1 < toks_.size()) ++pos_;
    return t;
  }
  bool at(std::string_view punct) const {
    return peek().kind == Tok::Punct && peek().text == punct;
  }
  bool at_ident(std::string_view word) const {
    return peek().kind == Tok::Ident && peek().text == word;
  }
  bool accept(std::string_view punct) {
    if (!at(punct)) return false;
    next();
    return true;
  }
  void expect(std::string_view punct) {
    if (!accept(punct)) fail({"'" + std::string(punct) + "'"});
  }
  void expect_keyword(std::string_view word) {
    if (!at_ident(word)) fail({"'" + std::string(word) + "'"});
    next();
  }

  [[noreturn]] void fail(std::vector<std::string> expected) const {
    const Token& t = peek();
    std::string found = t.kind == Tok::End ? t.text : "'" + t.text + "'";
    throw ParseError(t.line, t.column, std::move(expected), std::move(found));
  }

  std::string identifier(const char* what) {
    if (peek().kind != Tok::Ident || is_keyword(peek().text)) fail({what});
    return next().text;
  }

  // ---- definitions and trait expressions --------------------------------

  Definition definition() {
    int line = peek().line;
    DefKind kind = next().text == "trait" ? DefKind::Trait : DefKind::Class;
    std::string name = identifier("definition name");
    if (!at("{")) expect("=");
    TraitExpr e = trait_expr();
    accept(";");
    return Definition{std::move(name), kind, std::move(e), line};
  }

  TraitExpr trait_expr() {
    DepthGuard guard(*this);
    TraitExpr lhs = trait_postfix();
    while (accept("+")) lhs = tplus(lhs, trait_postfix());
    return lhs;
  }

  TraitExpr trait_postfix() {
    TraitExpr e = trait_primary();
    while (accept("[")) {
      expect_keyword("makeAbstract");
      std::string m = identifier("method name");
      expect("]");
      e = tabstract(e, std::move(m));
    }
    return e;
  }

  TraitExpr trait_primary() {
    if (at("{")) return tbody(body());
    if (accept("(")) {
      TraitExpr e = trait_expr();
      expect(")");
      return e;
    }
    if (peek().kind == Tok::Ident && !is_keyword(peek().text)) return tref(next().text);
    fail({"'{'", "'('", "trait or class name"});
  }

  Body body() {
    expect("{");
    Body b;
    if (at_ident("interface")) {
      next();
      b.is_interface = true;
    }
    if (at_ident("implements")) {
      next();
      b.interfaces.push_back(identifier("interface name"));
      while (accept(",")) b.interfaces.push_back(identifier("interface name"));
    }
    while (!at("}")) {
      if (peek().kind == Tok::End) fail({"method", "'}'"});
      b.methods.push_back(method());
    }
    expect("}");
    return b;
  }

  Method method() {
    Method m;
    bool seen_pre = false;
    bool seen_post = false;
    while (accept("@")) {
      if (at_ident("Pre") && !seen_pre) {
        next();
        expect(":");
        m.header.spec.pre = formula();
        seen_pre = true;
      } else if (at_ident("Post") && !seen_post) {
        next();
        expect(":");
        m.header.spec.post = formula();
        seen_post = true;
      } else {
        std::vector<std::string> expected;
        if (!seen_pre) expected.push_back("'Pre'");
        if (!seen_post) expected.push_back("'Post'");
        fail(expected);
      }
    }
    if (at_ident("abstract")) next();
    m.header.return_type = identifier("return type");
    m.header.name = identifier("method name");
    expect("(");
    if (!at(")")) {
      do {
        Param p;
        p.type = identifier("parameter type");
        p.name = identifier("parameter name");
        m.header.params.push_back(std::move(p));
      } while (accept(","));
    }
    expect(")");
    if (accept("=")) m.body = expression();
    accept(";");
    return m;
  }

  // ---- expressions ------------------------------------------------------

  std::vector<Expr> expr_args() {
    expect("(");
    std::vector<Expr> args;
    if (!at(")")) {
      do {
        args.push_back(expression());
      } while (accept(","));
    }
    expect(")");
    return args;
  }

  Expr expression() {
    DepthGuard guard(*this);
    Expr e = expr_primary();
    while (accept(".")) {
      std::string m = identifier("method name");
      e = ecall(e, std::move(m), expr_args());
    }
    return e;
  }

  Expr expr_primary() {
    const Token& t = peek();
    if (t.kind == Tok::Int) {
      next();
      return eint(t.value);
    }
    if (at("-") && peek(1).kind == Tok::Int) {
      next();
      return eint(-next().value);
    }
    if (accept("(")) {
      Expr e = expression();
      expect(")");
      return e;
    }
    if (at_ident("new")) {
      next();
      std::string cls = identifier("class name");
      return enew(std::move(cls), expr_args());
    }
    if (at_ident("if")) return if_expr();
    if (t.kind == Tok::Ident && !is_keyword(t.text)) {
      std::string name = next().text;
      if (at("(")) return ecall(evar(kThis), std::move(name), expr_args());
      return evar(std::move(name));
    }
    fail({"expression"});
  }

  Expr if_expr() {
    expect_keyword("if");
    Formula guard = paren_formula();
    Expr then_branch = braced_expr();
    std::vector<std::pair<Formula, Expr>> chain;
    while (at_ident("elseif")) {
      next();
      Formula g = paren_formula();
      chain.emplace_back(std::move(g), braced_expr());
    }
    expect_keyword("else");
    Expr tail = braced_expr();
    for (auto it = chain.rbegin(); it != chain.rend(); ++it) tail = eif(it->first, it->second, tail);
    return eif(std::move(guard), std::move(then_branch), std::move(tail));
  }

  Formula paren_formula() {
    expect("(");
    Formula f = formula();
    expect(")");
    return f;
  }

  Expr braced_expr() {
    expect("{");
    Expr e = expression();
    expect("}");
    return e;
  }

  // ---- formulas ---------------------------------------------------------

  Formula formula() {
    DepthGuard guard(*this);
    if (at_ident("forall") || at_ident("exists")) return quantified();
    Formula lhs = disjunction();
    if (accept("==>")) return imp(lhs, formula());
    return lhs;
  }

  Formula quantified() {
    bool is_forall = next().text == "forall";
    std::string cls = identifier("binder type");
    std::string v = identifier("binder name");
    expect(":");
    Formula body = formula();
    return is_forall ? forall(std::move(v), std::move(cls), std::move(body))
                     : exists(std::move(v), std::move(cls), std::move(body));
  }

  Formula disjunction() {
    Formula lhs = conjunction();
    while (accept("|")) lhs = disj(lhs, conjunction());
    return lhs;
  }

  Formula conjunction() {
    Formula lhs = unary();
    while (accept("&")) lhs = conj(lhs, unary());
    return lhs;
  }

  Formula unary() {
    DepthGuard guard(*this);
    if (accept("!")) return neg(unary());
    if (at_ident("forall") || at_ident("exists")) return quantified();
    return atom();
  }

  std::optional<Rel> relop() const {
    if (peek().kind != Tok::Punct) return std::nullopt;
    const std::string& s = peek().text;
    if (s == "==" || s == "=") return Rel::Eq;
    if (s == "!=") return Rel::Ne;
    if (s == "<") return Rel::Lt;
    if (s == "<=") return Rel::Le;
    if (s == ">") return Rel::Gt;
    if (s == ">=") return Rel::Ge;
    return std::nullopt;
  }

  Formula atom_after_term(Term t) {
    if (auto r = relop()) {
      next();
      return cmp(*r, std::move(t), term());
    }
    if (accept(":")) return has_type(std::move(t), identifier("class name"));
    return pred(std::move(t));
  }

  Formula atom() {
    if (at_ident("true")) {
      next();
      return top();
    }
    if (at_ident("false")) {
      next();
      return bottom();
    }
    if (at("(")) {
      std::size_t saved = pos_;
      int saved_depth = depth_;
      try {
        Term t = term();
        return atom_after_term(std::move(t));
      } catch (const ParseError&) {
        pos_ = saved;
        depth_ = saved_depth;
      }
      next();
      Formula f = formula();
      expect(")");
      return f;
    }
    return atom_after_term(term());
  }

  // ---- terms ------------------------------------------------------------

  std::vector<Term> term_args() {
    expect("(");
    std::vector<Term> args;
    if (!at(")")) {
      do {
        args.push_back(term());
      } while (accept(","));
    }
    expect(")");
    return args;
  }

  Term term() {
    DepthGuard guard(*this);
    Term lhs = term_mul();
    for (;;) {
      if (accept("+")) {
        lhs = arith(ArithOp::Add, lhs, term_mul());
      } else if (accept("-")) {
        lhs = arith(ArithOp::Sub, lhs, term_mul());
      } else {
        return lhs;
      }
    }
  }

  Term term_mul() {
    Term lhs = term_postfix();
    while (accept("*")) lhs = arith(ArithOp::Mul, lhs, term_postfix());
    return lhs;
  }

  Term term_postfix() {
    Term t = term_primary();
    while (accept(".")) {
      std::string m = identifier("method name");
      t = app(t, std::move(m), term_args());
    }
    return t;
  }

  Term term_primary() {
    DepthGuard guard(*this);
    const Token& t = peek();
    if (t.kind == Tok::Int) {
      next();
      return int_const(t.value);
    }
    if (accept("-")) {
      if (peek().kind == Tok::Int) return int_const(-next().value);
      return arith(ArithOp::Sub, int_const(0), term_primary());
    }
    if (accept("(")) {
      Term inner = term();
      expect(")");
      return inner;
    }
    if (at_ident("new")) {
      next();
      std::string cls = identifier("class name");
      return ctor(std::move(cls), term_args());
    }
    if (t.kind == Tok::Ident && !is_keyword(t.text)) {
      std::string name = next().text;
      if (at("(")) return app(var(kThis), std::move(name), term_args());
      return var(std::move(name));
    }
    fail({"term"});
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
  int depth_ = 0;
};

}  // namespace

Program parse_program(std::string_view text) { return Parser(text).program(); }

Formula parse_formula(std::string_view text) { return Parser(text).whole_formula(); }

Expr parse_expression(std::string_view text) { return Parser(text).whole_expression(); }

}  // namespace tcbc
