#include "traitcbc/smtlib.hpp"

#include "traitcbc/ast.hpp"

#include <unistd.h>

#include <array>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <sys/wait.h>

namespace tcbc {

namespace {

const std::string kInt = "Int";
const std::string kBoolSort = "Bool";

std::string quote(const std::string& s) { return "|" + s + "|"; }

class Emitter {
 public:
  explicit Emitter(const Obligation& ob) : ob_(ob) {
    for (const auto& [v, cls] : ob.sorts) vars_.emplace(v, cls);
    for (const auto& [key, sig] : ob.signatures) {
      note_class(key.first);
      for (const auto& p : sig.params) note_class(p);
      note_class(sig.result);
      declare_fun(key.first, key.second, sig.params, sig.result);
    }
  }

  std::string script(const std::string& axioms) {
    std::vector<std::string> hyps;
    for (const auto& h : ob_.hypotheses) hyps.push_back(formula(h));
    for (const auto& h : ob_.background) hyps.push_back(formula(h));
    std::string goal = formula(ob_.goal);

    std::ostringstream os;
    os << "; " << ob_.label << "\n(set-logic ALL)\n";
    for (const auto& c : classes_) os << "(declare-sort " << quote(c) << " 0)\n";
    for (const auto& [v, cls] : vars_) os << "(declare-const " << quote(v) << ' ' << sort(cls) << ")\n";
    for (const auto& [name, decl] : funs_) {
      os << "(declare-fun " << quote(name) << " (";
      for (std::size_t i = 0; i < decl.first.size(); ++i) os << (i ? " " : "") << sort(decl.first[i]);
      os << ") " << sort(decl.second) << ")\n";
    }
    if (!axioms.empty()) {
      os << axioms;
      if (axioms.back() != '\n') os << '\n';
    }
    for (const auto& h : hyps) os << "(assert " << h << ")\n";
    os << "(assert (not " << goal << "))\n(check-sat)\n";
    return os.str();
  }

 private:
  void note_class(const std::string& c) {
    if (c != kNum && c != kBool && !c.empty()) classes_.insert(c);
  }

  static std::string sort(const std::string& cls) {
    if (cls == kNum) return kInt;
    if (cls == kBool) return kBoolSort;
    return quote(cls);
  }

  // Function symbol for (receiver class, method); the arity is appended only
  // when the same pair is used with different arities.
  std::string declare_fun(const std::string& cls, const std::string& method,
                          const std::vector<std::string>& params, const std::string& result) {
    std::string name = cls + "." + method;
    auto it = funs_.find(name);
    std::vector<std::string> domain{cls};
    domain.insert(domain.end(), params.begin(), params.end());
    if (it != funs_.end() && it->second.first.size() != domain.size()) {
      name += "/" + std::to_string(params.size());
      it = funs_.find(name);
    }
    if (it == funs_.end()) funs_.emplace(name, std::make_pair(domain, result));
    return name;
  }

  std::string sort_of(const Term& t) {
    const auto& v = t.node().v;
    if (const auto* x = std::get_if<term::Var>(&v)) {
      for (auto it = bound_.rbegin(); it != bound_.rend(); ++it) {
        if (it->first == x->name) return it->second;
      }
      auto found = vars_.find(x->name);
      if (found != vars_.end()) return found->second;
      vars_.emplace(x->name, kNum);
      return kNum;
    }
    if (const auto* a = std::get_if<term::App>(&v)) {
      auto sig = ob_.signatures.find({sort_of(a->receiver), a->method});
      return sig == ob_.signatures.end() ? kNum : sig->second.result;
    }
    if (const auto* n = std::get_if<term::New>(&v)) return n->cls;
    return kNum;
  }

  std::string term(const Term& t) {
    const auto& v = t.node().v;
    if (const auto* x = std::get_if<term::Var>(&v)) {
      sort_of(t);
      return quote(x->name);
    }
    if (const auto* i = std::get_if<term::Int>(&v)) {
      if (i->value < 0) {
        // Two's complement minimum has no positive counterpart.
        std::string digits = std::to_string(i->value).substr(1);
        return "(- " + digits + ")";
      }
      return std::to_string(i->value);
    }
    if (const auto* a = std::get_if<term::Arith>(&v)) {
      const char* op = a->op == ArithOp::Add ? "+" : a->op == ArithOp::Sub ? "-" : "*";
      return std::string("(") + op + " " + num(a->lhs) + " " + num(a->rhs) + ")";
    }
    if (const auto* a = std::get_if<term::App>(&v)) {
      std::string cls = sort_of(a->receiver);
      note_class(cls);
      std::vector<std::string> params;
      auto sig = ob_.signatures.find({cls, a->method});
      std::string result = kNum;
      if (sig != ob_.signatures.end() && sig->second.params.size() == a->args.size()) {
        params = sig->second.params;
        result = sig->second.result;
      } else {
        for (const auto& arg : a->args) params.push_back(sort_of(arg));
      }
      std::string name = declare_fun(cls, a->method, params, result);
      std::string out = "(" + quote(name) + " " + term(a->receiver);
      for (const auto& arg : a->args) out += " " + term(arg);
      return out + ")";
    }
    const auto& n = std::get<term::New>(v);
    note_class(n.cls);
    std::vector<std::string> params;
    for (const auto& arg : n.args) params.push_back(sort_of(arg));
    std::string name = "new." + n.cls;
    funs_.emplace(name, std::make_pair(params, n.cls));
    if (n.args.empty()) return quote(name);
    std::string out = "(" + quote(name);
    for (const auto& arg : n.args) out += " " + term(arg);
    return out + ")";
  }

  // Arithmetic operands must be integers; a Bool-valued operand is coerced.
  std::string num(const Term& t) {
    std::string s = term(t);
    if (sort_of(t) == kBool) return "(ite " + s + " 1 0)";
    return s;
  }

  std::string formula(const Formula& f) {
    const auto& v = f.node().v;
    if (std::holds_alternative<formula::True>(v)) return "true";
    if (std::holds_alternative<formula::False>(v)) return "false";
    if (std::holds_alternative<formula::HasType>(v)) return "true";
    if (const auto* c = std::get_if<formula::Cmp>(&v)) {
      bool boolean = sort_of(c->lhs) == kBool && sort_of(c->rhs) == kBool;
      std::string l = boolean ? term(c->lhs) : num_or_object(c->lhs);
      std::string r = boolean ? term(c->rhs) : num_or_object(c->rhs);
      switch (c->rel) {
        case Rel::Eq: return "(= " + l + " " + r + ")";
        case Rel::Ne: return "(not (= " + l + " " + r + "))";
        case Rel::Lt: return "(< " + l + " " + r + ")";
        case Rel::Le: return "(<= " + l + " " + r + ")";
        case Rel::Gt: return "(> " + l + " " + r + ")";
        case Rel::Ge: return "(>= " + l + " " + r + ")";
      }
    }
    if (const auto* p = std::get_if<formula::Pred>(&v)) {
      std::string t = term(p->term);
      return sort_of(p->term) == kBool ? t : "(>= " + t + " 1)";
    }
    if (const auto* n = std::get_if<formula::Not>(&v)) return "(not " + formula(n->arg) + ")";
    if (const auto* a = std::get_if<formula::And>(&v)) return "(and " + formula(a->lhs) + " " + formula(a->rhs) + ")";
    if (const auto* o = std::get_if<formula::Or>(&v)) return "(or " + formula(o->lhs) + " " + formula(o->rhs) + ")";
    if (const auto* i = std::get_if<formula::Implies>(&v)) return "(=> " + formula(i->lhs) + " " + formula(i->rhs) + ")";
    const auto& q = std::get<formula::Quant>(v);
    note_class(q.cls);
    bound_.emplace_back(q.var, q.cls);
    std::string body = formula(q.body);
    bound_.pop_back();
    return std::string("(") + (q.kind == Quantifier::Forall ? "forall" : "exists") + " ((" + quote(q.var) +
           " " + sort(q.cls) + ")) " + body + ")";
  }

  std::string num_or_object(const Term& t) {
    std::string s = sort_of(t);
    return s == kBool ? num(t) : term(t);
  }

  const Obligation& ob_;
  std::map<std::string, std::string> vars_;
  std::vector<std::pair<std::string, std::string>> bound_;
  std::set<std::string> classes_;
  std::map<std::string, std::pair<std::vector<std::string>, std::string>> funs_;
};

// ---- lint ----------------------------------------------------------------------

struct SExpr {
  bool atom = true;
  std::string text;
  std::vector<SExpr> kids;
};

class SExprReader {
 public:
  explicit SExprReader(const std::string& s) : s_(s) {}

  // Top-level expressions; reports unbalanced parentheses into `issues`.
  std::vector<SExpr> read_all(std::vector<std::string>& issues) {
    std::vector<SExpr> out;
    std::vector<SExpr> stack;
    for (;;) {
      skip();
      if (pos_ >= s_.size()) break;
      char c = s_[pos_];
      if (c == '(') {
        ++pos_;
        SExpr e;
        e.atom = false;
        stack.push_back(std::move(e));
        continue;
      }
      if (c == ')') {
        ++pos_;
        if (stack.empty()) {
          issues.push_back("unbalanced ')' at offset " + std::to_string(pos_ - 1));
          continue;
        }
        SExpr done = std::move(stack.back());
        stack.pop_back();
        (stack.empty() ? out : stack.back().kids).push_back(std::move(done));
        continue;
      }
      SExpr a;
      a.text = atom();
      (stack.empty() ? out : stack.back().kids).push_back(std::move(a));
    }
    if (!stack.empty()) issues.push_back(std::to_string(stack.size()) + " unclosed '('");
    return out;
  }

 private:
  void skip() {
    while (pos_ < s_.size()) {
      if (std::isspace(static_cast<unsigned char>(s_[pos_]))) {
        ++pos_;
      } else if (s_[pos_] == ';') {
        while (pos_ < s_.size() && s_[pos_] != '\n') ++pos_;
      } else {
        break;
      }
    }
  }

  std::string atom() {
    std::size_t start = pos_;
    if (s_[pos_] == '|') {
      ++pos_;
      while (pos_ < s_.size() && s_[pos_] != '|') ++pos_;
      if (pos_ < s_.size()) ++pos_;
      return s_.substr(start + 1, pos_ - start - 2);
    }
    if (s_[pos_] == '"') {
      ++pos_;
      while (pos_ < s_.size() && s_[pos_] != '"') ++pos_;
      if (pos_ < s_.size()) ++pos_;
      return s_.substr(start, pos_ - start);
    }
    while (pos_ < s_.size() && !std::isspace(static_cast<unsigned char>(s_[pos_])) && s_[pos_] != '(' &&
           s_[pos_] != ')' && s_[pos_] != ';') {
      ++pos_;
    }
    return s_.substr(start, pos_ - start);
  }

  const std::string& s_;
  std::size_t pos_ = 0;
};

const std::set<std::string>& builtin_functions() {
  static const std::set<std::string> names = {"true", "false", "not", "and", "or", "=>", "xor", "=",
                                              "distinct", "ite", "+", "-", "*", "div", "mod", "abs",
                                              "<", "<=", ">", ">="};
  return names;
}

class Linter {
 public:
  std::vector<std::string> issues;

  void run(const std::vector<SExpr>& commands) {
    int check_sats = 0;
    for (std::size_t i = 0; i < commands.size(); ++i) {
      const SExpr& c = commands[i];
      if (c.atom || c.kids.empty() || !c.kids[0].atom) {
        issues.push_back("top-level form is not a command");
        continue;
      }
      const std::string& head = c.kids[0].text;
      if (head == "check-sat") {
        ++check_sats;
        if (i + 1 != commands.size()) issues.push_back("(check-sat) is not the last command");
      } else if (head == "set-logic" || head == "set-option" || head == "set-info") {
      } else if (head == "declare-sort") {
        if (c.kids.size() < 2) issues.push_back("malformed declare-sort");
        else sorts_.insert(c.kids[1].text);
      } else if (head == "declare-const") {
        if (c.kids.size() != 3) {
          issues.push_back("malformed declare-const");
          continue;
        }
        check_sort(c.kids[2]);
        funs_.insert(c.kids[1].text);
      } else if (head == "declare-fun") {
        if (c.kids.size() != 4 || c.kids[2].atom) {
          issues.push_back("malformed declare-fun");
          continue;
        }
        for (const auto& s : c.kids[2].kids) check_sort(s);
        check_sort(c.kids[3]);
        funs_.insert(c.kids[1].text);
      } else if (head == "define-fun") {
        if (c.kids.size() != 5 || c.kids[2].atom) {
          issues.push_back("malformed define-fun");
          continue;
        }
        std::vector<std::string> locals;
        for (const auto& b : c.kids[2].kids) {
          if (b.atom || b.kids.size() != 2) {
            issues.push_back("malformed parameter in define-fun");
            continue;
          }
          check_sort(b.kids[1]);
          locals.push_back(b.kids[0].text);
        }
        check_sort(c.kids[3]);
        scopes_.push_back(locals);
        check_term(c.kids[4]);
        scopes_.pop_back();
        funs_.insert(c.kids[1].text);
      } else if (head == "assert") {
        if (c.kids.size() != 2) issues.push_back("malformed assert");
        else check_term(c.kids[1]);
      } else if (head == "exit" || head == "get-model" || head == "push" || head == "pop") {
      } else {
        issues.push_back("unknown command '" + head + "'");
      }
    }
    if (check_sats == 0) issues.push_back("no (check-sat)");
    if (check_sats > 1) issues.push_back("more than one (check-sat)");
  }

 private:
  void check_sort(const SExpr& s) {
    if (!s.atom) {
      for (const auto& k : s.kids) check_sort(k);
      return;
    }
    if (s.text == "Int" || s.text == "Bool" || s.text == "Real" || sorts_.count(s.text)) return;
    issues.push_back("sort '" + s.text + "' used before declaration");
  }

  bool bound(const std::string& name) const {
    for (const auto& scope : scopes_) {
      for (const auto& n : scope) {
        if (n == name) return true;
      }
    }
    return false;
  }

  void check_symbol(const std::string& name) {
    if (name.empty()) return;
    if (std::isdigit(static_cast<unsigned char>(name[0])) || name[0] == '"') return;
    if (builtin_functions().count(name) || funs_.count(name) || bound(name)) return;
    issues.push_back("symbol '" + name + "' used before declaration");
  }

  void check_term(const SExpr& t) {
    if (t.atom) {
      check_symbol(t.text);
      return;
    }
    if (t.kids.empty()) {
      issues.push_back("empty application");
      return;
    }
    const SExpr& head = t.kids[0];
    if (head.atom && (head.text == "forall" || head.text == "exists" || head.text == "let")) {
      if (t.kids.size() != 3 || t.kids[1].atom) {
        issues.push_back("malformed " + head.text);
        return;
      }
      std::vector<std::string> locals;
      for (const auto& b : t.kids[1].kids) {
        if (b.atom || b.kids.size() != 2) {
          issues.push_back("malformed binder in " + head.text);
          continue;
        }
        if (head.text == "let") check_term(b.kids[1]);
        else check_sort(b.kids[1]);
        locals.push_back(b.kids[0].text);
      }
      scopes_.push_back(locals);
      check_term(t.kids[2]);
      scopes_.pop_back();
      return;
    }
    if (head.atom && head.text == "!") {
      if (t.kids.size() >= 2) check_term(t.kids[1]);
      return;
    }
    if (head.atom) check_symbol(head.text);
    else check_term(head);
    for (std::size_t i = 1; i < t.kids.size(); ++i) check_term(t.kids[i]);
  }

  std::set<std::string> sorts_;
  std::set<std::string> funs_;
  std::vector<std::vector<std::string>> scopes_;
};

}  // namespace

std::string emit_smtlib(const Obligation& ob, const std::string& axioms) {
  return Emitter(ob).script(axioms);
}

std::vector<std::string> lint_smtlib(const std::string& text) {
  std::vector<std::string> issues;
  SExprReader reader(text);
  auto commands = reader.read_all(issues);
  Linter l;
  l.run(commands);
  issues.insert(issues.end(), l.issues.begin(), l.issues.end());
  return issues;
}

std::optional<std::string> solver_from_env() {
  const char* s = std::getenv("TCBC_SMT_SOLVER");
  if (!s || !*s) return std::nullopt;
  return std::string(s);
}

std::vector<std::string> SmtLibBackend::written() const {
  std::lock_guard<std::mutex> lock(mu_);
  return written_;
}

std::string SmtLibBackend::next_path(const std::string& label) {
  std::lock_guard<std::mutex> lock(mu_);
  std::string path;
  if (!options_.out_dir.empty()) {
    int k = counters_[label]++;
    path = (std::filesystem::path(options_.out_dir) / (label + "." + std::to_string(k) + ".smt2")).string();
  } else {
    std::string tmpl = (std::filesystem::temp_directory_path() / "tcbc-XXXXXX.smt2").string();
    std::vector<char> buf(tmpl.begin(), tmpl.end());
    buf.push_back('\0');
    int fd = mkstemps(buf.data(), 5);
    if (fd < 0) throw BackendUnavailable("cannot create a temporary file for " + label);
    close(fd);
    path = buf.data();
  }
  written_.push_back(path);
  return path;
}

VerificationResult SmtLibBackend::run(const Obligation& ob) {
  std::string text = emit_smtlib(ob, options_.axioms);
  std::string path = next_path(ob.label);
  {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw BackendUnavailable("cannot write " + path);
    out << text;
  }
  if (!options_.solver) return VerificationResult::unknown("no solver configured");

  std::string cmd = *options_.solver + " '" + path + "' 2>&1";
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) throw BackendUnavailable("cannot start solver: " + *options_.solver);
  std::string output;
  std::array<char, 4096> buf;
  while (std::size_t n = std::fread(buf.data(), 1, buf.size(), pipe)) output.append(buf.data(), n);
  int status = pclose(pipe);
  if (options_.out_dir.empty()) std::filesystem::remove(path);
  if (status == -1 || (WIFEXITED(status) && (WEXITSTATUS(status) == 126 || WEXITSTATUS(status) == 127))) {
    throw BackendUnavailable("solver could not be executed: " + *options_.solver);
  }
  std::istringstream lines(output);
  std::string first;
  while (std::getline(lines, first)) {
    if (!first.empty() && first.back() == '\r') first.pop_back();
    if (!first.empty()) break;
  }
  if (first == "unsat") return VerificationResult::valid();
  if (first == "sat") return VerificationResult::invalid("solver reported sat");
  return VerificationResult::unknown(first.empty() ? "solver gave no answer" : "solver: " + first);
}

}  // namespace tcbc
