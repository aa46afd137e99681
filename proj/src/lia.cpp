#include "traitcbc/lia.hpp"

#include <algorithm>
#include <numeric>
#include <optional>
#include <set>

namespace tcbc::lia {

namespace {

struct Overflow {};
struct OutOfBudget {};

using Coeffs = std::map<int, std::int64_t>;
using Model = std::map<int, std::int64_t>;

std::int64_t add(std::int64_t a, std::int64_t b) {
  std::int64_t r;
  if (__builtin_add_overflow(a, b, &r)) throw Overflow{};
  return r;
}

std::int64_t mul(std::int64_t a, std::int64_t b) {
  std::int64_t r;
  if (__builtin_mul_overflow(a, b, &r)) throw Overflow{};
  return r;
}

std::int64_t neg(std::int64_t a) { return mul(a, -1); }

std::int64_t floor_div(std::int64_t a, std::int64_t b) {
  std::int64_t q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

std::int64_t ceil_div(std::int64_t a, std::int64_t b) { return -floor_div(-a, b); }

std::int64_t eval(const Coeffs& cs, std::int64_t constant, Model& m, int skip = -1) {
  std::int64_t v = constant;
  for (const auto& [var, c] : cs) {
    if (var == skip) continue;
    v = add(v, mul(c, m.try_emplace(var, 0).first->second));
  }
  return v;
}

// c1 * a + c2 * b, dropping zero coefficients.
Constraint combine(const Constraint& a, std::int64_t c1, const Constraint& b, std::int64_t c2,
                   bool is_equality) {
  Constraint out;
  out.is_equality = is_equality;
  for (const auto& [v, c] : a.coeffs) out.coeffs[v] = mul(c, c1);
  for (const auto& [v, c] : b.coeffs) out.coeffs[v] = add(out.coeffs[v], mul(c, c2));
  out.constant = add(mul(a.constant, c1), mul(b.constant, c2));
  for (auto it = out.coeffs.begin(); it != out.coeffs.end();) {
    it = it->second == 0 ? out.coeffs.erase(it) : std::next(it);
  }
  return out;
}

// Replaces x by (def.coeffs . vars + def.constant) in c.
Constraint substitute(const Constraint& c, int x, const Constraint& def) {
  auto it = c.coeffs.find(x);
  if (it == c.coeffs.end()) return c;
  std::int64_t a = it->second;
  Constraint rest = c;
  rest.coeffs.erase(x);
  return combine(rest, 1, def, a, c.is_equality);
}

class Solver {
 public:
  explicit Solver(int next_var) : next_var_(next_var) {}

  std::optional<Model> solve(std::vector<Constraint> cs) {
    if (++steps_ > kBudget) throw OutOfBudget{};
    if (!normalize(cs)) return std::nullopt;
    for (const auto& c : cs) {
      if (c.is_equality) return solve_equality(std::move(cs));
    }
    return solve_inequalities(std::move(cs));
  }

 private:
  static constexpr long kBudget = 20000;

  // Divides by the gcd, tightens inequalities, folds opposite pairs into
  // equalities and removes duplicates. False when a contradiction is found.
  static bool normalize(std::vector<Constraint>& cs) {
    std::vector<Constraint> eqs;
    std::map<Coeffs, std::int64_t> ineqs;
    for (auto& c : cs) {
      for (auto it = c.coeffs.begin(); it != c.coeffs.end();) {
        it = it->second == 0 ? c.coeffs.erase(it) : std::next(it);
      }
      if (c.coeffs.empty()) {
        if (c.is_equality ? c.constant != 0 : c.constant < 0) return false;
        continue;
      }
      std::int64_t g = 0;
      for (const auto& [_, a] : c.coeffs) g = std::gcd(g, a < 0 ? neg(a) : a);
      if (c.is_equality) {
        if (c.constant % g != 0) return false;
        for (auto& [_, a] : c.coeffs) a /= g;
        c.constant /= g;
        eqs.push_back(std::move(c));
      } else {
        for (auto& [_, a] : c.coeffs) a /= g;
        c.constant = floor_div(c.constant, g);
        auto [it, fresh] = ineqs.emplace(c.coeffs, c.constant);
        if (!fresh) it->second = std::min(it->second, c.constant);
      }
    }
    std::vector<Constraint> out = std::move(eqs);
    std::set<Coeffs> folded;
    for (const auto& [coeffs, k] : ineqs) {
      if (folded.count(coeffs)) continue;
      Coeffs opposite;
      for (const auto& [v, a] : coeffs) opposite[v] = neg(a);
      auto it = ineqs.find(opposite);
      if (it != ineqs.end()) {
        std::int64_t sum = add(k, it->second);
        if (sum < 0) return false;
        if (sum == 0) {
          folded.insert(opposite);
          out.push_back(Constraint{coeffs, k, true});
          continue;
        }
      }
      out.push_back(Constraint{coeffs, k, false});
    }
    cs = std::move(out);
    return true;
  }

  std::optional<Model> solve_equality(std::vector<Constraint> cs) {
    // Pick the equality with the smallest coefficient.
    std::size_t best = 0;
    int best_var = -1;
    std::int64_t best_abs = 0;
    for (std::size_t i = 0; i < cs.size(); ++i) {
      if (!cs[i].is_equality) continue;
      for (const auto& [v, a] : cs[i].coeffs) {
        std::int64_t abs_a = a < 0 ? neg(a) : a;
        if (best_var < 0 || abs_a < best_abs) {
          best = i;
          best_var = v;
          best_abs = abs_a;
        }
      }
    }
    Constraint e = cs[best];
    int x = best_var;
    std::int64_t a = e.coeffs.at(x);
    if (a < 0) {
      e = combine(e, -1, Constraint{}, 0, true);
      a = -a;
    }
    if (a == 1) {
      // x = -(rest + constant)
      Constraint def;
      for (const auto& [v, c] : e.coeffs) {
        if (v != x) def.coeffs[v] = neg(c);
      }
      def.constant = neg(e.constant);
      std::vector<Constraint> rest;
      for (std::size_t i = 0; i < cs.size(); ++i) {
        if (i != best) rest.push_back(substitute(cs[i], x, def));
      }
      auto m = solve(std::move(rest));
      if (!m) return std::nullopt;
      (*m)[x] = eval(def.coeffs, def.constant, *m);
      return m;
    }
    // a*x + sum(a_i x_i) + c = 0 with a > 1: write a_i = q_i a + r_i and
    // introduce sigma = x + sum(q_i x_i) + q_c, shrinking the coefficients.
    int sigma = next_var_++;
    Constraint def;
    def.coeffs[sigma] = 1;
    for (const auto& [v, c] : e.coeffs) {
      if (v != x) def.coeffs[v] = neg(floor_div(c, a));
    }
    def.constant = neg(floor_div(e.constant, a));
    std::vector<Constraint> next;
    for (const auto& c : cs) next.push_back(substitute(c, x, def));
    auto m = solve(std::move(next));
    if (!m) return std::nullopt;
    (*m)[x] = eval(def.coeffs, def.constant, *m);
    return m;
  }

  std::optional<Model> solve_inequalities(std::vector<Constraint> cs) {
    std::map<int, std::pair<int, int>> counts;  // var -> (#lower, #upper)
    std::map<int, std::pair<bool, bool>> unit;  // var -> (all lower coeffs 1, all upper coeffs -1)
    for (const auto& c : cs) {
      for (const auto& [v, a] : c.coeffs) {
        auto& n = counts[v];
        auto& u = unit.try_emplace(v, std::make_pair(true, true)).first->second;
        if (a > 0) {
          ++n.first;
          if (a != 1) u.first = false;
        } else {
          ++n.second;
          if (a != -1) u.second = false;
        }
      }
    }
    if (counts.empty()) return Model{};

    for (const auto& [v, n] : counts) {
      if (n.first == 0 || n.second == 0) return eliminate_unbounded(std::move(cs), v);
    }

    int x = -1;
    bool exact = false;
    long cost = 0;
    for (const auto& [v, n] : counts) {
      bool e = unit[v].first || unit[v].second;
      long c = static_cast<long>(n.first) * n.second;
      if (x < 0 || (e && !exact) || (e == exact && c < cost)) {
        x = v;
        exact = e;
        cost = c;
      }
    }

    std::vector<Constraint> lowers, uppers, others;
    for (auto& c : cs) {
      auto it = c.coeffs.find(x);
      if (it == c.coeffs.end()) {
        others.push_back(std::move(c));
      } else if (it->second > 0) {
        lowers.push_back(std::move(c));
      } else {
        uppers.push_back(std::move(c));
      }
    }

    auto shadow = [&](bool dark) {
      std::vector<Constraint> out = others;
      for (const auto& l : lowers) {
        std::int64_t a = l.coeffs.at(x);
        for (const auto& u : uppers) {
          std::int64_t b = neg(u.coeffs.at(x));
          Constraint c = combine(l, b, u, a, false);
          if (dark) c.constant = add(c.constant, neg(mul(a - 1, b - 1)));
          out.push_back(std::move(c));
        }
      }
      return out;
    };

    if (exact) {
      auto m = solve(shadow(false));
      if (!m) return std::nullopt;
      pick_value(*m, x, lowers, uppers);
      return m;
    }
    if (auto m = solve(shadow(true))) {
      pick_value(*m, x, lowers, uppers);
      return m;
    }
    if (!solve(shadow(false))) return std::nullopt;

    std::int64_t bmax = 0;
    for (const auto& u : uppers) bmax = std::max(bmax, neg(u.coeffs.at(x)));
    std::vector<Constraint> all = others;
    all.insert(all.end(), lowers.begin(), lowers.end());
    all.insert(all.end(), uppers.begin(), uppers.end());
    for (const auto& l : lowers) {
      std::int64_t a = l.coeffs.at(x);
      std::int64_t limit = floor_div(add(mul(a, bmax), neg(add(a, bmax))), bmax);
      for (std::int64_t i = 0; i <= limit; ++i) {
        std::vector<Constraint> branch = all;
        Constraint splinter = l;
        splinter.is_equality = true;
        splinter.constant = add(splinter.constant, neg(i));
        branch.push_back(std::move(splinter));
        if (auto m = solve(std::move(branch))) return m;
      }
    }
    return std::nullopt;
  }

  std::optional<Model> eliminate_unbounded(std::vector<Constraint> cs, int x) {
    std::vector<Constraint> keep, bound;
    for (auto& c : cs) (c.coeffs.count(x) ? bound : keep).push_back(std::move(c));
    auto m = solve(std::move(keep));
    if (!m) return std::nullopt;
    std::vector<Constraint> lowers, uppers;
    for (auto& c : bound) (c.coeffs.at(x) > 0 ? lowers : uppers).push_back(std::move(c));
    pick_value(*m, x, lowers, uppers);
    return m;
  }

  // Chooses x as the least value above every lower bound, or the greatest
  // below every upper bound when there is no lower bound.
  static void pick_value(Model& m, int x, const std::vector<Constraint>& lowers,
                         const std::vector<Constraint>& uppers) {
    std::optional<std::int64_t> lo, hi;
    for (const auto& l : lowers) {
      std::int64_t a = l.coeffs.at(x);
      std::int64_t bound = ceil_div(neg(eval(l.coeffs, l.constant, m, x)), a);
      lo = lo ? std::max(*lo, bound) : bound;
    }
    for (const auto& u : uppers) {
      std::int64_t b = neg(u.coeffs.at(x));
      std::int64_t bound = floor_div(eval(u.coeffs, u.constant, m, x), b);
      hi = hi ? std::min(*hi, bound) : bound;
    }
    m[x] = lo ? *lo : hi ? *hi : 0;
  }

  int next_var_;
  long steps_ = 0;
};

}  // namespace

bool satisfies(const std::vector<Constraint>& constraints, const std::map<int, std::int64_t>& model) {
  for (const auto& c : constraints) {
    __int128 v = c.constant;
    for (const auto& [var, a] : c.coeffs) {
      auto it = model.find(var);
      v += static_cast<__int128>(a) * (it == model.end() ? 0 : it->second);
    }
    if (c.is_equality ? v != 0 : v < 0) return false;
  }
  return true;
}

Result solve(const std::vector<Constraint>& constraints) {
  int next_var = 0;
  std::set<int> vars;
  for (const auto& c : constraints) {
    for (const auto& [v, _] : c.coeffs) {
      vars.insert(v);
      next_var = std::max(next_var, v + 1);
    }
  }
  Result r;
  try {
    Solver s(next_var);
    auto m = s.solve(constraints);
    if (!m) {
      r.status = Status::Unsat;
      return r;
    }
    for (int v : vars) r.model[v] = m->count(v) ? m->at(v) : 0;
    if (!satisfies(constraints, r.model)) {
      r.model.clear();
      r.status = Status::Unknown;
      r.reason = "model reconstruction failed";
      return r;
    }
    r.status = Status::Sat;
  } catch (const Overflow&) {
    r.status = Status::Unknown;
    r.reason = "integer overflow in arithmetic reasoning";
  } catch (const OutOfBudget&) {
    r.status = Status::Unknown;
    r.reason = "arithmetic search budget exhausted";
  }
  return r;
}

}  // namespace tcbc::lia
