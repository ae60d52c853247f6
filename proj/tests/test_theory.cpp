#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <chrono>
#include <random>
#include <thread>

#include "altgr/frontend.h"
#include "altgr/telemetry.h"
#include "altgr/theory.h"
#include "testutil.h"

using namespace altgr;

namespace {

// Ground terms typed against a problem's declarations.
struct Terms {
  AnnotatedAst ast;
  TermBank bank;

  explicit Terms(const std::string& decls) : ast(frontend::load_problem(decls + "\ngoal g: true")) {}

  TermId operator()(const std::string& text) {
    auto es = frontend::parse_term_fragment(text, frontend::FragmentScope{&ast.env, {}, {}});
    REQUIRE(es.size() == 1);
    return bank.from_expr(es[0]);
  }
};

const char* kSets =
    "type 'a set\n"
    "logic add: 'a, 'a set -> 'a set\n"
    "logic mem: 'a, 'a set -> prop\n"
    "logic a, b, x, y, z: int\n"
    "logic s1, s2: int set\n"
    "logic f: int -> int\n";

std::string classes_text(const TheoryState& th, TermBank& bank) {
  std::string s;
  for (const auto& c : th.classes()) {
    s += "{";
    for (TermId m : c.members) s += bank.str(m) + ";";
    s += "}";
  }
  return s;
}

bool subset(const Tags& a, const Tags& b) {
  return std::includes(b.begin(), b.end(), a.begin(), a.end());
}

}  // namespace

TEST_CASE("canon normal forms") {
  Terms t(kSets);
  TheoryState th(t.bank);
  Poly p = th.canon(t("a - 1"));
  CHECK(p.constant == -1);
  CHECK(p.coeff(t("a")) == 1);
  CHECK(p.coeffs.size() == 1);
  CHECK(th.canon(t("b + 1 - 1")) == th.canon(t("b")));
  CHECK(th.canon(t("2 * (x + 3) - x")).key() == th.canon(t("x + 6")).key());
  CHECK(th.canon(t("f(a) + f(a)")).coeff(t("f(a)")) == 2);
  // Idempotent: canonizing a normal form again changes nothing.
  Poly q = th.canon(t("3 * x - 2 * y + 7"));
  CHECK(th.arith().normalize(q).first == q);
}

TEST_CASE("linear hypothesis makes a - 1 and b equal") {
  Terms t(kSets);
  TheoryState th(t.bank);
  CHECK(th.assume_eq(t("a"), t("b + 1"), 1).consistent);
  CHECK(th.canon(t("a - 1")) == th.canon(t("b")));
  CHECK(th.add_term(t("a - 1")).consistent);
  CHECK(th.equal(t("a - 1"), t("b")));
}

TEST_CASE("set example congruence through the hypotheses") {
  Terms t(kSets);
  TheoryState th(t.bank);
  TermId concl = t.bank.app("mem", {t("a - 1"), t("s2")}, Type::prop_type());
  TermId inst = t.bank.app("mem", {t("a - 1"), t("add(b, s1)")}, Type::prop_type());
  CHECK(th.assume_eq(t("a"), t("b + 1"), 1).consistent);
  CHECK(th.assume_eq(t("s2"), t("add(b, s1)"), 2).consistent);
  CHECK(th.add_term(concl).consistent);
  CHECK(th.add_term(inst).consistent);
  CHECK(th.equal(concl, inst));

  bool found = false;
  for (const auto& c : th.classes())
    if (std::count(c.members.begin(), c.members.end(), t("s2")))
      found = c.members == std::vector<TermId>{std::min(t("s2"), t("add(b, s1)")),
                                               std::max(t("s2"), t("add(b, s1)"))};
  CHECK(found);

  CHECK(th.assume_pred(concl, false, 3).consistent);
  Verdict v = th.assume_pred(inst, true, 4);
  REQUIRE_FALSE(v.consistent);
  CHECK(v.explanation == Tags{2, 3, 4});
}

TEST_CASE("direct clashes") {
  Terms t(kSets);
  {
    TheoryState th(t.bank);
    CHECK(th.assume_eq(t("x"), t("y"), 1).consistent);
    Verdict v = th.assume_neq(t("x"), t("y"), 2);
    CHECK_FALSE(v.consistent);
    CHECK(v.explanation == Tags{1, 2});
  }
  {
    TheoryState th(t.bank);
    CHECK(th.assume_le(t("x"), t("3"), false, 1).consistent);
    CHECK(th.assume_le(t("4"), t("x"), false, 2).consistent);
    Verdict v = th.check();
    CHECK_FALSE(v.consistent);
    CHECK(v.explanation == Tags{1, 2});
  }
  {
    TheoryState th(t.bank);
    CHECK(th.assume_le(t("x"), t("3"), false, 1).consistent);
    CHECK(th.assume_le(t("3"), t("x"), false, 2).consistent);
    CHECK(th.check().consistent);
    CHECK(th.assume_le(t("x"), t("3"), true, 3).consistent);
    CHECK_FALSE(th.check().consistent);
  }
  {
    // Distinct numerals never share a class.
    TheoryState th(t.bank);
    CHECK(th.assume_eq(t("x"), t("1"), 1).consistent);
    CHECK_FALSE(th.assume_eq(t("x"), t("2"), 2).consistent);
  }
  {
    // Integers are decided by their rational relaxation.
    TheoryState th(t.bank);
    CHECK(th.assume_eq(t("2 * x"), t("1"), 1).consistent);
    CHECK(th.check().consistent);
  }
  {
    TheoryState th(t.bank);
    CHECK(th.assume_eq(t("x + y"), t("3"), 1).consistent);
    CHECK(th.assume_eq(t("x - y"), t("1"), 2).consistent);
    CHECK(th.add_term(t("2")).consistent);
    CHECK(th.equal(t("x"), t("2")));
    CHECK(th.assume_eq(t("f(x)"), t("5"), 3).consistent);
    Verdict v = th.assume_neq(t("f(y + 1)"), t("5"), 4);
    CHECK_FALSE(v.consistent);
    CHECK(v.explanation == Tags{1, 2, 3, 4});
  }
}

TEST_CASE("partition queries") {
  Terms t(kSets);
  TheoryState th(t.bank);
  CHECK(th.add_term(t("a")).consistent);
  CHECK(th.add_term(t("b")).consistent);
  auto before = th.classes();
  CHECK(before.size() == 4);  // a, b and the two truth values

  CHECK(th.assume_eq(t("a"), t("b"), 1).consistent);
  CHECK(th.add_term(t("f(a)")).consistent);
  CHECK(th.add_term(t("f(b)")).consistent);
  CHECK(th.equal(t("f(a)"), t("f(b)")));
}

TEST_CASE("push and pop") {
  Terms t(kSets);
  TheoryState th(t.bank);
  CHECK(th.add_term(t("f(x)")).consistent);
  CHECK(th.add_term(t("f(y)")).consistent);
  std::string before = classes_text(th, t.bank);

  th.push();
  CHECK(th.assume_eq(t("x"), t("y"), 1).consistent);
  CHECK(th.equal(t("f(x)"), t("f(y)")));
  th.pop();
  CHECK(classes_text(th, t.bank) == before);
  CHECK_FALSE(th.equal(t("f(x)"), t("f(y)")));

  th.push();
  th.push();
  CHECK(th.assume_eq(t("x + 1"), t("y"), 1).consistent);
  CHECK(th.add_term(t("f(z)")).consistent);
  th.pop();
  th.pop();
  CHECK(classes_text(th, t.bank) == before);
  CHECK(th.canon(t("y")) == Poly::atom(t("y")));

  CHECK_THROWS_AS(th.pop(), PopOnEmpty);
}

/*------------------------------------------------------------------------*/

namespace {

// Random ground terms over constants c0..c3 and symbols f/1, g/2.
struct TermGen {
  std::mt19937 rng;
  TermBank& bank;
  TypeRef u = Type::app("u", {});

  TermId make(int depth) {
    std::uniform_int_distribution<int> pick(0, depth <= 0 ? 0 : 2);
    switch (pick(rng)) {
      case 0: return bank.app("c" + std::to_string(std::uniform_int_distribution<int>(0, 3)(rng)), {}, u);
      case 1: return bank.app("f", {make(depth - 1)}, u);
      default: return bank.app("g", {make(depth - 1), make(depth - 1)}, u);
    }
  }
};

// Closure by repeated merging of congruent pairs until nothing changes.
std::vector<int> naive_closure(const TermBank& bank, const std::vector<TermId>& terms,
                               const std::vector<std::pair<TermId, TermId>>& eqs) {
  std::map<TermId, int> cls;
  for (size_t i = 0; i < terms.size(); ++i) cls[terms[i]] = static_cast<int>(i);
  auto join = [&](TermId a, TermId b) {
    int from = cls[a], to = cls[b];
    if (from == to) return false;
    for (auto& [t, c] : cls)
      if (c == from) c = to;
    return true;
  };
  for (const auto& [a, b] : eqs) join(a, b);
  bool changed = true;
  while (changed) {
    changed = false;
    for (TermId p : terms)
      for (TermId q : terms) {
        const Term& tp = bank[p];
        const Term& tq = bank[q];
        if (tp.sym != tq.sym || tp.args.size() != tq.args.size() || tp.args.empty()) continue;
        bool same = true;
        for (size_t i = 0; i < tp.args.size(); ++i) same &= cls[tp.args[i]] == cls[tq.args[i]];
        if (same && join(p, q)) changed = true;
      }
  }
  std::vector<int> out;
  for (TermId t : terms) out.push_back(cls[t]);
  return out;
}

void collect_subterms(const TermBank& bank, TermId t, std::set<TermId>& out) {
  if (!out.insert(t).second) return;
  for (TermId a : bank[t].args) collect_subterms(bank, a, out);
}

}  // namespace

TEST_CASE("congruence closure agrees with the naive fixpoint") {
  int checked = 0;
  for (unsigned seed = 0; seed < 300; ++seed) {
    TermBank bank;
    TermGen gen{std::mt19937(seed), bank};
    std::set<TermId> universe;
    while (universe.size() < 20) collect_subterms(bank, gen.make(3), universe);
    std::vector<TermId> terms(universe.begin(), universe.end());
    if (terms.size() > 30) terms.resize(30);
    std::vector<TermId> pool;
    for (TermId t : terms)
      if (std::all_of(bank[t].args.begin(), bank[t].args.end(),
                      [&](TermId a) { return std::count(terms.begin(), terms.end(), a); }))
        pool.push_back(t);

    std::uniform_int_distribution<size_t> pick(0, pool.size() - 1);
    std::vector<std::pair<TermId, TermId>> eqs;
    int n_eqs = static_cast<int>(gen.rng() % 11);
    for (int i = 0; i < n_eqs; ++i) eqs.push_back({pool[pick(gen.rng)], pool[pick(gen.rng)]});

    TheoryState th(bank);
    for (TermId t : pool) REQUIRE(th.add_term(t).consistent);
    th.push();
    int tag = 0;
    for (const auto& [a, b] : eqs) REQUIRE(th.assume_eq(a, b, ++tag).consistent);

    std::vector<int> oracle = naive_closure(bank, pool, eqs);
    for (size_t i = 0; i < pool.size(); ++i)
      for (size_t j = 0; j < pool.size(); ++j)
        CHECK(th.equal(pool[i], pool[j]) == (oracle[i] == oracle[j]));

    // Every equality can be explained by a subset of the assumptions.
    for (size_t i = 0; i + 1 < pool.size(); ++i)
      if (th.equal(pool[i], pool[i + 1])) {
        Tags why = th.egraph().explain(pool[i], pool[i + 1]);
        TheoryState replay(bank);
        for (TermId t : pool) REQUIRE(replay.add_term(t).consistent);
        for (Tag k : why) REQUIRE(replay.assume_eq(eqs[k - 1].first, eqs[k - 1].second, k).consistent);
        CHECK(replay.equal(pool[i], pool[i + 1]));
      }
    th.pop();
    for (size_t i = 0; i < pool.size(); ++i)
      for (size_t j = i + 1; j < pool.size(); ++j)
        if (th.equal(pool[i], pool[j])) CHECK(naive_closure(bank, pool, {})[i] == naive_closure(bank, pool, {})[j]);
    ++checked;
  }
  CHECK(checked == 300);
}

/*------------------------------------------------------------------------*/

namespace {

using Row = std::vector<Rational>;  // coefficients of x0..x(n-1), then constant

// Rank of a rational matrix by Gaussian elimination.
int rank_of(std::vector<Row> m) {
  int rank = 0;
  size_t cols = m.empty() ? 0 : m[0].size();
  for (size_t c = 0; c < cols && rank < static_cast<int>(m.size()); ++c) {
    size_t piv = rank;
    while (piv < m.size() && m[piv][c] == 0) ++piv;
    if (piv == m.size()) continue;
    std::swap(m[piv], m[rank]);
    for (size_t r = 0; r < m.size(); ++r) {
      if (static_cast<int>(r) == rank || m[r][c] == 0) continue;
      Rational k = m[r][c] / m[rank][c];
      for (size_t j = 0; j < cols; ++j) m[r][j] -= k * m[rank][j];
    }
    ++rank;
  }
  return rank;
}

// The equations are consistent iff the constant column adds no rank.
bool consistent(const std::vector<Row>& eqs) {
  if (eqs.empty()) return true;
  std::vector<Row> coeffs;
  for (const auto& r : eqs) coeffs.push_back(Row(r.begin(), r.end() - 1));
  return rank_of(coeffs) == rank_of(eqs);
}

// q = 0 follows from consistent equations iff q is in their row span.
bool entails(std::vector<Row> eqs, const Row& q) {
  int before = rank_of(eqs);
  eqs.push_back(q);
  return rank_of(eqs) == before;
}

struct LinGen {
  std::mt19937 rng;
  int vars;

  Row row() {
    Row r(vars + 1, 0);
    int terms = 1 + static_cast<int>(rng() % 3);
    for (int i = 0; i < terms; ++i) r[rng() % vars] += static_cast<int>(rng() % 7) - 3;
    r[vars] = static_cast<int>(rng() % 9) - 4;
    return r;
  }
};

TermId build(TermBank& bank, const Row& r, int vars) {
  TermId acc = bank.num(r[vars]);
  for (int i = 0; i < vars; ++i) {
    if (r[i] == 0) continue;
    TermId x = bank.app("x" + std::to_string(i), {}, Type::int_type());
    acc = bank.arith(Term::Kind::Add, acc, bank.arith(Term::Kind::Mul, bank.num(r[i]), x));
  }
  return acc;
}

}  // namespace

TEST_CASE("canon equality agrees with Gaussian elimination") {
  int queries = 0, entailed = 0;
  for (unsigned seed = 0; seed < 300; ++seed) {
    LinGen gen{std::mt19937(seed), 2 + static_cast<int>(seed % 5)};
    int n = gen.vars;
    std::vector<Row> eqs;
    int n_eqs = static_cast<int>(gen.rng() % (n + 1));
    for (int i = 0; i < n_eqs; ++i) eqs.push_back(gen.row());
    if (!consistent(eqs)) continue;

    TermBank bank;
    TheoryState th(bank);
    TermId zero = bank.num(0);
    int tag = 0;
    for (const auto& e : eqs) REQUIRE(th.assume_eq(build(bank, e, n), zero, ++tag).consistent);

    for (int k = 0; k < 10; ++k) {
      Row lhs = gen.row(), rhs = gen.row();
      if (k % 3 == 0 && !eqs.empty()) {
        // Bias towards entailed queries: rhs = lhs + multiple of an equation.
        rhs = lhs;
        const Row& e = eqs[gen.rng() % eqs.size()];
        for (int j = 0; j <= n; ++j) rhs[j] += 2 * e[j];
      }
      Row diff(n + 1);
      for (int j = 0; j <= n; ++j) diff[j] = lhs[j] - rhs[j];
      bool expected = entails(eqs, diff);
      TermId l = build(bank, lhs, n), r = build(bank, rhs, n);
      CHECK(th.add_term(l).consistent);
      CHECK(th.add_term(r).consistent);
      CHECK((th.canon(l) == th.canon(r)) == expected);
      CHECK(th.equal(l, r) == expected);
      ++queries;
      entailed += expected;
    }
  }
  CHECK(queries > 1000);
  CHECK(entailed > 100);
}

TEST_CASE("conflicts do not depend on assumption order") {
  Terms t(kSets);
  struct Lit {
    int kind;  // 0 eq, 1 neq, 2 le, 3 lt
    std::string a, b;
  };
  std::vector<std::vector<Lit>> sets = {
      {{0, "x", "y"}, {0, "y", "z"}, {1, "f(x)", "f(z)"}},
      {{0, "a", "b + 1"}, {0, "s2", "add(b, s1)"}, {1, "add(a - 1, s1)", "s2"}},
      {{2, "x", "y"}, {2, "y", "z"}, {3, "z", "x"}},
      {{0, "x + y", "3"}, {0, "x", "y + 1"}, {3, "2", "x"}},
      {{0, "f(x)", "x"}, {0, "f(f(x))", "y"}, {1, "x", "y"}},
  };
  std::mt19937 rng(5);
  for (auto lits : sets) {
    for (int round = 0; round < 12; ++round) {
      std::shuffle(lits.begin(), lits.end(), rng);
      TheoryState th(t.bank);
      bool clash = false;
      Tag tag = 0;
      for (const auto& l : lits) {
        Verdict v;
        ++tag;
        switch (l.kind) {
          case 0: v = th.assume_eq(t(l.a), t(l.b), tag); break;
          case 1: v = th.assume_neq(t(l.a), t(l.b), tag); break;
          default: v = th.assume_le(t(l.a), t(l.b), l.kind == 3, tag); break;
        }
        if (!v.consistent) {
          clash = true;
          CHECK(subset(v.explanation, Tags{1, 2, 3}));
          break;
        }
      }
      if (!clash) clash = !th.check().consistent;
      CHECK(clash);
    }
  }
}

TEST_CASE("fourier-motzkin stays within its derivation cap") {
  TermBank bank;
  TheoryState th(bank);
  // 20 lower and 20 upper bounds on each of several atoms chained together.
  std::vector<TermId> xs;
  for (int i = 0; i < 6; ++i) xs.push_back(bank.app("v" + std::to_string(i), {}, Type::int_type()));
  Tag tag = 0;
  for (int i = 0; i < 6; ++i)
    for (int j = 0; j < 6; ++j)
      if (i != j)
        th.assume_le(bank.arith(Term::Kind::Add, xs[i], bank.num(j)), bank.arith(Term::Kind::Add, xs[j], bank.num(40)),
                     false, ++tag);
  size_t derived = 0;
  CHECK(th.arith().check(&derived).consistent);
  CHECK(derived <= LinearArith::kFourierMotzkinCap + 1);
}

/*------------------------------------------------------------------------*/

TEST_CASE("telemetry attributes time to the innermost scope") {
  Telemetry tel;
  tel.start();
  {
    ALTGR_TIME(&tel, Module::SAT);
    std::this_thread::sleep_for(std::chrono::milliseconds(20));
    {
      ALTGR_TIME(&tel, Module::CC);
      std::this_thread::sleep_for(std::chrono::milliseconds(30));
    }
  }
  tel.finish(RunStatus::Done);
  CHECK(tel.seconds(Module::CC) >= 0.029);
  CHECK(tel.seconds(Module::SAT) >= 0.019);
  CHECK(tel.seconds(Module::SAT) < 0.029 + 0.02);
  double sum = 0;
  for (int m = 0; m < kModuleCount; ++m) sum += tel.seconds(static_cast<Module>(m));
  CHECK(sum <= tel.wall_seconds() * 1.05);
  CHECK(tel.status() == RunStatus::Done);

  { ALTGR_TIME(nullptr, Module::Arith); }
  double before = tel.seconds(Module::Arith);
  { ALTGR_TIME(&tel, Module::Arith); }
  CHECK(tel.seconds(Module::Arith) - before < 0.001);
}

TEST_CASE("red shading buckets") {
  CHECK(shade_red(1322, 2600) == 3);
  CHECK(shade_red(10, 10) == 5);
  CHECK(shade_red(0, 10) == 1);
  CHECK(shade_red(0, 0) == 1);
  CHECK(shade_red(1, 1000) == 1);
  CHECK(shade_red(201, 1000) == 2);
  for (long total = 1; total < 60; ++total)
    for (long p = 0; p <= total; ++p) {
      int expected = std::clamp(static_cast<int>(std::ceil(5.0 * p / total - 1e-12)), 1, 5);
      CHECK(shade_red(p, total) == expected);
    }
}
