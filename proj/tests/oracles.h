#pragma once

// Independent reference implementations used to cross-check the solver
// components on random inputs.

#include <cstdint>
#include <functional>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <random>
#include <stdexcept>

#include "altgr/annotated.h"
#include "altgr/frontend.h"
#include "altgr/matching.h"
#include "testutil.h"

namespace oracle {

/// Evaluates a quantifier-free formula over nullary predicates P0..P7;
/// bit i of `val` is the value of Pi.
inline bool eval_prop(const altgr::ExprRef& e, unsigned val) {
  using altgr::Op;
  switch (e->op) {
    case Op::True: return true;
    case Op::False: return false;
    case Op::App: return (val >> std::stoi(e->name.substr(1))) & 1u;
    case Op::Not: return !eval_prop(e->args[0], val);
    case Op::And:
      for (const auto& a : e->args)
        if (!eval_prop(a, val)) return false;
      return true;
    case Op::Or:
      for (const auto& a : e->args)
        if (eval_prop(a, val)) return true;
      return false;
    case Op::Implies: return !eval_prop(e->args[0], val) || eval_prop(e->args[1], val);
    case Op::Iff: return eval_prop(e->args[0], val) == eval_prop(e->args[1], val);
    default: throw std::runtime_error("not propositional");
  }
}

/// True when `premise -> conclusion` holds under every valuation of the
/// first `atoms` atoms.
inline bool entails(const altgr::ExprRef& premise, const altgr::ExprRef& conclusion, int atoms) {
  for (unsigned v = 0; v < (1u << atoms); ++v)
    if (eval_prop(premise, v) && !eval_prop(conclusion, v)) return false;
  return true;
}

struct PruneOracleStats {
  int goals = 0;
  int positions = 0;
  int sound = 0;
  int violations = 0;
  int involution_failures = 0;
};

/// For random goals over `atoms` atoms, prunes every prunable position the
/// implementation calls Sound and checks strip(G') -> G by truth table.
inline PruneOracleStats prune_oracle(int goals, int atoms, unsigned seed) {
  using namespace altgr;
  PruneOracleStats st;
  testutil::PropGen gen(seed, atoms);
  for (int i = 0; i < goals; ++i) {
    ExprRef g = gen.formula(4);
    std::string text = gen.header() + "goal g: " + frontend::pretty(g) + "\n";
    AnnotatedAst ast = frontend::load_problem(text);
    const ExprRef original = strip(ast).back().formula;
    ++st.goals;
    for (const auto& n : ast.nodes) {
      if (n.is_decl || !n.prunable) continue;
      ++st.positions;
      if (prune_soundness(ast, n.id) != Soundness::Sound) continue;
      ++st.sound;
      AnnotatedAst copy = ast;
      toggle_prune(copy, n.id);
      ExprRef pruned = strip(copy).back().formula;
      if (!entails(pruned, original, atoms)) ++st.violations;
      toggle_prune(copy, n.id);
      if (!struct_equal(strip(copy).back().formula, original)) ++st.involution_failures;
    }
  }
  return st;
}

struct EmatchOracleStats {
  int checked = 0;
  int nonempty = 0;
  int mismatches = 0;
};

/// Random e-graphs of at most 30 terms over constants c0..c3 and symbols
/// f, g, random merges, patterns of depth at most 4.  E-matching must find
/// exactly the bindings that brute force finds: every assignment of the
/// pattern variables to classes whose instances all land in a class of
/// the universe, checked in a scratch scope of the decision procedure.
inline EmatchOracleStats ematch_oracle(int instances, unsigned seed) {
  using namespace altgr;
  auto check = [](bool ok) {
    if (!ok) throw std::logic_error("inconsistent theory state in the e-matching oracle");
  };
  std::mt19937 rng(seed);
  auto I = Type::int_type();
  EmatchOracleStats st;
  for (int round = 0; round < instances; ++round) {
    TermBank bank;
    TheoryState theory(bank);
    std::vector<TermId> pool;
    for (int i = 0; i < 4; ++i) pool.push_back(bank.app("c" + std::to_string(i), {}, I));
    std::uniform_int_distribution<int> size_dist(8, 30);
    int n = size_dist(rng);
    while (static_cast<int>(pool.size()) < n) {
      std::uniform_int_distribution<size_t> pick(0, pool.size() - 1);
      if (rng() % 2)
        pool.push_back(bank.app("f", {pool[pick(rng)]}, I));
      else
        pool.push_back(bank.app("g", {pool[pick(rng)], pool[pick(rng)]}, I));
    }
    for (TermId t : pool) check(theory.add_term(t).consistent);
    std::uniform_int_distribution<size_t> pick(0, pool.size() - 1);
    int merges = static_cast<int>(rng() % 6);
    for (int i = 0; i < merges; ++i) check(theory.assume_eq(pool[pick(rng)], pool[pick(rng)], i).consistent);

    std::function<ExprRef(int)> pattern = [&](int depth) -> ExprRef {
      unsigned r = rng() % (depth <= 1 ? 3 : 6);
      if (r == 0) return mk_var("x", I);
      if (r == 1) return mk_var("y", I);
      if (r == 2) return mk_app("c" + std::to_string(rng() % 4), {}, I);
      if (r <= 3) return mk_app("f", {pattern(depth - 1)}, I);
      return mk_app("g", {pattern(depth - 1), pattern(depth - 1)}, I);
    };
    std::vector<ExprRef> pats{mk_app("f", {pattern(3)}, I)};
    if (rng() % 3 == 0) pats.push_back(pattern(3));

    const EGraph& eg = theory.egraph();
    std::vector<TermId> universe = eg.terms();
    universe.erase(universe.begin(), universe.begin() + 2);  // truth constants
    std::set<std::string> got;
    for (const auto& s : ematch_multi(pats, eg, bank, universe)) got.insert(s.key(eg));

    std::set<std::string> vars;
    for (const auto& p : pats) free_vars(p, vars);
    std::vector<std::string> vs(vars.begin(), vars.end());
    std::vector<TermId> reps;
    for (const auto& c : theory.classes())
      if (c.members.front() > 1) reps.push_back(c.rep);

    std::set<std::string> expected;
    std::vector<size_t> idx(vs.size(), 0);
    while (true) {
      std::map<std::string, ExprRef> sub;
      Subst s;
      for (size_t i = 0; i < vs.size(); ++i) {
        sub[vs[i]] = bank.to_expr(reps[idx[i]]);
        s.terms[vs[i]] = reps[idx[i]];
      }
      bool all = true;
      for (const auto& p : pats) {
        TermId t = bank.from_expr(substitute(p, sub, {}));
        theory.push();
        check(theory.add_term(t).consistent);
        bool hit = false;
        for (TermId u : universe) hit |= theory.equal(t, u);
        theory.pop();
        if (!hit) {
          all = false;
          break;
        }
      }
      if (all) expected.insert(s.key(eg));
      size_t k = 0;
      while (k < idx.size() && ++idx[k] == reps.size()) idx[k++] = 0;
      if (k == idx.size()) break;
    }
    st.mismatches += got != expected;
    ++st.checked;
    st.nonempty += !expected.empty();
  }
  return st;
}

}  // namespace oracle
