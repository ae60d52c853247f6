#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "altgr/annotated.h"
#include "altgr/frontend.h"
#include "oracles.h"
#include "testutil.h"

using namespace altgr;
using namespace altgr::frontend;
using testutil::find_node;

namespace {

std::string stripped_goal(const AnnotatedAst& ast) { return pretty(strip(ast).back().formula); }

AstError::Code error_code(AnnotatedAst& ast, NodeId id) {
  try {
    toggle_prune(ast, id);
  } catch (const AstError& e) {
    return e.code();
  }
  FAIL("expected an AstError");
  return AstError::Code::NoSuchNode;
}

}  // namespace

TEST_CASE("empty problem has no nodes") {
  AnnotatedAst ast = annotate({});
  CHECK(ast.size() == 0);
  CHECK(strip(ast).empty());
}

TEST_CASE("set example ids follow a depth-first preorder") {
  AnnotatedAst ast = testutil::load_corpus("fig2.ae");
  REQUIRE(ast.size() == 39);
  CHECK(ast.decls.size() == 7);

  NodeId mem_add = *ast.find_decl("mem_add");
  CHECK(mem_add == 3);
  CHECK(ast.node(4).op == Op::Forall);
  CHECK(ast.node(5).op == Op::Forall);
  CHECK(ast.node(6).op == Op::Iff);
  CHECK(pretty(ast.node(7).expr) == "mem(x, add(y, s))");
  CHECK(ast.node(12).op == Op::Or);
  CHECK(pretty(ast.node(16).expr) == "mem(x, s)");
  CHECK(*ast.find_decl("a") == 19);
  CHECK(*ast.find_decl("s1") == 20);
  CHECK(*ast.find_decl("g") == 21);
  CHECK(pretty(ast.node(23).expr) == "a = b + 1");
  CHECK(pretty(ast.node(29).expr) == "s2 = add(b, s1)");
  CHECK(pretty(ast.node(34).expr) == "mem(a - 1, s2)");
  CHECK(pretty(ast.node(35).expr) == "a - 1");
  CHECK(pretty(ast.node(38).expr) == "s2");

  CHECK(ast.is_block_head(4));
  CHECK_FALSE(ast.is_block_head(5));
  CHECK(ast.block_head(5) == 4);
  CHECK(ast.block_vars(4).size() == 3);
}

TEST_CASE("preorder and span nesting hold on every corpus file") {
  for (const char* file : {"fig2.ae", "fig2_multi.ae", "crazy.ae", "pq.ae", "diverge.ae",
                           "arith.ae", "exists.ae", "core_05.ae"}) {
    CAPTURE(file);
    AnnotatedAst ast = testutil::load_corpus(file);
    for (size_t i = 0; i < ast.size(); ++i) {
      const AnnNode& n = ast.nodes[i];
      CHECK(n.id == static_cast<NodeId>(i));
      if (n.parent != kNoNode) {
        CHECK(n.parent < n.id);
        CHECK(ast.node(n.parent).span.contains(n.span));
        CHECK(ast.node(n.parent).children[n.child_index] == n.id);
      } else {
        CHECK(n.is_decl);
      }
      for (size_t k = 1; k < n.children.size(); ++k) CHECK(n.children[k - 1] < n.children[k]);
    }
  }
}

TEST_CASE("polarity of the prune example") {
  AnnotatedAst ast = testutil::load_corpus("pq.ae");
  NodeId goal = *ast.find_decl("g");
  NodeId q_left = find_node(ast, "Q(x)", goal);
  NodeId p_left = find_node(ast, "P(y)", goal);
  NodeId q_right = find_node(ast, "Q(x)", q_left + 1);
  NodeId p_right = find_node(ast, "P(y)", p_left + 1);
  CHECK(ast.node(q_left).polarity == Polarity::Neg);
  CHECK(ast.node(p_left).polarity == Polarity::Neg);
  CHECK(ast.node(q_right).polarity == Polarity::Pos);
  CHECK(ast.node(p_right).polarity == Polarity::Pos);
}

TEST_CASE("axioms start negative and iff operands get both") {
  AnnotatedAst ast = testutil::load_corpus("fig2.ae");
  CHECK(ast.node(4).polarity == Polarity::Neg);
  CHECK(ast.node(6).polarity == Polarity::Neg);
  CHECK(ast.node(7).polarity == Polarity::Both);
  CHECK(ast.node(16).polarity == Polarity::Both);
  CHECK(ast.node(22).polarity == Polarity::Pos);
  CHECK(ast.node(23).polarity == Polarity::Neg);
  CHECK(ast.node(34).polarity == Polarity::Pos);

  AnnotatedAst n = load_problem("logic p, q: prop\ngoal g: not (p -> not q)");
  CHECK(n.node(find_node(n, "p")).polarity == Polarity::Pos);
  CHECK(n.node(find_node(n, "q")).polarity == Polarity::Pos);
  CHECK(n.node(find_node(n, "not q")).polarity == Polarity::Neg);
}

TEST_CASE("prune soundness classification") {
  AnnotatedAst fig = testutil::load_corpus("fig2.ae");
  PruneReport r = toggle_prune(fig, *fig.find_decl("mem_add"));
  CHECK(r.soundness == Soundness::Sound);
  CHECK(r.new_state == PruneState::PrunedSound);

  NodeId hyp = find_node(fig, "s2 = add(b, s1)");
  CHECK(fig.node(hyp).replacement == true);
  CHECK(toggle_prune(fig, hyp).soundness == Soundness::Sound);

  AnnotatedAst pq = testutil::load_corpus("pq.ae");
  NodeId p_left = find_node(pq, "P(y)");
  NodeId p_right = find_node(pq, "P(y)", p_left + 1);
  PruneReport l = toggle_prune(pq, p_left);
  CHECK(l.soundness == Soundness::Unsound);
  CHECK(l.new_state == PruneState::PrunedUnsound);
  CHECK(toggle_prune(pq, p_right).soundness == Soundness::Unsound);

  // Dropping a disjunct of the hypothesis or a conjunct of the conclusion
  // is the direction that keeps the proof meaningful.
  AnnotatedAst flip = load_problem(
      "logic P, Q : int -> prop\n"
      "goal g: forall x, y: int. Q(x) and P(y) -> Q(x) or P(y)");
  NodeId fl = find_node(flip, "P(y)");
  CHECK(toggle_prune(flip, fl).soundness == Soundness::Sound);
  CHECK(toggle_prune(flip, find_node(flip, "P(y)", fl + 1)).soundness == Soundness::Sound);
}

TEST_CASE("prune errors") {
  AnnotatedAst fig = testutil::load_corpus("fig2.ae");
  CHECK(error_code(fig, *fig.find_decl("g")) == AstError::Code::CannotPruneGoal);
  CHECK(error_code(fig, 7) == AstError::Code::NotPrunable);   // iff operand
  CHECK(error_code(fig, 35) == AstError::Code::NotPrunable);  // argument term
  CHECK_THROWS_AS(toggle_prune(fig, 1000), AstError);

  AnnotatedAst n = load_problem("logic p, q: prop\ngoal g: not p or q");
  CHECK(error_code(n, find_node(n, "p")) == AstError::Code::NotPrunable);
  CHECK(n.node(find_node(n, "not p")).prunable);
}

TEST_CASE("quantifier bodies are prunable") {
  AnnotatedAst fig = testutil::load_corpus("fig2.ae");
  CHECK(fig.node(5).prunable);  // body of the outer forall
  CHECK(fig.node(6).prunable);
  CHECK(fig.node(6).replacement == true);
  CHECK(prune_soundness(fig, 6) == Soundness::Sound);
  toggle_prune(fig, 6);
  auto out = strip(fig);
  CHECK(out.size() == 7);
  CHECK(out[3].formula->op == Op::True);
}

TEST_CASE("dependency closure") {
  AnnotatedAst fig = testutil::load_corpus("fig2.ae");
  CHECK(dependency_closure(fig, *fig.find_decl("add")) == std::set<NodeId>{1, 3, 21});
  CHECK(dependency_closure(fig, *fig.find_decl("a")) == std::set<NodeId>{19, 21});
  CHECK(dependency_closure(fig, 0) == std::set<NodeId>{0, 1, 2, 3, 20, 21});
  try {
    dependency_closure(fig, 3);
    FAIL("expected NotADeclaration");
  } catch (const AstError& e) {
    CHECK(e.code() == AstError::Code::NotADeclaration);
  }

  AnnotatedAst junk = testutil::load_corpus("core_03.ae");
  NodeId blue = *junk.find_decl("red");
  CHECK(dependency_closure(junk, blue).count(*junk.find_decl("colors")));
  AnnotatedAst unused = load_problem("logic u: int\ngoal g: true");
  CHECK(dependency_closure(unused, 0) == std::set<NodeId>{0});
}

TEST_CASE("dependency support re-activates exactly what a formula needs") {
  AnnotatedAst fig = testutil::load_corpus("fig2.ae");
  CHECK(dependency_support(fig, 3) == std::set<NodeId>{0, 1, 2});
  CHECK(dependency_support(fig, 21) == std::set<NodeId>{0, 1, 2, 19, 20});
  NodeId hyp = find_node(fig, "a = b + 1");
  CHECK(dependency_support(fig, hyp) == std::set<NodeId>{19});

  // Pruning a symbol's closure and then re-enabling the axiom's support
  // restores every declaration the axiom mentions and nothing else.
  for (NodeId d : dependency_closure(fig, 0))
    if (d != 21) toggle_prune(fig, d);
  std::set<NodeId> need = dependency_support(fig, 3);
  need.insert(3);
  for (NodeId d : need) toggle_prune(fig, d);
  for (const auto& d : fig.decls) {
    bool active = fig.node(d.id).prune == PruneState::Active;
    bool expected = need.count(d.id) || d.id == 21 || d.id == 19;
    CHECK(active == expected);
  }
}

TEST_CASE("strip") {
  // With the trigger written in the source the stripped output is the
  // input itself.
  std::string text = testutil::read_corpus("fig2.ae");
  text.replace(text.find("'a set."), 7, "'a set [mem(x, add(y, s))].");
  AnnotatedAst fig = load_problem(text);
  auto plain = strip(fig);
  REQUIRE(plain.size() == fig.decls.size());
  for (size_t i = 0; i < plain.size(); ++i)
    if (plain[i].formula) CHECK(struct_equal(plain[i].formula, fig.decls[i].formula));
  CHECK(pretty(strip(fig)[3]) == pretty(strip(fig)[3]));

  toggle_prune(fig, *fig.find_decl("mem_add"));
  auto without = strip(fig);
  CHECK(without.size() == 6);
  for (const auto& d : without) CHECK(d.name() != "mem_add");

  NodeId hyp = find_node(fig, "a = b + 1");
  toggle_prune(fig, hyp);
  CHECK(stripped_goal(fig) == "s2 = add(b, s1) -> mem(a - 1, s2)");

  AnnotatedAst pq = testutil::load_corpus("pq.ae");
  NodeId p_left = find_node(pq, "P(y)");
  NodeId p_right = find_node(pq, "P(y)", p_left + 1);
  toggle_prune(pq, p_left);
  toggle_prune(pq, p_right);
  ExprRef expected =
      strip(load_problem("logic P, Q : int -> prop\ngoal g: forall x, y: int. Q(x) -> Q(x)"))
          .back()
          .formula;
  ExprRef got = strip(pq).back().formula;
  CHECK_MESSAGE(alpha_equal(got, expected), pretty(got), " vs ", pretty(expected));
  CHECK(got->binders.size() == 2);
}

TEST_CASE("strip attaches the current trigger table") {
  AnnotatedAst fig = testutil::load_corpus("fig2.ae");
  fig.triggers[4] = parse_trigger_fragment(
      "add(y, s), add(x, s)", FragmentScope{&fig.env, fig.block_vars(4), fig.required_type_vars(4)});
  ExprRef f = strip(fig)[3].formula;
  REQUIRE(f->triggers.size() == 1);
  CHECK(pretty_trigger(f->triggers[0]) == "add(y, s), add(x, s)");
}

TEST_CASE("append_decl gives fresh ids") {
  AnnotatedAst fig = testutil::load_corpus("fig2.ae");
  auto ds = typecheck_decls(parse("logic c: int\naxiom extra: c = 1"));
  NodeId id = append_decl(fig, ds[1]);
  CHECK(id == 39);
  CHECK(fig.size() == 43);
  CHECK(fig.node(40).parent == 39);
  CHECK(fig.node(40).polarity == Polarity::Neg);
}

TEST_CASE("lemma display names") {
  AnnotatedAst ast = load_problem(
      "logic f: int -> int\n"
      "axiom outer: forall x: int. f(x) = x -> (forall y: int. f(y) = f(x))\n"
      "goal g: true");
  auto heads = ast.block_heads();
  REQUIRE(heads.size() == 2);
  CHECK(ast.lemma_display_name(heads[0]) == "outer");
  CHECK(ast.lemma_display_name(heads[1]) == "outer#" + std::to_string(heads[1] - *ast.find_decl("outer")));
}

TEST_CASE("prune soundness oracle on random goals") {
  oracle::PruneOracleStats st = oracle::prune_oracle(1000, 8, 20241015u);
  CHECK(st.goals == 1000);
  CHECK(st.sound > 500);
  CHECK(st.violations == 0);
  CHECK(st.involution_failures == 0);
}

TEST_CASE("toggle twice restores every prunable position") {
  testutil::PropGen gen(7u, 5);
  for (int i = 0; i < 200; ++i) {
    AnnotatedAst ast = load_problem(gen.header() + "axiom h: " + pretty(gen.formula(3)) +
                                    "\ngoal g: " + pretty(gen.formula(3)));
    auto before = strip(ast);
    for (const auto& n : ast.nodes) {
      if (!n.prunable) continue;
      AnnotatedAst copy = ast;
      toggle_prune(copy, n.id);
      CHECK(copy.node(n.id).prune != PruneState::Active);
      toggle_prune(copy, n.id);
      CHECK(copy.node(n.id).prune == PruneState::Active);
      auto after = strip(copy);
      REQUIRE(after.size() == before.size());
      for (size_t k = 0; k < after.size(); ++k)
        if (after[k].formula) CHECK(struct_equal(after[k].formula, before[k].formula));
    }
  }
}
