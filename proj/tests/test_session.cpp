#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <random>

#include "altgr/frontend.h"
#include "altgr/session.h"
#include "altgr/solver.h"
#include "testutil.h"

using namespace altgr;
using testutil::find_node;

namespace {

Document corpus_doc(const std::string& name) { return open_document(testutil::read_corpus(name)); }

Outcome run(const Document& d) {
  SolveOptions o;
  o.time_limit = 20;
  BudgetTable b = d.budgets;
  return solve(d.ast, o, &b, nullptr, nullptr).outcome;
}

std::vector<std::string> stripped_text(const AnnotatedAst& ast) {
  std::vector<std::string> out;
  for (const auto& d : strip(ast)) {
    std::string s = d.name() + ":";
    if (d.formula) s += frontend::pretty(d.formula);
    out.push_back(s);
  }
  return out;
}

std::string trigger_text(const AnnotatedAst& ast) {
  std::string s;
  for (const auto& [head, ts] : ast.triggers) {
    s += std::to_string(head) + ":";
    for (const auto& t : ts) s += "[" + frontend::pretty_trigger(t) + "]";
    s += ";";
  }
  return s;
}

std::string budget_text(const BudgetTable& b) {
  std::string s;
  for (const auto& [id, n] : b.limits()) s += std::to_string(id) + "=" + std::to_string(n) + ";";
  return s;
}

std::string random_text(std::mt19937& rng) {
  static const std::vector<std::string> pieces = {"a", "b - 1", " ", "\"", "\\", ",", "[", "]",
                                                  "↦", "x y", "'a", "\t", "f(x)"};
  std::string s;
  int n = static_cast<int>(rng() % 5);
  for (int i = 0; i < n; ++i) s += pieces[rng() % pieces.size()];
  return s;
}

Action random_action(std::mt19937& rng) {
  NodeId id = static_cast<NodeId>(rng() % 500);
  switch (rng() % 6) {
    case 0: return Action::prune(id);
    case 1: return Action::unprune(id);
    case 2: {
      std::vector<std::string> vars, terms;
      int n = static_cast<int>(rng() % 4);
      for (int i = 0; i < n; ++i) {
        vars.push_back(random_text(rng));
        terms.push_back(random_text(rng));
      }
      return Action::add_instance(id, random_text(rng), vars, terms);
    }
    case 3: return Action::add_trigger(id, rng() % 2, random_text(rng));
    case 4: return Action::limit_lemma(id, random_text(rng), 1 + static_cast<long>(rng() % 1000));
    default: return Action::unlimit_lemma(id, random_text(rng));
  }
}

}  // namespace

TEST_CASE("adding a variable trigger lets the crazy axiom fire") {
  Document d = corpus_doc("crazy.ae");
  NodeId head = lemma_head(d.ast, *d.ast.find_decl("crazy"));
  CHECK(d.ast.warnings.count(head));
  CHECK(run(d) == Outcome::Unknown);
  ActionOutcome r = apply_action(d, Action::add_trigger(head, false, "x, y"));
  CHECK(r.recorded.kind == Action::Kind::AddTrigger);
  REQUIRE(d.ast.triggers.at(head).size() == 1);
  CHECK(d.ast.triggers.at(head)[0].patterns.size() == 2);
  CHECK(d.ast.triggers.at(head)[0].origin == TriggerOrigin::UserAction);
  CHECK_FALSE(d.ast.warnings.count(head));
  CHECK(run(d) == Outcome::Valid);
  CHECK(d.actions.size() == 1);
}

TEST_CASE("unsound prunes are recorded as such and block saving") {
  Document d = corpus_doc("pq.ae");
  NodeId left = find_node(d.ast, "P(y)");
  NodeId right = find_node(d.ast, "P(y)", left + 1);
  REQUIRE(left != kNoNode);
  REQUIRE(right != kNoNode);
  CHECK(run(d) == Outcome::Unknown);
  CHECK(apply_action(d, Action::prune(left)).recorded.kind == Action::Kind::IncorrectPrune);
  CHECK(d.ast.node(left).prune == PruneState::PrunedUnsound);
  CHECK_THROWS_AS(make_session(d), SaveRefused);
  CHECK(apply_action(d, Action::prune(right)).recorded.kind == Action::Kind::IncorrectPrune);
  CHECK(run(d) == Outcome::Valid);
  CHECK_THROWS_AS(save_session(d, "/nonexistent/x"), SaveRefused);
}

TEST_CASE("failed actions leave the document alone") {
  Document d = corpus_doc("fig2.ae");
  CHECK_THROWS_AS(apply_action(d, Action::prune(21)), ActionError);
  CHECK_THROWS_AS(apply_action(d, Action::unprune(3)), ActionError);
  CHECK_THROWS_AS(apply_action(d, Action::prune(999)), ActionError);
  CHECK_THROWS_AS(apply_action(d, Action::add_trigger(4, false, "add(y, s)")), ActionError);
  CHECK_THROWS_AS(apply_action(d, Action::limit_lemma(4, "mem_add", 0)), ActionError);
  CHECK_THROWS_AS(apply_action(d, Action::add_instance(3, "i", {"x", "y"}, {"true", "b"})),
                  ActionError);
  CHECK(d.actions.empty());
  CHECK(d.ast.size() == 39);
  CHECK(d.ast.node(3).prune == PruneState::Active);
}

TEST_CASE("instances, limits and trigger replacement") {
  Document d = corpus_doc("fig2.ae");
  ActionOutcome r = apply_action(d, Action::add_instance(3, "inst", {"y"}, {"b"}));
  CHECK(r.changed.front() == 39);
  CHECK(d.ast.find_decl("inst") == 39);
  apply_action(d, Action::limit_lemma(4, "mem_add", 200));
  CHECK(d.budgets.limit(4) == 200);
  apply_action(d, Action::unlimit_lemma(3, "mem_add"));
  CHECK_FALSE(d.budgets.limit(4));
  apply_action(d, Action::add_trigger(4, true, "[add(y, s), add(x, s)]"));
  REQUIRE(d.ast.triggers.at(4).size() == 1);
  CHECK(d.ast.triggers.at(4)[0].patterns.size() == 2);
  CHECK(d.actions.size() == 4);
}

TEST_CASE("pruning a declaration with its dependents") {
  Document d = corpus_doc("fig2.ae");
  auto outs = prune_with_dependents(d, 1);  // logic add
  std::vector<NodeId> ids;
  for (const auto& o : outs) ids.push_back(o.recorded.id);
  CHECK(ids == std::vector<NodeId>{1, 3});
  CHECK(d.ast.node(21).prune == PruneState::Active);
  for (const auto& a : d.actions) CHECK(a.kind == Action::Kind::Prune);
}

TEST_CASE("session text round-trips") {
  std::mt19937 rng(5);
  for (int i = 0; i < 100; ++i) {
    Session s;
    int names = static_cast<int>(rng() % 6);
    for (int k = 0; k < names; ++k) s.names.emplace_back("d" + std::to_string(k), k * 7);
    int n = static_cast<int>(rng() % 12);
    for (int k = 0; k < n; ++k) s.actions.push_back(random_action(rng));
    std::string text = write_session(s);
    CHECK(read_session(text) == s);
    CHECK(write_session(read_session(text)) == text);
  }
  Session empty;
  CHECK(write_session(empty) == "ALTGR-SESSION v1\n");
  CHECK(read_session("ALTGR-SESSION v1\n") == empty);
  Session two;
  two.actions = {Action::prune(7), Action::limit_lemma(12, "L", 50)};
  CHECK(write_session(two) == "ALTGR-SESSION v1\nACTION Prune 7\nACTION LimitLemma 12 \"L\" 50\n");
}

TEST_CASE("malformed session files") {
  CHECK_THROWS_AS(read_session(""), SessionFormatError);
  CHECK_THROWS_AS(read_session("hello\n"), SessionFormatError);
  CHECK_THROWS_AS(read_session("ALTGR-SESSION v2\n"), SessionFormatError);
  CHECK_THROWS_AS(read_session("ALTGR-SESSION v1\nACTION Explode 3\n"), SessionFormatError);
  CHECK_THROWS_AS(read_session("ALTGR-SESSION v1\nACTION Prune\n"), SessionFormatError);
  CHECK_THROWS_AS(read_session("ALTGR-SESSION v1\nACTION LimitLemma 3 L 5\n"), SessionFormatError);
  CHECK_THROWS_AS(read_session("ALTGR-SESSION v1\nNAME a\n"), SessionFormatError);
}

TEST_CASE("replay on the unchanged file reproduces the state") {
  Document d = corpus_doc("fig2.ae");
  apply_action(d, Action::prune(23));
  apply_action(d, Action::add_instance(3, "inst", {"x", "y", "s"}, {"a - 1", "b", "s1"}));
  apply_action(d, Action::limit_lemma(4, "mem_add", 30));
  apply_action(d, Action::prune(39));
  apply_action(d, Action::unprune(39));
  apply_action(d, Action::add_trigger(4, false, "add(y, s), add(x, s)"));
  std::string path = (std::filesystem::temp_directory_path() / "replay_test.session").string();
  save_session(d, path);
  Session s = load_session_file(path);
  std::remove(path.c_str());
  CHECK(s == make_session(d));

  Document fresh = corpus_doc("fig2.ae");
  ReplayReport r = replay(s, fresh);
  CHECK_FALSE(r.aborted);
  CHECK(r.failed.empty());
  CHECK(r.applied == 6);
  CHECK(stripped_text(fresh.ast) == stripped_text(d.ast));
  CHECK(trigger_text(fresh.ast) == trigger_text(d.ast));
  CHECK(budget_text(fresh.budgets) == budget_text(d.budgets));
  CHECK(fresh.actions == d.actions);

  Document again = corpus_doc("fig2.ae");
  replay(s, again);
  CHECK(stripped_text(again.ast) == stripped_text(fresh.ast));
  CHECK(make_session(again) == make_session(fresh));
}

TEST_CASE("replay shifts ids past an inserted axiom") {
  Document d = corpus_doc("fig2.ae");
  apply_action(d, Action::prune(23));  // a = b + 1 in the goal
  apply_action(d, Action::limit_lemma(4, "mem_add", 5));
  Session s = make_session(d);

  std::string text = testutil::read_corpus("fig2.ae");
  const std::string extra = "logic f: int -> int\naxiom f_id: forall z: int. f(z) = z\n";
  text.insert(text.find("axiom mem_add"), extra);
  Document edited = open_document(text);
  int k = static_cast<int>(edited.ast.size()) - static_cast<int>(d.ast.size());
  CHECK(k > 0);
  ReplayReport r = replay(s, edited);
  CHECK(r.failed.empty());
  CHECK(edited.ast.node(23 + k).prune == PruneState::PrunedSound);
  CHECK(edited.budgets.limit(4 + k) == 5);
  std::vector<std::string> a = stripped_text(d.ast), b = stripped_text(edited.ast);
  b.erase(std::remove_if(b.begin(), b.end(),
                         [](const std::string& x) { return x.rfind("f:", 0) == 0 || x.rfind("f_id:", 0) == 0; }),
          b.end());
  CHECK(a == b);
}

TEST_CASE("replay aborts when the file was refactored") {
  Document d = corpus_doc("fig2.ae");
  apply_action(d, Action::prune(23));
  apply_action(d, Action::limit_lemma(4, "mem_add", 5));
  Session s = make_session(d);
  std::string text = testutil::read_corpus("fig2.ae");
  for (auto [from, to] : std::vector<std::pair<std::string, std::string>>{
           {"mem_add", "member_add"}, {"goal g", "goal h"}, {"set", "bag"}})
    for (size_t p = text.find(from); p != std::string::npos; p = text.find(from, p + to.size()))
      text.replace(p, from.size(), to);
  Document renamed = open_document(text);
  std::string before = trigger_text(renamed.ast);
  ReplayReport r = replay(s, renamed);
  CHECK(r.aborted);
  CHECK(r.failed.size() == 2);
  CHECK(renamed.actions.empty());
  CHECK(renamed.ast.node(23).prune == PruneState::Active);
  CHECK(trigger_text(renamed.ast) == before);
}
