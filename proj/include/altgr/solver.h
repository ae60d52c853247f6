#pragma once

// Clausal encoding of a problem with provenance labels, and the search loop:
// unit propagation and decisions over the clauses, theory checks on the
// assigned atoms, instantiation rounds when the clauses are satisfied, and
// unsat cores read off the refutation.

#include <atomic>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "altgr/annotated.h"
#include "altgr/matching.h"
#include "altgr/telemetry.h"
#include "altgr/theory.h"

namespace altgr {

/// Signed variable index; variable 1 is the constant true.
using Lit = int;
inline constexpr Lit kTrueLit = 1;

struct LabeledClause {
  std::vector<Lit> lits;
  std::set<NodeId> labels;
  std::optional<std::pair<NodeId, int>> instance_origin;  // (lemma head, index)
};

/// Ground theory atom behind a boolean variable.
struct TheoryAtom {
  enum class Kind { Eq, Le, Lt, Pred } kind;
  TermId lhs = kNoTerm;
  TermId rhs = kNoTerm;  // unused for Pred
};

/// Polarity-aware clausal form.  Formulas are asserted under a guard
/// literal; subformulas are named by definitional variables that are only
/// constrained in the directions they are used, and shared by identical
/// subformulas.  Asserted universals become lemmas, asserted existentials
/// are skolemized with `sk_<var>_<counter>`.
class Encoder {
 public:
  explicit Encoder(TermBank& bank) : bank_(&bank) {}

  /// Axioms are asserted, the goal is refuted.
  void add_decl(const Decl& d);
  /// `f` (or its negation) holds whenever `guard` does.  `labels` are put on
  /// every clause produced.
  void assert_formula(const ExprRef& f, bool sign, Lit guard, const std::set<NodeId>& labels,
                      std::optional<std::pair<NodeId, int>> origin = std::nullopt);

  int num_vars() const { return num_vars_; }
  const std::vector<LabeledClause>& clauses() const { return clauses_; }
  const std::vector<Lemma>& lemmas() const { return lemmas_; }
  /// Theory atom of a variable, if it has one.
  const TheoryAtom* atom(int var) const;
  const std::map<int, TheoryAtom>& atoms() const { return atoms_; }

 private:
  struct Ctx {
    std::set<NodeId> labels;
    std::optional<std::pair<NodeId, int>> origin;
  };

  void assert_rec(const ExprRef& f, bool sign, Lit guard, Ctx ctx);
  Lit lit(const ExprRef& f, bool pos, bool neg, const Ctx& ctx);
  Lit atom_lit(const ExprRef& f);
  void emit(std::vector<Lit> lits, Lit guard, const Ctx& ctx);
  void add_lemma(const ExprRef& f, bool negated, Lit guard, const Ctx& ctx);
  ExprRef skolemize(const ExprRef& f);
  int fresh() { return ++num_vars_; }

  TermBank* bank_;
  int num_vars_ = 1;
  std::vector<LabeledClause> clauses_;
  std::vector<Lemma> lemmas_;
  std::set<std::string> lemma_keys_;
  std::map<int, TheoryAtom> atoms_;
  std::map<std::string, int> atom_vars_;
  struct Definition {
    int var;
    bool pos = false, neg = false;
  };
  std::map<std::string, Definition> defs_;
  int skolems_ = 0;
};

/*------------------------------------------------------------------------*/

struct SolveOptions {
  double time_limit = 60;  // seconds
  int max_rounds = 100;
};

/// Switches a caller may flip while a run is in progress.
struct RunControl {
  std::atomic<bool> abort{false};
  std::atomic<bool> core{true};
  /// Called on the solver thread after each instantiation round with the
  /// round count and the number of distinct instances so far.
  std::function<void(int, size_t)> on_round;
};

enum class Outcome { Valid, Unknown, Timeout, Aborted };
const char* outcome_name(Outcome o);

struct SolveResult {
  Outcome outcome = Outcome::Unknown;
  int rounds = 0;
  double elapsed = 0;
  /// Labels of the refutation and how many of its clauses carry each;
  /// present for Valid when cores were enabled at the end of the run.
  std::optional<std::map<NodeId, int>> core;
  /// `name: formula` for every instance produced, in order.
  std::vector<std::string> instances;
  /// `name: {x ↦ t, ...}`, parallel to `instances`.
  std::vector<std::string> substitutions;
  /// Size of the matcher's seen set at the end of the run.
  size_t distinct_instances = 0;
};

/// Solves the goal of `ast` (its stripped form) against its axioms.
/// `budgets` receives the instance counts; its limits are honoured at each
/// round.  All of `budgets`, `telemetry` and `control` may be null.
SolveResult solve(const AnnotatedAst& ast, const SolveOptions& opts, BudgetTable* budgets,
                  Telemetry* telemetry, RunControl* control);

/// Same, on already stripped declarations.  `names` gives lemma display
/// names by quantifier id.
SolveResult solve_decls(const std::vector<Decl>& decls, const SolveOptions& opts,
                        BudgetTable* budgets, Telemetry* telemetry, RunControl* control,
                        const std::function<std::string(NodeId)>& names = nullptr);

/*------------------------------------------------------------------------*/

class CoreUnavailable : public std::logic_error {
 public:
  CoreUnavailable() : std::logic_error("no unsat core: not a proof, or cores were disabled") {}
};

enum class Shade { Light, Medium, Dark };
const char* shade_name(Shade s);

struct CoreView {
  std::map<NodeId, int> hits;
  std::map<NodeId, Shade> shades;  // includes declarations holding a core node
};

/// Shades by thirds of the maximum hit count.
CoreView core_of(const SolveResult& r, const AnnotatedAst& ast);

}  // namespace altgr
