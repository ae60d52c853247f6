#pragma once

// E-matching modulo the e-graph, instantiation rounds with deduplication
// and budgets, and user-requested (possibly partial) instances.

#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "altgr/annotated.h"
#include "altgr/theory.h"

namespace altgr {

/// Bindings of quantified variables to ground terms and of type variables
/// to ground types.
struct Subst {
  std::map<std::string, TermId> terms;
  TypeSubst types;

  /// Dedup key: class representatives of the bound terms plus the types.
  std::string key(const EGraph& eg) const;
  /// `{x ↦ a - 1, y ↦ b, 'a ↦ int}`, term variables in `order` first.
  std::string str(const TermBank& bank, const std::vector<Binder>& order = {}) const;
};

/// Every substitution under which `pattern` equals (modulo `eg`) some term
/// of `universe`.  Subterms match through the members of their class.
std::vector<Subst> ematch(const ExprRef& pattern, const EGraph& eg, const TermBank& bank,
                          const std::vector<TermId>& universe);

/// Joint matches of several patterns; bindings of shared variables must
/// agree modulo `eg`.
std::vector<Subst> ematch_multi(const std::vector<ExprRef>& patterns, const EGraph& eg,
                                const TermBank& bank, const std::vector<TermId>& universe);

/*------------------------------------------------------------------------*/

class NonPositiveLimit : public std::invalid_argument {
 public:
  NonPositiveLimit() : std::invalid_argument("instance limits must be positive") {}
};

struct BudgetRow {
  NodeId id = kNoNode;  // quantifier block head
  std::string name;
  long produced = 0;
  std::optional<long> limit;
  bool limited = false;
};

/// Per-lemma instance counters and limits.  Shared between the document
/// (which edits limits) and a running solver (which counts).
class BudgetTable {
 public:
  BudgetTable() = default;
  BudgetTable(const BudgetTable& other);
  BudgetTable& operator=(const BudgetTable& other);

  void declare(NodeId id, const std::string& name);
  void set_limit(NodeId id, long n);
  void unset_limit(NodeId id);
  std::optional<long> limit(NodeId id) const;
  /// Limits as they are now; a round works with one such snapshot.
  std::map<NodeId, long> limits() const;

  /// Adds `n` instances; marks the lemma limited once its limit is reached.
  void record(NodeId id, long n);
  /// Clears counts and flags, keeps limits (start of a run).
  void reset_counts();

  BudgetRow row(NodeId id) const;
  /// Rows with at least one instance or a limit, most productive first.
  std::vector<BudgetRow> rows() const;
  long total() const;

 private:
  mutable std::mutex mutex_;
  std::map<NodeId, BudgetRow> rows_;
};

/*------------------------------------------------------------------------*/

/// A universally quantified formula available for instantiation.
struct Lemma {
  NodeId head = kNoNode;  // quantifier node id (budget key)
  std::string name;       // display name
  std::vector<Binder> vars;
  ExprRef body;
  std::vector<Trigger> triggers;
  bool negated = false;  // instances are `not body` (from a refuted exists)
  int guard = 0;         // solver literal under which the lemma holds
  std::set<NodeId> labels;
};

struct Instance {
  size_t lemma = 0;
  Subst subst;
  ExprRef formula;
};

/// Ground instance of a lemma body.
ExprRef instantiate(const Lemma& lemma, const Subst& s, const TermBank& bank);

struct RoundStats {
  int phase = 0;  // 1: decision-procedure terms, 2: boolean model terms
  bool seeded = false;
  std::vector<size_t> newly_limited;
};

/// One instantiation round.  `active` selects lemmas whose guard holds.
/// `model_terms` is only called when the first phase yields nothing.
class Matcher {
 public:
  Matcher(TermBank& bank, BudgetTable* budgets) : bank_(&bank), budgets_(budgets) {}

  std::vector<Instance> round(const std::vector<Lemma>& lemmas, const std::vector<bool>& active,
                              TheoryState& theory,
                              const std::function<std::vector<TermId>()>& model_terms,
                              RoundStats* stats = nullptr);

  /// Number of distinct instances produced so far.
  size_t seen() const { return seen_.size(); }

 private:
  std::vector<Instance> collect(const std::vector<Lemma>& lemmas, const std::vector<bool>& active,
                                const TheoryState& theory, const std::vector<TermId>& universe,
                                const std::map<NodeId, long>& limits,
                                std::map<NodeId, long>& produced, RoundStats* stats);

  TermBank* bank_;
  BudgetTable* budgets_;
  std::set<std::pair<size_t, std::string>> seen_;
  std::set<std::string> seen_formulas_;
};

/*------------------------------------------------------------------------*/

/// Instantiates some of the variables of a universally quantified axiom
/// (`quant` is the axiom's declaration or one of its quantifier nodes) with
/// user-typed terms and appends the result as a new axiom named `name`.
/// Unbound variables stay universally quantified, with fresh triggers.
NodeId manual_instance(AnnotatedAst& ast, NodeId quant,
                       const std::vector<std::pair<std::string, std::string>>& bindings,
                       const std::string& name);

/// Quantifier block head designated by a declaration or quantifier id, for
/// lemma-addressed operations (limits, instances, triggers).
NodeId lemma_head(const AnnotatedAst& ast, NodeId id);

}  // namespace altgr
