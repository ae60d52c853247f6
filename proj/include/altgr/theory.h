#pragma once

// Ground decision procedures.  EGraph is a backtrackable congruence
// closure; LinearArith solves linear equalities by substitution and checks
// inequalities by bounded Fourier-Motzkin; TheoryState combines them by
// exchanging equalities between numeric terms.

#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "altgr/telemetry.h"
#include "altgr/terms.h"

namespace altgr {

struct Verdict {
  bool consistent = true;
  Tags explanation;  // the assumptions that clash, when inconsistent

  static Verdict ok() { return {}; }
  static Verdict conflict(Tags tags) { return {false, std::move(tags)}; }
};

class PopOnEmpty : public std::logic_error {
 public:
  PopOnEmpty() : std::logic_error("pop without a matching push") {}
};

struct EqClass {
  TermId rep;
  std::vector<TermId> members;  // ascending ids
};

/*------------------------------------------------------------------------*/

class EGraph {
 public:
  explicit EGraph(const TermBank& bank) : bank_(&bank) {}

  /// Registers `t` and its subterms.  Congruences found are queued.
  void add(TermId t);
  bool contains(TermId t) const {
    return t >= 0 && static_cast<size_t>(t) < repr_.size() && repr_[t] != kNoTerm;
  }
  TermId find(TermId t) const { return repr_[t]; }
  bool equal(TermId a, TermId b) const { return find(a) == find(b); }

  /// Queues a merge justified by `reason`.  Call propagate() to close.
  void merge(TermId a, TermId b, Tags reason);
  void assert_diseq(TermId a, TermId b, Tag tag);
  /// Processes queued merges to a congruence-closed state.  Returns false on
  /// a clash (a recorded disequality or two distinct values in one class).
  bool propagate();
  const Tags& conflict() const { return conflict_; }

  /// Tags of the assumptions that make `a` and `b` equal.
  Tags explain(TermId a, TermId b) const;

  const std::vector<TermId>& members(TermId rep) const { return members_[rep]; }
  /// Registered terms in registration order.
  const std::vector<TermId>& terms() const { return terms_; }
  /// Partition ordered by smallest member id.
  std::vector<EqClass> classes() const;

  /// Pairs merged by propagate() since the last call, oldest first.
  std::vector<std::pair<TermId, TermId>> take_merged();

  void push();
  void pop();
  size_t level() const { return marks_.size(); }

 private:
  struct Edge {
    TermId a, b;
    bool congruence;
    Tags tags;
  };
  struct Pending {
    TermId a, b;
    bool congruence;
    Tags tags;
  };
  struct Undo {
    enum class Kind { Register, Union, Table, Edge, Diseq, Merged } kind;
    explicit Undo(Kind k) : kind(k) {}
    TermId a = kNoTerm, b = kNoTerm;
    size_t members_size = 0, uses_size = 0;
    TermId old_value = kNoTerm;
    std::string key;
    TermId old_entry = kNoTerm;
  };

  std::string signature(TermId t) const;
  void table_set(const std::string& key, TermId t);
  void rehash(TermId parent);
  void unite(const Pending& p);
  void explain_into(TermId a, TermId b, size_t limit, Tags& out) const;
  void grow(TermId t);

  const TermBank* bank_;
  std::vector<TermId> repr_;
  std::vector<std::vector<TermId>> members_;
  std::vector<std::vector<TermId>> uses_;
  std::vector<TermId> value_;  // per representative: its interpreted constant
  std::vector<std::vector<int>> adjacency_;
  std::vector<Edge> edges_;
  std::vector<TermId> terms_;
  std::unordered_map<std::string, TermId> table_;
  std::vector<std::pair<std::pair<TermId, TermId>, Tag>> diseqs_;
  std::vector<Pending> pending_;
  std::vector<std::pair<TermId, TermId>> merged_;
  size_t merged_taken_ = 0;
  std::vector<Undo> trail_;
  std::vector<size_t> marks_;
  Tags conflict_;
};

/*------------------------------------------------------------------------*/

class LinearArith {
 public:
  /// Derived inequalities allowed per check before giving up (the store is
  /// then treated as consistent).
  static constexpr size_t kFourierMotzkinCap = 10000;

  explicit LinearArith(const TermBank& bank) : bank_(&bank) {}

  /// Linear form of a numeric term; non-arithmetic subterms are atoms.
  Poly linearize(TermId t) const;
  /// `p` with solved atoms substituted, and the tags that justify it.
  std::pair<Poly, Tags> normalize(const Poly& p) const;

  /// Records p = 0.
  Verdict assume_eq(const Poly& p, const Tags& tags);
  /// Records p <= 0, or p < 0 when strict.
  void assume_ineq(const Poly& p, bool strict, const Tags& tags);
  /// Fourier-Motzkin over the current inequalities.
  Verdict check(size_t* derived = nullptr) const;

  /// Bumped whenever the solved form changes.
  size_t version() const { return version_; }

  void push();
  void pop();

 private:
  struct Solved {
    Poly value;
    Tags tags;
  };
  struct Ineq {
    Poly p;
    bool strict;
    Tags tags;
  };
  struct Undo {
    TermId atom;
    std::optional<Solved> old;
  };

  void set_solved(TermId atom, std::optional<Solved> value);

  const TermBank* bank_;
  std::map<TermId, Solved> solved_;
  std::vector<Ineq> ineqs_;
  std::vector<Undo> trail_;
  std::vector<std::pair<size_t, size_t>> marks_;
  size_t version_ = 0;
};

/*------------------------------------------------------------------------*/

class TheoryState {
 public:
  explicit TheoryState(TermBank& bank, Telemetry* telemetry = nullptr);

  TermBank& bank() { return *bank_; }
  const EGraph& egraph() const { return eg_; }
  const LinearArith& arith() const { return arith_; }

  /// Registers a term (and subterms) so that it takes part in the
  /// partition.  Returns false if this already closes into a clash.
  Verdict add_term(TermId t);

  Verdict assume_eq(TermId a, TermId b, Tag tag);
  Verdict assume_neq(TermId a, TermId b, Tag tag);
  /// a <= b, or a < b when strict.
  Verdict assume_le(TermId a, TermId b, bool strict, Tag tag);
  /// A predicate application holds (or not).
  Verdict assume_pred(TermId p, bool value, Tag tag);
  /// Full consistency check including Fourier-Motzkin.
  Verdict check();

  /// Normal form of a numeric term under the current equalities.
  Poly canon(TermId t) const;
  std::vector<EqClass> classes() const { return eg_.classes(); }
  bool equal(TermId a, TermId b) const;

  void push();
  void pop();
  size_t level() const { return eg_.level(); }

 private:
  Verdict settle();
  void regroup();

  TermBank* bank_;
  Telemetry* telemetry_;
  EGraph eg_;
  LinearArith arith_;
  std::vector<TermId> numeric_;  // registered numeric terms
  std::vector<size_t> numeric_marks_;
  size_t grouped_count_ = 0;

  // Normal forms seen by regroup().  Valid while the solved form keeps the
  // version it was built under and nothing was popped.
  std::unordered_map<std::string, std::pair<TermId, Tags>> groups_;
  size_t groups_version_ = static_cast<size_t>(-1);
  size_t groups_done_ = 0;  // prefix of numeric_ already grouped
};

}  // namespace altgr
