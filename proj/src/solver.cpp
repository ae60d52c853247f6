#include <algorithm>
#include <chrono>

#include "altgr/frontend.h"
#include "altgr/solver.h"

namespace altgr {

const char* outcome_name(Outcome o) {
  switch (o) {
    case Outcome::Valid: return "Valid";
    case Outcome::Unknown: return "Unknown";
    case Outcome::Timeout: return "Timeout";
    case Outcome::Aborted: return "Aborted";
  }
  return "?";
}

const char* shade_name(Shade s) {
  switch (s) {
    case Shade::Light: return "light";
    case Shade::Medium: return "medium";
    case Shade::Dark: return "dark";
  }
  return "?";
}

namespace {

constexpr int kDecision = -1;

struct Conflict {
  std::vector<Lit> lits;  // all false under the current assignment
  std::vector<int> ancestry;
};

class Search {
 public:
  Search(const SolveOptions& opts, BudgetTable* budgets, Telemetry* telemetry,
         RunControl* control, const std::function<std::string(NodeId)>& names)
      : opts_(opts),
        budgets_(budgets),
        telemetry_(telemetry),
        control_(control),
        names_(names),
        encoder_(bank_),
        theory_(bank_, telemetry),
        matcher_(bank_, budgets) {}

  SolveResult run(const std::vector<Decl>& decls);

 private:
  struct Clause {
    std::vector<Lit> lits;
    std::vector<int> ancestry;  // encoder clause indices behind this clause
  };

  static size_t code(Lit l) { return 2 * static_cast<size_t>(std::abs(l)) + (l < 0); }
  int value(Lit l) const { return l > 0 ? value_[l] : -value_[-l]; }
  size_t level() const { return trail_lim_.size(); }

  void grow();
  std::optional<Conflict> import_clauses();
  std::optional<Conflict> add_clause(std::vector<Lit> lits, std::vector<int> ancestry);
  void watch(int cid);
  void enqueue(Lit l, int reason);
  std::optional<Conflict> propagate();
  Verdict assume(int var, bool value);
  Conflict theory_conflict(const Tags& tags) const;
  std::pair<std::vector<Lit>, std::vector<int>> analyze(const Conflict& c) const;
  void backtrack(size_t to);
  int pick() const;
  bool round(SolveResult& r);
  std::string lemma_name(NodeId head) const;
  double elapsed() const;

  SolveOptions opts_;
  BudgetTable* budgets_;
  Telemetry* telemetry_;
  RunControl* control_;
  std::function<std::string(NodeId)> names_;

  TermBank bank_;
  Encoder encoder_;
  TheoryState theory_;
  Matcher matcher_;

  std::vector<Clause> db_;
  size_t imported_ = 0;
  std::vector<std::vector<int>> watches_;
  std::vector<int> value_;
  std::vector<int> reason_;
  std::vector<size_t> level_of_;
  std::vector<Lit> trail_;
  std::vector<size_t> trail_lim_;
  size_t qhead_ = 0;
  bool ineq_pending_ = false;
  std::map<NodeId, int> instance_counts_;
  std::set<NodeId> declared_;
  std::chrono::steady_clock::time_point start_;
};

double Search::elapsed() const {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
}

std::string Search::lemma_name(NodeId head) const {
  if (names_) {
    std::string n = names_(head);
    if (!n.empty()) return n;
  }
  return "lemma@" + std::to_string(head);
}

void Search::grow() {
  size_t n = static_cast<size_t>(encoder_.num_vars()) + 1;
  if (value_.size() >= n) return;
  value_.resize(n, 0);
  reason_.resize(n, kDecision);
  level_of_.resize(n, 0);
  watches_.resize(2 * n);
}

std::optional<Conflict> Search::import_clauses() {
  grow();
  const auto& cs = encoder_.clauses();
  std::optional<Conflict> first;
  for (; imported_ < cs.size(); ++imported_) {
    auto c = add_clause(cs[imported_].lits, {static_cast<int>(imported_)});
    if (c && !first) first = std::move(c);
  }
  return first;
}

// Adds a clause at decision level 0.
std::optional<Conflict> Search::add_clause(std::vector<Lit> lits, std::vector<int> ancestry) {
  std::stable_partition(lits.begin(), lits.end(), [&](Lit l) { return value(l) >= 0; });
  int cid = static_cast<int>(db_.size());
  db_.push_back({lits, ancestry});
  if (lits.empty() || value(lits[0]) < 0) return Conflict{lits, ancestry};
  if (lits.size() >= 2) watch(cid);
  bool satisfied = std::any_of(lits.begin(), lits.end(), [&](Lit l) { return value(l) > 0; });
  if (!satisfied && (lits.size() == 1 || value(lits[1]) < 0)) enqueue(lits[0], cid);
  return std::nullopt;
}

void Search::watch(int cid) {
  watches_[code(db_[cid].lits[0])].push_back(cid);
  watches_[code(db_[cid].lits[1])].push_back(cid);
}

void Search::enqueue(Lit l, int reason) {
  int v = std::abs(l);
  value_[v] = l > 0 ? 1 : -1;
  reason_[v] = reason;
  level_of_[v] = level();
  trail_.push_back(l);
}

Verdict Search::assume(int var, bool value) {
  const TheoryAtom* a = encoder_.atom(var);
  if (!a) return Verdict::ok();
  switch (a->kind) {
    case TheoryAtom::Kind::Eq:
      return value ? theory_.assume_eq(a->lhs, a->rhs, var)
                   : theory_.assume_neq(a->lhs, a->rhs, var);
    case TheoryAtom::Kind::Le:
      ineq_pending_ = true;
      return value ? theory_.assume_le(a->lhs, a->rhs, false, var)
                   : theory_.assume_le(a->rhs, a->lhs, true, var);
    case TheoryAtom::Kind::Lt:
      ineq_pending_ = true;
      return value ? theory_.assume_le(a->lhs, a->rhs, true, var)
                   : theory_.assume_le(a->rhs, a->lhs, false, var);
    case TheoryAtom::Kind::Pred: return theory_.assume_pred(a->lhs, value, var);
  }
  return Verdict::ok();
}

Conflict Search::theory_conflict(const Tags& tags) const {
  Conflict c;
  for (Tag t : tags) c.lits.push_back(value_[t] > 0 ? -t : t);
  return c;
}

std::optional<Conflict> Search::propagate() {
  ALTGR_TIME(telemetry_, Module::SAT);
  while (true) {
    while (qhead_ < trail_.size()) {
      Lit l = trail_[qhead_++];
      if (Verdict v = assume(std::abs(l), l > 0); !v.consistent)
        return theory_conflict(v.explanation);
      Lit f = -l;
      auto& ws = watches_[code(f)];
      size_t keep = 0;
      for (size_t i = 0; i < ws.size(); ++i) {
        int cid = ws[i];
        auto& lits = db_[cid].lits;
        if (lits[0] == f) std::swap(lits[0], lits[1]);
        if (value(lits[0]) > 0) {
          ws[keep++] = cid;
          continue;
        }
        bool moved = false;
        for (size_t k = 2; k < lits.size(); ++k) {
          if (value(lits[k]) >= 0) {
            std::swap(lits[1], lits[k]);
            watches_[code(lits[1])].push_back(cid);
            moved = true;
            break;
          }
        }
        if (moved) continue;
        ws[keep++] = cid;
        if (value(lits[0]) < 0) {
          for (size_t j = i + 1; j < ws.size(); ++j) ws[keep++] = ws[j];
          ws.resize(keep);
          return Conflict{lits, db_[cid].ancestry};
        }
        enqueue(lits[0], cid);
      }
      ws.resize(keep);
    }
    if (!ineq_pending_) return std::nullopt;
    ineq_pending_ = false;
    if (Verdict v = theory_.check(); !v.consistent) return theory_conflict(v.explanation);
  }
}

// Resolves away every propagated literal; what is left are negated
// decisions.  The ancestry collects every input clause used.
std::pair<std::vector<Lit>, std::vector<int>> Search::analyze(const Conflict& c) const {
  std::vector<char> seen(value_.size(), 0);
  std::set<int> ancestry(c.ancestry.begin(), c.ancestry.end());
  std::vector<Lit> stack = c.lits, out;
  while (!stack.empty()) {
    Lit l = stack.back();
    stack.pop_back();
    int v = std::abs(l);
    if (seen[v]) continue;
    seen[v] = 1;
    if (reason_[v] == kDecision) {
      out.push_back(l);
      continue;
    }
    const Clause& r = db_[reason_[v]];
    ancestry.insert(r.ancestry.begin(), r.ancestry.end());
    for (Lit l2 : r.lits)
      if (std::abs(l2) != v) stack.push_back(l2);
  }
  std::sort(out.begin(), out.end(), [&](Lit a, Lit b) {
    return level_of_[std::abs(a)] > level_of_[std::abs(b)];
  });
  return {out, std::vector<int>(ancestry.begin(), ancestry.end())};
}

void Search::backtrack(size_t to) {
  while (level() > to) {
    size_t mark = trail_lim_.back();
    while (trail_.size() > mark) {
      int v = std::abs(trail_.back());
      value_[v] = 0;
      reason_[v] = kDecision;
      trail_.pop_back();
    }
    trail_lim_.pop_back();
    theory_.pop();
  }
  qhead_ = trail_.size();
  ineq_pending_ = false;
}

int Search::pick() const {
  int best = 0;
  for (const auto& c : db_) {
    bool sat = false;
    int low = 0;
    for (Lit l : c.lits) {
      int val = value(l);
      if (val > 0) {
        sat = true;
        break;
      }
      if (val == 0 && (low == 0 || std::abs(l) < low)) low = std::abs(l);
    }
    if (!sat && low != 0 && (best == 0 || low < best)) best = low;
  }
  return best;
}

// Returns false when no new instance was produced.
bool Search::round(SolveResult& r) {
  const auto& lemmas = encoder_.lemmas();
  std::vector<bool> active;
  for (const auto& l : lemmas) {
    active.push_back(l.guard == kTrueLit || value(l.guard) > 0);
    if (budgets_ && declared_.insert(l.head).second) budgets_->declare(l.head, lemma_name(l.head));
  }
  // Terms of every atom the boolean search knows about.
  auto model_terms = [&] {
    std::vector<TermId> out;
    for (const auto& [var, a] : encoder_.atoms()) {
      out.push_back(a.lhs);
      if (a.rhs != kNoTerm) out.push_back(a.rhs);
    }
    return out;
  };
  std::vector<Instance> insts;
  {
    ALTGR_TIME(telemetry_, Module::Matching);
    insts = matcher_.round(lemmas, active, theory_, model_terms);
  }
  if (insts.empty()) return false;
  backtrack(0);
  for (const auto& inst : insts) {
    // Copy: encoding may append lemmas and invalidate references.
    Lemma l = encoder_.lemmas()[inst.lemma];
    int index = instance_counts_[l.head]++;
    encoder_.assert_formula(inst.formula, true, l.guard, l.labels, std::make_pair(l.head, index));
    r.instances.push_back(lemma_name(l.head) + ": " + frontend::pretty(inst.formula));
    r.substitutions.push_back(lemma_name(l.head) + ": " + inst.subst.str(bank_, l.vars));
  }
  return true;
}

SolveResult Search::run(const std::vector<Decl>& decls) {
  start_ = std::chrono::steady_clock::now();
  if (telemetry_) telemetry_->start();
  if (budgets_) budgets_->reset_counts();
  SolveResult r;
  auto finish = [&](Outcome o) {
    r.outcome = o;
    r.elapsed = elapsed();
    r.distinct_instances = matcher_.seen();
    if (telemetry_) {
      telemetry_->set_rounds(r.rounds);
      telemetry_->finish(o == Outcome::Aborted ? RunStatus::Aborted : RunStatus::Done);
    }
    return r;
  };
  auto valid = [&](const std::vector<int>& ancestry) {
    if (!control_ || control_->core) {
      std::map<NodeId, int> hits;
      for (int i : ancestry)
        for (NodeId id : encoder_.clauses()[i].labels) ++hits[id];
      r.core = std::move(hits);
    }
    return finish(Outcome::Valid);
  };

  {
    ALTGR_TIME(telemetry_, Module::SAT);
    for (const auto& d : decls) encoder_.add_decl(d);
  }
  grow();
  enqueue(kTrueLit, static_cast<int>(db_.size()));
  db_.push_back({{kTrueLit}, {}});

  while (true) {
    if (control_ && control_->abort) return finish(Outcome::Aborted);
    if (elapsed() > opts_.time_limit) return finish(Outcome::Timeout);

    std::optional<Conflict> conflict;
    if (level() == 0 && imported_ < encoder_.clauses().size()) {
      ALTGR_TIME(telemetry_, Module::SAT);
      conflict = import_clauses();
    }
    if (!conflict) conflict = propagate();
    if (conflict) {
      ALTGR_TIME(telemetry_, Module::SAT);
      auto [learned, ancestry] = analyze(*conflict);
      if (learned.empty()) return valid(ancestry);
      size_t target = learned.size() > 1 ? level_of_[std::abs(learned[1])] : 0;
      backtrack(target);
      int cid = static_cast<int>(db_.size());
      db_.push_back({learned, ancestry});
      if (learned.size() >= 2) watch(cid);
      enqueue(learned[0], cid);
      continue;
    }
    int var;
    {
      ALTGR_TIME(telemetry_, Module::SAT);
      var = pick();
    }
    if (var != 0) {
      theory_.push();
      trail_lim_.push_back(trail_.size());
      enqueue(var, kDecision);
      continue;
    }
    if (r.rounds >= opts_.max_rounds) return finish(Outcome::Unknown);
    if (!round(r)) return finish(Outcome::Unknown);
    ++r.rounds;
    if (telemetry_) telemetry_->set_rounds(r.rounds);
    if (control_ && control_->on_round) control_->on_round(r.rounds, matcher_.seen());
  }
}

}  // namespace

SolveResult solve_decls(const std::vector<Decl>& decls, const SolveOptions& opts,
                        BudgetTable* budgets, Telemetry* telemetry, RunControl* control,
                        const std::function<std::string(NodeId)>& names) {
  Search s(opts, budgets, telemetry, control, names);
  return s.run(decls);
}

SolveResult solve(const AnnotatedAst& ast, const SolveOptions& opts, BudgetTable* budgets,
                  Telemetry* telemetry, RunControl* control) {
  auto names = [&ast](NodeId head) {
    return ast.valid(head) ? ast.lemma_display_name(head) : std::string();
  };
  return solve_decls(strip(ast), opts, budgets, telemetry, control, names);
}

CoreView core_of(const SolveResult& r, const AnnotatedAst& ast) {
  if (r.outcome != Outcome::Valid || !r.core) throw CoreUnavailable();
  CoreView v;
  v.hits = *r.core;
  int max = 0;
  for (const auto& [id, h] : v.hits) max = std::max(max, h);
  for (const auto& [id, h] : v.hits) {
    Shade s = 3 * h <= max ? Shade::Light : 3 * h <= 2 * max ? Shade::Medium : Shade::Dark;
    v.shades[id] = s;
  }
  for (const auto& [id, h] : v.hits)
    if (ast.valid(id)) v.shades.emplace(ast.node(id).decl, Shade::Light);
  return v;
}

}  // namespace altgr
