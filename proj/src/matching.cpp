#include "altgr/matching.h"

#include <algorithm>

#include "altgr/frontend.h"

namespace altgr {

std::string Subst::key(const EGraph& eg) const {
  std::string k;
  for (const auto& [v, t] : terms)
    k += v + '=' + std::to_string(eg.contains(t) ? eg.find(t) : t) + ';';
  for (const auto& [v, t] : types) k += '\'' + v + '=' + t->str() + ';';
  return k;
}

std::string Subst::str(const TermBank& bank, const std::vector<Binder>& order) const {
  std::string s = "{";
  bool first = true;
  auto sep = [&] {
    if (!first) s += ", ";
    first = false;
  };
  std::set<std::string> done;
  for (const auto& b : order) {
    auto it = terms.find(b.name);
    if (it == terms.end() || !done.insert(b.name).second) continue;
    sep();
    s += b.name + " ↦ " + bank.str(it->second);
  }
  for (const auto& [v, t] : terms) {
    if (done.count(v)) continue;
    sep();
    s += v + " ↦ " + bank.str(t);
  }
  for (const auto& [v, t] : types) {
    sep();
    s += "'" + v + " ↦ " + t->str();
  }
  return s + "}";
}

namespace {

struct MatchContext {
  const EGraph& eg;
  const TermBank& bank;
};

void match(const MatchContext& c, const ExprRef& p, TermId t, const Subst& s,
           std::vector<Subst>& out) {
  if (p->op == Op::Var) {
    Subst next = s;
    if (!match_type(p->type, c.bank[t].type, next.types)) return;
    auto it = s.terms.find(p->name);
    if (it != s.terms.end()) {
      if (c.eg.find(it->second) == c.eg.find(t)) out.push_back(std::move(next));
      return;
    }
    next.terms[p->name] = t;
    out.push_back(std::move(next));
    return;
  }
  const std::string sym = op_symbol(*p);
  for (TermId m : c.eg.members(c.eg.find(t))) {
    const Term& tm = c.bank[m];
    if (tm.sym != sym || tm.args.size() != p->args.size()) continue;
    Subst base = s;
    if (!match_type(p->type, tm.type, base.types)) continue;
    std::vector<Subst> cur{std::move(base)};
    for (size_t i = 0; i < p->args.size() && !cur.empty(); ++i) {
      std::vector<Subst> next;
      for (const auto& sub : cur) match(c, p->args[i], tm.args[i], sub, next);
      cur = std::move(next);
    }
    for (auto& sub : cur) out.push_back(std::move(sub));
  }
}

void dedupe(std::vector<Subst>& v, const EGraph& eg) {
  std::set<std::string> keys;
  std::vector<Subst> out;
  for (auto& s : v)
    if (keys.insert(s.key(eg)).second) out.push_back(std::move(s));
  v = std::move(out);
}

// One representative term per class, in universe order.
std::vector<TermId> class_roots(const EGraph& eg, const std::vector<TermId>& universe) {
  std::set<TermId> reps;
  std::vector<TermId> out;
  for (TermId u : universe)
    if (eg.contains(u) && reps.insert(eg.find(u)).second) out.push_back(u);
  return out;
}

}  // namespace

std::vector<Subst> ematch(const ExprRef& pattern, const EGraph& eg, const TermBank& bank,
                          const std::vector<TermId>& universe) {
  return ematch_multi({pattern}, eg, bank, universe);
}

std::vector<Subst> ematch_multi(const std::vector<ExprRef>& patterns, const EGraph& eg,
                                const TermBank& bank, const std::vector<TermId>& universe) {
  MatchContext c{eg, bank};
  std::vector<TermId> roots = class_roots(eg, universe);
  std::vector<Subst> cur{Subst{}};
  for (const auto& p : patterns) {
    std::vector<Subst> next;
    for (const auto& s : cur)
      for (TermId u : roots) match(c, p, u, s, next);
    dedupe(next, eg);
    cur = std::move(next);
    if (cur.empty()) break;
  }
  return cur;
}

/*------------------------------------------------------------------------*/

BudgetTable::BudgetTable(const BudgetTable& other) {
  std::lock_guard<std::mutex> lock(other.mutex_);
  rows_ = other.rows_;
}

BudgetTable& BudgetTable::operator=(const BudgetTable& other) {
  if (this == &other) return *this;
  std::map<NodeId, BudgetRow> copy;
  {
    std::lock_guard<std::mutex> lock(other.mutex_);
    copy = other.rows_;
  }
  std::lock_guard<std::mutex> lock(mutex_);
  rows_ = std::move(copy);
  return *this;
}

void BudgetTable::declare(NodeId id, const std::string& name) {
  std::lock_guard<std::mutex> lock(mutex_);
  BudgetRow& r = rows_[id];
  r.id = id;
  r.name = name;
}

void BudgetTable::set_limit(NodeId id, long n) {
  if (n <= 0) throw NonPositiveLimit();
  std::lock_guard<std::mutex> lock(mutex_);
  BudgetRow& r = rows_[id];
  r.id = id;
  r.limit = n;
  if (r.produced >= n) r.limited = true;
}

void BudgetTable::unset_limit(NodeId id) {
  std::lock_guard<std::mutex> lock(mutex_);
  auto it = rows_.find(id);
  if (it == rows_.end()) return;
  it->second.limit.reset();
  it->second.limited = false;
}

std::optional<long> BudgetTable::limit(NodeId id) const {
  std::lock_guard<std::mutex> lock(mutex_);
  auto it = rows_.find(id);
  return it == rows_.end() ? std::nullopt : it->second.limit;
}

std::map<NodeId, long> BudgetTable::limits() const {
  std::lock_guard<std::mutex> lock(mutex_);
  std::map<NodeId, long> out;
  for (const auto& [id, r] : rows_)
    if (r.limit) out[id] = *r.limit;
  return out;
}

void BudgetTable::record(NodeId id, long n) {
  std::lock_guard<std::mutex> lock(mutex_);
  BudgetRow& r = rows_[id];
  r.id = id;
  r.produced += n;
  if (r.limit && r.produced >= *r.limit) r.limited = true;
}

void BudgetTable::reset_counts() {
  std::lock_guard<std::mutex> lock(mutex_);
  for (auto& [id, r] : rows_) {
    r.produced = 0;
    r.limited = false;
  }
}

BudgetRow BudgetTable::row(NodeId id) const {
  std::lock_guard<std::mutex> lock(mutex_);
  auto it = rows_.find(id);
  if (it != rows_.end()) return it->second;
  BudgetRow r;
  r.id = id;
  return r;
}

std::vector<BudgetRow> BudgetTable::rows() const {
  std::vector<BudgetRow> out;
  {
    std::lock_guard<std::mutex> lock(mutex_);
    for (const auto& [id, r] : rows_)
      if (r.produced > 0 || r.limit) out.push_back(r);
  }
  std::stable_sort(out.begin(), out.end(), [](const BudgetRow& a, const BudgetRow& b) {
    return a.produced > b.produced;
  });
  return out;
}

long BudgetTable::total() const {
  std::lock_guard<std::mutex> lock(mutex_);
  long t = 0;
  for (const auto& [id, r] : rows_) t += r.produced;
  return t;
}

/*------------------------------------------------------------------------*/

ExprRef instantiate(const Lemma& lemma, const Subst& s, const TermBank& bank) {
  std::map<std::string, ExprRef> vars;
  for (const auto& [v, t] : s.terms) vars[v] = bank.to_expr(t);
  ExprRef f = substitute(lemma.body, vars, s.types);
  return lemma.negated ? mk_not(f) : f;
}

std::vector<Instance> Matcher::collect(const std::vector<Lemma>& lemmas,
                                       const std::vector<bool>& active,
                                       const TheoryState& theory,
                                       const std::vector<TermId>& universe,
                                       const std::map<NodeId, long>& limits,
                                       std::map<NodeId, long>& produced, RoundStats* stats) {
  const EGraph& eg = theory.egraph();
  std::vector<Instance> out;
  for (size_t li = 0; li < lemmas.size(); ++li) {
    if (!active[li]) continue;
    const Lemma& lemma = lemmas[li];
    auto lim = limits.find(lemma.head);
    for (const auto& trig : lemma.triggers) {
      for (auto& s : ematch_multi(trig.patterns, eg, *bank_, universe)) {
        if (s.terms.size() != lemma.vars.size()) continue;
        std::string key = s.key(eg);
        if (seen_.count({li, key})) continue;
        ExprRef f = instantiate(lemma, s, *bank_);
        std::string fkey = std::to_string(li) + ':' + frontend::pretty(f);
        if (seen_formulas_.count(fkey)) continue;
        long& count = produced[lemma.head];
        if (lim != limits.end() && count >= lim->second) {
          if (stats) stats->newly_limited.push_back(li);
          break;
        }
        ++count;
        seen_.insert({li, key});
        seen_formulas_.insert(fkey);
        out.push_back({li, std::move(s), std::move(f)});
      }
    }
  }
  return out;
}

std::vector<Instance> Matcher::round(const std::vector<Lemma>& lemmas,
                                     const std::vector<bool>& active, TheoryState& theory,
                                     const std::function<std::vector<TermId>()>& model_terms,
                                     RoundStats* stats) {
  std::map<NodeId, long> limits;
  std::map<NodeId, long> produced;
  if (budgets_) {
    limits = budgets_->limits();
    for (const auto& l : lemmas) produced[l.head] = budgets_->row(l.head).produced;
  }
  std::map<NodeId, long> start = produced;

  std::vector<TermId> universe;
  for (TermId t : theory.egraph().terms())
    if (t != bank_->truth(true) && t != bank_->truth(false)) universe.push_back(t);
  if (universe.empty()) {
    // Variable-only triggers over integers need some term to start from.
    bool int_vars = false;
    for (size_t i = 0; i < lemmas.size(); ++i)
      if (active[i])
        for (const auto& v : lemmas[i].vars) int_vars |= v.type->kind() == Type::Kind::Int;
    if (int_vars) {
      TermId one = bank_->num(1);
      theory.add_term(one);
      universe.push_back(one);
      if (stats) stats->seeded = true;
    }
  }
  if (stats) stats->phase = 1;
  std::vector<Instance> out = collect(lemmas, active, theory, universe, limits, produced, stats);
  if (out.empty() && model_terms) {
    std::vector<TermId> model = model_terms();
    for (TermId t : model) theory.add_term(t);
    if (stats) stats->phase = 2;
    out = collect(lemmas, active, theory, model, limits, produced, stats);
  }
  if (budgets_)
    for (const auto& [head, n] : produced)
      if (n > start[head]) budgets_->record(head, n - start[head]);
  return out;
}

/*------------------------------------------------------------------------*/

NodeId lemma_head(const AnnotatedAst& ast, NodeId id) {
  auto fail = [&](const std::string& why) {
    return AstError(AstError::Code::NoSuchAxiom, id, why);
  };
  if (!ast.valid(id)) throw fail("no node " + std::to_string(id));
  const AnnNode& n = ast.node(id);
  if (n.is_decl) {
    const Decl& d = ast.decl(id);
    if (!d.formula || !is_quantifier(d.formula->op))
      throw fail(d.name() + " is not a quantified formula");
    return d.formula->id;
  }
  if (!is_quantifier(n.op)) throw fail("node " + std::to_string(id) + " is not a quantifier");
  return ast.block_head(id);
}

namespace {

ExprRef without_spans(const ExprRef& e) {
  auto copy = std::make_shared<Expr>(*e);
  copy->span = Span{};
  for (auto& a : copy->args) a = without_spans(a);
  for (auto& t : copy->triggers)
    for (auto& p : t.patterns) p = without_spans(p);
  return copy;
}

}  // namespace

NodeId manual_instance(AnnotatedAst& ast, NodeId quant,
                       const std::vector<std::pair<std::string, std::string>>& bindings,
                       const std::string& name) {
  NodeId head = lemma_head(ast, quant);
  const AnnNode& h = ast.node(head);
  const Decl& d = ast.decl(h.decl);
  if (d.kind != DeclKind::Axiom || h.op != Op::Forall || h.parent != d.id)
    throw AstError(AstError::Code::NoSuchAxiom, quant,
                   "only the outermost universal quantifier of an axiom can be instantiated");
  if (ast.find_decl(name) || ast.env.symbols.count(name) || ast.env.type_arity.count(name))
    throw AstError(AstError::Code::DuplicateName, quant, name + " is already declared");

  std::vector<Binder> vars = ast.block_vars(head);
  frontend::InstanceBindings ib = frontend::check_instance_bindings(ast.env, vars, bindings);
  ExprRef body = frontend::quant_block(h.expr).body;
  ExprRef f = substitute(body, ib.terms, ib.types);
  std::vector<Binder> residual;
  for (const auto& v : vars)
    if (!ib.terms.count(v.name)) residual.push_back({v.name, apply_subst(ib.types, v.type)});
  if (!residual.empty()) f = mk_quant(Op::Forall, std::move(residual), {}, f);

  Decl inst;
  inst.kind = DeclKind::Axiom;
  inst.names = {name};
  inst.formula = without_spans(f);
  NodeId id = append_decl(ast, inst);
  frontend::infer_decl_triggers(ast, id);
  return id;
}

}  // namespace altgr
