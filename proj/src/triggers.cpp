#include <algorithm>

#include "altgr/annotated.h"
#include "altgr/frontend.h"
#include "frontend_internal.h"

namespace altgr::frontend {

QuantBlock quant_block(const ExprRef& head) {
  QuantBlock b;
  const Expr* q = head.get();
  b.chain.push_back(q);
  b.vars = q->binders;
  ExprRef body = q->body();
  while (body->op == q->op && body->triggers.empty()) {
    b.chain.push_back(body.get());
    b.vars.insert(b.vars.end(), body->binders.begin(), body->binders.end());
    body = body->body();
  }
  b.body = body;
  return b;
}

std::set<std::string> required_type_vars(const QuantBlock& block,
                                         const std::set<std::string>& outer_type_vars) {
  std::set<std::string> vs;
  for (const auto& v : block.vars) collect_type_vars(v.type, vs);
  std::set<std::string> out;
  for (const auto& v : vs)
    if (!outer_type_vars.count(v)) out.insert(v);
  return out;
}

namespace {

void pattern_type_vars(const ExprRef& e, std::set<std::string>& out) {
  if (e->type) collect_type_vars(e->type, out);
  for (const auto& a : e->args) pattern_type_vars(a, out);
}

}  // namespace

std::vector<std::string> uncovered_by(const std::vector<ExprRef>& patterns,
                                      const QuantBlock& block,
                                      const std::set<std::string>& required_tyvars) {
  std::set<std::string> vars, tyvars;
  for (const auto& p : patterns) {
    free_vars(p, vars);
    pattern_type_vars(p, tyvars);
  }
  std::vector<std::string> out;
  for (const auto& v : block.vars)
    if (!vars.count(v.name)) out.push_back(v.name);
  for (const auto& tv : required_tyvars)
    if (!tyvars.count(tv)) out.push_back("'" + tv);
  return out;
}

/*------------------------------------------------------------------------*/

namespace {

struct Candidate {
  ExprRef term;
  int position = 0;
  int interpreted = 0;
  int size = 0;
  std::set<std::string> covers;  // variable names and 'type-variable names
};

bool mentions(const ExprRef& e, const std::set<std::string>& names) {
  if (e->op == Op::Var) return names.count(e->name) > 0;
  for (const auto& a : e->args)
    if (mentions(a, names)) return true;
  return false;
}

int interpreted_count(const ExprRef& e) {
  int n = 0;
  if (e->op == Op::IntLit || e->op == Op::True || e->op == Op::False || is_arith(e->op)) ++n;
  for (const auto& a : e->args) n += interpreted_count(a);
  return n;
}

void collect_candidates(const ExprRef& e, const std::set<std::string>& block_vars,
                        std::set<std::string>& nested, int& position,
                        std::vector<ExprRef>& out) {
  if (is_quantifier(e->op)) {
    std::vector<std::string> added;
    for (const auto& b : e->binders)
      if (nested.insert(b.name).second) added.push_back(b.name);
    collect_candidates(e->body(), block_vars, nested, position, out);
    for (const auto& n : added) nested.erase(n);
    return;
  }
  ++position;
  if (e->op == Op::App && mentions(e, block_vars) && !mentions(e, nested)) {
    bool dup = std::any_of(out.begin(), out.end(),
                           [&](const ExprRef& c) { return struct_equal(c, e); });
    if (!dup) out.push_back(e);
  }
  for (const auto& a : e->args) collect_candidates(a, block_vars, nested, position, out);
}

bool same_patterns(const Trigger& a, const Trigger& b) {
  if (a.patterns.size() != b.patterns.size()) return false;
  for (const auto& p : a.patterns) {
    bool found = std::any_of(b.patterns.begin(), b.patterns.end(),
                             [&](const ExprRef& q) { return struct_equal(p, q); });
    if (!found) return false;
  }
  return true;
}

/// Greedy cover: repeatedly add the candidate covering the most still
/// uncovered names, then drop patterns made redundant by later choices.
std::optional<Trigger> greedy_multi(const std::vector<Candidate>& cands,
                                    const std::set<std::string>& needed,
                                    const std::set<size_t>& excluded) {
  std::set<std::string> missing = needed;
  std::vector<size_t> chosen;
  while (!missing.empty()) {
    size_t best = cands.size();
    size_t best_gain = 0;
    for (size_t i = 0; i < cands.size(); ++i) {
      if (excluded.count(i) || std::count(chosen.begin(), chosen.end(), i)) continue;
      size_t gain = 0;
      for (const auto& n : cands[i].covers) gain += missing.count(n);
      if (gain > best_gain) {
        best = i;
        best_gain = gain;
      }
    }
    if (best == cands.size()) return std::nullopt;
    chosen.push_back(best);
    for (const auto& n : cands[best].covers) missing.erase(n);
  }
  for (size_t k = 0; k < chosen.size() && chosen.size() > 1;) {
    std::set<std::string> rest;
    for (size_t j = 0; j < chosen.size(); ++j)
      if (j != k) rest.insert(cands[chosen[j]].covers.begin(), cands[chosen[j]].covers.end());
    bool redundant = std::includes(rest.begin(), rest.end(), needed.begin(), needed.end());
    if (redundant)
      chosen.erase(chosen.begin() + static_cast<std::ptrdiff_t>(k));
    else
      ++k;
  }
  std::sort(chosen.begin(), chosen.end(),
            [&](size_t a, size_t b) { return cands[a].position < cands[b].position; });
  Trigger t;
  for (size_t i : chosen) t.patterns.push_back(cands[i].term);
  return t;
}

}  // namespace

TriggerInference infer_triggers(const ExprRef& head,
                                const std::set<std::string>& required_tyvars) {
  QuantBlock block = quant_block(head);
  std::set<std::string> block_vars;
  for (const auto& v : block.vars) block_vars.insert(v.name);
  std::set<std::string> needed = block_vars;
  for (const auto& tv : required_tyvars) needed.insert("'" + tv);

  std::vector<ExprRef> terms;
  std::set<std::string> nested;
  int position = 0;
  collect_candidates(block.body, block_vars, nested, position, terms);

  std::vector<Candidate> cands;
  for (size_t i = 0; i < terms.size(); ++i) {
    Candidate c;
    c.term = terms[i];
    c.position = static_cast<int>(i);
    c.interpreted = interpreted_count(terms[i]);
    c.size = term_size(terms[i]);
    std::set<std::string> fv, tv;
    free_vars(terms[i], fv);
    pattern_type_vars(terms[i], tv);
    for (const auto& v : fv)
      if (block_vars.count(v)) c.covers.insert(v);
    for (const auto& v : tv)
      if (required_tyvars.count(v)) c.covers.insert("'" + v);
    cands.push_back(std::move(c));
  }

  TriggerInference out;
  std::vector<const Candidate*> mono;
  for (const auto& c : cands)
    if (std::includes(c.covers.begin(), c.covers.end(), needed.begin(), needed.end()))
      mono.push_back(&c);
  if (!mono.empty()) {
    std::stable_sort(mono.begin(), mono.end(), [](const Candidate* a, const Candidate* b) {
      if (a->interpreted != b->interpreted) return a->interpreted < b->interpreted;
      if (a->size != b->size) return a->size < b->size;
      return a->position < b->position;
    });
    for (size_t i = 0; i < mono.size() && i < 2; ++i)
      out.triggers.push_back(Trigger{{mono[i]->term}, TriggerOrigin::Inferred});
    return out;
  }

  auto first = greedy_multi(cands, needed, {});
  if (!first) {
    out.warning = "no trigger could be inferred: every candidate pattern misses a variable";
    return out;
  }
  out.triggers.push_back(*first);
  size_t lead = 0;
  for (size_t i = 0; i < cands.size(); ++i)
    if (struct_equal(cands[i].term, first->patterns.front())) lead = i;
  auto second = greedy_multi(cands, needed, {lead});
  if (second && !same_patterns(*first, *second)) out.triggers.push_back(*second);
  return out;
}

/*------------------------------------------------------------------------*/

namespace {

ExprRef hoist(const ExprRef& e) {
  if (e->args.empty()) return e;
  std::vector<ExprRef> args;
  for (const auto& a : e->args) args.push_back(hoist(a));
  auto copy = std::make_shared<Expr>(*e);
  copy->args = std::move(args);
  if (is_quantifier(e->op) && copy->triggers.empty()) {
    const ExprRef& body = copy->args[0];
    if (body->op == e->op && !body->triggers.empty()) {
      auto inner = std::make_shared<Expr>(*body);
      copy->triggers = std::move(inner->triggers);
      inner->triggers.clear();
      copy->args[0] = inner;
    }
  }
  return copy;
}

void validate(const ExprRef& e, const std::set<std::string>& outer, bool rigid) {
  if (!is_quantifier(e->op)) {
    for (const auto& a : e->args) validate(a, outer, rigid);
    return;
  }
  QuantBlock block = quant_block(e);
  std::set<std::string> required = rigid ? std::set<std::string>{} : required_type_vars(block, outer);
  for (const auto& t : e->triggers) {
    auto missing = uncovered_by(t.patterns, block, required);
    if (!missing.empty()) {
      Span s = t.patterns.front()->span;
      s.end_line = t.patterns.back()->span.end_line;
      s.end_col = t.patterns.back()->span.end_col;
      throw CoverageError(s, missing);
    }
  }
  std::set<std::string> inner = outer;
  for (const auto& v : block.vars) collect_type_vars(v.type, inner);
  validate(block.body, inner, rigid);
}

}  // namespace

ExprRef normalize_quantifiers(const ExprRef& f, bool rigid_type_vars) {
  ExprRef out = hoist(f);
  validate(out, {}, rigid_type_vars);
  return out;
}

/*------------------------------------------------------------------------*/

void infer_decl_triggers(AnnotatedAst& ast, NodeId decl_id) {
  for (NodeId head : ast.block_heads()) {
    if (ast.node(head).decl != decl_id) continue;
    const ExprRef& e = ast.node(head).expr;
    if (!e->triggers.empty()) {
      ast.triggers[head] = e->triggers;
      continue;
    }
    auto inf = infer_triggers(e, ast.required_type_vars(head));
    ast.triggers[head] = inf.triggers;
    const AnnNode& n = ast.node(head);
    bool lemma = n.op == Op::Forall ? n.polarity != Polarity::Pos : n.polarity != Polarity::Neg;
    if (inf.warning && lemma)
      ast.warnings[head] = ast.lemma_display_name(head) + ": " + *inf.warning;
    else
      ast.warnings.erase(head);
  }
}

void infer_all_triggers(AnnotatedAst& ast) {
  for (const auto& d : ast.decls)
    if (d.is_formula_decl()) infer_decl_triggers(ast, d.id);
}

}  // namespace altgr::frontend
