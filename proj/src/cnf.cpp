#include <algorithm>

#include "altgr/frontend.h"
#include "altgr/solver.h"

namespace altgr {

const TheoryAtom* Encoder::atom(int var) const {
  auto it = atoms_.find(var);
  return it == atoms_.end() ? nullptr : &it->second;
}

void Encoder::add_decl(const Decl& d) {
  if (!d.is_formula_decl() || !d.formula) return;
  Ctx ctx;
  ctx.labels.insert(d.id);
  assert_rec(d.formula, d.kind == DeclKind::Axiom, kTrueLit, std::move(ctx));
}

void Encoder::assert_formula(const ExprRef& f, bool sign, Lit guard,
                             const std::set<NodeId>& labels,
                             std::optional<std::pair<NodeId, int>> origin) {
  assert_rec(f, sign, guard, Ctx{labels, origin});
}

void Encoder::emit(std::vector<Lit> lits, Lit guard, const Ctx& ctx) {
  if (guard != kTrueLit) lits.insert(lits.begin(), -guard);
  std::vector<Lit> out;
  for (Lit l : lits) {
    if (l == kTrueLit) return;
    if (l == -kTrueLit || std::find(out.begin(), out.end(), l) != out.end()) continue;
    if (std::find(out.begin(), out.end(), -l) != out.end()) return;
    out.push_back(l);
  }
  LabeledClause c;
  c.lits = std::move(out);
  for (NodeId id : ctx.labels)
    if (id != kNoNode) c.labels.insert(id);
  c.instance_origin = ctx.origin;
  clauses_.push_back(std::move(c));
}

namespace {

bool is_atomic(Op op) { return is_comparison(op) || op == Op::App; }

void label_atomic_operands(const Expr& f, std::set<NodeId>& labels) {
  for (const auto& a : f.args)
    if (a->id != kNoNode && is_atomic(a->op)) labels.insert(a->id);
}

}  // namespace

void Encoder::assert_rec(const ExprRef& f, bool sign, Lit guard, Ctx ctx) {
  if (f->id != kNoNode) ctx.labels.insert(f->id);
  switch (f->op) {
    case Op::True:
      if (!sign) emit({}, guard, ctx);
      return;
    case Op::False:
      if (sign) emit({}, guard, ctx);
      return;
    case Op::Not: assert_rec(f->args[0], !sign, guard, std::move(ctx)); return;
    case Op::And:
      if (sign) {
        for (const auto& a : f->args) assert_rec(a, true, guard, ctx);
      } else {
        label_atomic_operands(*f, ctx.labels);
        std::vector<Lit> c;
        for (const auto& a : f->args) c.push_back(-lit(a, false, true, ctx));
        emit(std::move(c), guard, ctx);
      }
      return;
    case Op::Or:
      if (sign) {
        label_atomic_operands(*f, ctx.labels);
        std::vector<Lit> c;
        for (const auto& a : f->args) c.push_back(lit(a, true, false, ctx));
        emit(std::move(c), guard, ctx);
      } else {
        for (const auto& a : f->args) assert_rec(a, false, guard, ctx);
      }
      return;
    case Op::Implies:
      if (sign) {
        label_atomic_operands(*f, ctx.labels);
        emit({-lit(f->args[0], false, true, ctx), lit(f->args[1], true, false, ctx)}, guard, ctx);
      } else {
        assert_rec(f->args[0], true, guard, ctx);
        assert_rec(f->args[1], false, guard, ctx);
      }
      return;
    case Op::Iff: {
      label_atomic_operands(*f, ctx.labels);
      Lit a = lit(f->args[0], true, true, ctx);
      Lit b = lit(f->args[1], true, true, ctx);
      if (sign) {
        emit({-a, b}, guard, ctx);
        emit({a, -b}, guard, ctx);
      } else {
        emit({a, b}, guard, ctx);
        emit({-a, -b}, guard, ctx);
      }
      return;
    }
    case Op::Forall:
      if (sign)
        add_lemma(f, false, guard, ctx);
      else
        assert_rec(skolemize(f), false, guard, std::move(ctx));
      return;
    case Op::Exists:
      if (sign)
        assert_rec(skolemize(f), true, guard, std::move(ctx));
      else
        add_lemma(f, true, guard, ctx);
      return;
    default: {
      Lit l = atom_lit(f);
      emit({sign ? l : -l}, guard, ctx);
      return;
    }
  }
}

Lit Encoder::lit(const ExprRef& f, bool pos, bool neg, const Ctx& ctx) {
  switch (f->op) {
    case Op::True: return kTrueLit;
    case Op::False: return -kTrueLit;
    case Op::Not: return -lit(f->args[0], neg, pos, ctx);
    default: break;
  }
  if (is_atomic(f->op)) return atom_lit(f);
  std::string key = std::to_string(f->id) + '|' + frontend::pretty(f);
  auto it = defs_.find(key);
  if (it == defs_.end()) it = defs_.emplace(key, Definition{fresh()}).first;
  int v = it->second.var;
  if (pos && !it->second.pos) {
    it->second.pos = true;
    assert_rec(f, true, v, ctx);
  }
  if (neg && !defs_.at(key).neg) {
    defs_.at(key).neg = true;
    assert_rec(f, false, -v, ctx);
  }
  return v;
}

Lit Encoder::atom_lit(const ExprRef& f) {
  TheoryAtom a;
  std::string key;
  bool negate = false;
  switch (f->op) {
    case Op::Eq:
    case Op::Neq: {
      TermId l = bank_->from_expr(f->args[0]), r = bank_->from_expr(f->args[1]);
      if (l > r) std::swap(l, r);
      a = {TheoryAtom::Kind::Eq, l, r};
      key = "=" + std::to_string(l) + "," + std::to_string(r);
      negate = f->op == Op::Neq;
      break;
    }
    case Op::Le:
    case Op::Lt: {
      TermId l = bank_->from_expr(f->args[0]), r = bank_->from_expr(f->args[1]);
      a = {f->op == Op::Le ? TheoryAtom::Kind::Le : TheoryAtom::Kind::Lt, l, r};
      key = (f->op == Op::Le ? "<=" : "<") + std::to_string(l) + "," + std::to_string(r);
      break;
    }
    case Op::App: {
      TermId p = bank_->from_expr(f);
      a = {TheoryAtom::Kind::Pred, p, kNoTerm};
      key = "p" + std::to_string(p);
      break;
    }
    default: throw std::logic_error("not an atom: " + frontend::pretty(f));
  }
  if (a.kind == TheoryAtom::Kind::Eq && a.lhs == a.rhs) return negate ? -kTrueLit : kTrueLit;
  auto [it, fresh_atom] = atom_vars_.emplace(key, 0);
  if (fresh_atom) {
    it->second = fresh();
    atoms_[it->second] = a;
  }
  return negate ? -it->second : it->second;
}

void Encoder::add_lemma(const ExprRef& f, bool negated, Lit guard, const Ctx& ctx) {
  std::string key = std::to_string(guard) + (negated ? "-" : "+") + std::to_string(f->id) + '|' +
                    frontend::pretty(f);
  if (!lemma_keys_.insert(key).second) return;
  frontend::QuantBlock qb = frontend::quant_block(f);
  Lemma l;
  l.head = f->id;
  l.vars = qb.vars;
  l.body = qb.body;
  l.triggers = f->triggers;
  l.negated = negated;
  l.guard = guard;
  for (NodeId id : ctx.labels)
    if (id != kNoNode) l.labels.insert(id);
  lemmas_.push_back(std::move(l));
}

ExprRef Encoder::skolemize(const ExprRef& f) {
  frontend::QuantBlock qb = frontend::quant_block(f);
  std::map<std::string, ExprRef> sub;
  for (const auto& v : qb.vars)
    sub[v.name] = mk_app("sk_" + v.name + "_" + std::to_string(skolems_++), {}, v.type);
  return substitute(qb.body, sub, {});
}

}  // namespace altgr
