#include "altgr/ast.h"

#include <cassert>
#include <functional>
#include <utility>

namespace altgr {

bool Span::contains(const Span& o) const {
  if (empty() || o.empty()) return true;
  auto before = [](int l1, int c1, int l2, int c2) {
    return l1 < l2 || (l1 == l2 && c1 <= c2);
  };
  return before(start_line, start_col, o.start_line, o.start_col) &&
         before(o.end_line, o.end_col, end_line, end_col);
}

/*------------------------------------------------------------------------*/

Type::Type(Kind k, std::string name, std::vector<TypeRef> args)
    : kind_(k), name_(std::move(name)), args_(std::move(args)) {
  switch (kind_) {
    case Kind::Int: repr_ = "int"; break;
    case Kind::Real: repr_ = "real"; break;
    case Kind::Bool: repr_ = "bool"; break;
    case Kind::Prop: repr_ = "prop"; break;
    case Kind::Var:
      repr_ = "'" + name_;
      has_vars_ = true;
      break;
    case Kind::App:
      if (args_.size() == 1) {
        repr_ = args_[0]->str() + " " + name_;
      } else if (args_.size() > 1) {
        repr_ = "(";
        for (size_t i = 0; i < args_.size(); ++i) {
          if (i) repr_ += ", ";
          repr_ += args_[i]->str();
        }
        repr_ += ") " + name_;
      } else {
        repr_ = name_;
      }
      for (const auto& a : args_) has_vars_ = has_vars_ || a->has_vars();
      break;
  }
}

TypeRef Type::int_type() {
  static const TypeRef t = std::make_shared<Type>(Kind::Int, "", std::vector<TypeRef>{});
  return t;
}
TypeRef Type::real_type() {
  static const TypeRef t = std::make_shared<Type>(Kind::Real, "", std::vector<TypeRef>{});
  return t;
}
TypeRef Type::bool_type() {
  static const TypeRef t = std::make_shared<Type>(Kind::Bool, "", std::vector<TypeRef>{});
  return t;
}
TypeRef Type::prop_type() {
  static const TypeRef t = std::make_shared<Type>(Kind::Prop, "", std::vector<TypeRef>{});
  return t;
}
TypeRef Type::var(std::string name) {
  return std::make_shared<Type>(Kind::Var, std::move(name), std::vector<TypeRef>{});
}
TypeRef Type::app(std::string ctor, std::vector<TypeRef> args) {
  return std::make_shared<Type>(Kind::App, std::move(ctor), std::move(args));
}

TypeRef apply_subst(const TypeSubst& subst, const TypeRef& t) {
  if (!t->has_vars() || subst.empty()) return t;
  if (t->kind() == Type::Kind::Var) {
    auto it = subst.find(t->name());
    return it == subst.end() ? t : it->second;
  }
  std::vector<TypeRef> args;
  args.reserve(t->args().size());
  for (const auto& a : t->args()) args.push_back(apply_subst(subst, a));
  return Type::app(t->name(), std::move(args));
}

void collect_type_vars(const TypeRef& t, std::set<std::string>& out) {
  if (!t || !t->has_vars()) return;
  if (t->kind() == Type::Kind::Var) {
    out.insert(t->name());
    return;
  }
  for (const auto& a : t->args()) collect_type_vars(a, out);
}

bool match_type(const TypeRef& pattern, const TypeRef& ground, TypeSubst& subst) {
  if (pattern->kind() == Type::Kind::Var) {
    auto it = subst.find(pattern->name());
    if (it != subst.end()) return same_type(it->second, ground);
    subst.emplace(pattern->name(), ground);
    return true;
  }
  if (pattern->kind() != ground->kind()) return false;
  if (pattern->kind() != Type::Kind::App) return true;
  if (pattern->name() != ground->name() || pattern->args().size() != ground->args().size())
    return false;
  for (size_t i = 0; i < pattern->args().size(); ++i)
    if (!match_type(pattern->args()[i], ground->args()[i], subst)) return false;
  return true;
}

/*------------------------------------------------------------------------*/

const char* op_name(Op op) {
  switch (op) {
    case Op::Var: return "Var";
    case Op::IntLit: return "IntLit";
    case Op::App: return "App";
    case Op::Add: return "Add";
    case Op::Sub: return "Sub";
    case Op::Mul: return "Mul";
    case Op::True: return "True";
    case Op::False: return "False";
    case Op::Eq: return "Eq";
    case Op::Neq: return "Neq";
    case Op::Le: return "Le";
    case Op::Lt: return "Lt";
    case Op::Not: return "Not";
    case Op::And: return "And";
    case Op::Or: return "Or";
    case Op::Implies: return "Implies";
    case Op::Iff: return "Iff";
    case Op::Forall: return "Forall";
    case Op::Exists: return "Exists";
  }
  return "?";
}

const char* origin_name(TriggerOrigin o) {
  switch (o) {
    case TriggerOrigin::Inferred: return "inferred";
    case TriggerOrigin::UserSource: return "source";
    case TriggerOrigin::UserAction: return "action";
  }
  return "?";
}

const char* decl_kind_name(DeclKind k) {
  switch (k) {
    case DeclKind::Type: return "type";
    case DeclKind::Logic: return "logic";
    case DeclKind::Axiom: return "axiom";
    case DeclKind::Goal: return "goal";
  }
  return "?";
}

bool Expr::is_atom() const {
  if (!is_formula()) return false;
  return op == Op::True || op == Op::False || op == Op::App || is_comparison(op);
}

/*------------------------------------------------------------------------*/

namespace {

std::shared_ptr<Expr> node(Op op, TypeRef type) {
  auto e = std::make_shared<Expr>();
  e->op = op;
  e->type = std::move(type);
  return e;
}

}  // namespace

ExprRef mk_var(std::string name, TypeRef type) {
  auto e = node(Op::Var, std::move(type));
  e->name = std::move(name);
  return e;
}

ExprRef mk_int(Integer value, TypeRef type) {
  auto e = node(Op::IntLit, std::move(type));
  e->value = std::move(value);
  return e;
}

ExprRef mk_app(std::string symbol, std::vector<ExprRef> args, TypeRef type) {
  auto e = node(Op::App, std::move(type));
  e->name = std::move(symbol);
  e->args = std::move(args);
  return e;
}

ExprRef mk_arith(Op op, ExprRef lhs, ExprRef rhs) {
  assert(is_arith(op));
  auto e = node(op, lhs->type);
  e->args = {std::move(lhs), std::move(rhs)};
  return e;
}

ExprRef mk_true() { return node(Op::True, Type::prop_type()); }
ExprRef mk_false() { return node(Op::False, Type::prop_type()); }

ExprRef mk_cmp(Op op, ExprRef lhs, ExprRef rhs) {
  assert(is_comparison(op));
  auto e = node(op, Type::prop_type());
  e->args = {std::move(lhs), std::move(rhs)};
  return e;
}

ExprRef mk_not(ExprRef f) {
  auto e = node(Op::Not, Type::prop_type());
  e->args = {std::move(f)};
  return e;
}

ExprRef mk_nary(Op op, std::vector<ExprRef> fs) {
  assert(op == Op::And || op == Op::Or);
  auto e = node(op, Type::prop_type());
  e->args = std::move(fs);
  return e;
}

ExprRef mk_binary(Op op, ExprRef lhs, ExprRef rhs) {
  auto e = node(op, Type::prop_type());
  e->args = {std::move(lhs), std::move(rhs)};
  return e;
}

ExprRef mk_quant(Op op, std::vector<Binder> binders, std::vector<Trigger> triggers,
                 ExprRef body) {
  assert(is_quantifier(op));
  auto e = node(op, Type::prop_type());
  e->binders = std::move(binders);
  e->triggers = std::move(triggers);
  e->args = {std::move(body)};
  return e;
}

ExprRef with_args(const Expr& e, std::vector<ExprRef> args) {
  auto copy = std::make_shared<Expr>(e);
  copy->args = std::move(args);
  return copy;
}

/*------------------------------------------------------------------------*/

namespace {

ExprRef subst_rec(const ExprRef& e, const std::map<std::string, ExprRef>& vars,
                  const TypeSubst& tys, const std::set<std::string>& shadowed) {
  if (e->op == Op::Var && !shadowed.count(e->name)) {
    auto it = vars.find(e->name);
    if (it != vars.end()) return it->second;
  }
  bool type_changes = e->type && e->type->has_vars() && !tys.empty();
  if (e->args.empty() && !type_changes && !is_quantifier(e->op)) return e;

  auto copy = std::make_shared<Expr>(*e);
  if (type_changes) copy->type = apply_subst(tys, e->type);
  if (is_quantifier(e->op)) {
    std::set<std::string> inner = shadowed;
    for (auto& b : copy->binders) {
      inner.insert(b.name);
      b.type = apply_subst(tys, b.type);
    }
    for (auto& trig : copy->triggers)
      for (auto& p : trig.patterns) p = subst_rec(p, vars, tys, inner);
    copy->args[0] = subst_rec(e->args[0], vars, tys, inner);
    return copy;
  }
  for (auto& a : copy->args) a = subst_rec(a, vars, tys, shadowed);
  return copy;
}

}  // namespace

ExprRef substitute(const ExprRef& e, const std::map<std::string, ExprRef>& vars,
                   const TypeSubst& tys) {
  return subst_rec(e, vars, tys, {});
}

namespace {

bool equal_rec(const ExprRef& a, const ExprRef& b, std::map<std::string, std::string>* renaming) {
  if (a->op != b->op || a->args.size() != b->args.size()) return false;
  if ((a->type == nullptr) != (b->type == nullptr)) return false;
  if (a->type && !same_type(a->type, b->type)) return false;
  switch (a->op) {
    case Op::Var: {
      if (renaming) {
        auto it = renaming->find(a->name);
        if (it != renaming->end()) return it->second == b->name;
      }
      if (a->name != b->name) return false;
      break;
    }
    case Op::IntLit:
      if (a->value != b->value) return false;
      break;
    case Op::App:
      if (a->name != b->name) return false;
      break;
    default: break;
  }
  if (is_quantifier(a->op)) {
    if (a->binders.size() != b->binders.size()) return false;
    std::map<std::string, std::string> local = renaming ? *renaming : std::map<std::string, std::string>{};
    for (size_t i = 0; i < a->binders.size(); ++i) {
      if (!same_type(a->binders[i].type, b->binders[i].type)) return false;
      if (renaming)
        local[a->binders[i].name] = b->binders[i].name;
      else if (a->binders[i].name != b->binders[i].name)
        return false;
    }
    auto* r = renaming ? &local : nullptr;
    if (a->triggers.size() != b->triggers.size()) return false;
    for (size_t i = 0; i < a->triggers.size(); ++i) {
      const auto& pa = a->triggers[i].patterns;
      const auto& pb = b->triggers[i].patterns;
      if (pa.size() != pb.size()) return false;
      for (size_t j = 0; j < pa.size(); ++j)
        if (!equal_rec(pa[j], pb[j], r)) return false;
    }
    return equal_rec(a->args[0], b->args[0], r);
  }
  for (size_t i = 0; i < a->args.size(); ++i)
    if (!equal_rec(a->args[i], b->args[i], renaming)) return false;
  return true;
}

}  // namespace

bool struct_equal(const ExprRef& a, const ExprRef& b) { return equal_rec(a, b, nullptr); }

bool alpha_equal(const ExprRef& a, const ExprRef& b) {
  std::map<std::string, std::string> renaming;
  return equal_rec(a, b, &renaming);
}

bool alpha_equal(const Decl& a, const Decl& b) {
  if (a.kind != b.kind || a.names != b.names || a.type_params != b.type_params) return false;
  if (a.arg_types.size() != b.arg_types.size()) return false;
  for (size_t i = 0; i < a.arg_types.size(); ++i)
    if (!same_type(a.arg_types[i], b.arg_types[i])) return false;
  if ((a.result == nullptr) != (b.result == nullptr)) return false;
  if (a.result && !same_type(a.result, b.result)) return false;
  if ((a.formula == nullptr) != (b.formula == nullptr)) return false;
  return !a.formula || alpha_equal(a.formula, b.formula);
}

namespace {

void free_rec(const ExprRef& e, std::set<std::string>& bound, std::set<std::string>& out) {
  if (e->op == Op::Var) {
    if (!bound.count(e->name)) out.insert(e->name);
    return;
  }
  if (is_quantifier(e->op)) {
    std::set<std::string> inner = bound;
    for (const auto& b : e->binders) inner.insert(b.name);
    free_rec(e->args[0], inner, out);
    return;
  }
  for (const auto& a : e->args) free_rec(a, bound, out);
}

}  // namespace

void free_vars(const ExprRef& e, std::set<std::string>& out) {
  std::set<std::string> bound;
  free_rec(e, bound, out);
}

void expr_type_vars(const ExprRef& e, std::set<std::string>& out) {
  collect_type_vars(e->type, out);
  for (const auto& b : e->binders) collect_type_vars(b.type, out);
  for (const auto& a : e->args) expr_type_vars(a, out);
}

int term_size(const ExprRef& e) {
  int n = 1;
  for (const auto& a : e->args) n += term_size(a);
  return n;
}

bool is_ground(const ExprRef& e) {
  std::set<std::string> fv;
  free_vars(e, fv);
  return fv.empty();
}

/*------------------------------------------------------------------------*/

Environment build_environment(const std::vector<Decl>& decls) {
  Environment env;
  for (const auto& d : decls) {
    if (d.kind == DeclKind::Type) {
      env.type_arity[d.name()] = static_cast<int>(d.type_params.size());
    } else if (d.kind == DeclKind::Logic) {
      for (const auto& n : d.names) env.symbols[n] = Signature{d.arg_types, d.result};
    }
  }
  return env;
}

}  // namespace altgr
