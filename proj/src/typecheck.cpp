#include <algorithm>

#include "altgr/frontend.h"
#include "frontend_internal.h"

namespace altgr::frontend {

namespace {

bool is_uvar(const TypeRef& t) { return t->kind() == Type::Kind::Var && t->name()[0] == '?'; }

class Checker {
 public:
  explicit Checker(Environment env = {}) : env_(std::move(env)) {}

  Environment& env() { return env_; }

  /*----------------------------------------------------------------------*/
  // Types

  TypeRef fresh() { return Type::var("?" + std::to_string(counter_++)); }

  TypeRef zonk(const TypeRef& t) const {
    if (is_uvar(t)) {
      auto it = uvars_.find(t->name());
      return it == uvars_.end() ? t : zonk(it->second);
    }
    if (t->kind() != Type::Kind::App || !t->has_vars()) return t;
    std::vector<TypeRef> args;
    bool changed = false;
    for (const auto& a : t->args()) {
      args.push_back(zonk(a));
      changed |= args.back() != a;
    }
    return changed ? Type::app(t->name(), std::move(args)) : t;
  }

  bool occurs(const std::string& v, const TypeRef& t) const {
    if (t->kind() == Type::Kind::Var) return t->name() == v;
    for (const auto& a : t->args())
      if (occurs(v, a)) return true;
    return false;
  }

  bool unify(const TypeRef& x, const TypeRef& y) {
    TypeRef a = zonk(x), b = zonk(y);
    if (a->str() == b->str()) return true;
    if (is_uvar(a)) {
      if (occurs(a->name(), b)) return false;
      uvars_[a->name()] = b;
      return true;
    }
    if (is_uvar(b)) return unify(b, a);
    if (a->kind() != b->kind()) return false;
    if (a->kind() != Type::Kind::App) return false;
    if (a->name() != b->name() || a->args().size() != b->args().size()) return false;
    for (size_t i = 0; i < a->args().size(); ++i)
      if (!unify(a->args()[i], b->args()[i])) return false;
    return true;
  }

  void expect_type(const TypeRef& expected, const TypeRef& found, const Span& span,
                   const std::string& what = {}) {
    if (unify(expected, found)) return;
    std::string msg = "type mismatch";
    if (!what.empty()) msg += " in " + what;
    msg += ": expected " + shown(expected) + ", found " + shown(found);
    throw TypeError(span, msg);
  }

  std::string shown(const TypeRef& t) const {
    TypeRef z = zonk(t);
    return is_uvar(z) ? "'_" : z->str();
  }

  TypeRef resolve(const RawType& raw, bool allow_prop = false) {
    switch (raw.kind) {
      case RawType::Kind::Int: return Type::int_type();
      case RawType::Kind::Real: return Type::real_type();
      case RawType::Kind::Bool: return Type::bool_type();
      case RawType::Kind::Prop:
        if (!allow_prop) throw TypeError(raw.span, "prop is only allowed as a result type");
        return Type::prop_type();
      case RawType::Kind::Var: return Type::var(raw.name);
      case RawType::Kind::Ctor: {
        auto it = env_.type_arity.find(raw.name);
        if (it == env_.type_arity.end())
          throw TypeError(raw.span, "unknown type constructor " + raw.name);
        if (static_cast<size_t>(it->second) != raw.args.size())
          throw TypeError(raw.span, "type constructor " + raw.name + " expects " +
                                        std::to_string(it->second) + " argument(s)");
        std::vector<TypeRef> args;
        for (const auto& a : raw.args) args.push_back(resolve(a));
        return Type::app(raw.name, std::move(args));
      }
    }
    return Type::int_type();
  }

  /// Fresh unification variables for the type variables of a signature.
  Signature instantiate(const Signature& sig) {
    std::set<std::string> vars;
    for (const auto& a : sig.args) collect_type_vars(a, vars);
    collect_type_vars(sig.result, vars);
    if (vars.empty()) return sig;
    TypeSubst s;
    for (const auto& v : vars) s[v] = fresh();
    Signature out;
    for (const auto& a : sig.args) out.args.push_back(apply_subst(s, a));
    out.result = apply_subst(s, sig.result);
    return out;
  }

  /*----------------------------------------------------------------------*/
  // Expressions

  using Scope = std::vector<std::pair<std::string, TypeRef>>;

  std::shared_ptr<Expr> make(Op op, TypeRef type, const Span& span) {
    auto e = std::make_shared<Expr>();
    e->op = op;
    e->type = std::move(type);
    e->span = span;
    return e;
  }

  ExprRef formula(const RawExpr& r, Scope& scope) {
    switch (r.kind) {
      case RawKind::True:
        return make(Op::True, Type::prop_type(), r.span);
      case RawKind::False:
        return make(Op::False, Type::prop_type(), r.span);
      case RawKind::Not:
      case RawKind::And:
      case RawKind::Or:
      case RawKind::Implies:
      case RawKind::Iff: {
        static const std::map<RawKind, Op> ops = {{RawKind::Not, Op::Not},
                                                  {RawKind::And, Op::And},
                                                  {RawKind::Or, Op::Or},
                                                  {RawKind::Implies, Op::Implies},
                                                  {RawKind::Iff, Op::Iff}};
        auto e = make(ops.at(r.kind), Type::prop_type(), r.span);
        for (const auto& a : r.args) e->args.push_back(formula(a, scope));
        return e;
      }
      case RawKind::Forall:
      case RawKind::Exists:
        return quantifier(r, scope);
      case RawKind::Cmp:
        return comparison(r, scope);
      case RawKind::Ident: {
        ExprRef t = term(r, scope, true);
        if (!t->type->is_prop())
          throw TypeError(r.span, "expected a formula, found a term of type " + shown(t->type));
        return t;
      }
      default:
        throw TypeError(r.span, "expected a formula, found a term");
    }
  }

  ExprRef quantifier(const RawExpr& r, Scope& scope) {
    Op op = r.kind == RawKind::Forall ? Op::Forall : Op::Exists;
    auto e = make(op, Type::prop_type(), r.span);
    std::set<std::string> seen;
    size_t mark = scope.size();
    for (const auto& b : r.binders) {
      if (!seen.insert(b.name).second)
        throw TypeError(b.span, "variable " + b.name + " bound twice");
      if (env_.symbols.count(b.name) && !env_.symbols.at(b.name).args.empty())
        throw TypeError(b.span, b.name + " is a function symbol");
      TypeRef t = resolve(b.type);
      e->binders.push_back(Binder{b.name, t});
    }
    for (const auto& b : e->binders) scope.emplace_back(b.name, b.type);
    for (const auto& trig : r.triggers) {
      Trigger t;
      t.origin = TriggerOrigin::UserSource;
      for (const auto& p : trig) t.patterns.push_back(pattern(p, scope));
      e->triggers.push_back(std::move(t));
    }
    e->args.push_back(formula(r.args.front(), scope));
    scope.resize(mark);
    return e;
  }

  ExprRef pattern(const RawExpr& r, Scope& scope) {
    if (r.kind != RawKind::Ident && r.kind != RawKind::Arith && r.kind != RawKind::Neg &&
        r.kind != RawKind::Int)
      throw TypeError(r.span, "trigger patterns must be terms or predicate applications");
    return term(r, scope, true);
  }

  ExprRef comparison(const RawExpr& r, Scope& scope) {
    ExprRef lhs = term(r.args[0], scope, false);
    ExprRef rhs = term(r.args[1], scope, false);
    expect_type(lhs->type, rhs->type, r.span, "comparison");
    const std::string& o = r.text;
    if (o == "=" || o == "<>") {
      auto e = make(o == "=" ? Op::Eq : Op::Neq, Type::prop_type(), r.span);
      e->args = {lhs, rhs};
      return e;
    }
    numeric(lhs->type, r.span);
    bool swap = o == ">" || o == ">=";
    auto e = make(o == "<" || o == ">" ? Op::Lt : Op::Le, Type::prop_type(), r.span);
    e->args = swap ? std::vector<ExprRef>{rhs, lhs} : std::vector<ExprRef>{lhs, rhs};
    return e;
  }

  void numeric(const TypeRef& t, const Span& span) {
    TypeRef z = zonk(t);
    if (is_uvar(z)) {
      numeric_.emplace_back(z, span);
      return;
    }
    if (!z->is_numeric()) throw TypeError(span, "arithmetic on non-numeric type " + z->str());
  }

  ExprRef term(const RawExpr& r, Scope& scope, bool allow_prop) {
    switch (r.kind) {
      case RawKind::Int: {
        auto e = make(Op::IntLit, fresh(), r.span);
        e->value = r.value;
        numeric(e->type, r.span);
        return e;
      }
      case RawKind::True:
      case RawKind::False:
        return make(r.kind == RawKind::True ? Op::True : Op::False, Type::bool_type(), r.span);
      case RawKind::Neg: {
        ExprRef operand = term(r.args[0], scope, false);
        numeric(operand->type, r.span);
        if (operand->op == Op::IntLit) {
          auto e = std::make_shared<Expr>(*operand);
          e->value = -operand->value;
          e->span = r.span;
          return e;
        }
        auto lit = make(Op::IntLit, operand->type, r.span);
        lit->value = -1;
        auto e = make(Op::Mul, operand->type, r.span);
        e->args = {lit, operand};
        return e;
      }
      case RawKind::Arith: {
        ExprRef lhs = term(r.args[0], scope, false);
        ExprRef rhs = term(r.args[1], scope, false);
        expect_type(lhs->type, rhs->type, r.span, "arithmetic");
        numeric(lhs->type, r.span);
        Op op = r.text == "+" ? Op::Add : r.text == "-" ? Op::Sub : Op::Mul;
        if (op == Op::Mul && lhs->op != Op::IntLit && rhs->op != Op::IntLit)
          throw TypeError(r.span, "nonlinear multiplication: one operand must be a literal");
        auto e = make(op, lhs->type, r.span);
        e->args = {lhs, rhs};
        return e;
      }
      case RawKind::Ident:
        return application(r, scope, allow_prop);
      default:
        throw TypeError(r.span, "expected a term, found a formula");
    }
  }

  ExprRef application(const RawExpr& r, Scope& scope, bool allow_prop) {
    if (!r.applied) {
      for (auto it = scope.rbegin(); it != scope.rend(); ++it) {
        if (it->first == r.text) {
          auto e = make(Op::Var, it->second, r.span);
          e->name = r.text;
          return e;
        }
      }
    }
    auto it = env_.symbols.find(r.text);
    if (it == env_.symbols.end()) throw TypeError(r.span, "unbound identifier " + r.text);
    Signature sig = instantiate(it->second);
    if (sig.args.size() != r.args.size())
      throw TypeError(r.span, r.text + " expects " + std::to_string(sig.args.size()) +
                                  " argument(s), got " + std::to_string(r.args.size()));
    auto e = make(Op::App, sig.result, r.span);
    e->name = r.text;
    for (size_t i = 0; i < r.args.size(); ++i) {
      ExprRef a = term(r.args[i], scope, false);
      expect_type(sig.args[i], a->type, r.args[i].span,
                  "argument " + std::to_string(i + 1) + " of " + r.text);
      e->args.push_back(a);
    }
    if (sig.result->is_prop() && !allow_prop)
      throw TypeError(r.span, "predicate " + r.text + " used as a term");
    return e;
  }

  /*----------------------------------------------------------------------*/
  // Finalization

  /// Defaults unresolved numeric types to int.
  void default_numerics() {
    for (const auto& [t, span] : numeric_) {
      TypeRef z = zonk(t);
      if (is_uvar(z)) {
        uvars_[z->name()] = Type::int_type();
        continue;
      }
      if (!z->is_numeric()) throw TypeError(span, "arithmetic on non-numeric type " + z->str());
    }
    numeric_.clear();
  }

  /// Zonks every type; leftover unification variables are handed to `rest`.
  template <class F>
  ExprRef finalize(const ExprRef& e, F&& rest) {
    auto copy = std::make_shared<Expr>(*e);
    if (copy->type) copy->type = close_type(copy->type, rest);
    for (auto& b : copy->binders) b.type = close_type(b.type, rest);
    for (auto& t : copy->triggers)
      for (auto& p : t.patterns) p = finalize(p, rest);
    for (auto& a : copy->args) a = finalize(a, rest);
    return copy;
  }

  template <class F>
  TypeRef close_type(const TypeRef& t, F&& rest) {
    TypeRef z = zonk(t);
    if (!z->has_vars()) return z;
    std::set<std::string> vs;
    collect_type_vars(z, vs);
    TypeSubst s;
    for (const auto& v : vs)
      if (v[0] == '?') s[v] = rest(v);
    return s.empty() ? z : apply_subst(s, z);
  }

  /// Generalizes leftover unification variables of a declaration into
  /// fresh rigid type variables.
  ExprRef generalize(const ExprRef& f) {
    default_numerics();
    std::set<std::string> taken;
    expr_type_vars(f, taken);
    std::map<std::string, TypeRef> names;
    auto rest = [&](const std::string& v) -> TypeRef {
      auto it = names.find(v);
      if (it != names.end()) return it->second;
      std::string n;
      for (int k = 0;; ++k) {
        n = std::string(1, static_cast<char>('a' + k % 26));
        if (k >= 26) n += std::to_string(k / 26);
        if (!taken.count(n)) break;
      }
      taken.insert(n);
      TypeRef t = Type::var(n);
      uvars_[v] = t;
      names[v] = t;
      return t;
    };
    return finalize(f, rest);
  }

  ExprRef close_ground(const ExprRef& e) {
    default_numerics();
    auto rest = [&](const std::string&) -> TypeRef {
      throw TypeError(e->span, "cannot determine the type of this term");
    };
    return finalize(e, rest);
  }

  ExprRef close_with(const ExprRef& e, const std::map<std::string, TypeRef>& back) {
    default_numerics();
    auto rest = [&](const std::string& v) -> TypeRef {
      for (const auto& [uv, orig] : back)
        if (zonk(Type::var(uv))->str() == "'" + v) return orig;
      throw TypeError(e->span, "cannot determine the type of this term");
    };
    return finalize(e, rest);
  }

  /*----------------------------------------------------------------------*/
  // Declarations

  Decl declaration(const RawDecl& r) {
    Decl d;
    d.kind = r.kind;
    d.names = r.names;
    d.span = r.span;
    switch (r.kind) {
      case DeclKind::Type: {
        const std::string& n = r.names.front();
        if (env_.type_arity.count(n)) throw TypeError(r.span, "type " + n + " declared twice");
        std::set<std::string> ps(r.type_params.begin(), r.type_params.end());
        if (ps.size() != r.type_params.size())
          throw TypeError(r.span, "repeated type parameter in declaration of " + n);
        d.type_params = r.type_params;
        env_.type_arity[n] = static_cast<int>(r.type_params.size());
        break;
      }
      case DeclKind::Logic: {
        for (const auto& a : r.arg_types) d.arg_types.push_back(resolve(a));
        d.result = resolve(*r.result, true);
        for (const auto& n : r.names) {
          if (env_.symbols.count(n)) throw TypeError(r.span, "symbol " + n + " declared twice");
          env_.symbols[n] = Signature{d.arg_types, d.result};
        }
        break;
      }
      case DeclKind::Axiom:
      case DeclKind::Goal: {
        const std::string& n = r.names.front();
        if (!formula_names_.insert(n).second)
          throw TypeError(r.span, "declaration " + n + " declared twice");
        Scope scope;
        ExprRef f = generalize(formula(*r.formula, scope));
        d.formula = normalize_quantifiers(f, r.kind == DeclKind::Goal);
        break;
      }
    }
    return d;
  }

 private:
  Environment env_;
  int counter_ = 0;
  std::map<std::string, TypeRef> uvars_;
  std::vector<std::pair<TypeRef, Span>> numeric_;
  std::set<std::string> formula_names_;
};

}  // namespace

std::vector<Decl> typecheck_decls(const std::vector<RawDecl>& raw) {
  Checker c;
  std::vector<Decl> out;
  for (const auto& r : raw) out.push_back(c.declaration(r));
  return out;
}

std::vector<Decl> typecheck(const std::vector<RawDecl>& raw) {
  int goals = 0;
  for (const auto& r : raw) goals += r.kind == DeclKind::Goal;
  if (goals != 1) {
    Span s = raw.empty() ? Span{1, 1, 1, 1} : raw.back().span;
    throw TypeError(s, "a problem must contain exactly one goal, found " + std::to_string(goals));
  }
  return typecheck_decls(raw);
}

std::vector<Decl> parse_problem(std::string_view text) { return typecheck(parse(text)); }

/*------------------------------------------------------------------------*/

namespace {

Checker::Scope scope_of(const FragmentScope& scope) {
  Checker::Scope s;
  for (const auto& b : scope.binders) s.emplace_back(b.name, b.type);
  return s;
}

QuantBlock fake_block(const std::vector<Binder>& binders) {
  QuantBlock b;
  b.vars = binders;
  return b;
}

}  // namespace

std::vector<Trigger> parse_trigger_fragment(std::string_view text, const FragmentScope& scope) {
  static const Environment empty;
  Checker c(scope.env ? *scope.env : empty);
  auto raw = parse_trigger_text(text);
  Checker::Scope s = scope_of(scope);
  std::vector<Trigger> out;
  for (const auto& pats : raw) {
    Trigger t;
    t.origin = TriggerOrigin::UserAction;
    for (const auto& p : pats) {
      if (p.kind != RawKind::Ident && p.kind != RawKind::Arith && p.kind != RawKind::Neg &&
          p.kind != RawKind::Int)
        throw TypeError(p.span, "trigger patterns must be terms or predicate applications");
      t.patterns.push_back(c.close_ground(c.term(p, s, true)));
    }
    auto missing = uncovered_by(t.patterns, fake_block(scope.binders), scope.required_tyvars);
    if (!missing.empty()) {
      Span sp = pats.front().span;
      sp.end_line = pats.back().span.end_line;
      sp.end_col = pats.back().span.end_col;
      throw CoverageError(sp, missing);
    }
    out.push_back(std::move(t));
  }
  return out;
}

std::vector<ExprRef> parse_term_fragment(std::string_view text, const FragmentScope& scope) {
  static const Environment empty;
  Checker c(scope.env ? *scope.env : empty);
  auto raw = parse_term_text(text);
  Checker::Scope s = scope_of(scope);
  std::vector<ExprRef> out;
  for (const auto& r : raw) out.push_back(c.close_ground(c.term(r, s, false)));
  return out;
}

InstanceBindings check_instance_bindings(
    const Environment& env, const std::vector<Binder>& vars,
    const std::vector<std::pair<std::string, std::string>>& bindings) {
  Checker c(env);
  std::set<std::string> tyvars;
  for (const auto& v : vars) collect_type_vars(v.type, tyvars);
  TypeSubst flex;
  std::map<std::string, TypeRef> back;
  for (const auto& tv : tyvars) {
    TypeRef u = c.fresh();
    flex[tv] = u;
    back[u->name()] = Type::var(tv);
  }
  std::vector<std::pair<std::string, ExprRef>> typed;
  for (const auto& [name, text] : bindings) {
    const std::string& wanted = name;
    auto it = std::find_if(vars.begin(), vars.end(),
                           [&](const Binder& b) { return b.name == wanted; });
    if (it == vars.end()) throw TypeError(Span{}, name + " is not bound by this quantifier");
    auto raw = parse_term_text(text);
    if (raw.size() != 1) throw TypeError(raw[1].span, "one term expected for " + name);
    Checker::Scope none;
    ExprRef t = c.term(raw.front(), none, false);
    TypeRef want = apply_subst(flex, it->type);
    if (!c.unify(want, t->type)) {
      bool poly = it->type->has_vars();
      throw TypeError(raw.front().span,
                      std::string(poly ? "type variable instantiation conflict" : "type mismatch") +
                          " for " + name + ": expected " + c.shown(want) + ", found " +
                          c.shown(t->type));
    }
    typed.emplace_back(name, t);
  }
  InstanceBindings out;
  for (const auto& [name, t] : typed) out.terms[name] = c.close_with(t, back);
  for (const auto& [tv, u] : flex) {
    TypeRef z = c.zonk(u);
    std::set<std::string> vs;
    collect_type_vars(z, vs);
    TypeSubst s;
    for (const auto& v : vs) {
      if (v[0] != '?') continue;
      for (const auto& [uv, orig] : back)
        if (c.zonk(Type::var(uv))->str() == "'" + v) s[v] = orig;
      if (!s.count(v)) throw TypeError(Span{}, "cannot determine the type of " + tv);
    }
    TypeRef t = s.empty() ? z : apply_subst(s, z);
    if (t->str() != "'" + tv) out.types[tv] = t;
  }
  return out;
}

}  // namespace altgr::frontend
