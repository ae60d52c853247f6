#pragma once

// Typed abstract syntax shared by the front end, the interaction layer and
// the solver.  Terms and formulas share one node type (`Expr`); a node is a
// formula exactly when its type is `prop`.

#include <cstdint>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include <gmpxx.h>

namespace altgr {

using NodeId = std::int32_t;
inline constexpr NodeId kNoNode = -1;

using Integer = mpz_class;
using Rational = mpq_class;

/// Source extent, 1-based lines and columns; `end_col` is one past the last
/// character.
struct Span {
  int start_line = 0;
  int start_col = 0;
  int end_line = 0;
  int end_col = 0;

  bool empty() const { return start_line == 0; }
  bool contains(const Span& other) const;
  friend bool operator==(const Span&, const Span&) = default;
};

/*------------------------------------------------------------------------*/

class Type;
using TypeRef = std::shared_ptr<const Type>;

class Type {
 public:
  enum class Kind { Int, Real, Bool, Prop, Var, App };

  static TypeRef int_type();
  static TypeRef real_type();
  static TypeRef bool_type();
  static TypeRef prop_type();
  static TypeRef var(std::string name);
  static TypeRef app(std::string ctor, std::vector<TypeRef> args);

  Kind kind() const { return kind_; }
  const std::string& name() const { return name_; }
  const std::vector<TypeRef>& args() const { return args_; }

  // Canonical rendering; two types are equal iff their renderings are.
  const std::string& str() const { return repr_; }

  bool is_numeric() const { return kind_ == Kind::Int || kind_ == Kind::Real; }
  bool is_prop() const { return kind_ == Kind::Prop; }
  bool has_vars() const { return has_vars_; }

  Type(Kind k, std::string name, std::vector<TypeRef> args);

 private:
  Kind kind_;
  std::string name_;
  std::vector<TypeRef> args_;
  std::string repr_;
  bool has_vars_ = false;
};

inline bool same_type(const TypeRef& a, const TypeRef& b) {
  return a == b || a->str() == b->str();
}

using TypeSubst = std::map<std::string, TypeRef>;

TypeRef apply_subst(const TypeSubst& subst, const TypeRef& t);
void collect_type_vars(const TypeRef& t, std::set<std::string>& out);

/// One-way matching: binds variables of `pattern` so that it equals `ground`.
/// Variables of `ground` are treated as rigid constants.
bool match_type(const TypeRef& pattern, const TypeRef& ground, TypeSubst& subst);

/*------------------------------------------------------------------------*/

enum class Op {
  // terms
  Var,
  IntLit,
  App,
  Add,
  Sub,
  Mul,
  // formulas (True/False are also the term-level booleans when typed bool)
  True,
  False,
  Eq,
  Neq,
  Le,
  Lt,
  Not,
  And,
  Or,
  Implies,
  Iff,
  Forall,
  Exists,
};

const char* op_name(Op op);
inline bool is_quantifier(Op op) { return op == Op::Forall || op == Op::Exists; }
inline bool is_arith(Op op) { return op == Op::Add || op == Op::Sub || op == Op::Mul; }
inline bool is_connective(Op op) {
  return op == Op::Not || op == Op::And || op == Op::Or || op == Op::Implies ||
         op == Op::Iff;
}
inline bool is_comparison(Op op) {
  return op == Op::Eq || op == Op::Neq || op == Op::Le || op == Op::Lt;
}

struct Expr;
using ExprRef = std::shared_ptr<const Expr>;

struct Binder {
  std::string name;
  TypeRef type;
};

enum class TriggerOrigin { Inferred, UserSource, UserAction };
const char* origin_name(TriggerOrigin o);

/// A set of patterns matched jointly.  One pattern is a mono-trigger.
struct Trigger {
  std::vector<ExprRef> patterns;
  TriggerOrigin origin = TriggerOrigin::Inferred;
};

struct Expr {
  Op op = Op::True;
  std::string name;  // variable name or applied symbol
  Integer value;     // IntLit
  TypeRef type;
  std::vector<ExprRef> args;  // operands; quantifier body is args[0]

  std::vector<Binder> binders;    // quantifiers only
  std::vector<Trigger> triggers;  // quantifiers only

  Span span;
  NodeId id = kNoNode;

  bool is_formula() const { return type && type->is_prop(); }
  bool is_term() const { return !is_formula(); }
  /// Atomic formula: comparison, predicate application or a constant.
  bool is_atom() const;
  const ExprRef& body() const { return args.front(); }
};

// Builders.  Spans and ids default to empty.
ExprRef mk_var(std::string name, TypeRef type);
ExprRef mk_int(Integer value, TypeRef type = Type::int_type());
ExprRef mk_app(std::string symbol, std::vector<ExprRef> args, TypeRef type);
ExprRef mk_arith(Op op, ExprRef lhs, ExprRef rhs);
ExprRef mk_true();
ExprRef mk_false();
ExprRef mk_cmp(Op op, ExprRef lhs, ExprRef rhs);
ExprRef mk_not(ExprRef f);
ExprRef mk_nary(Op op, std::vector<ExprRef> fs);
ExprRef mk_binary(Op op, ExprRef lhs, ExprRef rhs);
ExprRef mk_quant(Op op, std::vector<Binder> binders, std::vector<Trigger> triggers,
                 ExprRef body);

/// Copy of `e` with the given children (keeps op, name, type, span, id, ...).
ExprRef with_args(const Expr& e, std::vector<ExprRef> args);

/// Capture-free substitution of free variables by (ground) terms, applying
/// `tys` to every type in the tree including binders and trigger patterns.
ExprRef substitute(const ExprRef& e, const std::map<std::string, ExprRef>& vars,
                   const TypeSubst& tys);

/// Structural equality ignoring spans, ids and trigger origins.
bool struct_equal(const ExprRef& a, const ExprRef& b);
/// Equality up to renaming of bound variables (ignores spans and ids).
bool alpha_equal(const ExprRef& a, const ExprRef& b);

void free_vars(const ExprRef& e, std::set<std::string>& out);
/// Type variables occurring in any node type or binder type of `e`.
void expr_type_vars(const ExprRef& e, std::set<std::string>& out);
/// Number of nodes of a term (used by trigger preference).
int term_size(const ExprRef& e);
bool is_ground(const ExprRef& e);

/*------------------------------------------------------------------------*/

enum class DeclKind { Type, Logic, Axiom, Goal };
const char* decl_kind_name(DeclKind k);

struct Decl {
  DeclKind kind = DeclKind::Axiom;
  std::vector<std::string> names;        // one name, except `logic a, b: ...`
  std::vector<std::string> type_params;  // type declarations
  std::vector<TypeRef> arg_types;        // logic declarations
  TypeRef result;                        // logic declarations
  ExprRef formula;                       // axioms and goals
  Span span;
  NodeId id = kNoNode;

  const std::string& name() const { return names.front(); }
  bool is_formula_decl() const { return kind == DeclKind::Axiom || kind == DeclKind::Goal; }
};

bool alpha_equal(const Decl& a, const Decl& b);

struct Signature {
  std::vector<TypeRef> args;
  TypeRef result;
};

/// Declared type constructors and logic symbols of a problem.
struct Environment {
  std::map<std::string, int> type_arity;
  std::map<std::string, Signature> symbols;
};

Environment build_environment(const std::vector<Decl>& decls);

}  // namespace altgr
