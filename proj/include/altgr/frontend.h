#pragma once

// Front end for the Alt-Ergo style input language: lexing, parsing into an
// untyped tree, polymorphic type checking, trigger inference, fragment
// parsing for user-entered triggers and instance terms, and pretty printing.

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "altgr/ast.h"

namespace altgr {

class AnnotatedAst;

namespace frontend {

/// Error located in source (or fragment) coordinates.
class FrontendError : public std::runtime_error {
 public:
  FrontendError(Span span, const std::string& message)
      : std::runtime_error(message), span_(span) {}
  const Span& span() const { return span_; }
  /// "line:col: message"
  std::string located() const;

 private:
  Span span_;
};

class ParseError : public FrontendError {
  using FrontendError::FrontendError;
};

class TypeError : public FrontendError {
  using FrontendError::FrontendError;
};

/// Trigger does not mention every bound variable / type variable.
class CoverageError : public TypeError {
 public:
  CoverageError(Span span, std::vector<std::string> uncovered);
  const std::vector<std::string>& uncovered() const { return uncovered_; }

 private:
  std::vector<std::string> uncovered_;
};

/*------------------------------------------------------------------------*/
// Untyped syntax

struct RawType {
  enum class Kind { Int, Real, Bool, Prop, Var, Ctor };
  Kind kind = Kind::Int;
  std::string name;
  std::vector<RawType> args;
  Span span;
};

struct RawBinder {
  std::string name;
  RawType type;
  Span span;
};

enum class RawKind {
  Ident,   // identifier, possibly applied: f(t1, ..., tn)
  Int,
  True,
  False,
  Neg,     // unary minus
  Arith,   // + - *
  Cmp,     // = <> < <= > >=
  Not,
  And,
  Or,
  Implies,
  Iff,
  Forall,
  Exists,
};

struct RawExpr {
  RawKind kind = RawKind::Ident;
  std::string text;  // identifier or operator
  Integer value;
  bool applied = false;  // `f(...)` as opposed to a bare identifier
  std::vector<RawExpr> args;
  std::vector<RawBinder> binders;
  std::vector<std::vector<RawExpr>> triggers;
  Span span;
};

struct RawDecl {
  DeclKind kind = DeclKind::Axiom;
  std::vector<std::string> names;
  std::vector<std::string> type_params;
  std::vector<RawType> arg_types;
  std::optional<RawType> result;
  std::optional<RawExpr> formula;
  Span span;
};

std::vector<RawDecl> parse(std::string_view text);

/*------------------------------------------------------------------------*/
// Typing

/// Checks a whole problem: resolves symbols, instantiates polymorphic
/// symbols by unification, generalizes each axiom/goal over its remaining
/// type variables and validates user triggers.  Requires exactly one goal.
std::vector<Decl> typecheck(const std::vector<RawDecl>& raw);

/// Same as typecheck, without the single-goal requirement.
std::vector<Decl> typecheck_decls(const std::vector<RawDecl>& raw);

/// parse + typecheck.
std::vector<Decl> parse_problem(std::string_view text);

/*------------------------------------------------------------------------*/
// Triggers

/// A maximal chain `Q x. Q y. ...` of same-kind quantifiers, where every
/// node except possibly the last has no triggers of its own.  Its triggers
/// are stored on the head.
struct QuantBlock {
  std::vector<const Expr*> chain;
  std::vector<Binder> vars;
  ExprRef body;
};

QuantBlock quant_block(const ExprRef& head);

/// Type variables a trigger for `block` must mention.  `outer_type_vars` are
/// already fixed by enclosing quantifiers.
std::set<std::string> required_type_vars(const QuantBlock& block,
                                         const std::set<std::string>& outer_type_vars);

/// Variables and type variables of `block` not mentioned by the patterns.
std::vector<std::string> uncovered_by(const std::vector<ExprRef>& patterns,
                                      const QuantBlock& block,
                                      const std::set<std::string>& required_tyvars);

struct TriggerInference {
  std::vector<Trigger> triggers;
  std::optional<std::string> warning;
};

TriggerInference infer_triggers(const ExprRef& head,
                                const std::set<std::string>& required_tyvars);

/// Fills in triggers of every quantifier head of `ast` that has none,
/// recording a warning for heads where the heuristic found nothing.
void infer_all_triggers(AnnotatedAst& ast);

/// Infers triggers only for heads inside declaration `decl_id`.
void infer_decl_triggers(AnnotatedAst& ast, NodeId decl_id);

/*------------------------------------------------------------------------*/
// Fragments typed in by the user

struct FragmentScope {
  const Environment* env = nullptr;
  std::vector<Binder> binders;  // quantifier variables in scope
  std::set<std::string> required_tyvars;
};

enum class FragmentKind { TriggerList, TermList };

/// Comma separated patterns (optionally in brackets, `|` separating
/// triggers).  Each trigger is coverage-checked against the binders.
std::vector<Trigger> parse_trigger_fragment(std::string_view text, const FragmentScope& scope);

/// Comma separated terms, typed in scope.
std::vector<ExprRef> parse_term_fragment(std::string_view text, const FragmentScope& scope);

/// Instance terms for some of the variables of a quantifier block.  The
/// block's type variables are instantiated by unification with the terms'
/// types; the resulting instantiation is returned in `types`.
struct InstanceBindings {
  std::map<std::string, ExprRef> terms;
  TypeSubst types;
};

InstanceBindings check_instance_bindings(
    const Environment& env, const std::vector<Binder>& vars,
    const std::vector<std::pair<std::string, std::string>>& bindings);

/*------------------------------------------------------------------------*/
// Printing

std::string pretty(const ExprRef& e);
std::string pretty(const Decl& d);
std::string pretty(const TypeRef& t);
std::string pretty_trigger(const Trigger& t);

/// parse + typecheck + annotate + infer triggers.
AnnotatedAst load_problem(std::string_view text);

}  // namespace frontend
}  // namespace altgr
