#pragma once

// Annotated view of a typed problem: every declaration, formula and term
// node gets a preorder id, a polarity and a prune state.  All interactive
// operations (pruning, trigger edits, manual instances, core display) work
// on node ids of this structure.

#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "altgr/ast.h"

namespace altgr {

enum class Polarity { Pos, Neg, Both };
enum class PruneState { Active, PrunedSound, PrunedUnsound };
enum class Soundness { Sound, Unsound };

const char* polarity_name(Polarity p);
const char* prune_state_name(PruneState s);

struct AnnNode {
  NodeId id = kNoNode;
  NodeId parent = kNoNode;
  NodeId decl = kNoNode;  // enclosing top-level declaration
  int child_index = -1;   // position among the parent's children
  bool is_decl = false;
  DeclKind decl_kind = DeclKind::Axiom;  // is_decl only
  Op op = Op::True;                      // !is_decl only
  std::vector<NodeId> children;
  Span span;
  Polarity polarity = Polarity::Pos;
  PruneState prune = PruneState::Active;
  int core_hits = 0;

  bool prunable = false;
  bool replacement = false;  // neutral element substituted when pruned

  ExprRef expr;  // formula/term nodes
};

class AstError : public std::runtime_error {
 public:
  enum class Code {
    NoSuchNode,
    NotPrunable,
    CannotPruneGoal,
    NotADeclaration,
    NotAQuantifier,
    NoSuchAxiom,
    DuplicateName,
  };
  AstError(Code code, NodeId id, const std::string& message)
      : std::runtime_error(message), code_(code), id_(id) {}
  Code code() const { return code_; }
  NodeId id() const { return id_; }

 private:
  Code code_;
  NodeId id_;
};

class AnnotatedAst {
 public:
  std::vector<Decl> decls;  // formulas rebuilt so that every Expr carries its id
  std::vector<AnnNode> nodes;
  std::map<NodeId, std::vector<Trigger>> triggers;  // quantifier block heads
  std::map<NodeId, std::string> warnings;           // heads without usable triggers
  Environment env;
  std::string source;

  size_t size() const { return nodes.size(); }
  bool valid(NodeId id) const { return id >= 0 && static_cast<size_t>(id) < nodes.size(); }
  const AnnNode& node(NodeId id) const;
  AnnNode& node(NodeId id);

  const Decl& decl(NodeId decl_id) const;
  std::optional<NodeId> find_decl(const std::string& name) const;
  const Decl* goal() const;

  /// Quantifier node that starts a block (its triggers live here).
  bool is_block_head(NodeId id) const;
  /// Head of the block containing quantifier `id`.
  NodeId block_head(NodeId id) const;
  /// Variables bound by the block headed at `head`.
  std::vector<Binder> block_vars(NodeId head) const;
  /// Type variables fixed by quantifiers enclosing `head`.
  std::set<std::string> outer_type_vars(NodeId head) const;
  /// Type variables triggers of `head` must mention.
  std::set<std::string> required_type_vars(NodeId head) const;

  /// `name` for the root quantifier of an axiom, `name#k` (k = preorder
  /// index inside the declaration) for nested ones.
  std::string lemma_display_name(NodeId quant) const;

  /// Every quantifier block head, in id order.
  std::vector<NodeId> block_heads() const;
};

/// Wraps typed declarations.  Ids follow a depth-first preorder over the
/// declaration list; bound-variable lists and trigger patterns get none.
AnnotatedAst annotate(const std::vector<Decl>& decls, std::string source = {});

/// Appends a declaration with fresh ids after the current maximum.
NodeId append_decl(AnnotatedAst& ast, const Decl& decl);

struct PruneReport {
  PruneState new_state = PruneState::Active;
  Soundness soundness = Soundness::Sound;
  std::vector<NodeId> closure;
};

/// Soundness a prune of `id` would have.  Throws AstError when not prunable.
Soundness prune_soundness(const AnnotatedAst& ast, NodeId id);

PruneReport toggle_prune(AnnotatedAst& ast, NodeId id);

struct DependencyGraph {
  std::map<NodeId, std::set<std::string>> uses;
  std::map<std::string, std::set<NodeId>> declares;
};

DependencyGraph dependency_graph(const AnnotatedAst& ast);

/// `decl_id` plus every top-level declaration transitively using a symbol
/// it declares.
std::set<NodeId> dependency_closure(const AnnotatedAst& ast, NodeId decl_id);

/// Declarations that must be active for node `id` (a formula node or a
/// declaration) to make sense: the declarations of its symbols, closed
/// under their own needs.
std::set<NodeId> dependency_support(const AnnotatedAst& ast, NodeId id);

/// Plain declarations for the solver: pruned nodes replaced by their
/// neutral element (pruned declarations dropped), constants folded where
/// something changed, current triggers attached to quantifier heads.
std::vector<Decl> strip(const AnnotatedAst& ast);

}  // namespace altgr
