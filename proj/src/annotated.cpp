#include <algorithm>
#include <functional>

#include "altgr/annotated.h"
#include "altgr/frontend.h"

namespace altgr {

const char* polarity_name(Polarity p) {
  switch (p) {
    case Polarity::Pos: return "Pos";
    case Polarity::Neg: return "Neg";
    case Polarity::Both: return "Both";
  }
  return "?";
}

const char* prune_state_name(PruneState s) {
  switch (s) {
    case PruneState::Active: return "Active";
    case PruneState::PrunedSound: return "PrunedSound";
    case PruneState::PrunedUnsound: return "PrunedUnsound";
  }
  return "?";
}

const AnnNode& AnnotatedAst::node(NodeId id) const {
  if (!valid(id)) throw AstError(AstError::Code::NoSuchNode, id, "no node " + std::to_string(id));
  return nodes[static_cast<size_t>(id)];
}

AnnNode& AnnotatedAst::node(NodeId id) {
  if (!valid(id)) throw AstError(AstError::Code::NoSuchNode, id, "no node " + std::to_string(id));
  return nodes[static_cast<size_t>(id)];
}

const Decl& AnnotatedAst::decl(NodeId decl_id) const {
  for (const auto& d : decls)
    if (d.id == decl_id) return d;
  throw AstError(AstError::Code::NotADeclaration, decl_id,
                 "node " + std::to_string(decl_id) + " is not a declaration");
}

std::optional<NodeId> AnnotatedAst::find_decl(const std::string& name) const {
  for (const auto& d : decls)
    for (const auto& n : d.names)
      if (n == name) return d.id;
  return std::nullopt;
}

const Decl* AnnotatedAst::goal() const {
  for (const auto& d : decls)
    if (d.kind == DeclKind::Goal) return &d;
  return nullptr;
}

bool AnnotatedAst::is_block_head(NodeId id) const {
  if (!valid(id)) return false;
  const AnnNode& n = node(id);
  if (n.is_decl || !is_quantifier(n.op)) return false;
  if (n.parent == kNoNode) return true;
  const AnnNode& p = node(n.parent);
  if (p.is_decl || p.op != n.op) return true;
  return !n.expr->triggers.empty() || triggers.count(id) > 0;
}

NodeId AnnotatedAst::block_head(NodeId id) const {
  while (!is_block_head(id)) {
    const AnnNode& n = node(id);
    if (n.is_decl || !is_quantifier(n.op))
      throw AstError(AstError::Code::NotAQuantifier, id,
                     "node " + std::to_string(id) + " is not a quantifier");
    id = n.parent;
  }
  return id;
}

std::vector<Binder> AnnotatedAst::block_vars(NodeId head) const {
  std::vector<Binder> out;
  NodeId cur = head;
  for (;;) {
    const AnnNode& n = node(cur);
    out.insert(out.end(), n.expr->binders.begin(), n.expr->binders.end());
    NodeId child = n.children.front();
    const AnnNode& c = node(child);
    if (c.is_decl || c.op != n.op || is_block_head(child)) break;
    cur = child;
  }
  return out;
}

std::set<std::string> AnnotatedAst::outer_type_vars(NodeId head) const {
  std::set<std::string> out;
  for (NodeId p = node(head).parent; p != kNoNode; p = node(p).parent) {
    const AnnNode& n = node(p);
    if (!n.is_decl && is_quantifier(n.op))
      for (const auto& b : n.expr->binders) collect_type_vars(b.type, out);
  }
  return out;
}

std::set<std::string> AnnotatedAst::required_type_vars(NodeId head) const {
  if (node(node(head).decl).decl_kind == DeclKind::Goal) return {};
  std::set<std::string> vs;
  for (const auto& b : block_vars(head)) collect_type_vars(b.type, vs);
  std::set<std::string> outer = outer_type_vars(head);
  std::set<std::string> out;
  for (const auto& v : vs)
    if (!outer.count(v)) out.insert(v);
  return out;
}

std::string AnnotatedAst::lemma_display_name(NodeId quant) const {
  const AnnNode& n = node(quant);
  const Decl& d = decl(n.decl);
  if (n.parent == d.id) return d.name();
  return d.name() + "#" + std::to_string(quant - d.id);
}

std::vector<NodeId> AnnotatedAst::block_heads() const {
  std::vector<NodeId> out;
  for (const auto& n : nodes)
    if (is_block_head(n.id)) out.push_back(n.id);
  return out;
}

/*------------------------------------------------------------------------*/

namespace {

Polarity flip(Polarity p) {
  switch (p) {
    case Polarity::Pos: return Polarity::Neg;
    case Polarity::Neg: return Polarity::Pos;
    case Polarity::Both: return Polarity::Both;
  }
  return p;
}

class Annotator {
 public:
  explicit Annotator(AnnotatedAst& ast) : ast_(ast) {}

  Decl add(const Decl& d) {
    Decl out = d;
    NodeId id = next();
    out.id = id;
    AnnNode& n = slot(id);
    n.id = id;
    n.decl = id;
    n.is_decl = true;
    n.decl_kind = d.kind;
    n.span = d.span;
    n.polarity = d.kind == DeclKind::Goal ? Polarity::Pos : Polarity::Neg;
    n.prunable = d.kind != DeclKind::Goal;
    if (d.formula) {
      out.formula = visit(d.formula, id, id, 0, n.polarity);
      slot(id).children.push_back(out.formula->id);
    }
    return out;
  }

 private:
  NodeId next() {
    NodeId id = static_cast<NodeId>(ast_.nodes.size());
    ast_.nodes.emplace_back();
    return id;
  }
  AnnNode& slot(NodeId id) { return ast_.nodes[static_cast<size_t>(id)]; }

  ExprRef visit(const ExprRef& e, NodeId parent, NodeId decl, int index, Polarity pol) {
    NodeId id = next();
    {
      AnnNode& n = slot(id);
      n.id = id;
      n.parent = parent;
      n.decl = decl;
      n.child_index = index;
      n.op = e->op;
      n.span = e->span;
      n.polarity = pol;
    }
    classify(id, parent, index);
    auto copy = std::make_shared<Expr>(*e);
    copy->id = id;
    std::vector<NodeId> kids;
    for (size_t i = 0; i < e->args.size(); ++i) {
      Polarity cp = pol;
      if (e->op == Op::Not || (e->op == Op::Implies && i == 0)) cp = flip(pol);
      if (e->op == Op::Iff) cp = Polarity::Both;
      copy->args[i] = visit(e->args[i], id, decl, static_cast<int>(i), cp);
      kids.push_back(copy->args[i]->id);
    }
    slot(id).children = std::move(kids);
    slot(id).expr = copy;
    return copy;
  }

  void classify(NodeId id, NodeId parent, int index) {
    AnnNode& n = slot(id);
    const AnnNode& p = slot(parent);
    if (p.is_decl) return;  // the declaration itself is the prunable unit
    switch (p.op) {
      case Op::And:
        n.prunable = true;
        n.replacement = true;
        break;
      case Op::Or:
        n.prunable = true;
        n.replacement = false;
        break;
      case Op::Implies:
        n.prunable = true;
        n.replacement = index == 0;
        break;
      case Op::Forall:
      case Op::Exists:
        n.prunable = true;
        n.replacement = n.polarity != Polarity::Pos;
        break;
      default:
        break;
    }
  }

  AnnotatedAst& ast_;
};

}  // namespace

AnnotatedAst annotate(const std::vector<Decl>& decls, std::string source) {
  AnnotatedAst ast;
  ast.source = std::move(source);
  Annotator a(ast);
  for (const auto& d : decls) ast.decls.push_back(a.add(d));
  ast.env = build_environment(ast.decls);
  return ast;
}

NodeId append_decl(AnnotatedAst& ast, const Decl& decl) {
  Annotator a(ast);
  ast.decls.push_back(a.add(decl));
  ast.env = build_environment(ast.decls);
  return ast.decls.back().id;
}

/*------------------------------------------------------------------------*/

Soundness prune_soundness(const AnnotatedAst& ast, NodeId id) {
  const AnnNode& n = ast.node(id);
  if (n.is_decl && n.decl_kind == DeclKind::Goal)
    throw AstError(AstError::Code::CannotPruneGoal, id, "the goal cannot be pruned");
  if (!n.prunable)
    throw AstError(AstError::Code::NotPrunable, id,
                   "node " + std::to_string(id) + " is not a prunable position");
  if (n.is_decl) return Soundness::Sound;
  if (n.polarity == Polarity::Both) return Soundness::Unsound;
  bool sound = (n.replacement && n.polarity == Polarity::Neg) ||
               (!n.replacement && n.polarity == Polarity::Pos);
  return sound ? Soundness::Sound : Soundness::Unsound;
}

PruneReport toggle_prune(AnnotatedAst& ast, NodeId id) {
  Soundness s = prune_soundness(ast, id);
  AnnNode& n = ast.node(id);
  PruneReport r;
  r.soundness = s;
  if (n.prune == PruneState::Active)
    n.prune = s == Soundness::Sound ? PruneState::PrunedSound : PruneState::PrunedUnsound;
  else
    n.prune = PruneState::Active;
  r.new_state = n.prune;
  r.closure = {id};
  return r;
}

/*------------------------------------------------------------------------*/

namespace {

void type_symbols(const TypeRef& t, std::set<std::string>& out) {
  if (t->kind() == Type::Kind::App) {
    out.insert(t->name());
    for (const auto& a : t->args()) type_symbols(a, out);
  }
}

void expr_symbols(const ExprRef& e, std::set<std::string>& out) {
  if (e->type) type_symbols(e->type, out);
  if (e->op == Op::App) out.insert(e->name);
  for (const auto& b : e->binders) type_symbols(b.type, out);
  for (const auto& t : e->triggers)
    for (const auto& p : t.patterns) expr_symbols(p, out);
  for (const auto& a : e->args) expr_symbols(a, out);
}

std::set<std::string> decl_uses(const Decl& d) {
  std::set<std::string> out;
  for (const auto& a : d.arg_types) type_symbols(a, out);
  if (d.result) type_symbols(d.result, out);
  if (d.formula) expr_symbols(d.formula, out);
  return out;
}

std::set<std::string> decl_declares(const Decl& d) {
  if (d.kind == DeclKind::Type || d.kind == DeclKind::Logic)
    return std::set<std::string>(d.names.begin(), d.names.end());
  return {};
}

}  // namespace

DependencyGraph dependency_graph(const AnnotatedAst& ast) {
  DependencyGraph g;
  for (const auto& d : ast.decls) {
    g.uses[d.id] = decl_uses(d);
    for (const auto& s : decl_declares(d)) g.declares[s].insert(d.id);
  }
  return g;
}

std::set<NodeId> dependency_closure(const AnnotatedAst& ast, NodeId decl_id) {
  const Decl& root = ast.decl(decl_id);
  if (root.kind != DeclKind::Type && root.kind != DeclKind::Logic)
    throw AstError(AstError::Code::NotADeclaration, decl_id,
                   "node " + std::to_string(decl_id) + " does not declare a symbol");
  DependencyGraph g = dependency_graph(ast);
  std::set<NodeId> out = {decl_id};
  std::set<std::string> symbols = decl_declares(root);
  bool grew = true;
  while (grew) {
    grew = false;
    for (const auto& d : ast.decls) {
      if (out.count(d.id)) continue;
      const auto& uses = g.uses[d.id];
      bool hit = std::any_of(uses.begin(), uses.end(),
                             [&](const std::string& s) { return symbols.count(s) > 0; });
      if (!hit) continue;
      out.insert(d.id);
      for (const auto& s : decl_declares(d)) symbols.insert(s);
      grew = true;
    }
  }
  return out;
}

std::set<NodeId> dependency_support(const AnnotatedAst& ast, NodeId id) {
  const AnnNode& n = ast.node(id);
  std::set<std::string> pending;
  if (n.is_decl)
    pending = decl_uses(ast.decl(id));
  else
    expr_symbols(n.expr, pending);
  DependencyGraph g = dependency_graph(ast);
  std::set<NodeId> out;
  std::set<std::string> done;
  while (!pending.empty()) {
    std::string s = *pending.begin();
    pending.erase(pending.begin());
    if (!done.insert(s).second) continue;
    auto it = g.declares.find(s);
    if (it == g.declares.end()) continue;
    for (NodeId d : it->second) {
      if (!out.insert(d).second) continue;
      for (const auto& u : g.uses[d])
        if (!done.count(u)) pending.insert(u);
    }
  }
  return out;
}

/*------------------------------------------------------------------------*/

namespace {

bool is_const(const ExprRef& e, bool value) {
  return e->op == (value ? Op::True : Op::False) && e->type->is_prop();
}

ExprRef constant(bool value) { return value ? mk_true() : mk_false(); }

ExprRef simplify(const ExprRef& e) {
  switch (e->op) {
    case Op::Not:
      if (is_const(e->args[0], true)) return mk_false();
      if (is_const(e->args[0], false)) return mk_true();
      return e;
    case Op::And:
    case Op::Or: {
      bool unit = e->op == Op::And;  // neutral element
      std::vector<ExprRef> kept;
      for (const auto& a : e->args) {
        if (is_const(a, !unit)) return constant(!unit);
        if (!is_const(a, unit)) kept.push_back(a);
      }
      if (kept.empty()) return constant(unit);
      if (kept.size() == 1) return kept.front();
      if (kept.size() == e->args.size()) return e;
      return with_args(*e, std::move(kept));
    }
    case Op::Implies: {
      const ExprRef& l = e->args[0];
      const ExprRef& r = e->args[1];
      if (is_const(l, true)) return r;
      if (is_const(l, false) || is_const(r, true)) return mk_true();
      if (is_const(r, false)) return mk_not(l);
      return e;
    }
    case Op::Iff: {
      const ExprRef& l = e->args[0];
      const ExprRef& r = e->args[1];
      if (is_const(l, true)) return r;
      if (is_const(r, true)) return l;
      if (is_const(l, false)) return simplify(mk_not(r));
      if (is_const(r, false)) return simplify(mk_not(l));
      return e;
    }
    case Op::Forall:
    case Op::Exists:
      if (is_const(e->args[0], true) || is_const(e->args[0], false)) return e->args[0];
      return e;
    default:
      return e;
  }
}

struct Stripper {
  const AnnotatedAst& ast;

  // Returns the rebuilt node; `changed` reports whether anything below was
  // pruned or folded.
  ExprRef run(const ExprRef& e, bool& changed) {
    const AnnNode& n = ast.node(e->id);
    if (n.prune != PruneState::Active) {
      changed = true;
      return constant(n.replacement);
    }
    if (e->args.empty()) return e;
    bool sub = false;
    std::vector<ExprRef> args;
    for (const auto& a : e->args) args.push_back(run(a, sub));
    ExprRef out = e;
    bool is_head = is_quantifier(e->op) && ast.is_block_head(e->id);
    if (sub || is_head) {
      auto copy = std::make_shared<Expr>(*e);
      copy->args = std::move(args);
      if (is_head) {
        auto it = ast.triggers.find(e->id);
        copy->triggers = it != ast.triggers.end() ? it->second : e->triggers;
        // Inferred triggers follow the body; a pruned body gets fresh ones.
        bool inferred = std::all_of(copy->triggers.begin(), copy->triggers.end(),
                                    [](const Trigger& t) { return t.origin == TriggerOrigin::Inferred; });
        if (sub && inferred)
          copy->triggers = frontend::infer_triggers(copy, ast.required_type_vars(e->id)).triggers;
      }
      out = copy;
    }
    if (sub) {
      changed = true;
      out = simplify(out);
    }
    return out;
  }
};

}  // namespace

std::vector<Decl> strip(const AnnotatedAst& ast) {
  std::vector<Decl> out;
  Stripper s{ast};
  for (const auto& d : ast.decls) {
    if (ast.node(d.id).prune != PruneState::Active) continue;
    Decl copy = d;
    if (d.formula) {
      bool changed = false;
      copy.formula = s.run(d.formula, changed);
    }
    out.push_back(std::move(copy));
  }
  return out;
}

namespace frontend {

AnnotatedAst load_problem(std::string_view text) {
  AnnotatedAst ast = annotate(parse_problem(text), std::string(text));
  infer_all_triggers(ast);
  return ast;
}

}  // namespace frontend

}  // namespace altgr
