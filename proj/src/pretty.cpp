#include <sstream>

#include "altgr/frontend.h"

namespace altgr::frontend {

namespace {

// Binding strength used to decide where parentheses are needed; mirrors the
// parser's precedence ladder.
enum Level {
  kTop = 0,
  kIff = 1,
  kImplies = 2,
  kOr = 3,
  kAnd = 4,
  kNot = 5,
  kCmp = 6,
  kAdd = 7,
  kMul = 8,
  kAtom = 9,
};

int level_of(const Expr& e) {
  switch (e.op) {
    case Op::Forall:
    case Op::Exists: return kTop;
    case Op::Iff: return kIff;
    case Op::Implies: return kImplies;
    case Op::Or: return kOr;
    case Op::And: return kAnd;
    case Op::Not: return kNot;
    case Op::Eq:
    case Op::Neq:
    case Op::Le:
    case Op::Lt: return kCmp;
    case Op::Add:
    case Op::Sub: return kAdd;
    case Op::Mul: return kMul;
    case Op::IntLit: return e.value < 0 ? kMul : kAtom;
    default: return kAtom;
  }
}

class Printer {
 public:
  std::string str() const { return os_.str(); }

  void type(const TypeRef& t) { os_ << t->str(); }

  void expr(const ExprRef& e, int ctx) {
    bool paren = level_of(*e) < ctx || (level_of(*e) == kTop && ctx > kTop);
    if (e->op == Op::IntLit && e->value < 0) paren = ctx > kAdd;
    if (paren) os_ << "(";
    body(e);
    if (paren) os_ << ")";
  }

  void trigger(const Trigger& t) {
    for (size_t i = 0; i < t.patterns.size(); ++i) {
      if (i) os_ << ", ";
      expr(t.patterns[i], kTop);
    }
  }

 private:
  void body(const ExprRef& e) {
    switch (e->op) {
      case Op::Var: os_ << e->name; break;
      case Op::IntLit: os_ << e->value.get_str(); break;
      case Op::True: os_ << "true"; break;
      case Op::False: os_ << "false"; break;
      case Op::App:
        os_ << e->name;
        if (!e->args.empty()) {
          os_ << "(";
          for (size_t i = 0; i < e->args.size(); ++i) {
            if (i) os_ << ", ";
            expr(e->args[i], kTop);
          }
          os_ << ")";
        }
        break;
      case Op::Add:
      case Op::Sub:
        expr(e->args[0], kAdd);
        os_ << (e->op == Op::Add ? " + " : " - ");
        expr(e->args[1], kMul);
        break;
      case Op::Mul:
        expr(e->args[0], kMul);
        os_ << " * ";
        expr(e->args[1], kAtom);
        break;
      case Op::Eq:
      case Op::Neq:
      case Op::Le:
      case Op::Lt: {
        static const std::map<Op, const char*> sym = {
            {Op::Eq, " = "}, {Op::Neq, " <> "}, {Op::Le, " <= "}, {Op::Lt, " < "}};
        expr(e->args[0], kAdd);
        os_ << sym.at(e->op);
        expr(e->args[1], kAdd);
        break;
      }
      case Op::Not:
        os_ << "not ";
        expr(e->args[0], kNot);
        break;
      case Op::And:
      case Op::Or:
        for (size_t i = 0; i < e->args.size(); ++i) {
          if (i) os_ << (e->op == Op::And ? " and " : " or ");
          expr(e->args[i], e->op == Op::And ? kNot : kAnd);
        }
        break;
      case Op::Implies:
        expr(e->args[0], kOr);
        os_ << " -> ";
        expr(e->args[1], kImplies);
        break;
      case Op::Iff:
        expr(e->args[0], kImplies);
        os_ << " <-> ";
        expr(e->args[1], kImplies);
        break;
      case Op::Forall:
      case Op::Exists: {
        os_ << (e->op == Op::Forall ? "forall " : "exists ");
        const auto& bs = e->binders;
        for (size_t i = 0; i < bs.size(); ++i) {
          os_ << bs[i].name;
          bool group_ends = i + 1 == bs.size() || !same_type(bs[i].type, bs[i + 1].type);
          if (group_ends) {
            os_ << ": ";
            type(bs[i].type);
          }
          if (i + 1 < bs.size()) os_ << ", ";
        }
        if (!e->triggers.empty()) {
          os_ << " [";
          for (size_t i = 0; i < e->triggers.size(); ++i) {
            if (i) os_ << " | ";
            trigger(e->triggers[i]);
          }
          os_ << "]";
        }
        os_ << ". ";
        expr(e->args[0], kTop);
        break;
      }
    }
  }

  std::ostringstream os_;
};

}  // namespace

std::string pretty(const ExprRef& e) {
  Printer p;
  p.expr(e, kTop);
  return p.str();
}

std::string pretty(const TypeRef& t) { return t->str(); }

std::string pretty_trigger(const Trigger& t) {
  Printer p;
  p.trigger(t);
  return p.str();
}

std::string pretty(const Decl& d) {
  std::ostringstream os;
  os << decl_kind_name(d.kind) << " ";
  switch (d.kind) {
    case DeclKind::Type:
      if (d.type_params.size() == 1) {
        os << "'" << d.type_params[0] << " ";
      } else if (d.type_params.size() > 1) {
        os << "(";
        for (size_t i = 0; i < d.type_params.size(); ++i)
          os << (i ? ", " : "") << "'" << d.type_params[i];
        os << ") ";
      }
      os << d.name();
      break;
    case DeclKind::Logic:
      for (size_t i = 0; i < d.names.size(); ++i) os << (i ? ", " : "") << d.names[i];
      os << ": ";
      for (size_t i = 0; i < d.arg_types.size(); ++i)
        os << (i ? ", " : "") << d.arg_types[i]->str();
      if (!d.arg_types.empty()) os << " -> ";
      os << d.result->str();
      break;
    case DeclKind::Axiom:
    case DeclKind::Goal:
      os << d.name() << ": " << pretty(d.formula);
      break;
  }
  return os.str();
}

}  // namespace altgr::frontend
