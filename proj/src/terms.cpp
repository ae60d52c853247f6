#include "altgr/terms.h"

#include <algorithm>
#include <stdexcept>

#include "altgr/frontend.h"

namespace altgr {

std::string op_symbol(const Expr& e) {
  switch (e.op) {
    case Op::App: return e.name;
    case Op::IntLit: return e.value.get_str();
    case Op::Add: return "+";
    case Op::Sub: return "-";
    case Op::Mul: return "*";
    case Op::True: return "true";
    case Op::False: return "false";
    default: return op_name(e.op);
  }
}

TermBank::TermBank() {
  Term t;
  t.kind = Term::Kind::Const;
  t.type = Type::prop_type();
  t.sym = "true";
  top_ = intern(t);
  t.sym = "false";
  bottom_ = intern(t);
}

TermId TermBank::intern(Term term) {
  std::string key = std::to_string(static_cast<int>(term.kind)) + '|' + term.sym + '|' +
                    term.type->str();
  for (TermId a : term.args) key += ',' + std::to_string(a);
  auto [it, fresh] = index_.emplace(std::move(key), static_cast<TermId>(terms_.size()));
  if (fresh) terms_.push_back(std::move(term));
  return it->second;
}

TermId TermBank::app(const std::string& sym, std::vector<TermId> args, TypeRef type) {
  Term t;
  t.sym = sym;
  t.args = std::move(args);
  t.type = std::move(type);
  return intern(std::move(t));
}

TermId TermBank::num(const Rational& value, TypeRef type) {
  Term t;
  t.kind = Term::Kind::Num;
  t.value = value;
  t.sym = value.get_str();
  t.type = std::move(type);
  return intern(std::move(t));
}

TermId TermBank::arith(Term::Kind kind, TermId lhs, TermId rhs) {
  Term t;
  t.kind = kind;
  t.sym = kind == Term::Kind::Add ? "+" : kind == Term::Kind::Sub ? "-" : "*";
  t.args = {lhs, rhs};
  t.type = terms_[lhs].type;
  return intern(std::move(t));
}

TermId TermBank::from_expr(const ExprRef& e) {
  switch (e->op) {
    case Op::App: {
      std::vector<TermId> args;
      for (const auto& a : e->args) args.push_back(from_expr(a));
      return app(e->name, std::move(args), e->type);
    }
    case Op::IntLit: return num(Rational(e->value), e->type);
    case Op::Add: return arith(Term::Kind::Add, from_expr(e->args[0]), from_expr(e->args[1]));
    case Op::Sub: return arith(Term::Kind::Sub, from_expr(e->args[0]), from_expr(e->args[1]));
    case Op::Mul: return arith(Term::Kind::Mul, from_expr(e->args[0]), from_expr(e->args[1]));
    case Op::True:
    case Op::False: {
      if (e->type->is_prop()) return truth(e->op == Op::True);
      Term t;
      t.kind = Term::Kind::Const;
      t.sym = op_symbol(*e);
      t.type = e->type;
      return intern(std::move(t));
    }
    default:
      throw std::logic_error("not a ground term: " + frontend::pretty(e));
  }
}

ExprRef TermBank::to_expr(TermId id) const {
  const Term& t = terms_[id];
  switch (t.kind) {
    case Term::Kind::App: {
      std::vector<ExprRef> args;
      for (TermId a : t.args) args.push_back(to_expr(a));
      return mk_app(t.sym, std::move(args), t.type);
    }
    case Term::Kind::Num: return mk_int(t.value.get_num(), t.type);
    case Term::Kind::Add: return mk_arith(Op::Add, to_expr(t.args[0]), to_expr(t.args[1]));
    case Term::Kind::Sub: return mk_arith(Op::Sub, to_expr(t.args[0]), to_expr(t.args[1]));
    case Term::Kind::Mul: return mk_arith(Op::Mul, to_expr(t.args[0]), to_expr(t.args[1]));
    case Term::Kind::Const: {
      auto e = std::make_shared<Expr>();
      e->op = t.sym == "true" ? Op::True : Op::False;
      e->type = t.type;
      return e;
    }
  }
  return nullptr;
}

std::string TermBank::str(TermId t) const { return frontend::pretty(to_expr(t)); }

/*------------------------------------------------------------------------*/

void tags_union(Tags& into, const Tags& other) {
  if (other.empty()) return;
  Tags out;
  out.reserve(into.size() + other.size());
  std::set_union(into.begin(), into.end(), other.begin(), other.end(), std::back_inserter(out));
  into = std::move(out);
}

Poly Poly::atom(TermId t) {
  Poly p;
  p.coeffs[t] = 1;
  return p;
}

Poly Poly::constant_of(const Rational& c) {
  Poly p;
  p.constant = c;
  return p;
}

void Poly::add(const Poly& other, const Rational& factor) {
  if (factor == 0) return;
  constant += other.constant * factor;
  for (const auto& [t, c] : other.coeffs) {
    Rational& slot = coeffs[t];
    slot += c * factor;
    if (slot == 0) coeffs.erase(t);
  }
}

void Poly::scale(const Rational& factor) {
  if (factor == 0) {
    *this = Poly();
    return;
  }
  constant *= factor;
  for (auto& [t, c] : coeffs) c *= factor;
}

Rational Poly::coeff(TermId t) const {
  auto it = coeffs.find(t);
  return it == coeffs.end() ? Rational(0) : it->second;
}

std::string Poly::key() const {
  std::string s = constant.get_str();
  for (const auto& [t, c] : coeffs) s += ' ' + c.get_str() + '*' + std::to_string(t);
  return s;
}

std::string Poly::str(const TermBank& bank) const {
  std::string s;
  for (const auto& [t, c] : coeffs) {
    std::string name = bank.str(t);
    if (s.empty())
      s = c == 1 ? name : c == -1 ? "-" + name : c.get_str() + "*" + name;
    else if (c > 0)
      s += c == 1 ? " + " + name : " + " + c.get_str() + "*" + name;
    else
      s += c == -1 ? " - " + name : " - " + Rational(-c).get_str() + "*" + name;
  }
  if (s.empty()) return constant.get_str();
  if (constant > 0) s += " + " + constant.get_str();
  if (constant < 0) s += " - " + Rational(-constant).get_str();
  return s;
}

}  // namespace altgr
