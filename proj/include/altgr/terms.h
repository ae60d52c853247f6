#pragma once

// Hash-consed ground terms and linear polynomials over them.  Every solver
// component refers to ground terms by TermId; structurally equal terms get
// the same id.

#include <cstdint>
#include <map>
#include <string>
#include <unordered_map>
#include <vector>

#include "altgr/ast.h"

namespace altgr {

using TermId = std::int32_t;
inline constexpr TermId kNoTerm = -1;

struct Term {
  enum class Kind { App, Num, Add, Sub, Mul, Const };

  Kind kind = Kind::App;
  std::string sym;  // symbol, arithmetic operator, numeral or constant name
  std::vector<TermId> args;
  TypeRef type;
  Rational value;  // Num only

  /// Interpreted constants: numerals, `true`/`false`.  Distinct values are
  /// never equal.
  bool is_value() const { return kind == Kind::Num || kind == Kind::Const; }
  bool is_arith() const { return kind == Kind::Add || kind == Kind::Sub || kind == Kind::Mul; }
};

/// Symbol under which a term or pattern node of operator `op` is indexed.
std::string op_symbol(const Expr& e);

class TermBank {
 public:
  TermBank();

  TermId app(const std::string& sym, std::vector<TermId> args, TypeRef type);
  TermId num(const Rational& value, TypeRef type = Type::int_type());
  TermId arith(Term::Kind kind, TermId lhs, TermId rhs);
  /// Propositional constants (the formula sort), used as the classes of
  /// predicate atoms assigned true or false.
  TermId truth(bool value) const { return value ? top_ : bottom_; }

  /// Interns a ground term, or a ground predicate application.  Throws on
  /// variables and connectives.
  TermId from_expr(const ExprRef& e);
  ExprRef to_expr(TermId t) const;
  std::string str(TermId t) const;

  const Term& operator[](TermId t) const { return terms_[t]; }
  size_t size() const { return terms_.size(); }
  bool is_numeric(TermId t) const { return terms_[t].type->is_numeric(); }

 private:
  TermId intern(Term term);

  std::vector<Term> terms_;
  std::unordered_map<std::string, TermId> index_;
  TermId top_ = kNoTerm;
  TermId bottom_ = kNoTerm;
};

/*------------------------------------------------------------------------*/

using Tag = int;
/// Sorted, duplicate-free set of assumption tags.
using Tags = std::vector<Tag>;

void tags_union(Tags& into, const Tags& other);

/// constant + sum of coefficient * atom, no zero coefficients.
struct Poly {
  Rational constant;
  std::map<TermId, Rational> coeffs;

  static Poly atom(TermId t);
  static Poly constant_of(const Rational& c);

  bool is_constant() const { return coeffs.empty(); }
  void add(const Poly& other, const Rational& factor = 1);
  void scale(const Rational& factor);
  Rational coeff(TermId t) const;
  std::string key() const;
  std::string str(const TermBank& bank) const;

  friend bool operator==(const Poly&, const Poly&) = default;
};

}  // namespace altgr
