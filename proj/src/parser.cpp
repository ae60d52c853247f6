#include <cctype>
#include <sstream>

#include "altgr/frontend.h"

namespace altgr::frontend {

std::string FrontendError::located() const {
  std::ostringstream os;
  os << span_.start_line << ":" << span_.start_col << ": " << what();
  return os.str();
}

namespace {

std::string join_names(const std::vector<std::string>& names) {
  std::string out;
  for (const auto& n : names) {
    if (!out.empty()) out += ", ";
    out += n;
  }
  return out;
}

}  // namespace

CoverageError::CoverageError(Span span, std::vector<std::string> uncovered)
    : TypeError(span, "trigger does not cover " + join_names(uncovered)),
      uncovered_(std::move(uncovered)) {}

namespace {

enum class Tok { Ident, TyVar, Int, Punct, End };

struct Token {
  Tok kind = Tok::End;
  std::string text;
  Span span;
};

bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool ident_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '\'';
}

class Lexer {
 public:
  explicit Lexer(std::string_view text) : text_(text) {}

  std::vector<Token> run() {
    std::vector<Token> out;
    for (;;) {
      skip_blank();
      Token t;
      t.span.start_line = line_;
      t.span.start_col = col_;
      if (pos_ >= text_.size()) {
        t.kind = Tok::End;
        t.span.end_line = line_;
        t.span.end_col = col_;
        out.push_back(t);
        return out;
      }
      char c = text_[pos_];
      if (ident_start(c)) {
        t.kind = Tok::Ident;
        while (pos_ < text_.size() && ident_char(text_[pos_])) t.text += advance();
      } else if (c == '\'' && pos_ + 1 < text_.size() && ident_start(text_[pos_ + 1])) {
        t.kind = Tok::TyVar;
        advance();
        while (pos_ < text_.size() && ident_char(text_[pos_]) && text_[pos_] != '\'')
          t.text += advance();
      } else if (std::isdigit(static_cast<unsigned char>(c))) {
        t.kind = Tok::Int;
        while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_])))
          t.text += advance();
      } else {
        t.kind = Tok::Punct;
        static const char* multi[] = {"<->", "->", "<>", "<=", ">="};
        bool found = false;
        for (const char* m : multi) {
          std::string_view mv(m);
          if (text_.substr(pos_, mv.size()) == mv) {
            for (size_t i = 0; i < mv.size(); ++i) t.text += advance();
            found = true;
            break;
          }
        }
        if (!found) {
          static const std::string singles = "()[],:.|=<>+-*";
          if (singles.find(c) == std::string::npos) {
            Span s{line_, col_, line_, col_ + 1};
            throw ParseError(s, std::string("unexpected character '") + c + "'");
          }
          t.text += advance();
        }
      }
      t.span.end_line = line_;
      t.span.end_col = col_;
      out.push_back(std::move(t));
    }
  }

 private:
  char advance() {
    char c = text_[pos_++];
    if (c == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    return c;
  }

  void skip_blank() {
    for (;;) {
      while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_])))
        advance();
      if (text_.substr(pos_, 2) != "(*") return;
      Span open{line_, col_, line_, col_ + 2};
      advance();
      advance();
      int depth = 1;
      while (depth > 0) {
        if (pos_ >= text_.size()) throw ParseError(open, "unterminated comment");
        if (text_.substr(pos_, 2) == "(*") {
          advance();
          advance();
          ++depth;
        } else if (text_.substr(pos_, 2) == "*)") {
          advance();
          advance();
          --depth;
        } else {
          advance();
        }
      }
    }
  }

  std::string_view text_;
  size_t pos_ = 0;
  int line_ = 1;
  int col_ = 1;
};

bool is_keyword(const std::string& s) {
  static const char* kws[] = {"type", "logic", "axiom", "goal", "forall", "exists", "and",
                              "or",   "not",   "true",  "false", "prop", "int", "real", "bool"};
  for (const char* k : kws)
    if (s == k) return true;
  return false;
}

Span cover(const Span& a, const Span& b) {
  return Span{a.start_line, a.start_col, b.end_line, b.end_col};
}

class Parser {
 public:
  explicit Parser(std::vector<Token> toks) : toks_(std::move(toks)) {}

  std::vector<RawDecl> decls() {
    std::vector<RawDecl> out;
    while (peek().kind != Tok::End) out.push_back(decl());
    return out;
  }

  std::vector<std::vector<RawExpr>> trigger_fragment() {
    bool bracketed = accept_punct("[");
    auto trigs = trigger_list();
    if (bracketed) expect_punct("]");
    expect_end();
    return trigs;
  }

  std::vector<RawExpr> term_list_fragment() {
    std::vector<RawExpr> out;
    out.push_back(expr());
    while (accept_punct(",")) out.push_back(expr());
    expect_end();
    return out;
  }

 private:
  const Token& peek(size_t k = 0) const {
    size_t i = std::min(pos_ + k, toks_.size() - 1);
    return toks_[i];
  }
  const Token& prev() const { return toks_[pos_ - 1]; }
  Token next() { return toks_[pos_ < toks_.size() - 1 ? pos_++ : pos_]; }

  bool is_punct(const char* p, size_t k = 0) const {
    return peek(k).kind == Tok::Punct && peek(k).text == p;
  }
  bool is_kw(const char* kw, size_t k = 0) const {
    return peek(k).kind == Tok::Ident && peek(k).text == kw;
  }
  bool accept_punct(const char* p) {
    if (!is_punct(p)) return false;
    next();
    return true;
  }
  bool accept_kw(const char* kw) {
    if (!is_kw(kw)) return false;
    next();
    return true;
  }

  [[noreturn]] void fail(const std::string& what) const {
    const Token& t = peek();
    std::string found = t.kind == Tok::End ? "end of input" : "'" + t.text + "'";
    throw ParseError(t.span, "expected " + what + ", found " + found);
  }

  void expect_punct(const char* p) {
    if (!accept_punct(p)) fail(std::string("'") + p + "'");
  }
  void expect_end() {
    if (peek().kind != Tok::End) fail("end of input");
  }

  std::string ident(const char* what = "identifier") {
    if (peek().kind != Tok::Ident || is_keyword(peek().text)) fail(what);
    return next().text;
  }

  RawDecl decl() {
    RawDecl d;
    Span start = peek().span;
    if (accept_kw("type")) {
      d.kind = DeclKind::Type;
      if (peek().kind == Tok::TyVar) {
        d.type_params.push_back(next().text);
      } else if (is_punct("(") && peek(1).kind == Tok::TyVar) {
        next();
        d.type_params.push_back(next().text);
        while (accept_punct(",")) {
          if (peek().kind != Tok::TyVar) fail("type variable");
          d.type_params.push_back(next().text);
        }
        expect_punct(")");
      }
      d.names.push_back(ident("type name"));
    } else if (accept_kw("logic")) {
      d.kind = DeclKind::Logic;
      d.names.push_back(ident("symbol name"));
      while (accept_punct(",")) d.names.push_back(ident("symbol name"));
      expect_punct(":");
      RawType first = type_or_prop();
      if (is_punct(",") || is_punct("->")) {
        d.arg_types.push_back(first);
        while (accept_punct(",")) d.arg_types.push_back(type());
        expect_punct("->");
        d.result = type_or_prop();
      } else {
        d.result = first;
      }
      for (const auto& a : d.arg_types)
        if (a.kind == RawType::Kind::Prop) throw ParseError(a.span, "prop is not an argument type");
    } else if (is_kw("axiom") || is_kw("goal")) {
      d.kind = next().text == "axiom" ? DeclKind::Axiom : DeclKind::Goal;
      d.names.push_back(ident("declaration name"));
      expect_punct(":");
      d.formula = expr();
    } else {
      fail("declaration");
    }
    d.span = cover(start, prev().span);
    return d;
  }

  RawType type_or_prop() {
    if (is_kw("prop")) {
      RawType t;
      t.kind = RawType::Kind::Prop;
      t.span = next().span;
      return t;
    }
    return type();
  }

  RawType type() {
    std::vector<RawType> group;
    Span start = peek().span;
    if (accept_punct("(")) {
      group.push_back(type());
      while (accept_punct(",")) group.push_back(type());
      expect_punct(")");
    } else {
      group.push_back(atomic_type());
    }
    RawType t;
    if (group.size() == 1) {
      t = group.front();
    } else {
      if (peek().kind != Tok::Ident || is_keyword(peek().text)) fail("type constructor");
    }
    while (peek().kind == Tok::Ident && !is_keyword(peek().text)) {
      RawType app;
      app.kind = RawType::Kind::Ctor;
      app.name = next().text;
      app.args = group.size() == 1 ? std::vector<RawType>{t} : group;
      app.span = cover(start, prev().span);
      group = {app};
      t = app;
    }
    return t;
  }

  RawType atomic_type() {
    RawType t;
    t.span = peek().span;
    if (peek().kind == Tok::TyVar) {
      t.kind = RawType::Kind::Var;
      t.name = next().text;
    } else if (accept_kw("int")) {
      t.kind = RawType::Kind::Int;
    } else if (accept_kw("real")) {
      t.kind = RawType::Kind::Real;
    } else if (accept_kw("bool")) {
      t.kind = RawType::Kind::Bool;
    } else if (peek().kind == Tok::Ident && !is_keyword(peek().text)) {
      t.kind = RawType::Kind::Ctor;
      t.name = next().text;
    } else {
      fail("type");
    }
    return t;
  }

  // Precedence, loosest first: quantifiers and <->, ->, or, and, not,
  // comparisons, + -, *, unary minus, primaries.
  RawExpr expr() { return iff(); }

  RawExpr iff() {
    RawExpr lhs = implies();
    while (is_punct("<->")) {
      next();
      RawExpr rhs = implies();
      lhs = binary(RawKind::Iff, "<->", std::move(lhs), std::move(rhs));
    }
    return lhs;
  }

  RawExpr implies() {
    RawExpr lhs = disj();
    if (is_punct("->")) {
      next();
      RawExpr rhs = implies();
      return binary(RawKind::Implies, "->", std::move(lhs), std::move(rhs));
    }
    return lhs;
  }

  RawExpr disj() {
    RawExpr first = conj();
    if (!is_kw("or")) return first;
    RawExpr e;
    e.kind = RawKind::Or;
    e.text = "or";
    e.args.push_back(std::move(first));
    while (accept_kw("or")) e.args.push_back(conj());
    e.span = cover(e.args.front().span, e.args.back().span);
    return e;
  }

  RawExpr conj() {
    RawExpr first = negation();
    if (!is_kw("and")) return first;
    RawExpr e;
    e.kind = RawKind::And;
    e.text = "and";
    e.args.push_back(std::move(first));
    while (accept_kw("and")) e.args.push_back(negation());
    e.span = cover(e.args.front().span, e.args.back().span);
    return e;
  }

  RawExpr negation() {
    if (is_kw("not")) {
      Span start = next().span;
      RawExpr e;
      e.kind = RawKind::Not;
      e.text = "not";
      e.args.push_back(negation());
      e.span = cover(start, e.args.back().span);
      return e;
    }
    return comparison();
  }

  RawExpr comparison() {
    RawExpr lhs = additive();
    static const char* ops[] = {"=", "<>", "<=", ">=", "<", ">"};
    for (const char* op : ops) {
      if (is_punct(op)) {
        next();
        RawExpr rhs = additive();
        RawExpr e = binary(RawKind::Cmp, op, std::move(lhs), std::move(rhs));
        for (const char* again : ops)
          if (is_punct(again)) fail("operator (comparisons do not chain)");
        return e;
      }
    }
    return lhs;
  }

  RawExpr additive() {
    RawExpr lhs = multiplicative();
    while (is_punct("+") || is_punct("-")) {
      std::string op = next().text;
      RawExpr rhs = multiplicative();
      lhs = binary(RawKind::Arith, op, std::move(lhs), std::move(rhs));
    }
    return lhs;
  }

  RawExpr multiplicative() {
    RawExpr lhs = unary();
    while (is_punct("*")) {
      next();
      RawExpr rhs = unary();
      lhs = binary(RawKind::Arith, "*", std::move(lhs), std::move(rhs));
    }
    return lhs;
  }

  RawExpr unary() {
    if (is_punct("-")) {
      Span start = next().span;
      RawExpr operand = unary();
      RawExpr e;
      e.kind = RawKind::Neg;
      e.text = "-";
      e.span = cover(start, operand.span);
      e.args.push_back(std::move(operand));
      return e;
    }
    return primary();
  }

  RawExpr primary() {
    const Token& t = peek();
    RawExpr e;
    e.span = t.span;
    if (t.kind == Tok::Int) {
      e.kind = RawKind::Int;
      e.text = t.text;
      e.value = Integer(t.text);
      next();
      return e;
    }
    if (is_kw("true") || is_kw("false")) {
      e.kind = t.text == "true" ? RawKind::True : RawKind::False;
      e.text = t.text;
      next();
      return e;
    }
    if (is_kw("forall") || is_kw("exists")) return quantifier();
    if (is_punct("(")) {
      Span start = next().span;
      RawExpr inner = expr();
      expect_punct(")");
      inner.span = cover(start, prev().span);
      return inner;
    }
    if (t.kind == Tok::Ident && !is_keyword(t.text)) {
      e.kind = RawKind::Ident;
      e.text = next().text;
      if (accept_punct("(")) {
        e.applied = true;
        e.args.push_back(expr());
        while (accept_punct(",")) e.args.push_back(expr());
        expect_punct(")");
        e.span = cover(e.span, prev().span);
      }
      return e;
    }
    fail("formula or term");
  }

  RawExpr quantifier() {
    RawExpr e;
    Span start = peek().span;
    e.kind = next().text == "forall" ? RawKind::Forall : RawKind::Exists;
    e.text = e.kind == RawKind::Forall ? "forall" : "exists";
    for (;;) {
      std::vector<std::pair<std::string, Span>> names;
      Span ns = peek().span;
      names.emplace_back(ident("bound variable"), ns);
      while (accept_punct(",")) {
        ns = peek().span;
        names.emplace_back(ident("bound variable"), ns);
      }
      expect_punct(":");
      RawType ty = type();
      for (auto& [n, sp] : names) e.binders.push_back(RawBinder{n, ty, sp});
      if (!accept_punct(",")) break;
    }
    if (accept_punct("[")) {
      e.triggers = trigger_list();
      expect_punct("]");
    }
    expect_punct(".");
    e.args.push_back(expr());
    e.span = cover(start, e.args.back().span);
    return e;
  }

  std::vector<std::vector<RawExpr>> trigger_list() {
    std::vector<std::vector<RawExpr>> out;
    for (;;) {
      std::vector<RawExpr> pats;
      pats.push_back(expr());
      while (accept_punct(",")) pats.push_back(expr());
      out.push_back(std::move(pats));
      if (!accept_punct("|")) break;
    }
    return out;
  }

  static RawExpr binary(RawKind k, std::string op, RawExpr lhs, RawExpr rhs) {
    RawExpr e;
    e.kind = k;
    e.text = std::move(op);
    e.span = cover(lhs.span, rhs.span);
    e.args.push_back(std::move(lhs));
    e.args.push_back(std::move(rhs));
    return e;
  }

  std::vector<Token> toks_;
  size_t pos_ = 0;
};

}  // namespace

std::vector<RawDecl> parse(std::string_view text) {
  Parser p(Lexer(text).run());
  return p.decls();
}

// Shared with the fragment entry points in typecheck.cpp.
std::vector<std::vector<RawExpr>> parse_trigger_text(std::string_view text) {
  Parser p(Lexer(text).run());
  return p.trigger_fragment();
}

std::vector<RawExpr> parse_term_text(std::string_view text) {
  Parser p(Lexer(text).run());
  return p.term_list_fragment();
}

}  // namespace altgr::frontend
