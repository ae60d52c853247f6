#include <algorithm>
#include <set>

#include "altgr/theory.h"

namespace altgr {

Poly LinearArith::linearize(TermId id) const {
  const Term& t = (*bank_)[id];
  switch (t.kind) {
    case Term::Kind::Num: return Poly::constant_of(t.value);
    case Term::Kind::Add: {
      Poly p = linearize(t.args[0]);
      p.add(linearize(t.args[1]));
      return p;
    }
    case Term::Kind::Sub: {
      Poly p = linearize(t.args[0]);
      p.add(linearize(t.args[1]), -1);
      return p;
    }
    case Term::Kind::Mul: {
      const Term& l = (*bank_)[t.args[0]];
      const Term& r = (*bank_)[t.args[1]];
      if (l.kind == Term::Kind::Num) {
        Poly p = linearize(t.args[1]);
        p.scale(l.value);
        return p;
      }
      if (r.kind == Term::Kind::Num) {
        Poly p = linearize(t.args[0]);
        p.scale(r.value);
        return p;
      }
      return Poly::atom(id);  // nonlinear products are opaque
    }
    default: return Poly::atom(id);
  }
}

std::pair<Poly, Tags> LinearArith::normalize(const Poly& p) const {
  Poly out = Poly::constant_of(p.constant);
  Tags tags;
  for (const auto& [atom, c] : p.coeffs) {
    auto it = solved_.find(atom);
    if (it == solved_.end()) {
      out.add(Poly::atom(atom), c);
    } else {
      out.add(it->second.value, c);
      tags_union(tags, it->second.tags);
    }
  }
  return {out, tags};
}

void LinearArith::set_solved(TermId atom, std::optional<Solved> value) {
  auto it = solved_.find(atom);
  Undo u{atom, std::nullopt};
  if (it != solved_.end()) u.old = it->second;
  trail_.push_back(std::move(u));
  if (value)
    solved_[atom] = std::move(*value);
  else
    solved_.erase(atom);
}

Verdict LinearArith::assume_eq(const Poly& p, const Tags& tags) {
  auto [q, used] = normalize(p);
  tags_union(used, tags);
  if (q.is_constant())
    return q.constant == 0 ? Verdict::ok() : Verdict::conflict(std::move(used));

  // Pivot on the most recent atom: x = -(q - c*x) / c.
  auto [x, c] = *q.coeffs.rbegin();
  Poly value = q;
  value.coeffs.erase(x);
  value.scale(Rational(-1) / c);

  std::vector<std::pair<TermId, Solved>> updates;
  for (const auto& [y, s] : solved_) {
    Rational k = s.value.coeff(x);
    if (k == 0) continue;
    Solved next = s;
    next.value.coeffs.erase(x);
    next.value.add(value, k);
    tags_union(next.tags, used);
    updates.emplace_back(y, std::move(next));
  }
  for (auto& [y, s] : updates) set_solved(y, std::move(s));
  set_solved(x, Solved{std::move(value), std::move(used)});
  ++version_;
  return Verdict::ok();
}

void LinearArith::assume_ineq(const Poly& p, bool strict, const Tags& tags) {
  ineqs_.push_back({p, strict, tags});
}

namespace {

struct Row {
  Poly p;
  bool strict;
  Tags tags;
};

// Scales so that the first coefficient is +-1; keeps the direction.
void normalize_row(Row& r) {
  if (r.p.coeffs.empty()) return;
  Rational lead = r.p.coeffs.begin()->second;
  if (lead < 0) lead = -lead;
  r.p.scale(Rational(1) / lead);
}

bool row_false(const Row& r) {
  return r.p.constant > 0 || (r.strict && r.p.constant >= 0);
}

}  // namespace

Verdict LinearArith::check(size_t* derived_out) const {
  std::vector<Row> rows;
  for (const auto& in : ineqs_) {
    auto [q, tags] = normalize(in.p);
    tags_union(tags, in.tags);
    rows.push_back({std::move(q), in.strict, std::move(tags)});
  }
  size_t derived = 0;
  if (derived_out) *derived_out = 0;
  while (true) {
    std::vector<Row> live;
    for (auto& r : rows) {
      if (!r.p.is_constant()) {
        live.push_back(std::move(r));
        continue;
      }
      if (row_false(r)) return Verdict::conflict(std::move(r.tags));
    }
    if (live.empty()) return Verdict::ok();

    // Eliminate the atom with the fewest pairings.
    std::map<TermId, std::pair<size_t, size_t>> counts;
    for (const auto& r : live)
      for (const auto& [t, c] : r.p.coeffs) (c > 0 ? counts[t].first : counts[t].second)++;
    TermId x = kNoTerm;
    size_t best = 0;
    for (const auto& [t, pn] : counts) {
      size_t cost = pn.first * pn.second;
      if (x == kNoTerm || cost < best) {
        x = t;
        best = cost;
      }
    }
    std::vector<Row> pos, neg, next;
    for (auto& r : live) {
      Rational c = r.p.coeff(x);
      if (c > 0)
        pos.push_back(std::move(r));
      else if (c < 0)
        neg.push_back(std::move(r));
      else
        next.push_back(std::move(r));
    }
    std::set<std::pair<std::string, bool>> seen;
    for (auto& r : next) {
      normalize_row(r);
      seen.insert({r.p.key(), r.strict});
    }
    for (const auto& p : pos) {
      for (const auto& n : neg) {
        Rational a = p.p.coeff(x), b = -n.p.coeff(x);
        Row combo{p.p, p.strict || n.strict, p.tags};
        combo.p.scale(b);
        combo.p.add(n.p, a);
        combo.p.coeffs.erase(x);
        tags_union(combo.tags, n.tags);
        if (++derived > kFourierMotzkinCap) {
          if (derived_out) *derived_out = derived;
          return Verdict::ok();
        }
        normalize_row(combo);
        if (!seen.insert({combo.p.key(), combo.strict}).second) continue;
        next.push_back(std::move(combo));
      }
    }
    if (derived_out) *derived_out = derived;
    rows = std::move(next);
  }
}

void LinearArith::push() { marks_.push_back({trail_.size(), ineqs_.size()}); }

void LinearArith::pop() {
  if (marks_.empty()) throw PopOnEmpty();
  auto [trail_size, ineq_size] = marks_.back();
  marks_.pop_back();
  while (trail_.size() > trail_size) {
    Undo u = std::move(trail_.back());
    trail_.pop_back();
    if (u.old)
      solved_[u.atom] = std::move(*u.old);
    else
      solved_.erase(u.atom);
  }
  ineqs_.resize(ineq_size);
  ++version_;
}

}  // namespace altgr
