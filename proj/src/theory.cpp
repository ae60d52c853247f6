#include <unordered_map>

#include "altgr/theory.h"

namespace altgr {

TheoryState::TheoryState(TermBank& bank, Telemetry* telemetry)
    : bank_(&bank), telemetry_(telemetry), eg_(bank), arith_(bank) {
  eg_.add(bank.truth(true));
  eg_.add(bank.truth(false));
}

Verdict TheoryState::add_term(TermId t) {
  {
    ALTGR_TIME(telemetry_, Module::CC);
    size_t before = eg_.terms().size();
    eg_.add(t);
    const auto& all = eg_.terms();
    for (size_t i = before; i < all.size(); ++i)
      if (bank_->is_numeric(all[i])) numeric_.push_back(all[i]);
  }
  return settle();
}

Verdict TheoryState::settle() {
  while (true) {
    std::vector<std::pair<TermId, TermId>> merged;
    {
      ALTGR_TIME(telemetry_, Module::CC);
      if (!eg_.propagate()) return Verdict::conflict(eg_.conflict());
      merged = eg_.take_merged();
    }
    {
      ALTGR_TIME(telemetry_, Module::Arith);
      for (const auto& [a, b] : merged) {
        if (!bank_->is_numeric(a)) continue;
        Poly diff = arith_.linearize(a);
        diff.add(arith_.linearize(b), -1);
        Verdict v = arith_.assume_eq(diff, eg_.explain(a, b));
        if (!v.consistent) return v;
      }
    }
    size_t queued_before = grouped_count_;
    regroup();
    if (grouped_count_ == queued_before) return Verdict::ok();
  }
}

// Numeric terms with equal normal forms are merged in the e-graph.
void TheoryState::regroup() {
  ALTGR_TIME(telemetry_, Module::Arith);
  if (arith_.version() != groups_version_) {
    groups_.clear();
    groups_done_ = 0;
    groups_version_ = arith_.version();
  }
  for (; groups_done_ < numeric_.size(); ++groups_done_) {
    TermId t = numeric_[groups_done_];
    auto [q, tags] = arith_.normalize(arith_.linearize(t));
    auto [it, fresh] = groups_.emplace(q.key(), std::make_pair(t, tags));
    if (fresh || eg_.equal(t, it->second.first)) continue;
    tags_union(tags, it->second.second);
    eg_.merge(t, it->second.first, std::move(tags));
    ++grouped_count_;
  }
}

Verdict TheoryState::assume_eq(TermId a, TermId b, Tag tag) {
  if (Verdict v = add_term(a); !v.consistent) return v;
  if (Verdict v = add_term(b); !v.consistent) return v;
  {
    ALTGR_TIME(telemetry_, Module::CC);
    eg_.merge(a, b, Tags{tag});
  }
  return settle();
}

Verdict TheoryState::assume_neq(TermId a, TermId b, Tag tag) {
  if (Verdict v = add_term(a); !v.consistent) return v;
  if (Verdict v = add_term(b); !v.consistent) return v;
  {
    ALTGR_TIME(telemetry_, Module::CC);
    eg_.assert_diseq(a, b, tag);
  }
  return settle();
}

Verdict TheoryState::assume_le(TermId a, TermId b, bool strict, Tag tag) {
  if (Verdict v = add_term(a); !v.consistent) return v;
  if (Verdict v = add_term(b); !v.consistent) return v;
  ALTGR_TIME(telemetry_, Module::Arith);
  Poly diff = arith_.linearize(a);
  diff.add(arith_.linearize(b), -1);
  arith_.assume_ineq(diff, strict, Tags{tag});
  return Verdict::ok();
}

Verdict TheoryState::assume_pred(TermId p, bool value, Tag tag) {
  return assume_eq(p, bank_->truth(value), tag);
}

Verdict TheoryState::check() {
  if (Verdict v = settle(); !v.consistent) return v;
  ALTGR_TIME(telemetry_, Module::Arith);
  return arith_.check();
}

Poly TheoryState::canon(TermId t) const { return arith_.normalize(arith_.linearize(t)).first; }

bool TheoryState::equal(TermId a, TermId b) const {
  return eg_.contains(a) && eg_.contains(b) && eg_.equal(a, b);
}

void TheoryState::push() {
  eg_.push();
  arith_.push();
  numeric_marks_.push_back(numeric_.size());
}

void TheoryState::pop() {
  if (numeric_marks_.empty()) throw PopOnEmpty();
  eg_.pop();
  arith_.pop();
  numeric_.resize(numeric_marks_.back());
  numeric_marks_.pop_back();
  groups_version_ = static_cast<size_t>(-1);
}

}  // namespace altgr
