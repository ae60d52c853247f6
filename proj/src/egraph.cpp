#include <algorithm>
#include <deque>
#include <set>

#include "altgr/theory.h"

namespace altgr {

void EGraph::grow(TermId t) {
  size_t need = static_cast<size_t>(t) + 1;
  if (repr_.size() >= need) return;
  repr_.resize(need, kNoTerm);
  members_.resize(need);
  uses_.resize(need);
  value_.resize(need, kNoTerm);
  adjacency_.resize(need);
}

std::string EGraph::signature(TermId t) const {
  const Term& term = (*bank_)[t];
  std::string key = term.sym + '|' + term.type->str();
  for (TermId a : term.args) key += ',' + std::to_string(find(a));
  return key;
}

void EGraph::table_set(const std::string& key, TermId t) {
  auto it = table_.find(key);
  Undo u{Undo::Kind::Table};
  u.key = key;
  u.old_entry = it == table_.end() ? kNoTerm : it->second;
  trail_.push_back(std::move(u));
  table_[key] = t;
}

void EGraph::rehash(TermId parent) {
  std::string key = signature(parent);
  auto it = table_.find(key);
  if (it != table_.end() && it->second != parent && signature(it->second) == key) {
    if (find(it->second) != find(parent))
      pending_.push_back({parent, it->second, true, {}});
    return;
  }
  if (it == table_.end() || it->second != parent) table_set(key, parent);
}

void EGraph::add(TermId t) {
  if (contains(t)) return;
  const Term& term = (*bank_)[t];
  for (TermId a : term.args) add(a);
  grow(t);
  repr_[t] = t;
  members_[t] = {t};
  uses_[t].clear();
  value_[t] = term.is_value() ? t : kNoTerm;
  terms_.push_back(t);
  std::set<TermId> reps;
  for (TermId a : term.args) reps.insert(find(a));
  for (TermId r : reps) uses_[r].push_back(t);
  Undo u{Undo::Kind::Register};
  u.a = t;
  trail_.push_back(std::move(u));
  if (!term.args.empty()) rehash(t);
}

void EGraph::merge(TermId a, TermId b, Tags reason) {
  pending_.push_back({a, b, false, std::move(reason)});
}

void EGraph::assert_diseq(TermId a, TermId b, Tag tag) {
  diseqs_.push_back({{a, b}, tag});
  trail_.push_back(Undo{Undo::Kind::Diseq});
}

void EGraph::unite(const Pending& p) {
  TermId ra = find(p.a), rb = find(p.b);
  int idx = static_cast<int>(edges_.size());
  edges_.push_back({p.a, p.b, p.congruence, p.tags});
  adjacency_[p.a].push_back(idx);
  adjacency_[p.b].push_back(idx);
  trail_.push_back(Undo{Undo::Kind::Edge});
  merged_.push_back({p.a, p.b});
  trail_.push_back(Undo{Undo::Kind::Merged});

  TermId small = ra, big = rb;
  if (members_[small].size() > members_[big].size()) std::swap(small, big);
  if (value_[small] != kNoTerm && value_[big] != kNoTerm && conflict_.empty())
    conflict_ = explain(value_[small], value_[big]);

  Undo u{Undo::Kind::Union};
  u.a = small;
  u.b = big;
  u.members_size = members_[big].size();
  u.uses_size = uses_[big].size();
  u.old_value = value_[big];
  trail_.push_back(std::move(u));

  for (TermId m : members_[small]) {
    repr_[m] = big;
    members_[big].push_back(m);
  }
  if (value_[big] == kNoTerm) value_[big] = value_[small];
  for (TermId parent : uses_[small]) {
    rehash(parent);
    uses_[big].push_back(parent);
  }
}

bool EGraph::propagate() {
  if (!conflict_.empty()) return false;
  for (size_t i = 0; i < pending_.size() && conflict_.empty(); ++i) {
    Pending p = pending_[i];
    if (find(p.a) == find(p.b)) continue;
    unite(p);
  }
  pending_.clear();
  if (!conflict_.empty()) return false;
  for (const auto& [pair, tag] : diseqs_) {
    if (find(pair.first) != find(pair.second)) continue;
    conflict_ = explain(pair.first, pair.second);
    tags_union(conflict_, Tags{tag});
    return false;
  }
  return true;
}

std::vector<std::pair<TermId, TermId>> EGraph::take_merged() {
  std::vector<std::pair<TermId, TermId>> out(merged_.begin() + merged_taken_, merged_.end());
  merged_taken_ = merged_.size();
  return out;
}

Tags EGraph::explain(TermId a, TermId b) const {
  Tags out;
  explain_into(a, b, edges_.size(), out);
  return out;
}

void EGraph::explain_into(TermId a, TermId b, size_t limit, Tags& out) const {
  if (a == b) return;
  // Breadth-first search over merge edges older than `limit`.
  std::unordered_map<TermId, int> via;  // term -> edge used to reach it
  std::deque<TermId> queue{a};
  via[a] = -1;
  while (!queue.empty() && !via.count(b)) {
    TermId t = queue.front();
    queue.pop_front();
    for (int idx : adjacency_[t]) {
      if (static_cast<size_t>(idx) >= limit) continue;
      const Edge& e = edges_[idx];
      TermId other = e.a == t ? e.b : e.a;
      if (via.count(other)) continue;
      via[other] = idx;
      queue.push_back(other);
    }
  }
  if (!via.count(b)) throw std::logic_error("explain: terms are not equal");
  for (TermId t = b; t != a;) {
    const Edge& e = edges_[via[t]];
    if (e.congruence) {
      const Term& p = (*bank_)[e.a];
      const Term& q = (*bank_)[e.b];
      for (size_t i = 0; i < p.args.size(); ++i)
        explain_into(p.args[i], q.args[i], static_cast<size_t>(via[t]), out);
    } else {
      tags_union(out, e.tags);
    }
    t = e.a == t ? e.b : e.a;
  }
}

std::vector<EqClass> EGraph::classes() const {
  std::vector<EqClass> out;
  for (TermId t : terms_) {
    if (repr_[t] != t) continue;
    EqClass c{t, members_[t]};
    std::sort(c.members.begin(), c.members.end());
    out.push_back(std::move(c));
  }
  std::sort(out.begin(), out.end(),
            [](const EqClass& x, const EqClass& y) { return x.members[0] < y.members[0]; });
  return out;
}

void EGraph::push() {
  marks_.push_back(trail_.size());
}

void EGraph::pop() {
  if (marks_.empty()) throw PopOnEmpty();
  size_t mark = marks_.back();
  marks_.pop_back();
  pending_.clear();
  conflict_.clear();
  while (trail_.size() > mark) {
    Undo u = std::move(trail_.back());
    trail_.pop_back();
    switch (u.kind) {
      case Undo::Kind::Register: {
        std::set<TermId> reps;
        for (TermId a : (*bank_)[u.a].args) reps.insert(find(a));
        for (TermId r : reps) uses_[r].pop_back();
        repr_[u.a] = kNoTerm;
        members_[u.a].clear();
        value_[u.a] = kNoTerm;
        terms_.pop_back();
        break;
      }
      case Undo::Kind::Union:
        for (size_t i = u.members_size; i < members_[u.b].size(); ++i) repr_[members_[u.b][i]] = u.a;
        members_[u.b].resize(u.members_size);
        uses_[u.b].resize(u.uses_size);
        value_[u.b] = u.old_value;
        break;
      case Undo::Kind::Table:
        if (u.old_entry == kNoTerm)
          table_.erase(u.key);
        else
          table_[u.key] = u.old_entry;
        break;
      case Undo::Kind::Edge: {
        const Edge& e = edges_.back();
        adjacency_[e.a].pop_back();
        adjacency_[e.b].pop_back();
        edges_.pop_back();
        break;
      }
      case Undo::Kind::Diseq: diseqs_.pop_back(); break;
      case Undo::Kind::Merged:
        merged_.pop_back();
        merged_taken_ = std::min(merged_taken_, merged_.size());
        break;
    }
  }
}

}  // namespace altgr
