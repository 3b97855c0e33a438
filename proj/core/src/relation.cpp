#include "wnucsp/relation.hpp"

#include <algorithm>

namespace wnucsp {

Relation::Relation(std::vector<AlgebraPtr> coords, std::vector<Tuple> tuples)
    : coords_(std::move(coords)), tuples_(std::move(tuples)) {
  for (const AlgebraPtr& a : coords_) {
    if (!a) throw ArgumentError("relation coordinate without an algebra");
  }
  for (const Tuple& t : tuples_) {
    if (t.size() != coords_.size()) throw ArgumentError("tuple has wrong arity");
    for (std::size_t i = 0; i < t.size(); ++i) {
      if (t[i] >= coords_[i]->size()) throw ArgumentError("tuple entry out of range");
    }
  }
  std::sort(tuples_.begin(), tuples_.end());
  tuples_.erase(std::unique(tuples_.begin(), tuples_.end()), tuples_.end());
}

Relation Relation::full(std::vector<AlgebraPtr> coords) {
  std::vector<ElementSet> carriers;
  for (const AlgebraPtr& a : coords) carriers.push_back(a->carrier());
  return full(std::move(coords), carriers);
}

Relation Relation::full(std::vector<AlgebraPtr> coords, std::span<const ElementSet> carriers) {
  if (carriers.size() != coords.size()) throw ArgumentError("carrier count mismatch");
  std::vector<Tuple> tuples{Tuple{}};
  for (ElementSet c : carriers) {
    std::vector<Tuple> next;
    for (const Tuple& t : tuples) {
      for (Element a : c.elements()) {
        Tuple u = t;
        u.push_back(a);
        next.push_back(std::move(u));
      }
    }
    tuples = std::move(next);
  }
  return Relation(std::move(coords), std::move(tuples));
}

std::vector<const Algebra*> Relation::coord_ptrs() const {
  std::vector<const Algebra*> out;
  for (const AlgebraPtr& a : coords_) out.push_back(a.get());
  return out;
}

bool Relation::contains(std::span<const Element> t) const {
  return std::binary_search(tuples_.begin(), tuples_.end(), t,
                            [](const auto& x, const auto& y) {
                              return std::lexicographical_compare(x.begin(), x.end(),
                                                                  y.begin(), y.end());
                            });
}

ElementSet Relation::values_at(std::size_t i) const {
  ElementSet s;
  for (const Tuple& t : tuples_) s.insert(t[i]);
  return s;
}

bool Relation::operator==(const Relation& o) const {
  if (coords_.size() != o.coords_.size() || tuples_ != o.tuples_) return false;
  for (std::size_t i = 0; i < coords_.size(); ++i) {
    if (coords_[i] != o.coords_[i] && !(*coords_[i] == *o.coords_[i])) return false;
  }
  return true;
}

std::size_t product_size(std::span<const ElementSet> carriers) {
  std::size_t s = 1;
  for (ElementSet c : carriers) s *= c.size();
  return s;
}

Relation restrict(const Relation& rel, std::span<const ElementSet> carriers) {
  if (carriers.size() != rel.arity()) throw ArgumentError("carrier count mismatch");
  std::vector<Tuple> kept;
  for (const Tuple& t : rel.tuples()) {
    bool inside = true;
    for (std::size_t i = 0; i < t.size() && inside; ++i) inside = carriers[i].contains(t[i]);
    if (inside) kept.push_back(t);
  }
  return Relation(rel.coords(), std::move(kept));
}

Relation project(const Relation& rel, std::span<const std::size_t> indices) {
  if (indices.empty()) throw ArgumentError("projection onto no coordinates");
  std::vector<bool> seen(rel.arity(), false);
  std::vector<AlgebraPtr> coords;
  for (std::size_t i : indices) {
    if (i >= rel.arity()) throw ArgumentError("projection index out of range");
    if (seen[i]) throw ArgumentError("repeated projection index");
    seen[i] = true;
    coords.push_back(rel.coords()[i]);
  }
  std::vector<Tuple> tuples;
  tuples.reserve(rel.size());
  for (const Tuple& t : rel.tuples()) {
    Tuple u;
    u.reserve(indices.size());
    for (std::size_t i : indices) u.push_back(t[i]);
    tuples.push_back(std::move(u));
  }
  return Relation(std::move(coords), std::move(tuples));
}

Relation permute(const Relation& rel, std::span<const std::size_t> order) {
  if (order.size() != rel.arity()) throw ArgumentError("permutation has wrong length");
  return project(rel, order);
}

Relation factorize(const Relation& rel, std::span<const Congruence> congs) {
  if (congs.size() != rel.arity()) throw ArgumentError("congruence count mismatch");
  std::vector<AlgebraPtr> coords;
  for (std::size_t i = 0; i < congs.size(); ++i) {
    if (!is_compatible(*rel.coords()[i], congs[i])) {
      throw InvariantError("coordinate " + std::to_string(i) + ": " + congs[i].to_string() +
                           " is not a congruence");
    }
    coords.push_back(quotient_algebra(*rel.coords()[i], congs[i]).algebra);
  }
  std::vector<Tuple> tuples;
  for (const Tuple& t : rel.tuples()) {
    Tuple u(t.size());
    for (std::size_t i = 0; i < t.size(); ++i) u[i] = congs[i].block_of(t[i]);
    tuples.push_back(std::move(u));
  }
  return Relation(std::move(coords), std::move(tuples));
}

bool is_subdirect(const Relation& rel) {
  for (std::size_t i = 0; i < rel.arity(); ++i) {
    if (rel.values_at(i) != rel.coords()[i]->carrier()) return false;
  }
  return true;
}

bool is_subdirect(const Relation& rel, std::span<const ElementSet> carriers) {
  if (carriers.size() != rel.arity()) throw ArgumentError("carrier count mismatch");
  for (std::size_t i = 0; i < rel.arity(); ++i) {
    if (rel.values_at(i) != carriers[i]) return false;
  }
  return true;
}

bool is_invariant(const Relation& rel) {
  const std::vector<const Algebra*> ptrs = rel.coord_ptrs();
  return apply_coordinatewise(ptrs, rel.tuples()).size() == rel.size();
}

Relation invariant_closure(std::vector<AlgebraPtr> coords, std::vector<Tuple> tuples) {
  std::vector<const Algebra*> ptrs;
  for (const AlgebraPtr& a : coords) ptrs.push_back(a.get());
  GeneratedSubuniverse gen = generate_subuniverse(ptrs, tuples);
  return Relation(std::move(coords), std::move(gen.tuples));
}

bool is_dummy(const Relation& rel, std::size_t i, std::span<const ElementSet> carriers) {
  if (i >= rel.arity()) throw ArgumentError("coordinate out of range");
  if (rel.arity() == 1) return rel.size() == carriers[0].size();
  std::vector<std::size_t> others;
  for (std::size_t j = 0; j < rel.arity(); ++j) {
    if (j != i) others.push_back(j);
  }
  return rel.size() == project(rel, others).size() * carriers[i].size();
}

ReducedRelation drop_dummies(const Relation& rel, std::span<const ElementSet> carriers) {
  std::vector<std::size_t> kept(rel.arity());
  for (std::size_t i = 0; i < kept.size(); ++i) kept[i] = i;
  Relation current = rel;
  std::vector<ElementSet> cur_carriers(carriers.begin(), carriers.end());
  std::size_t i = 0;
  while (i < kept.size()) {
    if (!current.empty() && is_dummy(current, i, cur_carriers)) {
      std::vector<std::size_t> others;
      for (std::size_t j = 0; j < kept.size(); ++j) {
        if (j != i) others.push_back(j);
      }
      kept.erase(kept.begin() + static_cast<std::ptrdiff_t>(i));
      cur_carriers.erase(cur_carriers.begin() + static_cast<std::ptrdiff_t>(i));
      if (others.empty()) {
        return {{}, Relation({}, {Tuple{}})};
      }
      current = project(current, others);
    } else {
      ++i;
    }
  }
  return {std::move(kept), std::move(current)};
}

// ============================================================================
// Weaker relations
// ============================================================================

namespace {

std::vector<std::vector<std::size_t>> subsets_by_size(std::size_t n) {
  std::vector<std::vector<std::size_t>> out;
  for (std::size_t k = 1; k <= n; ++k) {
    std::vector<bool> pick(n, false);
    std::fill(pick.begin(), pick.begin() + static_cast<std::ptrdiff_t>(k), true);
    do {
      std::vector<std::size_t> s;
      for (std::size_t i = 0; i < n; ++i) {
        if (pick[i]) s.push_back(i);
      }
      out.push_back(std::move(s));
    } while (std::prev_permutation(pick.begin(), pick.end()));
  }
  return out;
}

}  // namespace

WeakerRelationEnumerator::WeakerRelationEnumerator(Relation rel, std::vector<ElementSet> carriers,
                                                   std::size_t cap)
    : rel_(restrict(rel, carriers)),
      carriers_(std::move(carriers)),
      cap_(cap),
      subsets_(subsets_by_size(rel_.arity())) {}

std::optional<WeakerRelation> WeakerRelationEnumerator::next() {
  while (pending_.empty() && next_subset_ < subsets_.size()) fill_next_subset();
  if (pending_.empty()) return std::nullopt;
  WeakerRelation out = std::move(pending_.front());
  pending_.pop_front();
  return out;
}

void WeakerRelationEnumerator::fill_next_subset() {
  const std::vector<std::size_t>& ys = subsets_[next_subset_++];
  std::vector<ElementSet> sub_carriers;
  std::size_t rest = 1;
  for (std::size_t i = 0, k = 0; i < rel_.arity(); ++i) {
    if (k < ys.size() && ys[k] == i) {
      sub_carriers.push_back(carriers_[i]);
      ++k;
    } else {
      rest *= carriers_[i].size();
    }
  }
  const Relation base = project(rel_, ys);
  const std::vector<const Algebra*> ptrs = base.coord_ptrs();
  const Relation space = Relation::full(base.coords(), sub_carriers);

  std::set<std::vector<Tuple>> visited;
  std::deque<std::vector<Tuple>> queue;
  auto visit = [&](std::vector<Tuple> tuples) {
    if (visited.size() >= cap_) {
      complete_ = false;
      return;
    }
    if (visited.insert(tuples).second) queue.push_back(std::move(tuples));
  };
  visit(generate_subuniverse(ptrs, base.tuples()).tuples);

  std::vector<WeakerRelation> found;
  while (!queue.empty()) {
    std::vector<Tuple> cur = std::move(queue.front());
    queue.pop_front();
    Relation sigma(base.coords(), cur);
    const bool strict = rel_.size() != sigma.size() * rest;
    if (strict) {
      bool dummy = false;
      for (std::size_t i = 0; i < sigma.arity() && !dummy; ++i) {
        dummy = is_dummy(sigma, i, sub_carriers);
      }
      if (!dummy) found.push_back({ys, sigma});
    }
    for (const Tuple& t : space.tuples()) {
      if (sigma.contains(t)) continue;
      std::vector<Tuple> gens = cur;
      gens.push_back(t);
      visit(generate_subuniverse(ptrs, gens).tuples);
    }
  }
  std::sort(found.begin(), found.end(), [](const WeakerRelation& a, const WeakerRelation& b) {
    if (a.relation.size() != b.relation.size()) return a.relation.size() < b.relation.size();
    return a.relation.tuples() < b.relation.tuples();
  });
  for (WeakerRelation& w : found) pending_.push_back(std::move(w));
}

WeakerRelations weaker_relations(const Relation& rel, std::size_t cap) {
  std::vector<ElementSet> carriers;
  for (const AlgebraPtr& a : rel.coords()) carriers.push_back(a->carrier());
  return weaker_relations(rel, carriers, cap);
}

WeakerRelations weaker_relations(const Relation& rel, std::span<const ElementSet> carriers,
                                 std::size_t cap) {
  WeakerRelationEnumerator e(rel, std::vector<ElementSet>(carriers.begin(), carriers.end()), cap);
  WeakerRelations out;
  while (auto w = e.next()) out.relations.push_back(std::move(*w));
  out.complete = e.complete();
  return out;
}

}  // namespace wnucsp
