#pragma once

#include <cstddef>
#include <deque>
#include <optional>
#include <set>
#include <span>
#include <vector>

#include "wnucsp/algebra.hpp"

namespace wnucsp {

// A finite relation over the carriers of its coordinate algebras, stored as a
// sorted duplicate-free tuple list.
class Relation {
 public:
  // Throws ArgumentError on tuples of the wrong length or out-of-range
  // entries.  Tuples are sorted and deduplicated.
  Relation(std::vector<AlgebraPtr> coords, std::vector<Tuple> tuples);

  // Every tuple of the product of `carriers` (full carriers if omitted).
  static Relation full(std::vector<AlgebraPtr> coords);
  static Relation full(std::vector<AlgebraPtr> coords, std::span<const ElementSet> carriers);

  std::size_t arity() const { return coords_.size(); }
  const std::vector<AlgebraPtr>& coords() const { return coords_; }
  std::vector<const Algebra*> coord_ptrs() const;
  const std::vector<Tuple>& tuples() const { return tuples_; }
  std::size_t size() const { return tuples_.size(); }
  bool empty() const { return tuples_.empty(); }
  bool contains(std::span<const Element> t) const;
  // Set of values taken by coordinate i.
  ElementSet values_at(std::size_t i) const;

  bool operator==(const Relation& o) const;

 private:
  std::vector<AlgebraPtr> coords_;
  std::vector<Tuple> tuples_;
};

// Product of `carriers` restricted to indices; the number of tuples.
std::size_t product_size(std::span<const ElementSet> carriers);

// Restriction to tuples whose entries lie in the given per-coordinate sets.
Relation restrict(const Relation& rel, std::span<const ElementSet> carriers);

// Throws ArgumentError on an empty, repeated or out-of-range index list.
Relation project(const Relation& rel, std::span<const std::size_t> indices);

// Tuples reordered so that new coordinate j is old coordinate order[j].
Relation permute(const Relation& rel, std::span<const std::size_t> order);

// (E_1..E_n) belongs to the result iff some tuple of rel meets every E_i.
// Throws InvariantError when a congruence is incompatible with its algebra.
Relation factorize(const Relation& rel, std::span<const Congruence> congs);

bool is_subdirect(const Relation& rel);
bool is_subdirect(const Relation& rel, std::span<const ElementSet> carriers);

// Closed under coordinatewise w.
bool is_invariant(const Relation& rel);

// Least invariant relation containing `tuples`.
Relation invariant_closure(std::vector<AlgebraPtr> coords, std::vector<Tuple> tuples);

// Coordinate i is dummy iff rel = (projection onto the others) x carriers[i].
bool is_dummy(const Relation& rel, std::size_t i, std::span<const ElementSet> carriers);

struct ReducedRelation {
  std::vector<std::size_t> kept;  // surviving coordinates, increasing
  Relation relation;              // projection onto `kept`
};

// Removes dummy coordinates one at a time, least index first.  Removing a
// dummy coordinate never makes another coordinate non-dummy, so the result has
// no dummy coordinate and represents the same constraint.
ReducedRelation drop_dummies(const Relation& rel, std::span<const ElementSet> carriers);

// ============================================================================
// Weaker relations
// ============================================================================

struct WeakerRelation {
  std::vector<std::size_t> coords;  // subset of the relation's coordinates
  Relation relation;                // invariant, dummy-free, strictly weaker
};

// Lazy enumeration of every (Y, sigma) with Y a nonempty subset of the
// coordinates, sigma an invariant relation on the carriers of Y containing
// the projection of `rel` onto Y, without dummy coordinates, and strictly
// weaker than `rel`.  Subsets come in order of size then lexicographically;
// within a subset relations are ordered by size then tuples.
class WeakerRelationEnumerator {
 public:
  // `cap` bounds the number of invariant relations visited per subset.
  WeakerRelationEnumerator(Relation rel, std::vector<ElementSet> carriers,
                           std::size_t cap = 100000);

  std::optional<WeakerRelation> next();
  // False once a cap truncated some subset.
  bool complete() const { return complete_; }

 private:
  void fill_next_subset();

  Relation rel_;
  std::vector<ElementSet> carriers_;
  std::size_t cap_;
  std::vector<std::vector<std::size_t>> subsets_;
  std::size_t next_subset_ = 0;
  std::deque<WeakerRelation> pending_;
  bool complete_ = true;
};

// Convenience wrapper over the enumerator using full carriers.
struct WeakerRelations {
  std::vector<WeakerRelation> relations;
  bool complete = true;
};
WeakerRelations weaker_relations(const Relation& rel, std::size_t cap = 100000);
WeakerRelations weaker_relations(const Relation& rel, std::span<const ElementSet> carriers,
                                 std::size_t cap = 100000);

}  // namespace wnucsp
