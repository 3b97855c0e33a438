#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "wnucsp/instance.hpp"

namespace wnucsp {

// rows[a] = { b : (a, b) in the relation }, indexed by elements of the first
// variable's algebra.
using BinaryRelation = std::vector<ElementSet>;

// One binary relation per ordered pair of distinct variables; (j, i) is kept
// equal to the transpose of (i, j).
class PairNetwork {
 public:
  explicit PairNetwork(const Instance& inst);

  std::size_t size() const { return n_; }
  const BinaryRelation& at(std::size_t i, std::size_t j) const { return rel_[i * n_ + j]; }
  // Intersects (i, j) with `r`; keeps the transpose in step.  True on change.
  bool restrict_pair(std::size_t i, std::size_t j, const BinaryRelation& r);
  bool contains(std::size_t i, std::size_t j, Element a, Element b) const {
    return at(i, j)[a].contains(b);
  }
  ElementSet first_projection(std::size_t i, std::size_t j) const;
  bool empty(std::size_t i, std::size_t j) const;

  bool operator==(const PairNetwork& o) const { return rel_ == o.rel_; }

 private:
  std::size_t n_;
  std::vector<std::size_t> sizes_;
  std::vector<BinaryRelation> rel_;
};

// Replaces every (i, j) by its meet with the composition through every k
// until nothing changes.  Returns the number of passes.
std::size_t propagate_triangles(PairNetwork& net);

struct ConsistencyResult {
  enum class Kind { consistent, no_solution, reduction };
  Kind kind = Kind::consistent;
  std::optional<PairNetwork> network;  // consistent
  std::size_t variable = 0;            // reduction
  ElementSet subset;                   // reduction
};

// (2,3)-consistency over pairwise constraint projections plus unary checks.
ConsistencyResult enforce_cycle_consistency(const Instance& inst);

// Variable sets with no constraint across them, each sorted; in order of
// least variable.
std::vector<std::vector<std::size_t>> fragments(const Instance& inst);
bool is_fragmented(const Instance& inst);

// Instance on the given variables, keeping constraints whose scope lies inside.
Instance sub_instance(const Instance& inst, const std::vector<std::size_t>& vars);

// Projection onto `vars`: every constraint meeting `vars` is projected onto it.
Instance project_instance(const Instance& inst, const std::vector<std::size_t>& vars);

// Blocks of connected (variable, value) pairs, as per-variable subsets,
// ordered by least pair.  Throws ArgumentError on fragmented input.
std::vector<std::vector<ElementSet>> linked_components(const Instance& inst);
bool is_linked(const Instance& inst);

// Returns a solution of the given instance or nullopt.
using SolveCallback = std::function<std::optional<Tuple>(const Instance&)>;

struct IrreducibilityResult {
  enum class Kind { ok, no_solution, reduction };
  Kind kind = Kind::ok;
  std::size_t variable = 0;
  ElementSet subset;
};

// For every variable k and maximal congruence of its domain, spreads the
// congruence along binary projections and checks that the projection onto the
// reached variables has a subdirect solution set.
IrreducibilityResult check_irreducibility(const Instance& inst, const SolveCallback& solve);

}  // namespace wnucsp
