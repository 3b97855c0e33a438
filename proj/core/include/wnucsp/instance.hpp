#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "wnucsp/algebra.hpp"
#include "wnucsp/classify.hpp"
#include "wnucsp/relation.hpp"

namespace wnucsp {

using RelationPtr = std::shared_ptr<const Relation>;

struct Variable {
  std::string name;
  AlgebraPtr algebra;
  ElementSet domain;  // current domain, a subuniverse of the algebra
};

struct Constraint {
  RelationPtr relation;
  std::vector<std::size_t> scope;  // distinct variable indices
};

// Variables with current domains and constraints over shared relations.
// Relations are read through the current domains: a tuple with an entry
// outside its variable's domain is ignored.
class Instance {
 public:
  std::size_t add_variable(std::string name, AlgebraPtr algebra);
  std::size_t add_variable(std::string name, AlgebraPtr algebra, ElementSet domain);
  // Repeated scope variables are merged by intersecting with the diagonal.
  // Throws ArgumentError on arity or algebra mismatches.
  void add_constraint(RelationPtr relation, std::vector<std::size_t> scope);

  std::size_t size() const { return variables_.size(); }
  const std::vector<Variable>& variables() const { return variables_; }
  const Variable& variable(std::size_t i) const { return variables_[i]; }
  const std::vector<Constraint>& constraints() const { return constraints_; }
  std::vector<ElementSet> domains() const;
  std::vector<ElementSet> scope_domains(const Constraint& c) const;

  // The constraint's relation restricted to the current domains.
  Relation restricted(const Constraint& c) const;
  // True iff every value lies in its domain and every constraint holds.
  bool satisfies(std::span<const Element> assignment) const;

  // Throws ReductionError unless every domain is a nonempty subuniverse.
  void validate() const;

  // Replaces the domain without checks; apply_reduction is the checked form.
  void set_domain(std::size_t i, ElementSet d) { variables_[i].domain = d; }
  void set_constraints(std::vector<Constraint> cs) { constraints_ = std::move(cs); }

  // Text key identifying domains and restricted constraint contents.
  std::string fingerprint() const;

 private:
  std::vector<Variable> variables_;
  std::vector<Constraint> constraints_;
};

// Throws ReductionError if a subset is empty, not a subuniverse, or not
// contained in the current domain.
Instance apply_reduction(const Instance& inst, std::span<const ElementSet> reduction);

// Constraints restricted to the current domains, scopes sorted, dummy
// coordinates dropped, full and duplicate constraints removed.  Solutions are
// unchanged.
Instance normalize(const Instance& inst);

// ============================================================================
// Weaker constraints
// ============================================================================

// Scope of `weak` lies inside that of `strong`, `strong` implies `weak`, and
// not conversely.  Both read through the instance's domains; scopes sorted.
bool is_weaker(const Instance& inst, const Constraint& weak, const Constraint& strong);

// Drops every constraint weaker than some other one, and duplicates.
std::vector<Constraint> remove_weaker(const Instance& inst, std::vector<Constraint> cs);

// Every constraint replaced by all of its weaker constraints without dummy
// variables.  Throws ConfigError if an enumeration hit its cap.
Instance weaken_all(const Instance& inst, std::size_t cap = 100000);

// The strongest weaker constraints of `c`: projections dropping one variable
// and closures of the relation plus one tuple, dummy-free and pruned.  Dummy
// coordinates of `c` are dropped first; for a constraint without them the
// result has the same conjunction as the full set of weaker constraints.
std::vector<Constraint> strongest_weaker(const Instance& inst, const Constraint& c);

// Same instance with constraint i replaced by its strongest weaker
// constraints, then pruned with remove_weaker.
Instance weaken_constraint(const Instance& inst, std::size_t i);

using UnsatOracle = std::function<bool(const Instance&)>;

// Weakens constraints while `unsat` keeps holding, restarting after every
// accepted replacement.  Throws OracleError if `unsat` rejects the input.
Instance make_crucial(const Instance& inst, const UnsatOracle& unsat,
                      std::size_t max_rounds = 100000);

// ============================================================================
// Linear systems
// ============================================================================

struct ScalarVar {
  std::string name;
  unsigned prime;
};

// sum coeffs[v] * x_v = rhs (mod prime); coefficients of variables with a
// different modulus are zero.
struct Equation {
  unsigned prime = 2;
  std::vector<Element> coeffs;
  Element rhs = 0;

  bool operator==(const Equation&) const = default;
};

struct LinearSystem {
  std::vector<ScalarVar> vars;
  std::vector<Equation> equations;

  bool satisfied_by(std::span<const Element> values) const;
  // Throws FormatError on bad moduli and ArgumentError on mixed-prime rows.
  void validate() const;
};

// Equations whose common solution set is exactly `points`, a coset of a
// subgroup of Z_p1 x ... x Z_pr.  One row-reduced block per prime.
// Throws EmptyRelationError on no points, InvariantError if not a coset.
std::vector<Equation> equations_from_points(const std::vector<Tuple>& points,
                                            std::span<const unsigned> primes);

// Flattens each coordinate through its iso and calls equations_from_points.
std::vector<Equation> relation_to_equations(const Relation& rel,
                                            std::span<const LinearIso> isos);

struct VariableSlice {
  Congruence congruence;        // on the current domain, in subalgebra labels
  std::vector<Element> labels;  // subalgebra label -> element
  LinearIso iso;                // of the quotient
  std::size_t first = 0;        // first scalar variable
  std::size_t count = 0;        // number of scalar variables

  // Block of an element of the domain.
  Element block_of(Element a) const;
  // Elements of the block whose quotient image is `values`.
  ElementSet block_for(std::span<const Element> values) const;
};

struct LinearFactorization {
  LinearSystem system;
  std::vector<VariableSlice> slices;

  // Per-variable domain reduction selected by a scalar assignment.
  std::vector<ElementSet> reduction_for(std::span<const Element> scalars) const;
};

// Quotient of every domain by its minimal linear congruence and the resulting
// constraints as equations.  Throws PreconditionError if a domain with more
// than one element has a trivial linear quotient.
LinearFactorization factorize_to_linear(const Instance& inst);

}  // namespace wnucsp
