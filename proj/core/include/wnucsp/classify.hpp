#pragma once

#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "wnucsp/algebra.hpp"
#include "wnucsp/relation.hpp"

namespace wnucsp {

// Outcome of a capped search: `unknown` means a cap stopped it before a
// witness or a proof of absence was found.
enum class SearchStatus { found, none, unknown };

struct ClassifyConfig {
  std::size_t term_cap = 4096;        // binary_terms closure size
  std::size_t relation_cap = 20000;   // invariant relations visited per search
  std::size_t central_arity_cap = 5;  // largest central-relation arity tried
};

// ============================================================================
// Binary absorption
// ============================================================================

struct BinaryAbsorbing {
  ElementSet set;
  OperationTable term;
};

struct AbsorbingSearch {
  SearchStatus status = SearchStatus::none;
  std::optional<BinaryAbsorbing> result;
};

// Canonical least proper subuniverse B with a binary term t such that
// t(B,A) and t(A,B) lie in B.
AbsorbingSearch find_binary_absorbing(const Algebra& alg, const ClassifyConfig& cfg = {});

// ============================================================================
// Centers
// ============================================================================

struct CenterWitness {
  enum class Kind { least_of_order, central_relation, lifted };
  Kind kind = Kind::least_of_order;
  std::optional<Relation> relation;          // order or central relation
  std::optional<Congruence> congruence;      // lifted: the maximal congruence
  std::shared_ptr<const CenterWitness> inner;  // lifted: witness in the quotient
  ElementSet inner_center;                   // lifted: center of the quotient
};

struct Center {
  ElementSet set;
  CenterWitness witness;
};

struct CenterSearch {
  SearchStatus status = SearchStatus::none;
  std::optional<Center> result;
};

// Tries bounded invariant partial orders, then central relations of arity
// 2..min(|A|-1, cap), then centers of quotients by maximal congruences.
CenterSearch find_center(const Algebra& alg, const ClassifyConfig& cfg = {});

// ============================================================================
// PC and linear quotients
// ============================================================================

struct PcStructure {
  std::vector<Congruence> congruences;  // quotient PC with at least 2 elements
  Congruence con_pc;                    // meet of `congruences`
  bool degenerate = false;              // no PC quotient: con_pc is equality
};

PcStructure pc_structure(const Algebra& alg);

struct LinearQuotient {
  Congruence congruence;
  LinearIso iso;  // of the quotient algebra
};

// Least congruence with a linear quotient.  Throws ClassificationError if the
// linear congruences have no common refinement among themselves.
LinearQuotient con_lin(const Algebra& alg);

// ============================================================================
// Structure reports
// ============================================================================

struct PcQuotient {
  Congruence congruence;
};

struct StructureReport {
  std::variant<BinaryAbsorbing, Center, PcQuotient, LinearQuotient> outcome;

  bool is_binary_absorbing() const { return outcome.index() == 0; }
  bool is_center() const { return outcome.index() == 1; }
  bool is_pc_quotient() const { return outcome.index() == 2; }
  bool is_linear_quotient() const { return outcome.index() == 3; }
  std::string to_string() const;
};

// Binary absorbing set, else center, else PC quotient by a canonical maximal
// congruence with PC quotient, else the minimal linear quotient.
// Throws PreconditionError on one-element algebras, ConfigError when a capped
// search was inconclusive, ClassificationError if nothing applies.
StructureReport classify_domain(const Algebra& alg, const ClassifyConfig& cfg = {});

// Re-checks the certificate from scratch.  On failure returns false and, if
// `why` is given, a short reason.
bool verify_report(const Algebra& alg, const StructureReport& report,
                   std::string* why = nullptr);
bool verify_center(const Algebra& alg, const Center& center, std::string* why = nullptr);

// Order and central-relation predicates used by the center search.
bool is_bounded_partial_order(const Relation& rel);
bool is_central_relation(const Relation& rel);
// {a : (a, b2, ..., bh) in rel for all b}.
ElementSet central_set(const Relation& rel);

}  // namespace wnucsp
