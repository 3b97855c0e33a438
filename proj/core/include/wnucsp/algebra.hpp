#pragma once

#include <bit>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "wnucsp/errors.hpp"

namespace wnucsp {

using Element = std::uint32_t;
using Tuple = std::vector<Element>;

// Default cap on carrier sizes for the exhaustive algebra procedures.
inline constexpr std::size_t kDefaultDomainCap = 6;

// ============================================================================
// ElementSet
// ============================================================================

// A subset of {0, ..., 63} stored as a bit mask.
class ElementSet {
 public:
  constexpr ElementSet() = default;
  constexpr explicit ElementSet(std::uint64_t bits) : bits_(bits) {}

  static constexpr ElementSet full(std::size_t n) {
    return ElementSet(n >= 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << n) - 1);
  }
  static constexpr ElementSet single(Element a) {
    return ElementSet(std::uint64_t{1} << a);
  }
  static ElementSet of(std::initializer_list<Element> elems) {
    ElementSet s;
    for (Element a : elems) s.insert(a);
    return s;
  }

  constexpr bool contains(Element a) const { return (bits_ >> a) & 1U; }
  constexpr void insert(Element a) { bits_ |= std::uint64_t{1} << a; }
  constexpr void erase(Element a) { bits_ &= ~(std::uint64_t{1} << a); }
  constexpr std::size_t size() const {
    return static_cast<std::size_t>(std::popcount(bits_));
  }
  constexpr bool empty() const { return bits_ == 0; }
  // Least element; undefined on the empty set.
  constexpr Element min() const {
    return static_cast<Element>(std::countr_zero(bits_));
  }
  constexpr bool subset_of(ElementSet o) const { return (bits_ & ~o.bits_) == 0; }
  constexpr std::uint64_t bits() const { return bits_; }

  std::vector<Element> elements() const;
  std::string to_string() const;

  constexpr ElementSet operator&(ElementSet o) const { return ElementSet(bits_ & o.bits_); }
  constexpr ElementSet operator|(ElementSet o) const { return ElementSet(bits_ | o.bits_); }
  constexpr bool operator==(const ElementSet&) const = default;
  // Canonical order: by sorted element list, i.e. lexicographic.
  std::strong_ordering operator<=>(const ElementSet& o) const;

 private:
  std::uint64_t bits_ = 0;
};

// ============================================================================
// OperationTable
// ============================================================================

// An m-ary operation on {0..n-1}, stored row-major with the first argument
// most significant.
class OperationTable {
 public:
  // Throws FormatError when entries.size() != n^m or an entry is out of range.
  OperationTable(std::size_t arity, std::size_t domain_size,
                 std::vector<std::uint8_t> entries);

  template <typename F>
  static OperationTable from_function(std::size_t arity, std::size_t domain_size, F f) {
    std::size_t total = 1;
    for (std::size_t i = 0; i < arity; ++i) total *= domain_size;
    std::vector<std::uint8_t> entries(total);
    Tuple args(arity, 0);
    for (std::size_t idx = 0; idx < total; ++idx) {
      std::size_t rest = idx;
      for (std::size_t i = arity; i-- > 0;) {
        args[i] = static_cast<Element>(rest % domain_size);
        rest /= domain_size;
      }
      entries[idx] = static_cast<std::uint8_t>(f(std::span<const Element>(args)));
    }
    return OperationTable(arity, domain_size, std::move(entries));
  }

  std::size_t arity() const { return arity_; }
  std::size_t domain_size() const { return n_; }
  const std::vector<std::uint8_t>& entries() const { return entries_; }

  std::size_t index_of(std::span<const Element> args) const;
  Tuple arguments_of(std::size_t index) const;
  Element operator()(std::span<const Element> args) const { return entries_[index_of(args)]; }
  Element operator()(std::initializer_list<Element> args) const {
    return (*this)(std::span<const Element>(args.begin(), args.size()));
  }
  Element at(std::size_t index) const { return entries_[index]; }

  bool operator==(const OperationTable&) const = default;
  auto operator<=>(const OperationTable& o) const {
    return entries_ <=> o.entries_;
  }

 private:
  std::size_t arity_;
  std::size_t n_;
  std::vector<std::uint8_t> entries_;
};

// Common operations used throughout tests, the CLI and the harness.
namespace ops {
OperationTable sum_mod(std::size_t n, std::size_t arity);  // x1+...+xm mod n
OperationTable minority();                                  // x^y^z on {0,1}
OperationTable majority();                                  // on {0,1}
OperationTable meet(std::size_t arity);                     // x1 & ... & xm on {0,1}
OperationTable dual_discriminator(std::size_t n);           // y if y=z else x
OperationTable projection(std::size_t n, std::size_t arity, std::size_t which);
}  // namespace ops

// ============================================================================
// Special WNU verification
// ============================================================================

struct WnuViolation {
  enum class Kind { idempotence, wnu_identity, specialness };
  Kind kind;
  Tuple witness;  // (a) for idempotence, (a, b) otherwise

  std::string describe() const;
};

struct WnuVerdict {
  std::vector<WnuViolation> violations;
  bool ok() const { return violations.empty(); }
};

// Checks idempotence, w(b,a,..,a) = w(a,b,..,a) = ... = w(a,..,a,b) and
// a o (a o b) = a o b where a o b = w(a,..,a,b).
WnuVerdict verify_special_wnu(const OperationTable& table);

struct WnuSearch {
  enum class Status { found, none, budget_exceeded };
  Status status = Status::none;
  std::optional<OperationTable> table;
  std::size_t nodes = 0;
};

// Least (row-major, lexicographically) special WNU of the given arity on
// {0..n-1} preserving every relation, each given as a list of tuples.
// Backtracks over the classes of entries tied together by the WNU identities.
WnuSearch search_special_wnu(std::size_t n, const std::vector<std::vector<Tuple>>& relations,
                             std::size_t arity, std::size_t budget = 1'000'000);

// ============================================================================
// Algebra
// ============================================================================

// Residual-class automaton over argument prefixes.  Two prefixes of the same
// length share a class iff every completion yields the same value, so a
// coordinatewise application can track one class id per coordinate instead of
// the full argument prefix.
struct CurriedTable {
  // step[j][cls * n + a]: class after reading argument j+1 with value a.
  // Classes at level arity are the output values themselves.
  std::vector<std::vector<std::uint32_t>> step;
  std::vector<std::uint32_t> class_count;
};

// A finite algebra (A; w) with A = {0..n-1} and w a verified special WNU.
class Algebra {
 public:
  // Throws WnuInvalid if the table is not a special WNU.
  explicit Algebra(OperationTable wnu);

  std::size_t size() const { return wnu_.domain_size(); }
  std::size_t arity() const { return wnu_.arity(); }
  const OperationTable& wnu() const { return wnu_; }
  const CurriedTable& curried() const { return curried_; }
  ElementSet carrier() const { return ElementSet::full(size()); }
  Element apply(std::span<const Element> args) const { return wnu_(args); }
  // a o b = w(a, ..., a, b)
  Element circle(Element a, Element b) const;

  bool operator==(const Algebra& o) const { return wnu_ == o.wnu_; }

  // Derived structure computed on first use (congruences, subalgebras,
  // quotients); shared by copies.
  struct Memo;
  Memo& memo() const { return *memo_; }

 private:
  OperationTable wnu_;
  CurriedTable curried_;
  std::shared_ptr<Memo> memo_;
};

using AlgebraPtr = std::shared_ptr<const Algebra>;

AlgebraPtr make_algebra(OperationTable wnu);

// ============================================================================
// Subuniverses and generated subalgebras of products
// ============================================================================

// Least superset of `seed` closed under w.
ElementSet subuniverse_closure(const Algebra& alg, ElementSet seed);
bool is_subuniverse(const Algebra& alg, ElementSet set);
// Nonempty subuniverses, in canonical order.
std::vector<ElementSet> all_subuniverses(const Algebra& alg);

struct GeneratedSubuniverse {
  std::vector<Tuple> tuples;  // lexicographically sorted
  bool complete = true;       // false if the size cap stopped the closure
};

// Subuniverse of coords[0] x ... x coords[r-1] generated by `generators`
// under coordinatewise w.  All coordinate algebras must share one arity.
GeneratedSubuniverse generate_subuniverse(std::span<const Algebra* const> coords,
                                          const std::vector<Tuple>& generators,
                                          std::size_t size_cap = SIZE_MAX);

// One application of w to every m-tuple of rows: { w(t1, ..., tm) }.
std::vector<Tuple> apply_coordinatewise(std::span<const Algebra* const> coords,
                                        const std::vector<Tuple>& rows);

// ============================================================================
// Congruences and quotients
// ============================================================================

class Congruence {
 public:
  // block_of[a] is the block index of a; blocks are renumbered canonically so
  // that block indices follow the order of their least elements.
  explicit Congruence(std::vector<Element> block_of);

  static Congruence equality(std::size_t n);
  static Congruence full(std::size_t n);
  static Congruence from_blocks(std::size_t n, const std::vector<ElementSet>& blocks);

  std::size_t carrier_size() const { return block_of_.size(); }
  std::size_t block_count() const { return blocks_.size(); }
  Element block_of(Element a) const { return block_of_[a]; }
  const std::vector<Element>& block_map() const { return block_of_; }
  const std::vector<ElementSet>& blocks() const { return blocks_; }
  bool related(Element a, Element b) const { return block_of_[a] == block_of_[b]; }
  bool is_equality() const { return blocks_.size() == block_of_.size(); }
  bool is_full() const { return blocks_.size() <= 1; }
  // True if every block of *this lies inside a block of `coarser`.
  bool refines(const Congruence& coarser) const;
  Congruence meet(const Congruence& o) const;
  std::string to_string() const;

  bool operator==(const Congruence& o) const { return block_of_ == o.block_of_; }

 private:
  std::vector<Element> block_of_;
  std::vector<ElementSet> blocks_;
};

bool is_compatible(const Algebra& alg, const Congruence& cong);

// Every congruence of `alg`, from equality (first) to the full relation (last).
// Throws SizeError if |A| > cap.
std::vector<Congruence> all_congruences(const Algebra& alg,
                                        std::size_t cap = kDefaultDomainCap);
// Proper congruences that are maximal under refinement.
std::vector<Congruence> maximal_congruences(const Algebra& alg,
                                            std::size_t cap = kDefaultDomainCap);

struct Quotient {
  AlgebraPtr algebra;
  std::vector<Element> block_of;  // element -> quotient element
};

// Throws InvariantError if `cong` is not compatible with w.
Quotient quotient_algebra(const Algebra& alg, const Congruence& cong);

struct Subalgebra {
  AlgebraPtr algebra;
  std::vector<Element> labels;  // new element -> element of the parent
};

// Restriction of w to `set`, relabelled 0..|set|-1 in increasing order.
// Throws InvariantError if `set` is not a subuniverse.
Subalgebra subalgebra(const Algebra& alg, ElementSet set);

// ============================================================================
// Polynomial completeness and linear structure
// ============================================================================

bool is_polynomially_complete(const Algebra& alg, std::size_t cap = kDefaultDomainCap);

// Isomorphism onto (Z_p1 x ... x Z_ps; x1 + ... + xm).
struct LinearIso {
  std::vector<unsigned> primes;
  std::vector<Tuple> image;  // image[a] = coordinates of a in the product

  std::size_t product_size() const;
  // Inverse image of a product vector.
  Element preimage(std::span<const Element> coords) const;
};

// First match in canonical order (prime factorisations in nondecreasing
// order, then bijections in lexicographic order); nullopt if none exists.
std::optional<LinearIso> linear_structure(const Algebra& alg,
                                          std::size_t cap = kDefaultDomainCap);
// Re-checks that w is the componentwise sum under the bijection.
bool verify_linear_iso(const Algebra& alg, const LinearIso& iso);

// ============================================================================
// Binary term operations
// ============================================================================

struct BinaryTerms {
  std::vector<OperationTable> terms;  // sorted by table entries
  bool complete = true;
};

// Closure of {x, y} under substitution into w; stops with complete=false once
// more than `cap` terms have been generated.
BinaryTerms binary_terms(const Algebra& alg, std::size_t cap = 4096);

}  // namespace wnucsp
