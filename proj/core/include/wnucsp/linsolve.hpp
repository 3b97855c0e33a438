#pragma once

#include <functional>
#include <string>
#include <vector>

#include "wnucsp/instance.hpp"

namespace wnucsp {

struct FreeVar {
  std::size_t scalar;  // index of the system variable it stands for
  unsigned modulus;
};

// value = constant + sum coeffs[f] * y_f over the free variables of the same
// modulus, reduced mod the variable's prime.
struct AffineExpr {
  Element constant = 0;
  std::vector<Element> coeffs;  // one per free variable

  bool operator==(const AffineExpr&) const = default;
};

// Bijection from Z_q1 x ... x Z_qk onto the solution set of a system.
struct AffineParam {
  std::vector<FreeVar> free_vars;  // in declaration order
  std::vector<unsigned> moduli;    // per system variable
  std::vector<AffineExpr> map;     // per system variable

  std::size_t dimension() const { return free_vars.size(); }
  Tuple evaluate(std::span<const Element> point) const;
  // Number of points of the parameter space.
  std::size_t point_count() const;

  bool operator==(const AffineParam&) const = default;
};

struct LinearSolution {
  enum class Kind { inconsistent, unique, param };
  Kind kind = Kind::inconsistent;
  Tuple solution;  // unique
  AffineParam param;
};

// Gauss-Jordan elimination per prime block, choosing pivots from the last
// variable backwards so that free variables come as early as possible in
// declaration order.  Throws FormatError on a non-prime modulus.
LinearSolution solve_linear_system(const LinearSystem& sys);

// The origin followed by the unit vectors.
std::vector<Tuple> basis_points(const AffineParam& param);

struct HyperplaneResult {
  enum class Kind { equation, full, empty };
  Kind kind = Kind::empty;
  std::vector<Element> coeffs;  // first nonzero coefficient is 1
  Element constant = 0;
  std::size_t queries = 0;
};

using MembershipOracle = std::function<bool(std::span<const Element>)>;

// Learns V from membership queries, promised V is all of Z_p^h, empty, or an
// affine hyperplane.  Uses at most p*h + 1 queries.  Throws
// AffineStructureViolation when the answers fit none of these.
HyperplaneResult learn_hyperplane(const MembershipOracle& oracle, unsigned p, std::size_t h);

// Human-readable "c1*y1 + ... = c0 (mod p)".
std::string format_equation(const Equation& e, const std::vector<ScalarVar>& vars);

}  // namespace wnucsp
