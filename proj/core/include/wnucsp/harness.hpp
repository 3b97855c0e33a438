#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "wnucsp/instance.hpp"
#include "wnucsp/solver.hpp"

namespace wnucsp {

// ============================================================================
// Brute force
// ============================================================================

enum class BruteMode { decision, all };

struct BruteForceResult {
  std::optional<Tuple> first;  // lexicographically least solution
  std::vector<Tuple> all;      // every solution in lexicographic order (all mode)
  std::size_t assignments = 0; // assignments examined
};

// Exhaustive enumeration of the product of the current domains.  Throws
// SizeError when the product exceeds `cap`.
BruteForceResult brute_force(const Instance& inst, BruteMode mode,
                             std::size_t cap = 10'000'000);

// ============================================================================
// Random instances
// ============================================================================

enum class Language { minority, majority, meet, dual_discriminator, sum };

struct GenParams {
  Language language = Language::minority;
  std::size_t domain_size = 2;
  std::size_t wnu_arity = 3;
  std::size_t variables = 4;
  std::size_t constraints = 4;
  std::size_t max_arity = 3;
  std::uint64_t seed = 1;
  bool satisfiable_bias = false;
};

// Named settings: "minority2", "maj2", "and3", "dd3", "z4sum5".  Throws
// ArgumentError on an unknown name.
GenParams preset(const std::string& name);
std::vector<std::string> preset_names();

// The operation a GenParams selects.  Throws ArgumentError when the language
// does not fit the domain size or arity.
OperationTable language_table(const GenParams& params);

struct GeneratedInstance {
  Instance instance;
  AlgebraPtr algebra;
  std::optional<Tuple> planted;  // with satisfiable_bias
};

// Deterministic in `params`.  Every relation is the closure of a few random
// tuples under the WNU (with the planted tuple among them under the bias).
GeneratedInstance random_instance(const GenParams& params);

// ============================================================================
// Differential testing
// ============================================================================

struct DiffRecord {
  std::uint64_t seed = 0;
  std::string solver;  // SAT / UNSAT / ...
  std::string oracle;  // SAT / UNSAT
  std::string instance_text;  // only for disagreements
};

struct DiffReport {
  std::size_t agreements = 0;
  std::vector<DiffRecord> records;        // one per instance, in seed order
  std::vector<DiffRecord> disagreements;  // with the instance text

  bool ok() const { return disagreements.empty(); }
  // Lines "seed solver oracle".
  std::string machine_lines() const;
  std::string summary() const;
};

// Runs the solver and brute force on seeds params.seed, params.seed + 1, ...
DiffReport differential_test(std::size_t n, const GenParams& params,
                             const SolverConfig& cfg = {});

}  // namespace wnucsp
