#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "wnucsp/classify.hpp"
#include "wnucsp/instance.hpp"
#include "wnucsp/linsolve.hpp"

namespace wnucsp {

struct TraceEvent {
  std::string step;            // "1".."13", "split", "unlinked", "solved", ...
  std::string detail;
  int recursion_type = 0;      // 0 when the event does not start a recursive call
  std::size_t depth = 0;       // recursive calls above this one
  std::size_t type3_depth = 0;
  // Valid only during the callback.
  const LinearSystem* system = nullptr;    // step "8": the current system
  const Equation* equation = nullptr;      // steps "12", "13": the learned equation
};

using TraceSink = std::function<void(const TraceEvent&)>;

struct SolverConfig {
  ClassifyConfig classify;
  std::size_t max_nodes = 5'000'000;     // recursive calls per top-level solve
  std::size_t max_type3_depth = 256;
  std::size_t max_points = 1U << 16;     // parameter points enumerated in one step
  TraceSink trace;
  // Called once per certificate issued by the domain classifier.
  std::function<void(const Algebra&, const StructureReport&)> on_report;
};

struct SolveStats {
  std::size_t nodes = 0;
  std::size_t memo_hits = 0;
  std::size_t max_depth = 0;
  std::size_t max_type3_depth = 0;
  std::size_t learned_equations = 0;
};

struct SolveOutcome {
  enum class Kind { solution, no_solution, no_wnu, config_error, internal_error };
  Kind kind = Kind::no_solution;
  Tuple assignment;  // solution: one value per variable
  std::string detail;
  SolveStats stats;

  bool satisfiable() const { return kind == Kind::solution; }
  // "SAT", "UNSAT", "NO-WNU", "CONFIG-ERROR" or "INTERNAL-ERROR".
  std::string decision() const;
};

// Decides the instance; a returned assignment has been checked against every
// constraint and domain.
SolveOutcome solve(const Instance& inst, const SolverConfig& cfg = {});

// The same algorithm applied to an instance that is cycle-consistent, not
// fragmented and not linked: solves each linked component in turn.
SolveOutcome solve_unlinked(const Instance& inst, const SolverConfig& cfg = {});

// Runs the linear phase directly.  Every domain with more than one element
// must have a proper linear quotient.
SolveOutcome linear_phase(const Instance& inst, const SolverConfig& cfg = {});

}  // namespace wnucsp
