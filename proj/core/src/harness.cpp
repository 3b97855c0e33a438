#include "wnucsp/harness.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <random>
#include <sstream>

#include "wnucsp/format.hpp"

namespace wnucsp {

// ============================================================================
// Brute force
// ============================================================================

namespace {

bool holds(const Instance& inst, const Tuple& a) {
  for (const Constraint& c : inst.constraints()) {
    Tuple t;
    for (std::size_t v : c.scope) t.push_back(a[v]);
    if (!c.relation->contains(t)) return false;
  }
  return true;
}

}  // namespace

BruteForceResult brute_force(const Instance& inst, BruteMode mode, std::size_t cap) {
  const std::size_t n = inst.size();
  std::vector<std::vector<Element>> values;
  std::size_t total = 1;
  for (const Variable& v : inst.variables()) {
    values.push_back(v.domain.elements());
    total *= values.back().size();
    if (total > cap) throw SizeError("search space exceeds the brute-force cap");
  }
  BruteForceResult out;
  std::vector<std::size_t> pos(n, 0);
  Tuple a(n);
  while (true) {
    for (std::size_t i = 0; i < n; ++i) a[i] = values[i][pos[i]];
    ++out.assignments;
    if (holds(inst, a)) {
      if (!out.first) out.first = a;
      if (mode == BruteMode::decision) return out;
      out.all.push_back(a);
    }
    std::size_t k = n;
    while (k > 0 && ++pos[k - 1] == values[k - 1].size()) pos[--k] = 0;
    if (k == 0) break;
  }
  return out;
}

// ============================================================================
// Random instances
// ============================================================================

GenParams preset(const std::string& name) {
  GenParams p;
  if (name == "minority2") {
    p.language = Language::minority;
  } else if (name == "maj2") {
    p.language = Language::majority;
  } else if (name == "and3") {
    p.language = Language::meet;
  } else if (name == "dd3") {
    p.language = Language::dual_discriminator;
    p.domain_size = 3;
  } else if (name == "z4sum5") {
    p.language = Language::sum;
    p.domain_size = 4;
    p.wnu_arity = 5;
  } else {
    throw ArgumentError("unknown preset '" + name + "'");
  }
  return p;
}

std::vector<std::string> preset_names() { return {"minority2", "maj2", "and3", "dd3", "z4sum5"}; }

OperationTable language_table(const GenParams& p) {
  const bool binary = p.domain_size == 2;
  switch (p.language) {
    case Language::minority:
      if (!binary || p.wnu_arity != 3) break;
      return ops::minority();
    case Language::majority:
      if (!binary || p.wnu_arity != 3) break;
      return ops::majority();
    case Language::meet:
      if (!binary) break;
      return ops::meet(p.wnu_arity);
    case Language::dual_discriminator:
      if (p.wnu_arity != 3) break;
      return ops::dual_discriminator(p.domain_size);
    case Language::sum:
      return ops::sum_mod(p.domain_size, p.wnu_arity);
  }
  throw ArgumentError("language does not fit the domain size or arity");
}

GeneratedInstance random_instance(const GenParams& params) {
  if (params.domain_size == 0 || params.domain_size > kDefaultDomainCap) {
    throw ArgumentError("domain size out of range");
  }
  if (params.variables == 0 || params.max_arity == 0) {
    throw ArgumentError("variable count and arity must be positive");
  }
  std::mt19937_64 rng(params.seed);
  auto pick = [&](std::size_t lo, std::size_t hi) {
    return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
  };

  GeneratedInstance out;
  out.algebra = make_algebra(language_table(params));
  const std::size_t n = params.domain_size;
  for (std::size_t i = 0; i < params.variables; ++i) {
    out.instance.add_variable("x" + std::to_string(i + 1), out.algebra);
  }
  if (params.satisfiable_bias) {
    Tuple s;
    for (std::size_t i = 0; i < params.variables; ++i) s.push_back(static_cast<Element>(pick(0, n - 1)));
    out.planted = s;
  }

  std::vector<std::size_t> order(params.variables);
  std::iota(order.begin(), order.end(), 0);
  for (std::size_t c = 0; c < params.constraints; ++c) {
    const std::size_t r = pick(1, std::min(params.max_arity, params.variables));
    std::shuffle(order.begin(), order.end(), rng);
    std::vector<std::size_t> scope(order.begin(), order.begin() + static_cast<long>(r));
    std::vector<Tuple> gens;
    if (out.planted) {
      Tuple t;
      for (std::size_t v : scope) t.push_back((*out.planted)[v]);
      gens.push_back(std::move(t));
    }
    const std::size_t extra = pick(out.planted ? 0 : 1, r + 2);
    for (std::size_t g = 0; g < extra; ++g) {
      Tuple t;
      for (std::size_t j = 0; j < r; ++j) t.push_back(static_cast<Element>(pick(0, n - 1)));
      gens.push_back(std::move(t));
    }
    std::vector<AlgebraPtr> coords(r, out.algebra);
    auto rel = std::make_shared<const Relation>(invariant_closure(coords, std::move(gens)));
    if (!is_invariant(*rel)) throw InvariantError("generated relation is not invariant");
    out.instance.add_constraint(std::move(rel), std::move(scope));
  }
  if (out.planted && !out.instance.satisfies(*out.planted)) {
    throw InvariantError("planted assignment does not satisfy the instance");
  }
  return out;
}

// ============================================================================
// Differential testing
// ============================================================================

std::string DiffReport::machine_lines() const {
  std::ostringstream os;
  for (const DiffRecord& r : records) os << r.seed << ' ' << r.solver << ' ' << r.oracle << '\n';
  return os.str();
}

std::string DiffReport::summary() const {
  std::ostringstream os;
  os << records.size() << " instances, " << agreements << " agreements, "
     << disagreements.size() << " disagreements\n";
  for (const DiffRecord& d : disagreements) {
    os << "# seed " << d.seed << ": solver " << d.solver << ", oracle " << d.oracle << '\n'
       << d.instance_text;
  }
  return os.str();
}

DiffReport differential_test(std::size_t n, const GenParams& params, const SolverConfig& cfg) {
  DiffReport report;
  for (std::size_t k = 0; k < n; ++k) {
    GenParams p = params;
    p.seed = params.seed + k;
    const GeneratedInstance g = random_instance(p);
    const SolveOutcome s = solve(g.instance, cfg);
    const BruteForceResult b = brute_force(g.instance, BruteMode::decision);
    DiffRecord rec{p.seed, s.decision(), b.first ? "SAT" : "UNSAT", {}};
    if (rec.solver == rec.oracle) {
      ++report.agreements;
    } else {
      rec.instance_text = print_instance_file(to_instance_file(g.instance));
      report.disagreements.push_back(rec);
    }
    report.records.push_back(std::move(rec));
  }
  return report;
}

}  // namespace wnucsp
