#include "wnucsp/solver.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <unordered_map>
#include <unordered_set>

#include "wnucsp/consistency.hpp"

namespace wnucsp {

std::string SolveOutcome::decision() const {
  switch (kind) {
    case Kind::solution: return "SAT";
    case Kind::no_solution: return "UNSAT";
    case Kind::no_wnu: return "NO-WNU";
    case Kind::config_error: return "CONFIG-ERROR";
    case Kind::internal_error: return "INTERNAL-ERROR";
  }
  return "INTERNAL-ERROR";
}

namespace {

using Answer = std::optional<Tuple>;

std::string domains_string(const Instance& inst) {
  std::string s;
  for (const Variable& v : inst.variables()) s += v.name + "=" + v.domain.to_string() + " ";
  if (!s.empty()) s.pop_back();
  return s;
}

// Every variable occurring in a constraint has all of its values in one
// linked component.  Unconstrained variables are ignored.
bool linked_ignoring_isolated(const Instance& inst) {
  for (const std::vector<std::size_t>& frag : fragments(inst)) {
    const Instance sub = sub_instance(inst, frag);
    if (sub.constraints().empty()) continue;
    if (!is_linked(sub)) return false;
  }
  return true;
}

// Enumerates Z_q1 x ... x Z_qk in lexicographic order.
std::vector<Tuple> all_points(const std::vector<unsigned>& moduli) {
  std::vector<Tuple> out{Tuple(moduli.size(), 0)};
  for (std::size_t j = moduli.size(); j-- > 0;) {
    std::vector<Tuple> next;
    for (const Tuple& t : out) {
      for (Element a = 0; a < moduli[j]; ++a) {
        Tuple u = t;
        u[j] = a;
        next.push_back(std::move(u));
      }
    }
    out = std::move(next);
  }
  std::sort(out.begin(), out.end());
  return out;
}

bool satisfies_equation(std::span<const std::size_t> coords, const HyperplaneResult& h,
                        std::span<const Element> point, unsigned p) {
  std::uint64_t s = 0;
  for (std::size_t j = 0; j < coords.size(); ++j) s += std::uint64_t{h.coeffs[j]} * point[coords[j]];
  return s % p == h.constant;
}

class Engine {
 public:
  explicit Engine(const SolverConfig& cfg) : cfg_(cfg) {}

  const SolveStats& stats() const { return stats_; }

  Answer solve_rec(const Instance& inst, int type, std::size_t t3) {
    if (++stats_.nodes > cfg_.max_nodes) throw ConfigError("node budget exhausted");
    if (t3 > cfg_.max_type3_depth) throw ConfigError("weakening depth limit reached");
    stats_.max_type3_depth = std::max(stats_.max_type3_depth, t3);
    Instance cur = normalize(inst);
    const std::string key = cur.fingerprint();
    if (auto it = memo_.find(key); it != memo_.end()) {
      ++stats_.memo_hits;
      return it->second;
    }
    if (!active_.insert(key).second) {
      throw InvariantError("recursive call on an instance already being solved");
    }
    ++depth_;
    stats_.max_depth = std::max(stats_.max_depth, depth_ - 1);
    emit("enter", domains_string(cur), type, t3);
    Answer result;
    try {
      result = run(std::move(cur), t3);
    } catch (...) {
      --depth_;
      active_.erase(key);
      throw;
    }
    --depth_;
    active_.erase(key);
    if (result && !inst.satisfies(*result)) {
      throw InvariantError("recursive call returned an assignment that is not a solution");
    }
    memo_.emplace(key, result);
    return result;
  }

  Answer unlinked(const Instance& inst, std::size_t t3) {
    const auto comps = linked_components(inst);
    emit("unlinked", std::to_string(comps.size()) + " linked components", 0, t3);
    for (const std::vector<ElementSet>& comp : comps) {
      require_shrink(inst, comp, "linked component");
      if (Answer a = solve_rec(apply_reduction(inst, comp), 2, t3)) return a;
    }
    return std::nullopt;
  }

  Answer linear(const Instance& inst, std::size_t t3) {
    const LinearFactorization f = factorize_to_linear(inst);
    emit("7", std::to_string(f.system.vars.size()) + " scalar variables", 0, t3);
    const std::size_t nscalar = f.system.vars.size();
    std::vector<Equation> eq;
    std::size_t previous_count = SIZE_MAX;

    while (true) {
      LinearSystem sys = f.system;
      sys.equations.insert(sys.equations.end(), eq.begin(), eq.end());
      TraceEvent ev = event("8", std::to_string(eq.size()) + " learned equations", 0, t3);
      ev.system = &sys;
      send(ev);

      const LinearSolution ls = solve_linear_system(sys);
      if (ls.kind == LinearSolution::Kind::inconsistent) return std::nullopt;
      if (ls.kind == LinearSolution::Kind::unique) {
        const std::vector<ElementSet> red = f.reduction_for(ls.solution);
        require_shrink(inst, red, "unique linear solution");
        return solve_rec(apply_reduction(inst, red), 4, t3);
      }
      const AffineParam& param = ls.param;
      const std::size_t count = param.point_count();
      if (count >= previous_count) throw InvariantError("learned equation did not shrink the system");
      previous_count = count;

      auto at = [&](const Instance& theta, std::span<const Element> point) {
        const std::vector<ElementSet> red = f.reduction_for(param.evaluate(point));
        require_shrink(theta, red, "class reduction");
        return solve_rec(apply_reduction(theta, red), 4, t3);
      };

      const Tuple origin(param.dimension(), 0);
      if (Answer a = at(inst, origin)) {
        emit("9", "solution in the class of the origin", 0, t3);
        return a;
      }

      Instance theta = inst;
      theta.set_constraints(remove_weaker(inst, inst.constraints()));
      emit("10", std::to_string(theta.constraints().size()) + " constraints", 0, t3);

      const std::vector<Tuple> probes = basis_points(param);
      theta = make_crucial(theta, [&](const Instance& omega) {
        for (const Tuple& b : probes) {
          if (!at(omega, b)) return true;
        }
        return false;
      });
      emit("11", std::to_string(theta.constraints().size()) + " constraints remain", 0, t3);

      std::optional<Equation> learned;
      const std::string step = linked_ignoring_isolated(theta) ? "13" : "12";
      if (step == "12") {
        learned = prefix_scan(theta, param, at, nscalar);
      } else {
        learned = hyperplane_step(theta, param, at, nscalar);
        if (!learned) {
          emit("13", "no class admits a solution", 0, t3);
          return std::nullopt;
        }
      }
      TraceEvent le = event(step, format_equation(*learned, sys.vars), 0, t3);
      le.equation = &*learned;
      le.system = &sys;
      send(le);
      eq.push_back(std::move(*learned));
      ++stats_.learned_equations;
      if (eq.size() > nscalar) throw InvariantError("more learned equations than scalar variables");
    }
  }

 private:
  using PointSolver = std::function<Answer(const Instance&, std::span<const Element>)>;

  Answer run(Instance inst, std::size_t t3) {
    while (true) {
      if (inst.constraints().empty()) return least_assignment(inst);
      bool all_single = true;
      for (const Variable& v : inst.variables()) all_single = all_single && v.domain.size() == 1;
      if (all_single) {
        Tuple t = least_assignment(inst);
        return inst.satisfies(t) ? Answer(t) : std::nullopt;
      }

      const auto frags = fragments(inst);
      if (frags.size() > 1) return split(inst, frags, t3);

      // Step 1
      const ConsistencyResult cc = enforce_cycle_consistency(inst);
      if (cc.kind == ConsistencyResult::Kind::no_solution) {
        emit("1", "no solution", 0, t3);
        return std::nullopt;
      }
      if (cc.kind == ConsistencyResult::Kind::reduction) {
        inst = reduce_one(inst, cc.variable, cc.subset, "1", t3);
        continue;
      }
      if (!is_linked(inst)) return unlinked(inst, t3);

      // Step 2
      const IrreducibilityResult irr = check_irreducibility(
          inst, [&](const Instance& sub) { return solve_rec(sub, 2, t3); });
      if (irr.kind == IrreducibilityResult::Kind::no_solution) {
        emit("2", "no solution", 0, t3);
        return std::nullopt;
      }
      if (irr.kind == IrreducibilityResult::Kind::reduction) {
        inst = reduce_one(inst, irr.variable, irr.subset, "2", t3);
        continue;
      }

      // Step 3
      std::optional<std::vector<ElementSet>> weak_red = weakened_projections(inst, t3);
      if (!weak_red) {
        emit("3", "weakened instance has no solution", 0, t3);
        return std::nullopt;
      }
      if (*weak_red != inst.domains()) {
        emit("3", "reduce to values solvable in the weakened instance", 1, t3);
        inst = normalize(apply_reduction(inst, *weak_red));
        continue;
      }

      // Steps 4-6
      if (auto red = structural_reduction(inst, t3)) {
        inst = normalize(apply_reduction(inst, *red));
        continue;
      }
      return linear(inst, t3);
    }
  }

  static Tuple least_assignment(const Instance& inst) {
    Tuple t;
    for (const Variable& v : inst.variables()) t.push_back(v.domain.min());
    return t;
  }

  Answer split(const Instance& inst, const std::vector<std::vector<std::size_t>>& frags,
               std::size_t t3) {
    emit("split", std::to_string(frags.size()) + " fragments", 0, t3);
    Tuple out(inst.size(), 0);
    for (const std::vector<std::size_t>& frag : frags) {
      const Instance sub = sub_instance(inst, frag);
      Answer a = sub.constraints().empty() ? Answer(least_assignment(sub)) : solve_rec(sub, 0, t3);
      if (!a) return std::nullopt;
      for (std::size_t k = 0; k < frag.size(); ++k) out[frag[k]] = (*a)[k];
    }
    return out;
  }

  Instance reduce_one(const Instance& inst, std::size_t var, ElementSet subset,
                      const std::string& step, std::size_t t3) {
    std::vector<ElementSet> red = inst.domains();
    red[var] = subset;
    emit(step, "reduce " + inst.variable(var).name + " to " + subset.to_string(), 1, t3);
    return normalize(apply_reduction(inst, red));
  }

  void require_shrink(const Instance& inst, const std::vector<ElementSet>& red,
                      const std::string& what) {
    if (red == inst.domains()) throw InvariantError(what + " does not shrink any domain");
  }

  // Projections of the weakened instance's solution set onto each variable,
  // or nullopt if it has none.
  std::optional<std::vector<ElementSet>> weakened_projections(const Instance& inst,
                                                              std::size_t t3) {
    std::vector<Constraint> cs;
    for (const Constraint& c : inst.constraints()) {
      for (Constraint& w : strongest_weaker(inst, c)) cs.push_back(std::move(w));
    }
    Instance weak = inst;
    weak.set_constraints(remove_weaker(inst, std::move(cs)));
    if (normalize(weak).fingerprint() == inst.fingerprint()) {
      throw InvariantError("weakening left the instance unchanged");
    }

    std::vector<ElementSet> covered(inst.size());
    auto record = [&](const Tuple& t) {
      for (std::size_t i = 0; i < t.size(); ++i) covered[i].insert(t[i]);
    };
    Answer first = solve_rec(weak, 3, t3 + 1);
    if (!first) return std::nullopt;
    record(*first);
    for (std::size_t i = 0; i < inst.size(); ++i) {
      for (Element b : inst.variable(i).domain.elements()) {
        if (covered[i].contains(b)) continue;
        Instance pinned = weak;
        pinned.set_domain(i, ElementSet::single(b));
        if (Answer a = solve_rec(pinned, 3, t3 + 1)) record(*a);
      }
    }
    return covered;
  }

  const StructureReport& report_for(const Variable& v, Subalgebra& sub_out) {
    sub_out = subalgebra(*v.algebra, v.domain);
    const auto key = std::make_pair(v.algebra.get(), v.domain.bits());
    auto it = reports_.find(key);
    if (it == reports_.end()) {
      StructureReport r = classify_domain(*sub_out.algebra, cfg_.classify);
      if (cfg_.on_report) cfg_.on_report(*sub_out.algebra, r);
      it = reports_.emplace(key, std::move(r)).first;
    }
    return it->second;
  }

  std::optional<std::vector<ElementSet>> structural_reduction(const Instance& inst,
                                                              std::size_t t3) {
    struct Found {
      std::size_t var;
      ElementSet subset;
      std::string detail;
    };
    std::optional<Found> best[3];
    for (std::size_t i = 0; i < inst.size(); ++i) {
      const Variable& v = inst.variable(i);
      if (v.domain.size() < 2) continue;
      Subalgebra sub;
      const StructureReport& r = report_for(v, sub);
      auto lift = [&](ElementSet labels) {
        ElementSet s;
        for (Element l : labels.elements()) s.insert(sub.labels[l]);
        return s;
      };
      std::size_t slot = 3;
      ElementSet subset;
      if (r.is_binary_absorbing()) {
        slot = 0;
        subset = lift(std::get<BinaryAbsorbing>(r.outcome).set);
      } else if (r.is_center()) {
        slot = 1;
        subset = lift(std::get<Center>(r.outcome).set);
      } else if (r.is_pc_quotient()) {
        slot = 2;
        const Congruence& sigma = std::get<PcQuotient>(r.outcome).congruence;
        subset = lift(sigma.blocks()[sigma.block_of(0)]);
      }
      if (slot < 3 && !best[slot]) best[slot] = Found{i, subset, r.to_string()};
    }
    static const char* const steps[3] = {"4", "5", "6"};
    for (std::size_t s = 0; s < 3; ++s) {
      if (!best[s]) continue;
      std::vector<ElementSet> red = inst.domains();
      if (best[s]->subset == red[best[s]->var]) {
        throw InvariantError("structural reduction does not shrink the domain");
      }
      red[best[s]->var] = best[s]->subset;
      emit(steps[s],
           "reduce " + inst.variable(best[s]->var).name + " to " + best[s]->subset.to_string() +
               " (" + best[s]->detail + ")",
           1, t3);
      return red;
    }
    return std::nullopt;
  }

  std::vector<bool> good_points(const Instance& theta, const PointSolver& at,
                                const std::vector<Tuple>& points) {
    std::vector<bool> good;
    for (const Tuple& a : points) good.push_back(at(theta, a).has_value());
    return good;
  }

  std::vector<Tuple> enumerate(const AffineParam& param) {
    if (param.point_count() > cfg_.max_points) {
      throw ConfigError("parameter space too large to enumerate");
    }
    std::vector<unsigned> moduli;
    for (const FreeVar& fv : param.free_vars) moduli.push_back(fv.modulus);
    return all_points(moduli);
  }

  Equation to_scalar_equation(const AffineParam& param, std::span<const std::size_t> coords,
                              const HyperplaneResult& h, unsigned p, std::size_t nscalar) {
    Equation e;
    e.prime = p;
    e.coeffs.assign(nscalar, 0);
    for (std::size_t j = 0; j < coords.size(); ++j) {
      e.coeffs[param.free_vars[coords[j]].scalar] = h.coeffs[j];
    }
    e.rhs = h.constant;
    return e;
  }

  // Theta not linked: find the first prefix length whose projection of the
  // good set is not everything and learn its equation.
  Equation prefix_scan(const Instance& theta, const AffineParam& param, const PointSolver& at,
                       std::size_t nscalar) {
    const std::vector<Tuple> points = enumerate(param);
    const std::vector<bool> good = good_points(theta, at, points);
    const std::size_t k = param.dimension();
    std::size_t prefix_total = 1;
    for (std::size_t i = 1; i <= k; ++i) {
      prefix_total *= param.free_vars[i - 1].modulus;
      std::set<Tuple> prefixes;
      for (std::size_t x = 0; x < points.size(); ++x) {
        if (good[x]) prefixes.emplace(points[x].begin(), points[x].begin() + static_cast<long>(i));
      }
      if (prefixes.size() == prefix_total) continue;

      const unsigned p = param.free_vars[i - 1].modulus;
      std::vector<std::size_t> block;
      for (std::size_t j = 0; j < i; ++j) {
        if (param.free_vars[j].modulus == p) block.push_back(j);
      }
      const HyperplaneResult h = learn_hyperplane(
          [&](std::span<const Element> x) {
            Tuple pre(i, 0);
            for (std::size_t j = 0; j < block.size(); ++j) pre[block[j]] = x[j];
            return prefixes.contains(pre);
          },
          p, block.size());
      if (h.kind != HyperplaneResult::Kind::equation) {
        throw AffineStructureViolation("prefix set is not cut out by one equation");
      }
      std::vector<unsigned> prefix_moduli;
      for (std::size_t j = 0; j < i; ++j) prefix_moduli.push_back(param.free_vars[j].modulus);
      for (const Tuple& pre : all_points(prefix_moduli)) {
        if (satisfies_equation(block, h, pre, p) && !prefixes.contains(pre)) {
          throw AffineStructureViolation("learned prefix equation admits a bad prefix");
        }
      }
      return to_scalar_equation(param, block, h, p, nscalar);
    }
    throw AffineStructureViolation("every prefix extends to a solvable class");
  }

  // Theta linked: learn the hyperplane of good points.  nullopt when no
  // point is good.
  std::optional<Equation> hyperplane_step(const Instance& theta, const AffineParam& param,
                                          const PointSolver& at, std::size_t nscalar) {
    const std::size_t k = param.dimension();
    std::set<unsigned> primes;
    for (const FreeVar& fv : param.free_vars) primes.insert(fv.modulus);

    if (primes.size() == 1) {
      const unsigned p = *primes.begin();
      const HyperplaneResult h = learn_hyperplane(
          [&](std::span<const Element> x) { return at(theta, x).has_value(); }, p, k);
      if (h.kind == HyperplaneResult::Kind::empty) return std::nullopt;
      if (h.kind == HyperplaneResult::Kind::full) {
        throw AffineStructureViolation("every class admits a solution of a crucial instance");
      }
      std::vector<std::size_t> coords(k);
      for (std::size_t j = 0; j < k; ++j) coords[j] = j;
      return to_scalar_equation(param, coords, h, p, nscalar);
    }

    const std::vector<Tuple> points = enumerate(param);
    const std::vector<bool> good = good_points(theta, at, points);
    if (std::find(good.begin(), good.end(), true) == good.end()) return std::nullopt;
    std::map<Tuple, bool> good_of;
    for (std::size_t x = 0; x < points.size(); ++x) good_of[points[x]] = good[x];
    for (unsigned p : primes) {
      std::vector<std::size_t> block;
      for (std::size_t j = 0; j < k; ++j) {
        if (param.free_vars[j].modulus == p) block.push_back(j);
      }
      const HyperplaneResult h = learn_hyperplane(
          [&](std::span<const Element> x) {
            Tuple a(k, 0);
            for (std::size_t j = 0; j < block.size(); ++j) a[block[j]] = x[j];
            return good_of.at(a);
          },
          p, block.size());
      if (h.kind != HyperplaneResult::Kind::equation) continue;
      bool exact = true;
      for (std::size_t x = 0; x < points.size() && exact; ++x) {
        exact = satisfies_equation(block, h, points[x], p) == good[x];
      }
      if (exact) return to_scalar_equation(param, block, h, p, nscalar);
    }
    throw AffineStructureViolation("good classes do not form a hyperplane");
  }

  TraceEvent event(std::string step, std::string detail, int type, std::size_t t3) const {
    TraceEvent ev;
    ev.step = std::move(step);
    ev.detail = std::move(detail);
    ev.recursion_type = type;
    ev.depth = depth_ > 0 ? depth_ - 1 : 0;
    ev.type3_depth = t3;
    return ev;
  }

  void send(const TraceEvent& ev) const {
    if (cfg_.trace) cfg_.trace(ev);
  }

  void emit(std::string step, std::string detail, int type, std::size_t t3) const {
    if (cfg_.trace) send(event(std::move(step), std::move(detail), type, t3));
  }

  const SolverConfig& cfg_;
  SolveStats stats_;
  std::size_t depth_ = 0;
  std::unordered_map<std::string, Answer> memo_;
  std::unordered_set<std::string> active_;
  std::map<std::pair<const Algebra*, std::uint64_t>, StructureReport> reports_;
};

template <typename Body>
SolveOutcome guarded(const Instance& inst, const SolverConfig& cfg, Body body) {
  SolveOutcome out;
  Engine engine(cfg);
  try {
    inst.validate();
    Answer a = body(engine);
    if (a) {
      if (a->size() != inst.size() || !inst.satisfies(*a)) {
        throw InvariantError("final assignment failed verification");
      }
      out.kind = SolveOutcome::Kind::solution;
      out.assignment = std::move(*a);
    } else {
      out.kind = SolveOutcome::Kind::no_solution;
    }
  } catch (const ConfigError& e) {
    out.kind = SolveOutcome::Kind::config_error;
    out.detail = e.what();
  } catch (const Error& e) {
    out.kind = SolveOutcome::Kind::internal_error;
    out.detail = e.what();
  }
  out.stats = engine.stats();
  return out;
}

}  // namespace

SolveOutcome solve(const Instance& inst, const SolverConfig& cfg) {
  return guarded(inst, cfg, [&](Engine& e) { return e.solve_rec(inst, 0, 0); });
}

SolveOutcome solve_unlinked(const Instance& inst, const SolverConfig& cfg) {
  return guarded(inst, cfg, [&](Engine& e) -> Answer {
    const Instance cur = normalize(inst);
    if (is_fragmented(cur)) throw PreconditionError("instance is fragmented");
    if (enforce_cycle_consistency(cur).kind != ConsistencyResult::Kind::consistent) {
      throw PreconditionError("instance is not cycle-consistent");
    }
    if (is_linked(cur)) throw PreconditionError("instance is linked");
    return e.unlinked(cur, 0);
  });
}

SolveOutcome linear_phase(const Instance& inst, const SolverConfig& cfg) {
  return guarded(inst, cfg, [&](Engine& e) { return e.linear(normalize(inst), 0); });
}

}  // namespace wnucsp
