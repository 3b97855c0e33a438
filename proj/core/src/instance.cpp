#include "wnucsp/instance.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "modp.hpp"

namespace wnucsp {

namespace {

bool same_algebra(const AlgebraPtr& a, const AlgebraPtr& b) {
  return a == b || *a == *b;
}

// Sort key identifying a constraint through the instance's domains.
std::pair<std::vector<std::size_t>, std::vector<Tuple>> constraint_key(const Instance& inst,
                                                                       const Constraint& c) {
  return {c.scope, inst.restricted(c).tuples()};
}

std::vector<std::size_t> sorted_order(const std::vector<std::size_t>& scope) {
  std::vector<std::size_t> order(scope.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scope[a] < scope[b]; });
  return order;
}

// Canonical dummy-free form of (scope, relation) read through `inst`.
// Returns nullopt for a constraint that holds everywhere.
std::optional<Constraint> canonical(const Instance& inst, const std::vector<std::size_t>& scope,
                                    const Relation& rel) {
  std::vector<ElementSet> carriers;
  for (std::size_t v : scope) carriers.push_back(inst.variable(v).domain);
  Relation r = restrict(rel, carriers);
  const std::vector<std::size_t> order = sorted_order(scope);
  r = permute(r, order);
  std::vector<std::size_t> sorted_scope;
  std::vector<ElementSet> sorted_carriers;
  for (std::size_t i : order) {
    sorted_scope.push_back(scope[i]);
    sorted_carriers.push_back(carriers[i]);
  }
  ReducedRelation reduced = drop_dummies(r, sorted_carriers);
  if (reduced.kept.empty()) return std::nullopt;
  Constraint c;
  for (std::size_t k : reduced.kept) c.scope.push_back(sorted_scope[k]);
  c.relation = std::make_shared<const Relation>(std::move(reduced.relation));
  return c;
}

std::vector<Constraint> dedupe(const Instance& inst, std::vector<Constraint> cs) {
  std::map<std::pair<std::vector<std::size_t>, std::vector<Tuple>>, Constraint> unique;
  for (Constraint& c : cs) unique.try_emplace(constraint_key(inst, c), std::move(c));
  std::vector<Constraint> out;
  for (auto& [key, c] : unique) out.push_back(std::move(c));
  return out;
}

}  // namespace

// ============================================================================
// Instance
// ============================================================================

std::size_t Instance::add_variable(std::string name, AlgebraPtr algebra) {
  const ElementSet full = algebra->carrier();
  return add_variable(std::move(name), std::move(algebra), full);
}

std::size_t Instance::add_variable(std::string name, AlgebraPtr algebra, ElementSet domain) {
  if (!algebra) throw ArgumentError("variable without an algebra");
  if (domain.empty() || !domain.subset_of(algebra->carrier())) {
    throw ArgumentError("domain of " + name + " is not a nonempty subset of the carrier");
  }
  variables_.push_back({std::move(name), std::move(algebra), domain});
  return variables_.size() - 1;
}

void Instance::add_constraint(RelationPtr relation, std::vector<std::size_t> scope) {
  if (!relation) throw ArgumentError("constraint without a relation");
  if (relation->arity() != scope.size()) throw ArgumentError("scope length differs from arity");
  for (std::size_t i = 0; i < scope.size(); ++i) {
    if (scope[i] >= variables_.size()) throw ArgumentError("scope variable out of range");
    if (!same_algebra(relation->coords()[i], variables_[scope[i]].algebra)) {
      throw ArgumentError("relation coordinate algebra differs from variable " +
                          variables_[scope[i]].name);
    }
  }
  std::vector<std::size_t> first;  // first position of each distinct variable
  std::vector<std::size_t> unique_scope;
  std::vector<std::size_t> position_of(scope.size());
  for (std::size_t i = 0; i < scope.size(); ++i) {
    auto it = std::find(unique_scope.begin(), unique_scope.end(), scope[i]);
    if (it == unique_scope.end()) {
      position_of[i] = unique_scope.size();
      unique_scope.push_back(scope[i]);
      first.push_back(i);
    } else {
      position_of[i] = static_cast<std::size_t>(it - unique_scope.begin());
    }
  }
  if (unique_scope.size() != scope.size()) {
    std::vector<Tuple> kept;
    for (const Tuple& t : relation->tuples()) {
      bool diagonal = true;
      for (std::size_t i = 0; i < t.size() && diagonal; ++i) {
        diagonal = t[i] == t[first[position_of[i]]];
      }
      if (diagonal) kept.push_back(t);
    }
    Relation on_diagonal(relation->coords(), std::move(kept));
    relation = std::make_shared<const Relation>(project(on_diagonal, first));
    scope = std::move(unique_scope);
  }
  constraints_.push_back({std::move(relation), std::move(scope)});
}

std::vector<ElementSet> Instance::domains() const {
  std::vector<ElementSet> out;
  for (const Variable& v : variables_) out.push_back(v.domain);
  return out;
}

std::vector<ElementSet> Instance::scope_domains(const Constraint& c) const {
  std::vector<ElementSet> out;
  for (std::size_t v : c.scope) out.push_back(variables_[v].domain);
  return out;
}

Relation Instance::restricted(const Constraint& c) const {
  return restrict(*c.relation, scope_domains(c));
}

bool Instance::satisfies(std::span<const Element> assignment) const {
  if (assignment.size() != variables_.size()) return false;
  for (std::size_t i = 0; i < assignment.size(); ++i) {
    if (!variables_[i].domain.contains(assignment[i])) return false;
  }
  Tuple t;
  for (const Constraint& c : constraints_) {
    t.clear();
    for (std::size_t v : c.scope) t.push_back(assignment[v]);
    if (!c.relation->contains(t)) return false;
  }
  return true;
}

void Instance::validate() const {
  for (const Variable& v : variables_) {
    if (v.domain.empty()) throw ReductionError("empty domain for " + v.name);
    if (!is_subuniverse(*v.algebra, v.domain)) {
      throw ReductionError("domain " + v.domain.to_string() + " of " + v.name +
                           " is not a subuniverse");
    }
  }
}

std::string Instance::fingerprint() const {
  std::string key;
  for (const Variable& v : variables_) {
    key += std::to_string(reinterpret_cast<std::uintptr_t>(v.algebra.get()));
    key += ':';
    key += std::to_string(v.domain.bits());
    key += ';';
  }
  key += '|';
  std::vector<std::string> parts;
  for (const Constraint& c : constraints_) {
    std::string part;
    for (std::size_t v : c.scope) part += std::to_string(v) + ',';
    part += '=';
    const Relation r = restricted(c);
    for (const Tuple& t : r.tuples()) {
      for (Element a : t) part += static_cast<char>('0' + a);
      part += '.';
    }
    parts.push_back(std::move(part));
  }
  std::sort(parts.begin(), parts.end());
  for (const std::string& p : parts) key += p + '|';
  return key;
}

Instance apply_reduction(const Instance& inst, std::span<const ElementSet> reduction) {
  if (reduction.size() != inst.size()) throw ArgumentError("reduction has wrong length");
  Instance out = inst;
  for (std::size_t i = 0; i < reduction.size(); ++i) {
    const Variable& v = inst.variable(i);
    const ElementSet d = reduction[i];
    if (d.empty()) throw ReductionError("reduction of " + v.name + " is empty");
    if (!d.subset_of(v.domain)) {
      throw ReductionError("reduction of " + v.name + " leaves the current domain");
    }
    if (!is_subuniverse(*v.algebra, d)) {
      throw ReductionError(d.to_string() + " is not a subuniverse for " + v.name);
    }
    out.set_domain(i, d);
  }
  return out;
}

Instance normalize(const Instance& inst) {
  std::vector<Constraint> cs;
  for (const Constraint& c : inst.constraints()) {
    if (auto n = canonical(inst, c.scope, *c.relation)) cs.push_back(std::move(*n));
  }
  Instance out = inst;
  out.set_constraints(dedupe(inst, std::move(cs)));
  return out;
}

// ============================================================================
// Weaker constraints
// ============================================================================

bool is_weaker(const Instance& inst, const Constraint& weak, const Constraint& strong) {
  std::vector<std::size_t> idx;
  std::size_t rest = 1;
  for (std::size_t k = 0; k < strong.scope.size(); ++k) {
    if (std::find(weak.scope.begin(), weak.scope.end(), strong.scope[k]) == weak.scope.end()) {
      rest *= inst.variable(strong.scope[k]).domain.size();
    }
  }
  for (std::size_t v : weak.scope) {
    auto it = std::find(strong.scope.begin(), strong.scope.end(), v);
    if (it == strong.scope.end()) return false;
    idx.push_back(static_cast<std::size_t>(it - strong.scope.begin()));
  }
  const Relation w = inst.restricted(weak);
  const Relation s = inst.restricted(strong);
  if (!idx.empty()) {
    const Relation ps = project(s, idx);
    for (const Tuple& t : ps.tuples()) {
      if (!w.contains(t)) return false;
    }
  } else if (w.empty() && !s.empty()) {
    return false;
  }
  return s.size() != w.size() * rest;
}

std::vector<Constraint> remove_weaker(const Instance& inst, std::vector<Constraint> cs) {
  cs = dedupe(inst, std::move(cs));
  std::vector<Constraint> out;
  for (std::size_t i = 0; i < cs.size(); ++i) {
    bool weaker = false;
    for (std::size_t j = 0; j < cs.size() && !weaker; ++j) {
      weaker = i != j && is_weaker(inst, cs[i], cs[j]);
    }
    if (!weaker) out.push_back(cs[i]);
  }
  return out;
}

Instance weaken_all(const Instance& inst, std::size_t cap) {
  std::vector<Constraint> cs;
  for (const Constraint& c : inst.constraints()) {
    WeakerRelationEnumerator e(*c.relation, inst.scope_domains(c), cap);
    while (auto w = e.next()) {
      Constraint nc;
      for (std::size_t y : w->coords) nc.scope.push_back(c.scope[y]);
      nc.relation = std::make_shared<const Relation>(std::move(w->relation));
      cs.push_back(std::move(nc));
    }
    if (!e.complete()) throw ConfigError("weaker-relation enumeration hit its cap");
  }
  Instance out = inst;
  out.set_constraints(dedupe(inst, std::move(cs)));
  return out;
}

std::vector<Constraint> strongest_weaker(const Instance& inst, const Constraint& c) {
  auto base = canonical(inst, c.scope, *c.relation);
  if (!base) return {};
  const Relation& rel = *base->relation;
  const std::size_t k = rel.arity();
  std::vector<Constraint> candidates;
  auto consider = [&](const std::vector<std::size_t>& scope, const Relation& r) {
    if (auto n = canonical(inst, scope, r)) {
      if (is_weaker(inst, *n, *base)) candidates.push_back(std::move(*n));
    }
  };
  if (k >= 2) {
    for (std::size_t drop = 0; drop < k; ++drop) {
      std::vector<std::size_t> idx;
      std::vector<std::size_t> scope;
      for (std::size_t i = 0; i < k; ++i) {
        if (i != drop) {
          idx.push_back(i);
          scope.push_back(base->scope[i]);
        }
      }
      consider(scope, project(rel, idx));
    }
  }
  std::vector<ElementSet> carriers = inst.scope_domains(*base);
  const Relation space = Relation::full(rel.coords(), carriers);
  const std::vector<const Algebra*> ptrs = rel.coord_ptrs();
  for (const Tuple& t : space.tuples()) {
    if (rel.contains(t)) continue;
    std::vector<Tuple> gens = rel.tuples();
    gens.push_back(t);
    consider(base->scope, Relation(rel.coords(), generate_subuniverse(ptrs, gens).tuples));
  }
  return remove_weaker(inst, std::move(candidates));
}

Instance weaken_constraint(const Instance& inst, std::size_t i) {
  std::vector<Constraint> cs;
  for (std::size_t j = 0; j < inst.constraints().size(); ++j) {
    if (j != i) cs.push_back(inst.constraints()[j]);
  }
  for (Constraint& w : strongest_weaker(inst, inst.constraints()[i])) cs.push_back(std::move(w));
  Instance out = inst;
  out.set_constraints(remove_weaker(inst, std::move(cs)));
  return out;
}

Instance make_crucial(const Instance& inst, const UnsatOracle& unsat, std::size_t max_rounds) {
  if (!unsat(inst)) throw OracleError("oracle does not hold for the starting instance");
  Instance cur = normalize(inst);
  cur.set_constraints(remove_weaker(cur, cur.constraints()));
  if (!unsat(cur)) throw OracleError("oracle changed its answer on an equivalent instance");
  std::size_t rounds = 0;
  bool changed = true;
  while (changed) {
    changed = false;
    for (std::size_t i = 0; i < cur.constraints().size(); ++i) {
      Instance omega = weaken_constraint(cur, i);
      if (unsat(omega)) {
        cur = std::move(omega);
        changed = true;
        if (++rounds > max_rounds) throw ConfigError("make_crucial exceeded its round limit");
        break;
      }
    }
  }
  return cur;
}

// ============================================================================
// Linear systems
// ============================================================================

bool LinearSystem::satisfied_by(std::span<const Element> values) const {
  if (values.size() != vars.size()) return false;
  for (const Equation& e : equations) {
    std::uint64_t s = 0;
    for (std::size_t v = 0; v < vars.size(); ++v) s += std::uint64_t{e.coeffs[v]} * values[v];
    if (s % e.prime != e.rhs) return false;
  }
  return true;
}

void LinearSystem::validate() const {
  for (const ScalarVar& v : vars) {
    if (!detail::is_prime(v.prime)) {
      throw FormatError("modulus " + std::to_string(v.prime) + " of " + v.name +
                        " is not prime");
    }
  }
  for (const Equation& e : equations) {
    if (!detail::is_prime(e.prime)) throw FormatError("equation modulus is not prime");
    if (e.coeffs.size() != vars.size()) throw ArgumentError("equation has wrong length");
    if (e.rhs >= e.prime) throw ArgumentError("equation constant out of range");
    for (std::size_t v = 0; v < vars.size(); ++v) {
      if (e.coeffs[v] >= e.prime) throw ArgumentError("equation coefficient out of range");
      if (e.coeffs[v] != 0 && vars[v].prime != e.prime) {
        throw ArgumentError("equation mixes moduli");
      }
    }
  }
}

std::vector<Equation> equations_from_points(const std::vector<Tuple>& points,
                                            std::span<const unsigned> primes) {
  if (points.empty()) throw EmptyRelationError("no points to describe");
  const std::size_t r = primes.size();
  for (unsigned p : primes) {
    if (!detail::is_prime(p)) throw FormatError("modulus " + std::to_string(p) + " is not prime");
  }
  std::set<Tuple> distinct(points.begin(), points.end());
  for (const Tuple& t : distinct) {
    if (t.size() != r) throw ArgumentError("point has wrong length");
    for (std::size_t c = 0; c < r; ++c) {
      if (t[c] >= primes[c]) throw ArgumentError("point entry out of range");
    }
  }
  const Tuple& t0 = *distinct.begin();
  std::set<unsigned> moduli(primes.begin(), primes.end());
  std::vector<Equation> out;
  std::size_t coset_size = 1;
  for (unsigned p : moduli) {
    std::vector<std::size_t> cols;
    for (std::size_t c = 0; c < r; ++c) {
      if (primes[c] == p) cols.push_back(c);
    }
    const std::size_t k = cols.size();
    std::vector<std::size_t> local(k);
    for (std::size_t j = 0; j < k; ++j) local[j] = j;

    detail::Matrix diffs;
    for (const Tuple& t : distinct) {
      std::vector<Element> row(k);
      for (std::size_t j = 0; j < k; ++j) row[j] = (t[cols[j]] + p - t0[cols[j]]) % p;
      diffs.push_back(std::move(row));
    }
    const std::vector<std::size_t> pivots = detail::row_reduce(diffs, p, local);
    for (std::size_t i = 0; i < pivots.size(); ++i) coset_size *= p;

    detail::Matrix null;
    for (std::size_t f = 0; f < k; ++f) {
      if (std::find(pivots.begin(), pivots.end(), f) != pivots.end()) continue;
      std::vector<Element> v(k, 0);
      v[f] = 1;
      for (std::size_t i = 0; i < pivots.size(); ++i) v[pivots[i]] = (p - diffs[i][f]) % p;
      null.push_back(std::move(v));
    }
    const std::size_t rank = detail::row_reduce(null, p, local).size();
    for (std::size_t i = 0; i < rank; ++i) {
      Equation e;
      e.prime = p;
      e.coeffs.assign(r, 0);
      std::uint64_t rhs = 0;
      for (std::size_t j = 0; j < k; ++j) {
        e.coeffs[cols[j]] = null[i][j];
        rhs += std::uint64_t{null[i][j]} * t0[cols[j]];
      }
      e.rhs = static_cast<Element>(rhs % p);
      out.push_back(std::move(e));
    }
  }
  if (coset_size != distinct.size()) {
    throw InvariantError("points do not form a coset of a subgroup");
  }
  return out;
}

std::vector<Equation> relation_to_equations(const Relation& rel,
                                            std::span<const LinearIso> isos) {
  if (isos.size() != rel.arity()) throw ArgumentError("iso count mismatch");
  std::vector<unsigned> primes;
  for (const LinearIso& iso : isos) primes.insert(primes.end(), iso.primes.begin(), iso.primes.end());
  std::vector<Tuple> points;
  for (const Tuple& t : rel.tuples()) {
    Tuple flat;
    for (std::size_t i = 0; i < t.size(); ++i) {
      const Tuple& img = isos[i].image.at(t[i]);
      flat.insert(flat.end(), img.begin(), img.end());
    }
    points.push_back(std::move(flat));
  }
  return equations_from_points(points, primes);
}

Element VariableSlice::block_of(Element a) const {
  auto it = std::lower_bound(labels.begin(), labels.end(), a);
  if (it == labels.end() || *it != a) throw ArgumentError("element outside the domain");
  return congruence.block_of(static_cast<Element>(it - labels.begin()));
}

ElementSet VariableSlice::block_for(std::span<const Element> values) const {
  const Element block = iso.preimage(values);
  ElementSet out;
  for (Element l : congruence.blocks()[block].elements()) out.insert(labels[l]);
  return out;
}

std::vector<ElementSet> LinearFactorization::reduction_for(
    std::span<const Element> scalars) const {
  std::vector<ElementSet> out;
  for (const VariableSlice& s : slices) {
    out.push_back(s.block_for(scalars.subspan(s.first, s.count)));
  }
  return out;
}

LinearFactorization factorize_to_linear(const Instance& inst) {
  LinearFactorization f;
  for (std::size_t i = 0; i < inst.size(); ++i) {
    const Variable& v = inst.variable(i);
    Subalgebra sub = subalgebra(*v.algebra, v.domain);
    VariableSlice s{Congruence::full(sub.labels.size()), sub.labels, LinearIso{}, 0, 0};
    if (sub.labels.size() == 1) {
      s.iso.image = {Tuple{}};
    } else {
      LinearQuotient lin = con_lin(*sub.algebra);
      if (lin.congruence.is_full()) {
        throw PreconditionError("domain of " + v.name + " has no proper linear quotient");
      }
      s.congruence = lin.congruence;
      s.iso = lin.iso;
    }
    s.first = f.system.vars.size();
    s.count = s.iso.primes.size();
    for (std::size_t j = 0; j < s.count; ++j) {
      std::string name = v.name + "'";
      if (s.count > 1) name += "." + std::to_string(j);
      f.system.vars.push_back({std::move(name), s.iso.primes[j]});
    }
    f.slices.push_back(std::move(s));
  }
  const std::size_t total = f.system.vars.size();
  for (const Constraint& c : inst.constraints()) {
    const Relation r = inst.restricted(c);
    std::vector<std::size_t> globals;
    std::vector<unsigned> primes;
    for (std::size_t v : c.scope) {
      const VariableSlice& s = f.slices[v];
      for (std::size_t j = 0; j < s.count; ++j) {
        globals.push_back(s.first + j);
        primes.push_back(s.iso.primes[j]);
      }
    }
    if (r.empty()) {
      Equation never{2, std::vector<Element>(total, 0), 1};
      f.system.equations.push_back(std::move(never));
      continue;
    }
    if (globals.empty()) continue;
    std::vector<Tuple> points;
    for (const Tuple& t : r.tuples()) {
      Tuple flat;
      for (std::size_t k = 0; k < t.size(); ++k) {
        const VariableSlice& s = f.slices[c.scope[k]];
        const Tuple& img = s.iso.image[s.block_of(t[k])];
        flat.insert(flat.end(), img.begin(), img.end());
      }
      points.push_back(std::move(flat));
    }
    for (const Equation& local : equations_from_points(points, primes)) {
      Equation e{local.prime, std::vector<Element>(total, 0), local.rhs};
      for (std::size_t k = 0; k < globals.size(); ++k) e.coeffs[globals[k]] = local.coeffs[k];
      f.system.equations.push_back(std::move(e));
    }
  }
  return f;
}

}  // namespace wnucsp
