#include "wnucsp/classify.hpp"

#include <algorithm>
#include <deque>
#include <functional>
#include <set>
#include <sstream>

namespace wnucsp {

namespace {

bool absorbs(const Algebra& alg, const OperationTable& t, ElementSet b) {
  for (Element x : b.elements()) {
    for (Element a = 0; a < alg.size(); ++a) {
      if (!b.contains(t({x, a})) || !b.contains(t({a, x}))) return false;
    }
  }
  return true;
}

bool proper_nonempty(const Algebra& alg, ElementSet s) {
  return !s.empty() && s != alg.carrier();
}

struct BfsResult {
  std::vector<Relation> relations;  // sorted by (size, tuples)
  bool complete = true;
};

// Invariant relations on alg^h containing `seed`, reached by repeatedly adding
// one orbit and closing.  `keep` filters results; `expand` decides whether a
// relation's supersets are worth exploring.
BfsResult invariant_supersets(const AlgebraPtr& alg, std::size_t h, std::vector<Tuple> seed,
                              const std::vector<std::vector<Tuple>>& orbits, std::size_t cap,
                              const std::function<bool(const Relation&)>& keep,
                              const std::function<bool(const Relation&)>& expand) {
  std::vector<AlgebraPtr> coords(h, alg);
  std::vector<const Algebra*> ptrs(h, alg.get());
  BfsResult out;
  std::set<std::vector<Tuple>> visited;
  std::deque<std::vector<Tuple>> queue;
  auto visit = [&](std::vector<Tuple> tuples) {
    if (visited.count(tuples)) return;
    if (visited.size() >= cap) {
      out.complete = false;
      return;
    }
    visited.insert(tuples);
    queue.push_back(std::move(tuples));
  };
  visit(generate_subuniverse(ptrs, seed).tuples);
  while (!queue.empty()) {
    std::vector<Tuple> cur = std::move(queue.front());
    queue.pop_front();
    Relation rel(coords, cur);
    if (keep(rel)) out.relations.push_back(rel);
    if (!expand(rel)) continue;
    for (const std::vector<Tuple>& orbit : orbits) {
      if (rel.contains(orbit.front())) continue;
      std::vector<Tuple> gens = cur;
      gens.insert(gens.end(), orbit.begin(), orbit.end());
      visit(generate_subuniverse(ptrs, gens).tuples);
    }
  }
  std::sort(out.relations.begin(), out.relations.end(),
            [](const Relation& a, const Relation& b) {
              if (a.size() != b.size()) return a.size() < b.size();
              return a.tuples() < b.tuples();
            });
  return out;
}

bool is_antisymmetric(const Relation& rel) {
  for (const Tuple& t : rel.tuples()) {
    if (t[0] != t[1] && rel.contains(Tuple{t[1], t[0]})) return false;
  }
  return true;
}

std::optional<Element> least_of(const Relation& order, std::size_t n) {
  for (Element l = 0; l < n; ++l) {
    bool below_all = true;
    for (Element x = 0; x < n && below_all; ++x) below_all = order.contains(Tuple{l, x});
    if (below_all) return l;
  }
  return std::nullopt;
}

AlgebraPtr share(const Algebra& alg) { return make_algebra(alg.wnu()); }

CenterSearch find_center_impl(const Algebra& alg, const ClassifyConfig& cfg) {
  CenterSearch search;
  const std::size_t n = alg.size();
  if (n < 2) return search;
  const AlgebraPtr self = share(alg);
  bool exhaustive = true;

  // Bounded invariant partial orders.
  {
    std::vector<Tuple> diagonal;
    std::vector<std::vector<Tuple>> orbits;
    for (Element a = 0; a < n; ++a) {
      diagonal.push_back({a, a});
      for (Element b = 0; b < n; ++b) {
        if (a != b) orbits.push_back({{a, b}});
      }
    }
    BfsResult orders = invariant_supersets(
        self, 2, diagonal, orbits, cfg.relation_cap,
        [](const Relation& r) { return is_bounded_partial_order(r); },
        [](const Relation& r) { return is_antisymmetric(r); });
    exhaustive = exhaustive && orders.complete;
    if (!orders.relations.empty()) {
      const Relation& order = orders.relations.front();
      Center c;
      c.set = ElementSet::single(*least_of(order, n));
      c.witness.kind = CenterWitness::Kind::least_of_order;
      c.witness.relation = order;
      search.status = SearchStatus::found;
      search.result = std::move(c);
      return search;
    }
  }

  // Central relations.
  if (n - 1 > cfg.central_arity_cap) exhaustive = false;
  const std::size_t max_h = std::min(n - 1, cfg.central_arity_cap);
  for (std::size_t h = 2; h <= max_h; ++h) {
    std::vector<Tuple> reflexive;
    std::vector<std::vector<Tuple>> orbits;
    const std::size_t total = [&] {
      std::size_t t = 1;
      for (std::size_t i = 0; i < h; ++i) t *= n;
      return t;
    }();
    for (std::size_t idx = 0; idx < total; ++idx) {
      Tuple t(h);
      std::size_t rest = idx;
      for (std::size_t i = h; i-- > 0;) {
        t[i] = static_cast<Element>(rest % n);
        rest /= n;
      }
      Tuple sorted = t;
      std::sort(sorted.begin(), sorted.end());
      if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
        reflexive.push_back(t);
      } else if (sorted == t) {
        std::vector<Tuple> orbit;
        do {
          orbit.push_back(sorted);
        } while (std::next_permutation(sorted.begin(), sorted.end()));
        orbits.push_back(std::move(orbit));
      }
    }
    BfsResult central = invariant_supersets(
        self, h, reflexive, orbits, cfg.relation_cap,
        [](const Relation& r) { return is_central_relation(r); },
        [](const Relation&) { return true; });
    exhaustive = exhaustive && central.complete;
    if (!central.relations.empty()) {
      const Relation& rel = central.relations.front();
      Center c;
      c.set = central_set(rel);
      c.witness.kind = CenterWitness::Kind::central_relation;
      c.witness.relation = rel;
      search.status = SearchStatus::found;
      search.result = std::move(c);
      return search;
    }
  }

  // Centers of quotients by maximal congruences.
  for (const Congruence& delta : maximal_congruences(alg)) {
    if (delta.is_equality()) continue;
    Quotient q = quotient_algebra(alg, delta);
    AbsorbingSearch ba = find_binary_absorbing(*q.algebra, cfg);
    if (ba.status == SearchStatus::unknown) exhaustive = false;
    if (ba.status != SearchStatus::none) continue;
    CenterSearch inner = find_center_impl(*q.algebra, cfg);
    if (inner.status == SearchStatus::unknown) exhaustive = false;
    if (inner.status != SearchStatus::found) continue;
    Center c;
    for (Element e : inner.result->set.elements()) c.set = c.set | delta.blocks()[e];
    c.witness.kind = CenterWitness::Kind::lifted;
    c.witness.congruence = delta;
    c.witness.inner_center = inner.result->set;
    c.witness.inner = std::make_shared<const CenterWitness>(std::move(inner.result->witness));
    search.status = SearchStatus::found;
    search.result = std::move(c);
    return search;
  }

  search.status = exhaustive ? SearchStatus::none : SearchStatus::unknown;
  return search;
}

bool fail(std::string* why, const std::string& reason) {
  if (why) *why = reason;
  return false;
}

std::vector<Congruence> linear_congruences(const Algebra& alg) {
  std::vector<Congruence> out;
  for (const Congruence& c : all_congruences(alg)) {
    if (linear_structure(*quotient_algebra(alg, c).algebra)) out.push_back(c);
  }
  return out;
}

}  // namespace

// ============================================================================
// Predicates
// ============================================================================

bool is_bounded_partial_order(const Relation& rel) {
  if (rel.arity() != 2) return false;
  const std::size_t n = rel.coords()[0]->size();
  if (rel.coords()[1]->size() != n) return false;
  for (Element a = 0; a < n; ++a) {
    if (!rel.contains(Tuple{a, a})) return false;
  }
  if (!is_antisymmetric(rel)) return false;
  for (const Tuple& ab : rel.tuples()) {
    for (Element c = 0; c < n; ++c) {
      if (rel.contains(Tuple{ab[1], c}) && !rel.contains(Tuple{ab[0], c})) return false;
    }
  }
  if (!least_of(rel, n)) return false;
  for (Element g = 0; g < n; ++g) {
    bool above_all = true;
    for (Element x = 0; x < n && above_all; ++x) above_all = rel.contains(Tuple{x, g});
    if (above_all) return true;
  }
  return false;
}

ElementSet central_set(const Relation& rel) {
  const std::size_t h = rel.arity();
  if (h == 0) return {};
  const std::size_t n = rel.coords()[0]->size();
  std::size_t rest_total = 1;
  for (std::size_t i = 1; i < h; ++i) rest_total *= n;
  ElementSet c;
  for (Element a = 0; a < n; ++a) {
    bool central = true;
    Tuple t(h);
    t[0] = a;
    for (std::size_t idx = 0; idx < rest_total && central; ++idx) {
      std::size_t rest = idx;
      for (std::size_t i = h; i-- > 1;) {
        t[i] = static_cast<Element>(rest % n);
        rest /= n;
      }
      central = rel.contains(t);
    }
    if (central) c.insert(a);
  }
  return c;
}

bool is_central_relation(const Relation& rel) {
  const std::size_t h = rel.arity();
  if (h < 2) return false;
  const std::size_t n = rel.coords()[0]->size();
  for (const AlgebraPtr& a : rel.coords()) {
    if (a->size() != n) return false;
  }
  std::size_t total = 1;
  for (std::size_t i = 0; i < h; ++i) total *= n;
  if (rel.size() == total) return false;
  for (std::size_t idx = 0; idx < total; ++idx) {
    Tuple t(h);
    std::size_t rest = idx;
    for (std::size_t i = h; i-- > 0;) {
      t[i] = static_cast<Element>(rest % n);
      rest /= n;
    }
    Tuple sorted = t;
    std::sort(sorted.begin(), sorted.end());
    const bool repeated = std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end();
    if (repeated && !rel.contains(t)) return false;
  }
  for (const Tuple& t : rel.tuples()) {
    Tuple p = t;
    std::sort(p.begin(), p.end());
    do {
      if (!rel.contains(p)) return false;
    } while (std::next_permutation(p.begin(), p.end()));
  }
  const ElementSet c = central_set(rel);
  return !c.empty() && c != ElementSet::full(n);
}

// ============================================================================
// Searches
// ============================================================================

AbsorbingSearch find_binary_absorbing(const Algebra& alg, const ClassifyConfig& cfg) {
  AbsorbingSearch search;
  std::vector<ElementSet> candidates;
  for (ElementSet s : all_subuniverses(alg)) {
    if (proper_nonempty(alg, s)) candidates.push_back(s);
  }
  if (candidates.empty()) return search;
  BinaryTerms terms = binary_terms(alg, cfg.term_cap);
  for (ElementSet b : candidates) {
    for (const OperationTable& t : terms.terms) {
      if (absorbs(alg, t, b)) {
        search.status = SearchStatus::found;
        search.result = BinaryAbsorbing{b, t};
        return search;
      }
    }
  }
  search.status = terms.complete ? SearchStatus::none : SearchStatus::unknown;
  return search;
}

CenterSearch find_center(const Algebra& alg, const ClassifyConfig& cfg) {
  return find_center_impl(alg, cfg);
}

PcStructure pc_structure(const Algebra& alg) {
  PcStructure out{{}, Congruence::equality(alg.size()), false};
  for (const Congruence& c : all_congruences(alg)) {
    if (c.block_count() < 2) continue;
    if (is_polynomially_complete(*quotient_algebra(alg, c).algebra)) {
      out.congruences.push_back(c);
    }
  }
  if (out.congruences.empty()) {
    out.degenerate = true;
    return out;
  }
  Congruence meet = out.congruences.front();
  for (const Congruence& c : out.congruences) meet = meet.meet(c);
  out.con_pc = meet;
  return out;
}

LinearQuotient con_lin(const Algebra& alg) {
  std::vector<Congruence> linear = linear_congruences(alg);
  // all_congruences lists finer congruences first.
  const Congruence& least = linear.front();
  for (const Congruence& c : linear) {
    if (!least.refines(c)) {
      throw ClassificationError("linear congruences " + least.to_string() + " and " +
                                c.to_string() + " have no least common refinement");
    }
  }
  return {least, *linear_structure(*quotient_algebra(alg, least).algebra)};
}

StructureReport classify_domain(const Algebra& alg, const ClassifyConfig& cfg) {
  if (alg.size() < 2) throw PreconditionError("classify_domain needs at least two elements");

  AbsorbingSearch ba = find_binary_absorbing(alg, cfg);
  if (ba.status == SearchStatus::found) return {std::move(*ba.result)};
  if (ba.status == SearchStatus::unknown) {
    throw ConfigError("binary term closure hit its cap on " + std::to_string(alg.size()) +
                      "-element algebra");
  }

  CenterSearch center = find_center(alg, cfg);
  if (center.status == SearchStatus::found) return {std::move(*center.result)};
  if (center.status == SearchStatus::unknown) {
    throw ConfigError("center search hit its cap on " + std::to_string(alg.size()) +
                      "-element algebra");
  }

  PcStructure pc = pc_structure(alg);
  if (!pc.congruences.empty()) {
    // Coarsest first: a congruence no other listed one strictly contains.
    for (const Congruence& c : pc.congruences) {
      bool maximal = true;
      for (const Congruence& d : pc.congruences) {
        if (!(d == c) && c.refines(d)) {
          maximal = false;
          break;
        }
      }
      if (maximal) return {PcQuotient{c}};
    }
  }

  LinearQuotient lin = con_lin(alg);
  if (lin.congruence.is_full()) {
    throw ClassificationError("no structure found for algebra of size " +
                              std::to_string(alg.size()));
  }
  return {std::move(lin)};
}

std::string StructureReport::to_string() const {
  std::ostringstream os;
  if (const auto* ba = std::get_if<BinaryAbsorbing>(&outcome)) {
    os << "binary-absorbing B=" << ba->set.to_string() << " t=";
    for (std::uint8_t v : ba->term.entries()) os << static_cast<int>(v);
  } else if (const auto* c = std::get_if<Center>(&outcome)) {
    os << "center C=" << c->set.to_string() << " via ";
    switch (c->witness.kind) {
      case CenterWitness::Kind::least_of_order:
        os << "bounded order";
        break;
      case CenterWitness::Kind::central_relation:
        os << "central relation of arity " << c->witness.relation->arity();
        break;
      case CenterWitness::Kind::lifted:
        os << "quotient by " << c->witness.congruence->to_string();
        break;
    }
  } else if (const auto* pc = std::get_if<PcQuotient>(&outcome)) {
    os << "pc-quotient sigma=" << pc->congruence.to_string();
  } else {
    const auto& lin = std::get<LinearQuotient>(outcome);
    os << "linear-quotient sigma=" << lin.congruence.to_string() << " Z";
    for (std::size_t i = 0; i < lin.iso.primes.size(); ++i) {
      os << (i ? "xZ" : "") << lin.iso.primes[i];
    }
  }
  return os.str();
}

// ============================================================================
// Certificate checks
// ============================================================================

namespace {

bool verify_center_witness(const Algebra& alg, ElementSet set, const CenterWitness& w,
                           std::string* why) {
  switch (w.kind) {
    case CenterWitness::Kind::least_of_order: {
      if (!w.relation) return fail(why, "order missing");
      const Relation& order = *w.relation;
      if (order.arity() != 2 || order.coords()[0]->size() != alg.size()) {
        return fail(why, "order has wrong shape");
      }
      if (!is_invariant(order)) return fail(why, "order not invariant");
      if (!is_bounded_partial_order(order)) return fail(why, "not a bounded partial order");
      if (set != ElementSet::single(*least_of(order, alg.size()))) {
        return fail(why, "center is not the least element");
      }
      return true;
    }
    case CenterWitness::Kind::central_relation: {
      if (!w.relation) return fail(why, "relation missing");
      const Relation& rel = *w.relation;
      for (const AlgebraPtr& a : rel.coords()) {
        if (!(*a == alg)) return fail(why, "central relation over another algebra");
      }
      if (!is_invariant(rel)) return fail(why, "central relation not invariant");
      if (!is_central_relation(rel)) return fail(why, "relation is not central");
      if (central_set(rel) != set) return fail(why, "center differs from the relation's");
      return true;
    }
    case CenterWitness::Kind::lifted: {
      if (!w.congruence || !w.inner) return fail(why, "lift data missing");
      const Congruence& delta = *w.congruence;
      if (!is_compatible(alg, delta) || delta.is_equality() || delta.is_full()) {
        return fail(why, "lift congruence invalid");
      }
      const auto maximal = maximal_congruences(alg);
      if (std::find(maximal.begin(), maximal.end(), delta) == maximal.end()) {
        return fail(why, "lift congruence not maximal");
      }
      Quotient q = quotient_algebra(alg, delta);
      if (!verify_center_witness(*q.algebra, w.inner_center, *w.inner, why)) return false;
      ElementSet lifted;
      for (Element e : w.inner_center.elements()) lifted = lifted | delta.blocks()[e];
      if (lifted != set) return fail(why, "center is not the union of inner blocks");
      return true;
    }
  }
  return fail(why, "unknown witness kind");
}

}  // namespace

bool verify_center(const Algebra& alg, const Center& center, std::string* why) {
  if (!proper_nonempty(alg, center.set) || !is_subuniverse(alg, center.set)) {
    return fail(why, "center is not a proper subuniverse");
  }
  return verify_center_witness(alg, center.set, center.witness, why);
}

bool verify_report(const Algebra& alg, const StructureReport& report, std::string* why) {
  if (const auto* ba = std::get_if<BinaryAbsorbing>(&report.outcome)) {
    if (!proper_nonempty(alg, ba->set) || !is_subuniverse(alg, ba->set)) {
      return fail(why, "absorbing set is not a proper subuniverse");
    }
    if (ba->term.arity() != 2 || ba->term.domain_size() != alg.size()) {
      return fail(why, "term has wrong shape");
    }
    if (!absorbs(alg, ba->term, ba->set)) return fail(why, "absorption inclusion fails");
    BinaryTerms terms = binary_terms(alg, std::size_t{1} << 20);
    if (!std::binary_search(terms.terms.begin(), terms.terms.end(), ba->term)) {
      return fail(why, "table is not a binary term");
    }
    return true;
  }
  if (const auto* c = std::get_if<Center>(&report.outcome)) return verify_center(alg, *c, why);
  if (const auto* pc = std::get_if<PcQuotient>(&report.outcome)) {
    if (!is_compatible(alg, pc->congruence)) return fail(why, "not a congruence");
    if (pc->congruence.block_count() < 2) return fail(why, "quotient is trivial");
    if (!is_polynomially_complete(*quotient_algebra(alg, pc->congruence).algebra)) {
      return fail(why, "quotient is not polynomially complete");
    }
    return true;
  }
  const auto& lin = std::get<LinearQuotient>(report.outcome);
  if (!is_compatible(alg, lin.congruence)) return fail(why, "not a congruence");
  if (lin.congruence.is_full()) return fail(why, "linear quotient is trivial");
  if (!verify_linear_iso(*quotient_algebra(alg, lin.congruence).algebra, lin.iso)) {
    return fail(why, "sum identity fails");
  }
  for (const Congruence& c : linear_congruences(alg)) {
    if (!lin.congruence.refines(c)) return fail(why, "linear congruence is not minimal");
  }
  return true;
}

}  // namespace wnucsp
