#include <catch_amalgamated.hpp>

#include <random>
#include <set>

#include "oracles.hpp"
#include "wnucsp/relation.hpp"

using namespace wnucsp;

namespace {

const AlgebraPtr& z2() {
  static const AlgebraPtr a = make_algebra(ops::minority());
  return a;
}

const AlgebraPtr& z4() {
  static const AlgebraPtr a = make_algebra(ops::sum_mod(4, 5));
  return a;
}

std::vector<AlgebraPtr> coords(const AlgebraPtr& a, std::size_t r) {
  return std::vector<AlgebraPtr>(r, a);
}

Relation over(const AlgebraPtr& a, std::size_t r, const std::function<bool(const Tuple&)>& keep) {
  std::vector<Tuple> ts;
  oracle::for_each_tuple(a->size(), r, [&](const Tuple& t) {
    if (keep(t)) ts.push_back(t);
  });
  return Relation(coords(a, r), ts);
}

// Brute-force weaker relations for a relation on {0,1}^r with full carriers.
std::set<std::pair<std::vector<std::size_t>, std::vector<Tuple>>> weaker_by_enumeration(
    const OperationTable& w, const std::vector<Tuple>& rel, std::size_t r) {
  std::set<std::pair<std::vector<std::size_t>, std::vector<Tuple>>> out;
  for (std::uint32_t mask = 1; mask < (1U << r); ++mask) {
    std::vector<std::size_t> ys;
    for (std::size_t i = 0; i < r; ++i) {
      if ((mask >> i) & 1U) ys.push_back(i);
    }
    const std::size_t k = ys.size();
    std::set<Tuple> proj;
    for (const Tuple& t : rel) {
      Tuple p;
      for (std::size_t y : ys) p.push_back(t[y]);
      proj.insert(p);
    }
    std::vector<Tuple> space;
    oracle::for_each_tuple(2, k, [&](const Tuple& t) { space.push_back(t); });
    for (std::uint32_t sbits = 1; sbits < (1U << space.size()); ++sbits) {
      std::vector<Tuple> sigma;
      for (std::size_t i = 0; i < space.size(); ++i) {
        if ((sbits >> i) & 1U) sigma.push_back(space[i]);
      }
      const std::set<Tuple> sset(sigma.begin(), sigma.end());
      bool contains = true;
      for (const Tuple& p : proj) contains = contains && sset.count(p);
      if (!contains || !oracle::preserves(w, sigma)) continue;
      // Strict: some tuple of the full space agrees with sigma on ys but is not in rel.
      const std::set<Tuple> rset(rel.begin(), rel.end());
      std::size_t lifted = 0;
      oracle::for_each_tuple(2, r, [&](const Tuple& t) {
        Tuple p;
        for (std::size_t y : ys) p.push_back(t[y]);
        lifted += sset.count(p);
      });
      if (lifted == rset.size()) continue;
      // No dummy coordinate: flipping coordinate i must leave sigma somewhere.
      bool dummy = false;
      for (std::size_t i = 0; i < k && !dummy; ++i) {
        bool all = true;
        for (const Tuple& t : sigma) {
          Tuple f = t;
          f[i] ^= 1U;
          all = all && sset.count(f);
        }
        dummy = all;
      }
      if (!dummy) out.insert({ys, sigma});
    }
  }
  return out;
}

}  // namespace

TEST_CASE("relations are sorted and deduplicated", "[relation]") {
  const Relation r(coords(z2(), 2), {{1, 0}, {0, 1}, {1, 0}});
  CHECK(r.tuples() == std::vector<Tuple>{{0, 1}, {1, 0}});
  CHECK(r.contains(Tuple{1, 0}));
  CHECK_FALSE(r.contains(Tuple{1, 1}));
  CHECK(r.values_at(0) == ElementSet::full(2));
  CHECK_THROWS_AS(Relation(coords(z2(), 2), {{0, 2}}), ArgumentError);
  CHECK_THROWS_AS(Relation(coords(z2(), 2), {{0}}), ArgumentError);
}

TEST_CASE("projection", "[relation]") {
  const Relation swap(coords(z2(), 2), {{0, 1}, {1, 0}});
  const std::vector<std::size_t> second{1};
  CHECK(project(swap, second).tuples() == std::vector<Tuple>{{0}, {1}});
  const std::vector<std::size_t> all{0, 1};
  CHECK(project(swap, all) == swap);

  const Relation even = over(z2(), 3, [](const Tuple& t) { return (t[0] ^ t[1] ^ t[2]) == 0; });
  const std::vector<std::size_t> last_two{1, 2};
  CHECK(project(even, last_two) == Relation::full(coords(z2(), 2)));

  const std::vector<std::size_t> repeated{0, 0};
  CHECK_THROWS_AS(project(swap, repeated), ArgumentError);
  CHECK_THROWS_AS(project(swap, std::vector<std::size_t>{}), ArgumentError);
}

TEST_CASE("restriction and permutation", "[relation]") {
  const Relation lt = over(z4(), 2, [](const Tuple& t) { return (t[0] + t[1]) % 2 == 0; });
  const std::vector<ElementSet> evens{ElementSet::of({0, 2}), ElementSet::full(4)};
  const Relation r = restrict(lt, evens);
  CHECK(r.size() == lt.size() / 2);
  for (const Tuple& t : r.tuples()) CHECK(t[0] % 2 == 0);
  const std::vector<std::size_t> order{1, 0};
  const Relation p = permute(Relation(coords(z2(), 2), {{0, 1}}), order);
  CHECK(p.tuples() == std::vector<Tuple>{{1, 0}});
}

TEST_CASE("factorization of the mod-4 equation", "[relation]") {
  const Relation eq = over(z4(), 4, [](const Tuple& t) {
    return (t[0] + 2 * t[1] + t[2] + t[3]) % 4 == 0;
  });
  const std::vector<Congruence> mod2(4, Congruence({0, 1, 0, 1}));
  const Relation f = factorize(eq, mod2);
  const AlgebraPtr q = make_algebra(ops::sum_mod(2, 5));
  const Relation expected = over(q, 4, [](const Tuple& t) { return (t[0] + t[2] + t[3]) % 2 == 0; });
  CHECK(f.tuples() == expected.tuples());

  const std::vector<Congruence> eqs(4, Congruence::equality(4));
  CHECK(factorize(eq, eqs).tuples() == eq.tuples());

  const Relation full = Relation::full(coords(z4(), 2));
  const std::vector<Congruence> two(2, Congruence({0, 1, 0, 1}));
  CHECK(factorize(full, two).size() == 4);

  const std::vector<Congruence> bad(2, Congruence({0, 0, 1, 1}));
  CHECK_THROWS_AS(factorize(full, bad), InvariantError);
}

TEST_CASE("factorization commutes with projection", "[relation][oracle]") {
  std::mt19937 rng(5);
  const AlgebraPtr dd = make_algebra(ops::dual_discriminator(3));
  for (int round = 0; round < 30; ++round) {
    std::vector<Tuple> gens;
    for (int g = 0; g < 3; ++g) {
      gens.push_back({static_cast<Element>(rng() % 3), static_cast<Element>(rng() % 3),
                      static_cast<Element>(rng() % 3)});
    }
    const Relation rel = invariant_closure(coords(dd, 3), gens);
    const std::vector<Congruence> eq3(3, Congruence::equality(3));
    const std::vector<Congruence> eq2(2, Congruence::equality(3));
    const std::vector<std::size_t> idx{0, 2};
    CHECK(project(factorize(rel, eq3), idx).tuples() ==
          factorize(project(rel, idx), eq2).tuples());
  }
}

TEST_CASE("subdirectness", "[relation]") {
  CHECK(is_subdirect(Relation::full(coords(z2(), 2))));
  CHECK_FALSE(is_subdirect(Relation(coords(z2(), 2), {{0, 0}})));
  CHECK(is_subdirect(over(z4(), 2, [](const Tuple& t) { return t[1] == (t[0] + 1) % 4; })));
  const std::vector<ElementSet> zero{ElementSet::single(0), ElementSet::single(0)};
  CHECK(is_subdirect(Relation(coords(z2(), 2), {{0, 0}}), zero));
}

TEST_CASE("invariance and closure match brute force", "[relation][oracle]") {
  std::mt19937 rng(9);
  for (const OperationTable& t : {ops::minority(), ops::majority(), ops::dual_discriminator(3),
                                  ops::sum_mod(4, 5)}) {
    const AlgebraPtr a = make_algebra(t);
    for (int round = 0; round < 10; ++round) {
      const std::size_t r = 1 + rng() % 3;
      std::vector<Tuple> gens;
      for (int g = 0; g < 3; ++g) {
        Tuple x(r);
        for (Element& e : x) e = static_cast<Element>(rng() % t.domain_size());
        gens.push_back(x);
      }
      const Relation raw(coords(a, r), gens);
      CHECK(is_invariant(raw) == oracle::preserves(t, raw.tuples()));
      const Relation closed = invariant_closure(coords(a, r), gens);
      CHECK(closed.tuples() == oracle::closure(t, gens));
      CHECK(is_invariant(closed));
    }
  }
}

TEST_CASE("dummy coordinates", "[relation]") {
  const Relation r(coords(z2(), 3), {{0, 0, 0}, {0, 0, 1}, {1, 1, 0}, {1, 1, 1}});
  const std::vector<ElementSet> full(3, ElementSet::full(2));
  CHECK_FALSE(is_dummy(r, 0, full));
  CHECK_FALSE(is_dummy(r, 1, full));
  CHECK(is_dummy(r, 2, full));
  const ReducedRelation red = drop_dummies(r, full);
  CHECK(red.kept == std::vector<std::size_t>{0, 1});
  CHECK(red.relation.tuples() == std::vector<Tuple>{{0, 0}, {1, 1}});

  const Relation all = Relation::full(coords(z2(), 2));
  const std::vector<ElementSet> full2(2, ElementSet::full(2));
  CHECK(drop_dummies(all, full2).kept.empty());
}

TEST_CASE("weaker relations of the equality relation", "[relation]") {
  const Relation eq(coords(z2(), 2), {{0, 0}, {1, 1}});
  // The only invariant relation above equality is the full one, which has
  // dummy coordinates, so nothing is emitted.
  CHECK(invariant_closure(coords(z2(), 2), {{0, 0}, {1, 1}, {0, 1}}) ==
        Relation::full(coords(z2(), 2)));
  const WeakerRelations w = weaker_relations(eq);
  CHECK(w.complete);
  CHECK(w.relations.empty());

  CHECK(weaker_relations(Relation::full(coords(z2(), 3))).relations.empty());
}

TEST_CASE("weaker relations of the ternary diagonal", "[relation]") {
  const Relation diag(coords(z2(), 3), {{0, 0, 0}, {1, 1, 1}});
  const WeakerRelations w = weaker_relations(diag);
  REQUIRE(w.complete);
  std::set<std::vector<std::size_t>> pair_scopes;
  for (const WeakerRelation& r : w.relations) {
    if (r.coords.size() == 2 && r.relation.tuples() == std::vector<Tuple>{{0, 0}, {1, 1}}) {
      pair_scopes.insert(r.coords);
    }
  }
  CHECK(pair_scopes == std::set<std::vector<std::size_t>>{{0, 1}, {0, 2}, {1, 2}});
}

TEST_CASE("weaker relations match brute force on two elements", "[relation][oracle]") {
  std::mt19937 rng(13);
  for (const OperationTable& t : {ops::minority(), ops::majority(), ops::meet(3)}) {
    const AlgebraPtr a = make_algebra(t);
    for (int round = 0; round < 12; ++round) {
      const std::size_t r = 1 + rng() % 3;
      std::vector<Tuple> gens;
      const int count = 1 + static_cast<int>(rng() % 3);
      for (int g = 0; g < count; ++g) {
        Tuple x(r);
        for (Element& e : x) e = static_cast<Element>(rng() % 2);
        gens.push_back(x);
      }
      const Relation rel = invariant_closure(coords(a, r), gens);
      const WeakerRelations w = weaker_relations(rel);
      REQUIRE(w.complete);
      std::set<std::pair<std::vector<std::size_t>, std::vector<Tuple>>> got;
      for (const WeakerRelation& x : w.relations) {
        CHECK(is_invariant(x.relation));
        CHECK(got.insert({x.coords, x.relation.tuples()}).second);
      }
      CHECK(got == weaker_by_enumeration(t, rel.tuples(), r));
    }
  }
}

TEST_CASE("weaker relation enumeration order", "[relation]") {
  const Relation rel = invariant_closure(coords(z2(), 3), {{0, 0, 0}, {1, 1, 0}});
  const WeakerRelations w = weaker_relations(rel);
  for (std::size_t i = 1; i < w.relations.size(); ++i) {
    const auto& a = w.relations[i - 1];
    const auto& b = w.relations[i];
    if (a.coords == b.coords) {
      CHECK(a.relation.size() <= b.relation.size());
    } else {
      CHECK(a.coords.size() <= b.coords.size());
    }
  }
}

TEST_CASE("weaker relation cap", "[relation]") {
  const Relation diag(coords(z4(), 3), {{0, 0, 0}});
  const WeakerRelations w = weaker_relations(diag, 2);
  CHECK_FALSE(w.complete);
}
