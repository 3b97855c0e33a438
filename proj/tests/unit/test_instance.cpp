#include <catch_amalgamated.hpp>

#include <random>
#include <set>

#include "examples.hpp"
#include "oracles.hpp"
#include "wnucsp/instance.hpp"

using namespace wnucsp;

namespace {

std::set<Tuple> as_set(const std::vector<Tuple>& v) { return {v.begin(), v.end()}; }

std::vector<Tuple> filtered(const std::vector<Tuple>& sols,
                            const std::function<bool(const Tuple&)>& keep) {
  std::vector<Tuple> out;
  for (const Tuple& t : sols) {
    if (keep(t)) out.push_back(t);
  }
  return out;
}

LinearSystem system_over(unsigned p, std::size_t k, std::vector<Equation> eqs) {
  LinearSystem sys;
  for (std::size_t i = 0; i < k; ++i) sys.vars.push_back({"y" + std::to_string(i), p});
  sys.equations = std::move(eqs);
  return sys;
}

// Brute-force weaker constraints of a single constraint over a two-element
// algebra: every invariant relation on a nonempty sub-scope with no dummy
// coordinate, implied by the constraint and not implying it.
std::set<std::pair<std::vector<std::size_t>, std::vector<Tuple>>> weaker_by_enumeration(
    const OperationTable& w, const Constraint& c) {
  std::set<std::pair<std::vector<std::size_t>, std::vector<Tuple>>> out;
  const std::size_t k = c.scope.size();
  const std::vector<Tuple>& base = c.relation->tuples();
  for (std::uint32_t mask = 1; mask < (1U << k); ++mask) {
    std::vector<std::size_t> coords;
    for (std::size_t i = 0; i < k; ++i) {
      if ((mask >> i) & 1U) coords.push_back(i);
    }
    const std::size_t r = coords.size();
    std::vector<Tuple> all;
    oracle::for_each_tuple(2, r, [&](const Tuple& t) { all.push_back(t); });
    for (std::uint64_t sub = 1; sub < (std::uint64_t{1} << all.size()); ++sub) {
      std::vector<Tuple> rel;
      for (std::size_t i = 0; i < all.size(); ++i) {
        if ((sub >> i) & 1U) rel.push_back(all[i]);
      }
      if (!oracle::preserves(w, rel)) continue;
      const std::set<Tuple> rs(rel.begin(), rel.end());
      bool dummy = false;
      for (std::size_t d = 0; d < r && !dummy; ++d) {
        bool closed = true;
        for (const Tuple& t : rel) {
          Tuple u = t;
          u[d] ^= 1U;
          closed = closed && rs.count(u);
        }
        dummy = closed;
      }
      if (dummy) continue;
      bool implied = true;
      for (const Tuple& t : base) {
        Tuple p;
        for (std::size_t i : coords) p.push_back(t[i]);
        implied = implied && rs.count(p);
      }
      if (!implied) continue;
      // Strict: some tuple of the extension lies outside the constraint.
      bool strict = false;
      oracle::for_each_tuple(2, k, [&](const Tuple& t) {
        Tuple p;
        for (std::size_t i : coords) p.push_back(t[i]);
        if (rs.count(p) && std::find(base.begin(), base.end(), t) == base.end()) strict = true;
      });
      if (!strict) continue;
      std::vector<std::size_t> scope;
      for (std::size_t i : coords) scope.push_back(c.scope[i]);
      out.insert({scope, rel});
    }
  }
  return out;
}

}  // namespace

TEST_CASE("constraints merge repeated scope variables", "[instance]") {
  const AlgebraPtr z2 = make_algebra(ops::minority());
  Instance inst;
  inst.add_variable("x", z2);
  inst.add_variable("y", z2);
  const auto lt = examples::relation_where(z2, 2, [](const Tuple& t) { return t[0] != t[1]; });
  inst.add_constraint(lt, {0, 0});
  CHECK(oracle::csp_solutions(inst).empty());
  CHECK_THROWS_AS(inst.add_constraint(lt, {0}), ArgumentError);
  CHECK_THROWS_AS(inst.add_constraint(lt, {0, 5}), ArgumentError);
}

TEST_CASE("normalize keeps the solution set", "[instance]") {
  const AlgebraPtr z2 = make_algebra(ops::minority());
  Instance inst;
  for (int i = 0; i < 3; ++i) inst.add_variable("v" + std::to_string(i), z2);
  const auto eq = examples::relation_where(z2, 2, [](const Tuple& t) { return t[0] == t[1]; });
  const auto first_zero = examples::relation_where(z2, 2, [](const Tuple& t) { return t[0] == 0; });
  inst.add_constraint(eq, {2, 0});
  inst.add_constraint(eq, {0, 2});
  inst.add_constraint(std::make_shared<const Relation>(Relation::full({z2, z2})), {0, 1});
  inst.add_constraint(first_zero, {1, 2});

  const Instance n = normalize(inst);
  CHECK(oracle::csp_solutions(n) == oracle::csp_solutions(inst));
  REQUIRE(n.constraints().size() == 2);
  for (const Constraint& c : n.constraints()) {
    CHECK(std::is_sorted(c.scope.begin(), c.scope.end()));
  }
  // The dummy second coordinate is dropped.
  bool unary = false;
  for (const Constraint& c : n.constraints()) {
    if (c.scope == std::vector<std::size_t>{1}) {
      unary = true;
      CHECK(c.relation->tuples() == std::vector<Tuple>{{0}});
    }
  }
  CHECK(unary);

  const Instance z4 = examples::z4_example();
  CHECK(oracle::csp_solutions(normalize(z4)) == oracle::csp_solutions(z4));
}

TEST_CASE("reductions", "[instance]") {
  const Instance inst = examples::z4_example();
  const auto all = oracle::csp_solutions(inst);
  REQUIRE_FALSE(all.empty());

  std::vector<ElementSet> red = inst.domains();
  red[0] = ElementSet::of({1, 3});
  const Instance odd = apply_reduction(inst, red);
  CHECK(odd.domains()[0] == ElementSet::of({1, 3}));
  CHECK(oracle::csp_solutions(odd) == filtered(all, [](const Tuple& t) { return t[0] % 2 == 1; }));

  CHECK(apply_reduction(inst, inst.domains()).fingerprint() == inst.fingerprint());

  red[0] = ElementSet::of({1, 2});
  CHECK_THROWS_AS(apply_reduction(inst, red), ReductionError);
  red[0] = ElementSet();
  CHECK_THROWS_AS(apply_reduction(inst, red), ReductionError);
  red[0] = ElementSet::of({0, 2});
  const Instance even = apply_reduction(inst, red);
  red[0] = ElementSet::of({0, 1, 2, 3});
  CHECK_THROWS_AS(apply_reduction(even, red), ReductionError);
}

TEST_CASE("fingerprints follow domains and restricted contents", "[instance]") {
  const Instance a = examples::z4_example();
  const Instance b = examples::z4_example();
  CHECK(a.fingerprint() == b.fingerprint());
  CHECK(a.fingerprint() != examples::z4_example_without_last().fingerprint());
  std::vector<ElementSet> red = a.domains();
  red[2] = ElementSet::of({0, 2});
  CHECK(apply_reduction(a, red).fingerprint() != a.fingerprint());
}

TEST_CASE("satisfies checks domains and constraints", "[instance]") {
  const Instance inst = examples::z4_example();
  const std::vector<Element> good{1, 1, 0, 1};
  CHECK(inst.satisfies(good));
  const std::vector<Element> bad{1, 1, 0, 0};
  CHECK_FALSE(inst.satisfies(bad));
  std::vector<ElementSet> red = inst.domains();
  red[0] = ElementSet::of({0, 2});
  CHECK_FALSE(apply_reduction(inst, red).satisfies(good));
}

TEST_CASE("equations from points", "[instance]") {
  const std::vector<unsigned> two{2, 2};
  const auto a = equations_from_points({{0, 1}, {1, 0}}, two);
  REQUIRE(a.size() == 1);
  CHECK(a[0].coeffs == std::vector<Element>{1, 1});
  CHECK(a[0].rhs == 1);

  CHECK(equations_from_points({{0, 0}, {0, 1}, {1, 0}, {1, 1}}, two).empty());

  const std::vector<unsigned> three{2, 2, 2};
  const auto b = equations_from_points({{0, 0, 0}, {1, 1, 0}, {0, 1, 1}, {1, 0, 1}}, three);
  REQUIRE(b.size() == 1);
  CHECK(b[0].coeffs == std::vector<Element>{1, 1, 1});
  CHECK(b[0].rhs == 0);

  CHECK_THROWS_AS(equations_from_points({}, two), EmptyRelationError);
  CHECK_THROWS_AS(equations_from_points({{0, 0}, {0, 1}, {1, 0}}, two), InvariantError);
}

TEST_CASE("equations from random cosets", "[instance][oracle]") {
  std::mt19937 rng(11);
  for (unsigned p : {2U, 3U, 5U}) {
    for (int round = 0; round < 30; ++round) {
      const std::size_t k = 1 + rng() % (p == 5 ? 3 : 4);
      // Subgroup spanned by a few random vectors, shifted by a random offset.
      std::vector<Tuple> gens(rng() % (k + 1));
      for (Tuple& g : gens) {
        g.resize(k);
        for (Element& x : g) x = rng() % p;
      }
      Tuple offset(k);
      for (Element& x : offset) x = rng() % p;
      std::set<Tuple> points{offset};
      bool grew = true;
      while (grew) {
        grew = false;
        for (const Tuple& t : std::vector<Tuple>(points.begin(), points.end())) {
          for (const Tuple& g : gens) {
            Tuple u(k);
            for (std::size_t i = 0; i < k; ++i) u[i] = (t[i] + g[i]) % p;
            grew = points.insert(u).second || grew;
          }
        }
      }
      const std::vector<Tuple> list(points.begin(), points.end());
      const std::vector<unsigned> primes(k, p);
      const auto eqs = equations_from_points(list, primes);
      CHECK(eqs.size() <= k);
      CHECK(as_set(oracle::solutions(system_over(p, k, eqs))) == points);
    }
  }
}

TEST_CASE("relation to equations through isos", "[instance]") {
  const AlgebraPtr z2 = make_algebra(ops::minority());
  const Relation neq(std::vector<AlgebraPtr>{z2, z2}, {{0, 1}, {1, 0}});
  const auto iso = linear_structure(*z2).value();
  const std::vector<LinearIso> isos{iso, iso};
  const auto eqs = relation_to_equations(neq, isos);
  REQUIRE(eqs.size() == 1);
  CHECK(eqs[0].coeffs == std::vector<Element>{1, 1});
  CHECK(eqs[0].rhs == 1);
}

TEST_CASE("factorization of the Z4 system", "[instance]") {
  const Instance inst = examples::z4_example();
  const LinearFactorization f = factorize_to_linear(inst);
  REQUIRE(f.system.vars.size() == 4);
  for (const ScalarVar& v : f.system.vars) CHECK(v.prime == 2);
  CHECK(as_set(oracle::solutions(f.system)) == as_set(examples::z4_parity_solutions()));

  REQUIRE(f.slices.size() == 4);
  for (const VariableSlice& s : f.slices) {
    CHECK(s.count == 1);
    for (Element a = 0; a < 4; ++a) CHECK(s.block_of(a) == s.block_of(a % 2));
    CHECK(s.block_of(0) != s.block_of(1));
  }
  const std::vector<Element> point{1, 0, 1, 1};
  const auto red = f.reduction_for(point);
  CHECK(red == std::vector<ElementSet>{ElementSet::of({1, 3}), ElementSet::of({0, 2}),
                                      ElementSet::of({1, 3}), ElementSet::of({1, 3})});
}

TEST_CASE("factorization agrees with parity images of constraints", "[instance][oracle]") {
  // A scalar vector satisfies the system iff every constraint has a tuple with
  // those parities on its scope.
  const AlgebraPtr z4 = examples::z4();
  std::mt19937 rng(5);
  for (int round = 0; round < 20; ++round) {
    std::vector<examples::LinearRow> rows;
    const std::size_t m = 1 + rng() % 3;
    for (std::size_t r = 0; r < m; ++r) {
      std::vector<unsigned> coeffs(3);
      for (unsigned& c : coeffs) c = rng() % 4;
      if (coeffs == std::vector<unsigned>{0, 0, 0}) coeffs[0] = 1;
      rows.push_back({coeffs, static_cast<unsigned>(rng() % 4)});
    }
    const Instance inst = examples::linear_instance(z4, 3, rows);
    bool empty_rel = false;
    for (const Constraint& c : inst.constraints()) empty_rel = empty_rel || c.relation->empty();
    if (empty_rel) continue;
    const LinearFactorization f = factorize_to_linear(inst);
    std::set<Tuple> expected;
    oracle::for_each_tuple(2, 3, [&](const Tuple& s) {
      for (const Constraint& c : inst.constraints()) {
        bool hit = false;
        for (const Tuple& t : c.relation->tuples()) {
          bool match = true;
          for (std::size_t i = 0; i < t.size(); ++i) match = match && t[i] % 2 == s[c.scope[i]];
          hit = hit || match;
        }
        if (!hit) return;
      }
      expected.insert(s);
    });
    CHECK(as_set(oracle::solutions(f.system)) == expected);
  }
}

TEST_CASE("factorization edge cases", "[instance]") {
  const AlgebraPtr z2 = make_algebra(ops::minority());
  Instance diag;
  diag.add_variable("x", z2);
  diag.add_variable("y", z2);
  diag.add_constraint(examples::relation_where(z2, 2, [](const Tuple& t) { return t[0] == t[1]; }),
                      {0, 1});
  const LinearFactorization d = factorize_to_linear(diag);
  REQUIRE(d.system.equations.size() == 1);
  CHECK(d.system.equations[0].coeffs == std::vector<Element>{1, 1});
  CHECK(d.system.equations[0].rhs == 0);

  Instance singletons;
  singletons.add_variable("x", z2, ElementSet::single(1));
  singletons.add_variable("y", z2, ElementSet::single(0));
  const LinearFactorization s = factorize_to_linear(singletons);
  CHECK(s.system.vars.empty());
  CHECK(s.system.equations.empty());

  Instance maj;
  maj.add_variable("x", make_algebra(ops::majority()));
  CHECK_THROWS_AS(factorize_to_linear(maj), PreconditionError);
}

TEST_CASE("weaker constraints", "[instance]") {
  const AlgebraPtr z2 = make_algebra(ops::minority());
  Instance inst;
  for (int i = 0; i < 3; ++i) inst.add_variable("v" + std::to_string(i), z2);
  inst.add_constraint(std::make_shared<const Relation>(Relation::full({z2, z2})), {0, 1});
  CHECK(weaken_all(inst).constraints().empty());

  Instance eq = inst;
  eq.set_constraints({});
  eq.add_constraint(examples::relation_where(z2, 2, [](const Tuple& t) { return t[0] == t[1]; }),
                    {0, 1});
  CHECK(weaken_all(eq).constraints().empty());

  Instance diag = eq;
  diag.set_constraints({});
  diag.add_constraint(examples::relation_where(z2, 3, [](const Tuple& t) {
                        return t[0] == t[1] && t[1] == t[2];
                      }),
                      {0, 1, 2});
  std::set<std::vector<std::size_t>> scopes;
  const Instance weak = weaken_all(diag);
  for (const Constraint& c : weak.constraints()) {
    scopes.insert(c.scope);
    CHECK(c.relation->tuples() == std::vector<Tuple>{{0, 0}, {1, 1}});
  }
  CHECK(scopes == std::set<std::vector<std::size_t>>{{0, 1}, {0, 2}, {1, 2}});
}

TEST_CASE("weaker constraints match brute force", "[instance][oracle]") {
  for (const OperationTable& w : {ops::minority(), ops::majority(), ops::meet(3)}) {
    const AlgebraPtr alg = make_algebra(w);
    for (std::size_t k = 1; k <= 3; ++k) {
      std::vector<Tuple> all;
      oracle::for_each_tuple(2, k, [&](const Tuple& t) { all.push_back(t); });
      for (std::uint64_t sub = 1; sub < (std::uint64_t{1} << all.size()); ++sub) {
        std::vector<Tuple> rel;
        for (std::size_t i = 0; i < all.size(); ++i) {
          if ((sub >> i) & 1U) rel.push_back(all[i]);
        }
        if (!oracle::preserves(w, rel)) continue;
        Instance inst;
        std::vector<std::size_t> scope;
        for (std::size_t i = 0; i < k; ++i) scope.push_back(inst.add_variable("v", alg));
        inst.add_constraint(
            std::make_shared<const Relation>(std::vector<AlgebraPtr>(k, alg), rel), scope);
        const auto expected = weaker_by_enumeration(w, inst.constraints()[0]);
        std::set<std::pair<std::vector<std::size_t>, std::vector<Tuple>>> got;
        const Instance weak = weaken_all(inst);
        for (const Constraint& c : weak.constraints()) {
          got.insert({c.scope, c.relation->tuples()});
        }
        CHECK(got == expected);
      }
    }
  }
}

TEST_CASE("remove weaker drops implied constraints", "[instance]") {
  const AlgebraPtr z2 = make_algebra(ops::minority());
  Instance inst;
  for (int i = 0; i < 3; ++i) inst.add_variable("v" + std::to_string(i), z2);
  const auto eq2 = examples::relation_where(z2, 2, [](const Tuple& t) { return t[0] == t[1]; });
  const auto eq3 = examples::relation_where(z2, 3, [](const Tuple& t) {
    return t[0] == t[1] && t[1] == t[2];
  });
  const Constraint strong{eq3, {0, 1, 2}};
  const Constraint weak{eq2, {0, 2}};
  CHECK(is_weaker(inst, weak, strong));
  CHECK_FALSE(is_weaker(inst, strong, weak));
  CHECK_FALSE(is_weaker(inst, strong, strong));
  const auto kept = remove_weaker(inst, {weak, strong, weak, strong});
  REQUIRE(kept.size() == 1);
  CHECK(kept[0].scope == strong.scope);
}

TEST_CASE("strongest weaker constraints have the same conjunction", "[instance][oracle]") {
  for (const OperationTable& w : {ops::minority(), ops::majority()}) {
    const AlgebraPtr alg = make_algebra(w);
    std::vector<Tuple> all;
    oracle::for_each_tuple(2, 3, [&](const Tuple& t) { all.push_back(t); });
    for (std::uint64_t sub = 1; sub < 256; ++sub) {
      std::vector<Tuple> rel;
      for (std::size_t i = 0; i < 8; ++i) {
        if ((sub >> i) & 1U) rel.push_back(all[i]);
      }
      if (!oracle::preserves(w, rel)) continue;
      Instance inst;
      for (int i = 0; i < 3; ++i) inst.add_variable("v", alg);
      inst.add_constraint(std::make_shared<const Relation>(std::vector<AlgebraPtr>(3, alg), rel),
                          {0, 1, 2});
      const Instance all_weaker = weaken_all(normalize(inst));
      Instance strongest = inst;
      strongest.set_constraints(strongest_weaker(inst, inst.constraints()[0]));
      CHECK(oracle::csp_solutions(strongest) == oracle::csp_solutions(all_weaker));
    }
  }
}

TEST_CASE("crucial instance for the Z4 system", "[instance]") {
  const Instance inst = examples::z4_example();
  // No solution with every variable even.
  const UnsatOracle unsat = [](const Instance& i) {
    std::vector<ElementSet> red(i.size(), ElementSet::of({0, 2}));
    return oracle::csp_solutions(apply_reduction(i, red)).empty();
  };
  const Instance crucial = make_crucial(inst, unsat);
  CHECK(unsat(crucial));
  CHECK(crucial.constraints().size() == 3);
  CHECK(oracle::csp_solutions(crucial) ==
        oracle::csp_solutions(examples::z4_example_without_last()));
  // Crucial: weakening any constraint lets a solution through.
  for (std::size_t i = 0; i < crucial.constraints().size(); ++i) {
    CHECK_FALSE(unsat(weaken_constraint(crucial, i)));
  }

  CHECK_THROWS_AS(make_crucial(inst, [](const Instance&) { return false; }), OracleError);
}
