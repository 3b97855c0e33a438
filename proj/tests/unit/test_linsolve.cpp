#include <catch_amalgamated.hpp>

#include <random>
#include <set>

#include "oracles.hpp"
#include "wnucsp/linsolve.hpp"

using namespace wnucsp;

namespace {

LinearSystem z2_system(std::size_t k, const std::vector<std::pair<std::vector<Element>, Element>>& rows) {
  LinearSystem sys;
  for (std::size_t i = 0; i < k; ++i) sys.vars.push_back({"x" + std::to_string(i + 1) + "'", 2});
  for (const auto& [c, r] : rows) sys.equations.push_back({2, c, r});
  return sys;
}

// x1'+x3'+x4' = 0, x2'+x3'+x4' = 0, x1'+x2' = 0
LinearSystem parity_system() {
  return z2_system(4, {{{1, 0, 1, 1}, 0}, {{0, 1, 1, 1}, 0}, {{1, 1, 0, 0}, 0}});
}

std::set<Tuple> image_of(const AffineParam& param) {
  std::set<Tuple> out;
  std::vector<std::size_t> radix;
  for (const FreeVar& f : param.free_vars) radix.push_back(f.modulus);
  std::function<void(Tuple&, std::size_t)> rec = [&](Tuple& y, std::size_t i) {
    if (i == radix.size()) {
      out.insert(param.evaluate(y));
      return;
    }
    for (Element a = 0; a < radix[i]; ++a) {
      y[i] = a;
      rec(y, i + 1);
    }
  };
  Tuple y(radix.size());
  rec(y, 0);
  return out;
}

// Every point of Z_p^h satisfying c.y = c0.
std::set<Tuple> hyperplane(unsigned p, const std::vector<Element>& c, Element c0) {
  std::set<Tuple> out;
  oracle::for_each_tuple(p, c.size(), [&](const Tuple& y) {
    std::size_t s = 0;
    for (std::size_t i = 0; i < y.size(); ++i) s += c[i] * y[i];
    if (s % p == c0) out.insert(y);
  });
  return out;
}

}  // namespace

TEST_CASE("parity system parameterization", "[linsolve]") {
  const LinearSolution s = solve_linear_system(parity_system());
  REQUIRE(s.kind == LinearSolution::Kind::param);
  const AffineParam& p = s.param;
  REQUIRE(p.dimension() == 2);
  CHECK(p.free_vars[0].scalar == 0);
  CHECK(p.free_vars[1].scalar == 2);
  CHECK(p.map[0] == AffineExpr{0, {1, 0}});
  CHECK(p.map[1] == AffineExpr{0, {1, 0}});
  CHECK(p.map[2] == AffineExpr{0, {0, 1}});
  CHECK(p.map[3] == AffineExpr{0, {1, 1}});
  CHECK(p.point_count() == 4);
  const auto sols = oracle::solutions(parity_system());
  CHECK(image_of(p) == std::set<Tuple>(sols.begin(), sols.end()));
}

TEST_CASE("adding a learned equation", "[linsolve]") {
  LinearSystem sys = parity_system();
  sys.equations.push_back({2, {1, 0, 0, 0}, 1});
  const LinearSolution s = solve_linear_system(sys);
  REQUIRE(s.kind == LinearSolution::Kind::param);
  REQUIRE(s.param.dimension() == 1);
  CHECK(s.param.free_vars[0].scalar == 2);
  CHECK(s.param.map[0] == AffineExpr{1, {0}});
  CHECK(s.param.map[1] == AffineExpr{1, {0}});
  CHECK(s.param.map[2] == AffineExpr{0, {1}});
  CHECK(s.param.map[3] == AffineExpr{1, {1}});

  sys.equations.push_back({2, {0, 1, 0, 0}, 0});
  CHECK(solve_linear_system(sys).kind == LinearSolution::Kind::inconsistent);
}

TEST_CASE("unique solutions and the empty system", "[linsolve]") {
  const LinearSolution u = solve_linear_system(z2_system(2, {{{1, 0}, 1}, {{1, 1}, 0}}));
  REQUIRE(u.kind == LinearSolution::Kind::unique);
  CHECK(u.solution == Tuple{1, 1});

  const LinearSolution e = solve_linear_system(LinearSystem{});
  CHECK(e.kind != LinearSolution::Kind::inconsistent);
}

TEST_CASE("bad moduli", "[linsolve]") {
  LinearSystem sys;
  sys.vars.push_back({"a", 4});
  sys.equations.push_back({4, {1}, 0});
  CHECK_THROWS_AS(solve_linear_system(sys), FormatError);
}

TEST_CASE("basis points", "[linsolve]") {
  const LinearSolution s = solve_linear_system(parity_system());
  const auto pts = basis_points(s.param);
  CHECK(pts == std::vector<Tuple>{{0, 0}, {1, 0}, {0, 1}});
}

TEST_CASE("random systems match enumeration", "[linsolve][oracle]") {
  std::mt19937 rng(17);
  for (int round = 0; round < 400; ++round) {
    LinearSystem sys;
    const bool mixed = round % 4 == 3;
    const std::size_t k = 1 + rng() % 5;
    const unsigned base = std::vector<unsigned>{2, 3, 5}[rng() % 3];
    for (std::size_t i = 0; i < k; ++i) {
      const unsigned p = mixed ? (rng() % 2 ? 2U : 3U) : base;
      sys.vars.push_back({"v" + std::to_string(i), p});
    }
    const std::size_t m = rng() % (k + 2);
    for (std::size_t r = 0; r < m; ++r) {
      const unsigned p = sys.vars[rng() % k].prime;
      Equation e{p, std::vector<Element>(k, 0), static_cast<Element>(rng() % p)};
      for (std::size_t i = 0; i < k; ++i) {
        if (sys.vars[i].prime == p) e.coeffs[i] = rng() % p;
      }
      sys.equations.push_back(e);
    }
    const auto expected_list = oracle::solutions(sys);
    const std::set<Tuple> expected(expected_list.begin(), expected_list.end());
    const LinearSolution s = solve_linear_system(sys);
    switch (s.kind) {
      case LinearSolution::Kind::inconsistent:
        CHECK(expected.empty());
        break;
      case LinearSolution::Kind::unique:
        CHECK(expected == std::set<Tuple>{s.solution});
        break;
      case LinearSolution::Kind::param:
        CHECK(image_of(s.param) == expected);
        CHECK(s.param.point_count() == expected.size());
        break;
    }
  }
}

TEST_CASE("hyperplane learning examples", "[linsolve]") {
  // x1' = 1 over the pairs (x1', x3').
  const HyperplaneResult a = learn_hyperplane(
      [](std::span<const Element> y) { return y[0] == 1; }, 2, 2);
  REQUIRE(a.kind == HyperplaneResult::Kind::equation);
  CHECK(a.coeffs == std::vector<Element>{1, 0});
  CHECK(a.constant == 1);
  CHECK(format_equation(Equation{2, a.coeffs, a.constant},
                        {{"x1'", 2}, {"x3'", 2}}) == "x1' = 1 (mod 2)");

  const HyperplaneResult f = learn_hyperplane([](std::span<const Element>) { return true; }, 3, 2);
  CHECK(f.kind == HyperplaneResult::Kind::full);
  const HyperplaneResult e = learn_hyperplane([](std::span<const Element>) { return false; }, 3, 2);
  CHECK(e.kind == HyperplaneResult::Kind::empty);

  const HyperplaneResult z3 = learn_hyperplane(
      [](std::span<const Element> y) { return (y[0] + 2 * y[1]) % 3 == 1; }, 3, 2);
  REQUIRE(z3.kind == HyperplaneResult::Kind::equation);
  CHECK(z3.coeffs == std::vector<Element>{1, 2});
  CHECK(z3.constant == 1);

  CHECK_THROWS_AS(
      learn_hyperplane([](std::span<const Element> y) { return y[0] != 1; }, 3, 1),
      AffineStructureViolation);
}

TEST_CASE("every hyperplane is learned within the query bound", "[linsolve][oracle]") {
  for (unsigned p : {2U, 3U, 5U}) {
    for (std::size_t h = 1; h <= (p == 5 ? 2U : 3U); ++h) {
      oracle::for_each_tuple(p, h, [&](const Tuple& c) {
        if (std::all_of(c.begin(), c.end(), [](Element x) { return x == 0; })) return;
        for (Element c0 = 0; c0 < p; ++c0) {
          const std::set<Tuple> v = hyperplane(p, c, c0);
          std::size_t queries = 0;
          const HyperplaneResult r = learn_hyperplane(
              [&](std::span<const Element> y) {
                ++queries;
                return v.count(Tuple(y.begin(), y.end())) > 0;
              },
              p, h);
          REQUIRE(r.kind == HyperplaneResult::Kind::equation);
          CHECK(hyperplane(p, r.coeffs, r.constant) == v);
          const auto lead = std::find_if(r.coeffs.begin(), r.coeffs.end(),
                                         [](Element x) { return x != 0; });
          CHECK(*lead == 1);
          CHECK(queries <= p * h + 1);
          CHECK(r.queries == queries);
        }
      });
    }
  }
}
