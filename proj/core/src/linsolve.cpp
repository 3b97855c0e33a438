#include "wnucsp/linsolve.hpp"

#include <algorithm>
#include <set>
#include <sstream>

#include "modp.hpp"

namespace wnucsp {

Tuple AffineParam::evaluate(std::span<const Element> point) const {
  if (point.size() != free_vars.size()) throw ArgumentError("point has wrong dimension");
  Tuple out(map.size());
  for (std::size_t v = 0; v < map.size(); ++v) {
    std::uint64_t s = map[v].constant;
    for (std::size_t f = 0; f < point.size(); ++f) s += std::uint64_t{map[v].coeffs[f]} * point[f];
    out[v] = static_cast<Element>(s % moduli[v]);
  }
  return out;
}

std::size_t AffineParam::point_count() const {
  std::size_t n = 1;
  for (const FreeVar& f : free_vars) n *= f.modulus;
  return n;
}

LinearSolution solve_linear_system(const LinearSystem& sys) {
  sys.validate();
  const std::size_t nv = sys.vars.size();
  LinearSolution out;
  std::set<unsigned> primes;
  for (const ScalarVar& v : sys.vars) primes.insert(v.prime);
  for (const Equation& e : sys.equations) primes.insert(e.prime);

  // pivot_row_of[v]: reduced row defining v, or none if v is free.
  std::vector<std::vector<Element>> row_of(nv);
  std::vector<bool> is_pivot(nv, false);
  for (unsigned p : primes) {
    std::vector<std::size_t> cols;
    for (std::size_t v = nv; v-- > 0;) {
      if (sys.vars[v].prime == p) cols.push_back(v);
    }
    detail::Matrix m;
    for (const Equation& e : sys.equations) {
      if (e.prime != p) continue;
      std::vector<Element> row(e.coeffs.begin(), e.coeffs.end());
      row.push_back(e.rhs);
      m.push_back(std::move(row));
    }
    const std::vector<std::size_t> pivots = detail::row_reduce(m, p, cols);
    for (std::size_t r = pivots.size(); r < m.size(); ++r) {
      if (m[r][nv] % p != 0) return out;  // 0 = c with c != 0
    }
    for (std::size_t r = 0; r < pivots.size(); ++r) {
      is_pivot[pivots[r]] = true;
      row_of[pivots[r]] = m[r];
    }
  }

  AffineParam& param = out.param;
  std::vector<std::size_t> free_index(nv, SIZE_MAX);
  for (std::size_t v = 0; v < nv; ++v) {
    param.moduli.push_back(sys.vars[v].prime);
    if (!is_pivot[v]) {
      free_index[v] = param.free_vars.size();
      param.free_vars.push_back({v, sys.vars[v].prime});
    }
  }
  const std::size_t k = param.free_vars.size();
  for (std::size_t v = 0; v < nv; ++v) {
    const unsigned p = sys.vars[v].prime;
    AffineExpr e{0, std::vector<Element>(k, 0)};
    if (!is_pivot[v]) {
      e.coeffs[free_index[v]] = 1;
    } else {
      const std::vector<Element>& row = row_of[v];
      e.constant = row[nv] % p;
      for (std::size_t u = 0; u < nv; ++u) {
        if (u == v || row[u] == 0) continue;
        // Gauss-Jordan leaves only free variables beside the pivot.
        e.coeffs[free_index[u]] = (p - row[u] % p) % p;
      }
    }
    param.map.push_back(std::move(e));
  }
  if (k == 0) {
    out.kind = LinearSolution::Kind::unique;
    out.solution = param.evaluate({});
  } else {
    out.kind = LinearSolution::Kind::param;
  }
  return out;
}

std::vector<Tuple> basis_points(const AffineParam& param) {
  const std::size_t k = param.dimension();
  std::vector<Tuple> out{Tuple(k, 0)};
  for (std::size_t i = 0; i < k; ++i) {
    Tuple e(k, 0);
    e[i] = 1;
    out.push_back(std::move(e));
  }
  return out;
}

HyperplaneResult learn_hyperplane(const MembershipOracle& oracle, unsigned p, std::size_t h) {
  if (!detail::is_prime(p)) throw FormatError("modulus " + std::to_string(p) + " is not prime");
  HyperplaneResult out;
  std::vector<std::pair<Tuple, bool>> seen;
  auto ask = [&](const Tuple& x) {
    ++out.queries;
    const bool in = oracle(x);
    seen.emplace_back(x, in);
    return in;
  };

  Tuple d(h, 0);
  if (ask(d)) {
    bool found = false;
    for (std::size_t i = 0; i < h && !found; ++i) {
      Tuple e(h, 0);
      e[i] = 1;
      if (!ask(e)) {
        d = e;
        found = true;
      }
    }
    if (!found) {
      out.kind = HyperplaneResult::Kind::full;
      return out;
    }
  }

  // With d outside V = {c.x = c0} scaled so that c0 - c.d = 1, the line
  // through d along axis i meets V exactly at d_i + 1/c_i when c_i != 0.
  std::vector<Element> c(h, 0);
  bool any = false;
  for (std::size_t i = 0; i < h; ++i) {
    std::optional<Element> hit;
    for (Element a = 0; a < p; ++a) {
      if (a == d[i]) continue;
      Tuple x = d;
      x[i] = a;
      if (!ask(x)) continue;
      if (hit) {
        throw AffineStructureViolation("two accepted points on one axis line");
      }
      hit = a;
    }
    if (hit) {
      c[i] = detail::inv_mod((*hit + p - d[i]) % p, p);
      any = true;
    }
  }
  if (!any) {
    out.kind = HyperplaneResult::Kind::empty;
    for (const auto& [x, in] : seen) {
      if (in) throw AffineStructureViolation("accepted point but no accepted axis point");
    }
    return out;
  }
  std::uint64_t cd = 0;
  for (std::size_t i = 0; i < h; ++i) cd += std::uint64_t{c[i]} * d[i];
  Element c0 = static_cast<Element>((cd + 1) % p);
  const auto lead = std::find_if(c.begin(), c.end(), [](Element v) { return v != 0; });
  const Element scale = detail::inv_mod(*lead, p);
  for (Element& v : c) v = v * scale % p;
  c0 = c0 * scale % p;

  for (const auto& [x, in] : seen) {
    std::uint64_t s = 0;
    for (std::size_t i = 0; i < h; ++i) s += std::uint64_t{c[i]} * x[i];
    if ((s % p == c0) != in) {
      throw AffineStructureViolation("answers disagree with the learned hyperplane");
    }
  }
  out.kind = HyperplaneResult::Kind::equation;
  out.coeffs = std::move(c);
  out.constant = c0;
  return out;
}

std::string format_equation(const Equation& e, const std::vector<ScalarVar>& vars) {
  std::ostringstream os;
  bool first = true;
  for (std::size_t v = 0; v < e.coeffs.size(); ++v) {
    if (e.coeffs[v] == 0) continue;
    if (!first) os << " + ";
    if (e.coeffs[v] != 1) os << e.coeffs[v] << '*';
    os << (v < vars.size() ? vars[v].name : "v" + std::to_string(v));
    first = false;
  }
  if (first) os << '0';
  os << " = " << e.rhs << " (mod " << e.prime << ')';
  return os.str();
}

}  // namespace wnucsp
