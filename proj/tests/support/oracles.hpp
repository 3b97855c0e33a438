#pragma once

// Brute-force reference implementations.  They use only the plain data of the
// library types (tables, tuple lists) and none of its algorithms.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "wnucsp/algebra.hpp"
#include "wnucsp/instance.hpp"

namespace oracle {

using wnucsp::Element;
using wnucsp::OperationTable;
using wnucsp::Tuple;

using Table = std::vector<std::uint8_t>;  // row-major, first argument most significant

inline std::size_t power(std::size_t b, std::size_t e) {
  std::size_t r = 1;
  while (e--) r *= b;
  return r;
}

inline Element eval(const OperationTable& t, const Tuple& args) {
  std::size_t idx = 0;
  for (Element a : args) idx = idx * t.domain_size() + a;
  return t.entries()[idx];
}

// Calls f on every tuple of {0..n-1}^k in lexicographic order.
inline void for_each_tuple(std::size_t n, std::size_t k, const std::function<void(const Tuple&)>& f) {
  Tuple t(k, 0);
  while (true) {
    f(t);
    std::size_t i = k;
    while (i > 0 && ++t[i - 1] == n) t[--i] = 0;
    if (i == 0) return;
  }
}

// Calls f on every sequence of m rows chosen from `rows`.
inline void for_each_row_choice(const std::vector<Tuple>& rows, std::size_t m,
                                const std::function<void(const std::vector<const Tuple*>&)>& f) {
  if (rows.empty()) return;
  for_each_tuple(rows.size(), m, [&](const Tuple& pick) {
    std::vector<const Tuple*> chosen;
    for (Element i : pick) chosen.push_back(&rows[i]);
    f(chosen);
  });
}

inline std::set<Tuple> image(const OperationTable& w, const std::vector<Tuple>& rows) {
  std::set<Tuple> out;
  const std::size_t r = rows.empty() ? 0 : rows.front().size();
  for_each_row_choice(rows, w.arity(), [&](const std::vector<const Tuple*>& chosen) {
    Tuple t(r);
    for (std::size_t c = 0; c < r; ++c) {
      Tuple args;
      for (const Tuple* row : chosen) args.push_back((*row)[c]);
      t[c] = eval(w, args);
    }
    out.insert(t);
  });
  return out;
}

inline bool preserves(const OperationTable& w, const std::vector<Tuple>& rows) {
  const std::set<Tuple> rel(rows.begin(), rows.end());
  for (const Tuple& t : image(w, rows)) {
    if (!rel.count(t)) return false;
  }
  return true;
}

// Least superset closed under w, by repeated full application.
inline std::vector<Tuple> closure(const OperationTable& w, std::vector<Tuple> rows) {
  std::set<Tuple> cur(rows.begin(), rows.end());
  while (true) {
    std::vector<Tuple> list(cur.begin(), cur.end());
    std::set<Tuple> next = image(w, list);
    next.insert(list.begin(), list.end());
    if (next.size() == cur.size()) return list;
    cur = std::move(next);
  }
}

inline bool is_subuniverse(const OperationTable& w, std::uint64_t bits) {
  std::vector<Tuple> rows;
  for (Element a = 0; a < w.domain_size(); ++a) {
    if ((bits >> a) & 1U) rows.push_back({a});
  }
  return preserves(w, rows);
}

// Special WNU check straight from the identities.
inline bool is_special_wnu(const OperationTable& w) {
  const std::size_t n = w.domain_size();
  const std::size_t m = w.arity();
  for (Element a = 0; a < n; ++a) {
    if (eval(w, Tuple(m, a)) != a) return false;
    for (Element b = 0; b < n; ++b) {
      Element first = 0;
      for (std::size_t pos = 0; pos < m; ++pos) {
        Tuple args(m, a);
        args[pos] = b;
        const Element v = eval(w, args);
        if (pos == 0) first = v;
        if (v != first) return false;
      }
      Tuple ab(m, a);
      ab.back() = b;
      const Element aob = eval(w, ab);
      Tuple again(m, a);
      again.back() = aob;
      if (eval(w, again) != aob) return false;
    }
  }
  return true;
}

// Every partition of {0..n-1} as a block map with blocks numbered in order of
// least element.
inline std::vector<std::vector<Element>> all_partitions(std::size_t n) {
  std::vector<std::vector<Element>> out;
  std::vector<Element> cur;
  std::function<void(Element)> rec = [&](Element used) {
    if (cur.size() == n) {
      out.push_back(cur);
      return;
    }
    for (Element b = 0; b <= used; ++b) {
      cur.push_back(b);
      rec(std::max<Element>(used, b + 1));
      cur.pop_back();
    }
  };
  if (n > 0) rec(0);
  return out;
}

// a ~ b componentwise implies w(a) ~ w(b), over all pairs of argument tuples.
inline bool is_congruence(const OperationTable& w, const std::vector<Element>& block) {
  const std::size_t n = w.domain_size();
  const std::size_t m = w.arity();
  bool ok = true;
  for_each_tuple(n, m, [&](const Tuple& x) {
    if (!ok) return;
    for_each_tuple(n, m, [&](const Tuple& y) {
      if (!ok) return;
      for (std::size_t i = 0; i < m; ++i) {
        if (block[x[i]] != block[y[i]]) return;
      }
      if (block[eval(w, x)] != block[eval(w, y)]) ok = false;
    });
  });
  return ok;
}

inline std::set<std::vector<Element>> congruences(const OperationTable& w) {
  std::set<std::vector<Element>> out;
  for (const auto& p : all_partitions(w.domain_size())) {
    if (is_congruence(w, p)) out.insert(p);
  }
  return out;
}

// Closure of the k-ary projections and constants under w, as tables.
inline std::set<Table> polynomials(const OperationTable& w, std::size_t k) {
  const std::size_t n = w.domain_size();
  const std::size_t size = power(n, k);
  std::set<Table> found;
  for (std::size_t i = 0; i < k; ++i) {
    Table t(size);
    for (std::size_t idx = 0; idx < size; ++idx) {
      t[idx] = static_cast<std::uint8_t>((idx / power(n, k - 1 - i)) % n);
    }
    found.insert(t);
  }
  for (Element c = 0; c < n; ++c) found.insert(Table(size, static_cast<std::uint8_t>(c)));
  const std::size_t all = power(n, size);
  while (found.size() < all) {
    std::vector<Table> list(found.begin(), found.end());
    std::set<Table> next = found;
    for_each_tuple(list.size(), w.arity(), [&](const Tuple& pick) {
      if (next.size() == all) return;
      Table t(size);
      for (std::size_t idx = 0; idx < size; ++idx) {
        Tuple args;
        for (Element p : pick) args.push_back(list[p][idx]);
        t[idx] = static_cast<std::uint8_t>(eval(w, args));
      }
      next.insert(std::move(t));
    });
    if (next.size() == found.size()) return found;
    found = std::move(next);
  }
  return found;
}

// Two-element algebras: the polynomial clone is full iff its ternary part
// holds every ternary table.
inline bool polynomially_complete_2(const OperationTable& w) {
  return polynomials(w, 3).size() == 256;
}

// Every unary map is a polynomial.
inline bool all_unary_polynomials(const OperationTable& w) {
  return polynomials(w, 1).size() == power(w.domain_size(), w.domain_size());
}

// Solutions of a system of equations over Z_p1 x ... by enumeration.
inline std::vector<Tuple> solutions(const wnucsp::LinearSystem& sys) {
  std::vector<Tuple> out;
  const std::size_t k = sys.vars.size();
  std::size_t total = 1;
  for (const auto& v : sys.vars) total *= v.prime;
  for (std::size_t idx = 0; idx < total; ++idx) {
    Tuple x(k);
    std::size_t rest = idx;
    for (std::size_t i = k; i-- > 0;) {
      x[i] = static_cast<Element>(rest % sys.vars[i].prime);
      rest /= sys.vars[i].prime;
    }
    bool ok = true;
    for (const auto& e : sys.equations) {
      std::size_t s = 0;
      for (std::size_t i = 0; i < k; ++i) s += e.coeffs[i] * x[i];
      if (s % e.prime != e.rhs % e.prime) ok = false;
    }
    if (ok) out.push_back(x);
  }
  return out;
}

// Every satisfying assignment, in lexicographic order, checking tuples by a
// linear scan of each relation.
inline std::vector<Tuple> csp_solutions(const wnucsp::Instance& inst) {
  std::vector<Tuple> out;
  const std::size_t n = inst.size();
  std::vector<std::vector<Element>> values;
  for (const auto& v : inst.variables()) {
    std::vector<Element> vals;
    for (Element a = 0; a < 64; ++a) {
      if (v.domain.contains(a)) vals.push_back(a);
    }
    values.push_back(vals);
  }
  Tuple a(n);
  std::function<void(std::size_t)> rec = [&](std::size_t i) {
    if (i == n) {
      for (const auto& c : inst.constraints()) {
        Tuple t;
        for (std::size_t v : c.scope) t.push_back(a[v]);
        if (std::find(c.relation->tuples().begin(), c.relation->tuples().end(), t) ==
            c.relation->tuples().end()) {
          return;
        }
      }
      out.push_back(a);
      return;
    }
    for (Element x : values[i]) {
      a[i] = x;
      rec(i + 1);
    }
  };
  rec(0);
  return out;
}

}  // namespace oracle
