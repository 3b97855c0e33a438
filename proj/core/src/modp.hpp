#pragma once

// Arithmetic and row reduction over Z_p for small primes.

#include <cstddef>
#include <span>
#include <vector>

#include "wnucsp/algebra.hpp"

namespace wnucsp::detail {

inline bool is_prime(unsigned p) {
  if (p < 2) return false;
  for (unsigned d = 2; d * d <= p; ++d) {
    if (p % d == 0) return false;
  }
  return true;
}

inline Element inv_mod(Element a, unsigned p) {
  Element result = 1;
  Element base = a % p;
  for (unsigned e = p - 2; e > 0; e >>= 1) {
    if (e & 1U) result = result * base % p;
    base = base * base % p;
  }
  return result;
}

using Matrix = std::vector<std::vector<Element>>;

// Gauss-Jordan elimination choosing pivot columns in the order given by
// `cols`.  Afterwards each remaining row has a 1 in its pivot column and every
// other row is zero there.  Rows past the rank are zero on `cols` and are left
// in place.  Columns outside `cols` are carried along (e.g. a right-hand
// side).  Returns the pivot column of each leading row.
inline std::vector<std::size_t> row_reduce(Matrix& m, unsigned p,
                                           std::span<const std::size_t> cols) {
  std::vector<std::size_t> pivots;
  std::size_t rank = 0;
  for (std::size_t col : cols) {
    std::size_t sel = rank;
    while (sel < m.size() && m[sel][col] % p == 0) ++sel;
    if (sel == m.size()) continue;
    std::swap(m[rank], m[sel]);
    const Element inv = inv_mod(m[rank][col], p);
    for (Element& v : m[rank]) v = v * inv % p;
    for (std::size_t r = 0; r < m.size(); ++r) {
      if (r == rank || m[r][col] % p == 0) continue;
      const Element f = m[r][col];
      for (std::size_t c = 0; c < m[r].size(); ++c) {
        m[r][c] = (m[r][c] + (p - f) * m[rank][c]) % p;
      }
    }
    pivots.push_back(col);
    ++rank;
  }
  return pivots;
}

}  // namespace wnucsp::detail
