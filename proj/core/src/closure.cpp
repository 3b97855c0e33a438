// Coordinatewise application of w to sets of tuples, and generated
// subuniverses of finite products.

#include <algorithm>
#include <cstdint>
#include <optional>
#include <string>
#include <unordered_set>

#include "wnucsp/algebra.hpp"

namespace wnucsp {

namespace {

// States hold one 16-bit residual class per coordinate.
std::string initial_state(std::size_t r) { return std::string(2 * r, '\0'); }

inline std::uint32_t read_class(const std::string& s, std::size_t c) {
  return static_cast<std::uint8_t>(s[2 * c]) |
         (static_cast<std::uint32_t>(static_cast<std::uint8_t>(s[2 * c + 1])) << 8);
}

inline void write_class(std::string& s, std::size_t c, std::uint32_t v) {
  s[2 * c] = static_cast<char>(v & 0xFF);
  s[2 * c + 1] = static_cast<char>((v >> 8) & 0xFF);
}

void check_coords(std::span<const Algebra* const> coords) {
  if (coords.empty()) return;
  const std::size_t m = coords.front()->arity();
  for (const Algebra* a : coords) {
    if (a->arity() != m) {
      throw ArgumentError("coordinate algebras must share one WNU arity");
    }
    for (std::uint32_t cc : a->curried().class_count) {
      if (cc > 0xFFFF) throw SizeError("operation table too large for closure engine");
    }
  }
}

// Same fold with states numbered in mixed radix and a bitmap for the seen
// set; nullopt when some level has too many states for that.
std::optional<std::vector<Tuple>> apply_dense(std::span<const Algebra* const> coords,
                                              const std::vector<Tuple>& rows) {
  constexpr std::uint64_t kMaxStates = std::uint64_t{1} << 24;
  const std::size_t r = coords.size();
  const std::size_t m = coords.front()->arity();
  std::vector<std::vector<std::uint32_t>> radix(m + 1, std::vector<std::uint32_t>(r));
  for (std::size_t j = 0; j <= m; ++j) {
    std::uint64_t total = 1;
    for (std::size_t c = r; c-- > 0;) {
      radix[j][c] = static_cast<std::uint32_t>(total);
      total *= coords[c]->curried().class_count[j];
      if (total > kMaxStates) return std::nullopt;
    }
  }

  std::vector<std::uint32_t> states{0};
  std::vector<std::uint32_t> cls(r);
  std::vector<bool> seen;
  for (std::size_t j = 0; j < m; ++j) {
    std::uint64_t total = 1;
    for (std::size_t c = 0; c < r; ++c) total *= coords[c]->curried().class_count[j + 1];
    seen.assign(total, false);
    std::vector<std::uint32_t> next;
    for (std::uint32_t s : states) {
      if (next.size() == total) break;
      for (std::size_t c = 0; c < r; ++c) {
        cls[c] = (s / radix[j][c]) % coords[c]->curried().class_count[j];
      }
      for (const Tuple& row : rows) {
        std::uint32_t key = 0;
        for (std::size_t c = 0; c < r; ++c) {
          const Algebra& alg = *coords[c];
          key += alg.curried().step[j][cls[c] * alg.size() + row[c]] * radix[j + 1][c];
        }
        if (!seen[key]) {
          seen[key] = true;
          next.push_back(key);
        }
      }
    }
    states = std::move(next);
  }

  std::sort(states.begin(), states.end());
  std::vector<Tuple> out;
  out.reserve(states.size());
  for (std::uint32_t s : states) {
    Tuple t(r);
    for (std::size_t c = 0; c < r; ++c) t[c] = (s / radix[m][c]) % coords[c]->size();
    out.push_back(std::move(t));
  }
  return out;
}

}  // namespace

std::vector<Tuple> apply_coordinatewise(std::span<const Algebra* const> coords,
                                        const std::vector<Tuple>& rows) {
  check_coords(coords);
  if (rows.empty()) return {};
  const std::size_t r = coords.size();
  if (r == 0) return {Tuple{}};
  const std::size_t m = coords.front()->arity();
  if (auto dense = apply_dense(coords, rows)) return std::move(*dense);

  std::unordered_set<std::string> states{initial_state(r)};
  for (std::size_t j = 0; j < m; ++j) {
    std::unordered_set<std::string> next;
    next.reserve(states.size() * 2);
    std::string key = initial_state(r);
    for (const std::string& s : states) {
      for (const Tuple& row : rows) {
        for (std::size_t c = 0; c < r; ++c) {
          const Algebra& alg = *coords[c];
          const auto& step = alg.curried().step[j];
          write_class(key, c, step[read_class(s, c) * alg.size() + row[c]]);
        }
        next.insert(key);
      }
    }
    states = std::move(next);
  }

  std::vector<Tuple> out;
  out.reserve(states.size());
  for (const std::string& s : states) {
    Tuple t(r);
    for (std::size_t c = 0; c < r; ++c) t[c] = read_class(s, c);
    out.push_back(std::move(t));
  }
  std::sort(out.begin(), out.end());
  return out;
}

GeneratedSubuniverse generate_subuniverse(std::span<const Algebra* const> coords,
                                          const std::vector<Tuple>& generators,
                                          std::size_t size_cap) {
  GeneratedSubuniverse result;
  result.tuples = generators;
  std::sort(result.tuples.begin(), result.tuples.end());
  result.tuples.erase(std::unique(result.tuples.begin(), result.tuples.end()),
                      result.tuples.end());
  for (const Tuple& t : result.tuples) {
    if (t.size() != coords.size()) throw ArgumentError("generator has wrong arity");
    for (std::size_t c = 0; c < t.size(); ++c) {
      if (t[c] >= coords[c]->size()) throw ArgumentError("generator entry out of range");
    }
  }
  if (result.tuples.size() > size_cap) {
    result.complete = false;
    return result;
  }
  std::size_t whole = 1;
  for (const Algebra* a : coords) {
    whole = whole > SIZE_MAX / a->size() ? SIZE_MAX : whole * a->size();
  }
  while (result.tuples.size() < whole) {
    // w is idempotent, so the image contains the current set.
    std::vector<Tuple> image = apply_coordinatewise(coords, result.tuples);
    if (image.size() == result.tuples.size()) break;
    result.tuples = std::move(image);
    if (result.tuples.size() > size_cap) {
      result.complete = false;
      break;
    }
  }
  return result;
}

}  // namespace wnucsp
