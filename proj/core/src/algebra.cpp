#include "wnucsp/algebra.hpp"

#include <algorithm>
#include <map>
#include <mutex>
#include <numeric>
#include <set>
#include <sstream>

namespace wnucsp {

namespace {

std::size_t ipow(std::size_t base, std::size_t exp) {
  std::size_t r = 1;
  for (std::size_t i = 0; i < exp; ++i) r *= base;
  return r;
}

std::vector<unsigned> prime_factors(std::size_t n) {
  std::vector<unsigned> out;
  for (unsigned p = 2; p * p <= n; ++p) {
    while (n % p == 0) {
      out.push_back(p);
      n /= p;
    }
  }
  if (n > 1) out.push_back(static_cast<unsigned>(n));
  return out;
}

}  // namespace

// ============================================================================
// ElementSet
// ============================================================================

std::vector<Element> ElementSet::elements() const {
  std::vector<Element> out;
  for (std::uint64_t b = bits_; b != 0; b &= b - 1) {
    out.push_back(static_cast<Element>(std::countr_zero(b)));
  }
  return out;
}

std::string ElementSet::to_string() const {
  std::ostringstream os;
  os << '{';
  bool first = true;
  for (Element a : elements()) {
    if (!first) os << ',';
    os << a;
    first = false;
  }
  os << '}';
  return os.str();
}

std::strong_ordering ElementSet::operator<=>(const ElementSet& o) const {
  return elements() <=> o.elements();
}

// ============================================================================
// OperationTable
// ============================================================================

OperationTable::OperationTable(std::size_t arity, std::size_t domain_size,
                               std::vector<std::uint8_t> entries)
    : arity_(arity), n_(domain_size), entries_(std::move(entries)) {
  if (arity_ == 0) throw FormatError("operation arity must be positive");
  if (n_ == 0 || n_ > 255) throw FormatError("domain size must be in 1..255");
  const std::size_t expected = ipow(n_, arity_);
  if (entries_.size() != expected) {
    throw FormatError("operation table has " + std::to_string(entries_.size()) +
                      " entries, expected " + std::to_string(expected));
  }
  for (std::uint8_t v : entries_) {
    if (v >= n_) throw FormatError("operation table entry out of range");
  }
}

std::size_t OperationTable::index_of(std::span<const Element> args) const {
  std::size_t idx = 0;
  for (Element a : args) idx = idx * n_ + a;
  return idx;
}

Tuple OperationTable::arguments_of(std::size_t index) const {
  Tuple args(arity_);
  for (std::size_t i = arity_; i-- > 0;) {
    args[i] = static_cast<Element>(index % n_);
    index /= n_;
  }
  return args;
}

namespace ops {

OperationTable sum_mod(std::size_t n, std::size_t arity) {
  return OperationTable::from_function(arity, n, [n](std::span<const Element> x) {
    std::size_t s = 0;
    for (Element v : x) s += v;
    return s % n;
  });
}

OperationTable minority() { return sum_mod(2, 3); }

OperationTable majority() {
  return OperationTable::from_function(3, 2, [](std::span<const Element> x) {
    return (x[0] + x[1] + x[2]) >= 2 ? 1U : 0U;
  });
}

OperationTable meet(std::size_t arity) {
  return OperationTable::from_function(arity, 2, [](std::span<const Element> x) {
    return std::all_of(x.begin(), x.end(), [](Element v) { return v == 1; }) ? 1U : 0U;
  });
}

OperationTable dual_discriminator(std::size_t n) {
  return OperationTable::from_function(3, n, [](std::span<const Element> x) {
    return x[1] == x[2] ? x[1] : x[0];
  });
}

OperationTable projection(std::size_t n, std::size_t arity, std::size_t which) {
  return OperationTable::from_function(arity, n,
                                       [which](std::span<const Element> x) { return x[which]; });
}

}  // namespace ops

// ============================================================================
// Special WNU verification
// ============================================================================

std::string WnuViolation::describe() const {
  std::ostringstream os;
  switch (kind) {
    case Kind::idempotence:
      os << "idempotence fails: w(a,...,a) != a for a=" << witness.at(0);
      break;
    case Kind::wnu_identity:
      os << "weak near-unanimity fails for (a,b)=(" << witness.at(0) << ','
         << witness.at(1) << ")";
      break;
    case Kind::specialness:
      os << "specialness fails: a o (a o b) != a o b for (a,b)=(" << witness.at(0)
         << ',' << witness.at(1) << ")";
      break;
  }
  return os.str();
}

WnuVerdict verify_special_wnu(const OperationTable& t) {
  WnuVerdict verdict;
  const std::size_t n = t.domain_size();
  const std::size_t m = t.arity();
  for (Element a = 0; a < n; ++a) {
    Tuple args(m, a);
    if (t(args) != a) {
      verdict.violations.push_back({WnuViolation::Kind::idempotence, {a}});
    }
  }
  auto near_unanimous = [&](Element a, Element b, std::size_t pos) {
    Tuple args(m, a);
    args[pos] = b;
    return t(args);
  };
  for (Element a = 0; a < n; ++a) {
    for (Element b = 0; b < n; ++b) {
      if (a == b) continue;
      const Element first = near_unanimous(a, b, 0);
      for (std::size_t pos = 1; pos < m; ++pos) {
        if (near_unanimous(a, b, pos) != first) {
          verdict.violations.push_back({WnuViolation::Kind::wnu_identity, {a, b}});
          break;
        }
      }
    }
  }
  for (Element a = 0; a < n; ++a) {
    for (Element b = 0; b < n; ++b) {
      const Element ab = near_unanimous(a, b, m - 1);
      if (near_unanimous(a, ab, m - 1) != ab) {
        verdict.violations.push_back({WnuViolation::Kind::specialness, {a, b}});
      }
    }
  }
  return verdict;
}

// ============================================================================
// Algebra
// ============================================================================

namespace {

CurriedTable build_curried(const OperationTable& t) {
  const std::size_t n = t.domain_size();
  const std::size_t m = t.arity();
  CurriedTable c;
  c.step.resize(m);
  c.class_count.resize(m + 1);
  c.class_count[m] = static_cast<std::uint32_t>(n);

  // Classes of the prefixes one level deeper; at level m they are the values.
  std::vector<std::uint32_t> deeper(t.entries().begin(), t.entries().end());
  for (std::size_t j = m; j-- > 0;) {
    const std::size_t prefixes = ipow(n, j);
    std::vector<std::uint32_t> here(prefixes);
    std::map<std::vector<std::uint32_t>, std::uint32_t> ids;
    std::vector<std::uint32_t> step;
    std::vector<std::uint32_t> key(n);
    for (std::size_t p = 0; p < prefixes; ++p) {
      for (std::size_t a = 0; a < n; ++a) key[a] = deeper[p * n + a];
      auto [it, inserted] = ids.try_emplace(key, static_cast<std::uint32_t>(ids.size()));
      if (inserted) step.insert(step.end(), key.begin(), key.end());
      here[p] = it->second;
    }
    c.step[j] = std::move(step);
    c.class_count[j] = static_cast<std::uint32_t>(ids.size());
    deeper = std::move(here);
  }
  return c;
}

}  // namespace

struct Algebra::Memo {
  std::mutex mutex;
  std::optional<std::vector<Congruence>> congruences;
  std::map<std::uint64_t, Subalgebra> subalgebras;
  std::map<std::vector<Element>, Quotient> quotients;
};

Algebra::Algebra(OperationTable wnu)
    : wnu_(std::move(wnu)), memo_(std::make_shared<Memo>()) {
  WnuVerdict verdict = verify_special_wnu(wnu_);
  if (!verdict.ok()) throw WnuInvalid(verdict.violations.front().describe());
  curried_ = build_curried(wnu_);
}

Element Algebra::circle(Element a, Element b) const {
  Tuple args(arity(), a);
  args.back() = b;
  return wnu_(args);
}

AlgebraPtr make_algebra(OperationTable wnu) {
  return std::make_shared<const Algebra>(std::move(wnu));
}

// ============================================================================
// Subuniverses
// ============================================================================

ElementSet subuniverse_closure(const Algebra& alg, ElementSet seed) {
  if (!seed.subset_of(alg.carrier())) throw ArgumentError("seed outside the carrier");
  const std::size_t n = alg.size();
  const CurriedTable& ct = alg.curried();
  ElementSet current = seed;
  while (true) {
    const std::vector<Element> elems = current.elements();
    std::vector<std::uint32_t> classes{0};
    for (std::size_t j = 0; j < alg.arity(); ++j) {
      std::vector<bool> seen(ct.class_count[j + 1], false);
      std::vector<std::uint32_t> next;
      for (std::uint32_t c : classes) {
        for (Element a : elems) {
          const std::uint32_t d = ct.step[j][c * n + a];
          if (!seen[d]) {
            seen[d] = true;
            next.push_back(d);
          }
        }
      }
      classes = std::move(next);
    }
    ElementSet next = current;
    for (std::uint32_t v : classes) next.insert(static_cast<Element>(v));
    if (next == current) return current;
    current = next;
  }
}

bool is_subuniverse(const Algebra& alg, ElementSet set) {
  return set.subset_of(alg.carrier()) && subuniverse_closure(alg, set) == set;
}

std::vector<ElementSet> all_subuniverses(const Algebra& alg) {
  std::vector<ElementSet> out;
  const std::uint64_t limit = std::uint64_t{1} << alg.size();
  for (std::uint64_t bits = 1; bits < limit; ++bits) {
    if (is_subuniverse(alg, ElementSet(bits))) out.emplace_back(bits);
  }
  std::sort(out.begin(), out.end());
  return out;
}

// ============================================================================
// Congruences
// ============================================================================

Congruence::Congruence(std::vector<Element> block_of) {
  std::map<Element, Element> renumber;
  block_of_.resize(block_of.size());
  for (std::size_t a = 0; a < block_of.size(); ++a) {
    auto [it, inserted] =
        renumber.try_emplace(block_of[a], static_cast<Element>(renumber.size()));
    block_of_[a] = it->second;
  }
  blocks_.assign(renumber.size(), ElementSet{});
  for (std::size_t a = 0; a < block_of_.size(); ++a) {
    blocks_[block_of_[a]].insert(static_cast<Element>(a));
  }
}

Congruence Congruence::equality(std::size_t n) {
  std::vector<Element> b(n);
  std::iota(b.begin(), b.end(), Element{0});
  return Congruence(std::move(b));
}

Congruence Congruence::full(std::size_t n) { return Congruence(std::vector<Element>(n, 0)); }

Congruence Congruence::from_blocks(std::size_t n, const std::vector<ElementSet>& blocks) {
  std::vector<Element> b(n, static_cast<Element>(-1));
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    for (Element a : blocks[i].elements()) {
      if (a >= n || b[a] != static_cast<Element>(-1)) {
        throw ArgumentError("blocks do not partition the carrier");
      }
      b[a] = static_cast<Element>(i);
    }
  }
  if (std::find(b.begin(), b.end(), static_cast<Element>(-1)) != b.end()) {
    throw ArgumentError("blocks do not cover the carrier");
  }
  return Congruence(std::move(b));
}

bool Congruence::refines(const Congruence& coarser) const {
  for (std::size_t a = 0; a < block_of_.size(); ++a) {
    for (std::size_t b = a + 1; b < block_of_.size(); ++b) {
      if (block_of_[a] == block_of_[b] &&
          !coarser.related(static_cast<Element>(a), static_cast<Element>(b))) {
        return false;
      }
    }
  }
  return true;
}

Congruence Congruence::meet(const Congruence& o) const {
  std::vector<Element> b(block_of_.size());
  for (std::size_t a = 0; a < b.size(); ++a) {
    b[a] = static_cast<Element>(block_of_[a] * o.block_count() + o.block_of_[a]);
  }
  return Congruence(std::move(b));
}

std::string Congruence::to_string() const {
  std::string s = "{";
  for (std::size_t i = 0; i < blocks_.size(); ++i) {
    if (i) s += ',';
    s += blocks_[i].to_string();
  }
  return s + "}";
}

bool is_compatible(const Algebra& alg, const Congruence& cong) {
  if (cong.carrier_size() != alg.size()) return false;
  const std::size_t n = alg.size();
  const std::size_t m = alg.arity();
  const auto& entries = alg.wnu().entries();
  const std::size_t total = entries.size();
  for (std::size_t pos = 0; pos < m; ++pos) {
    const std::size_t stride = ipow(n, m - 1 - pos);
    for (std::size_t idx = 0; idx < total; ++idx) {
      const Element a = static_cast<Element>((idx / stride) % n);
      for (Element b = a + 1; b < n; ++b) {
        if (!cong.related(a, b)) continue;
        const std::size_t idx2 = idx + (b - a) * stride;
        if (!cong.related(entries[idx], entries[idx2])) return false;
      }
    }
  }
  return true;
}

namespace {

// Distinct unary maps x -> w(c_1, ..., x, ..., c_m).
std::vector<std::vector<Element>> translations(const Algebra& alg) {
  const std::size_t n = alg.size();
  const std::size_t m = alg.arity();
  const auto& entries = alg.wnu().entries();
  std::set<std::vector<Element>> seen;
  for (std::size_t pos = 0; pos < m; ++pos) {
    const std::size_t stride = ipow(n, m - 1 - pos);
    for (std::size_t idx = 0; idx < entries.size(); ++idx) {
      if ((idx / stride) % n != 0) continue;
      std::vector<Element> f(n);
      for (std::size_t x = 0; x < n; ++x) f[x] = entries[idx + x * stride];
      seen.insert(std::move(f));
    }
  }
  return {seen.begin(), seen.end()};
}

// Least congruence containing `block_of` joined with (a, b).
std::vector<Element> join_pair(std::vector<Element> block_of, Element a, Element b,
                               const std::vector<std::vector<Element>>& maps) {
  const std::size_t n = block_of.size();
  auto merge = [&](Element x, Element y) {
    const Element bx = block_of[x];
    const Element by = block_of[y];
    if (bx == by) return false;
    for (Element& v : block_of) {
      if (v == by) v = bx;
    }
    return true;
  };
  bool changed = merge(a, b);
  while (changed) {
    changed = false;
    for (Element x = 0; x < n; ++x) {
      for (Element y = x + 1; y < n; ++y) {
        if (block_of[x] != block_of[y]) continue;
        for (const std::vector<Element>& f : maps) changed = merge(f[x], f[y]) || changed;
      }
    }
  }
  return block_of;
}

}  // namespace

std::vector<Congruence> all_congruences(const Algebra& alg, std::size_t cap) {
  const std::size_t n = alg.size();
  if (n > cap) {
    throw SizeError("all_congruences: carrier size " + std::to_string(n) +
                    " exceeds cap " + std::to_string(cap));
  }
  Algebra::Memo& memo = alg.memo();
  {
    std::lock_guard lock(memo.mutex);
    if (memo.congruences) return *memo.congruences;
  }
  std::vector<Congruence> out;
  if (n == 0) return out;
  // Every congruence is a join of principal ones.
  const std::vector<std::vector<Element>> maps = translations(alg);
  std::set<std::vector<Element>> found;
  std::vector<Congruence> queue{Congruence::equality(n)};
  found.insert(queue.front().block_map());
  while (!queue.empty()) {
    Congruence cur = std::move(queue.back());
    queue.pop_back();
    for (Element a = 0; a < n; ++a) {
      for (Element b = a + 1; b < n; ++b) {
        if (cur.related(a, b)) continue;
        Congruence next(join_pair(cur.block_map(), a, b, maps));
        if (found.insert(next.block_map()).second) queue.push_back(std::move(next));
      }
    }
    out.push_back(std::move(cur));
  }
  std::sort(out.begin(), out.end(), [](const Congruence& a, const Congruence& b) {
    if (a.block_count() != b.block_count()) return a.block_count() > b.block_count();
    return a.block_map() < b.block_map();
  });
  std::lock_guard lock(memo.mutex);
  memo.congruences = out;
  return out;
}

std::vector<Congruence> maximal_congruences(const Algebra& alg, std::size_t cap) {
  std::vector<Congruence> all = all_congruences(alg, cap);
  std::vector<Congruence> out;
  for (const Congruence& c : all) {
    if (c.is_full()) continue;
    bool maximal = true;
    for (const Congruence& d : all) {
      if (d.is_full() || d == c) continue;
      if (c.refines(d)) {
        maximal = false;
        break;
      }
    }
    if (maximal) out.push_back(c);
  }
  return out;
}

Quotient quotient_algebra(const Algebra& alg, const Congruence& cong) {
  if (cong.carrier_size() != alg.size()) {
    throw InvariantError("congruence carrier does not match the algebra");
  }
  Algebra::Memo& memo = alg.memo();
  {
    std::lock_guard lock(memo.mutex);
    auto it = memo.quotients.find(cong.block_map());
    if (it != memo.quotients.end()) return it->second;
  }
  const std::size_t m = alg.arity();
  const std::size_t k = cong.block_count();
  std::vector<int> table(ipow(k, m), -1);
  const OperationTable& w = alg.wnu();
  for (std::size_t idx = 0; idx < w.entries().size(); ++idx) {
    const Tuple args = w.arguments_of(idx);
    std::size_t qidx = 0;
    for (Element a : args) qidx = qidx * k + cong.block_of(a);
    const int value = static_cast<int>(cong.block_of(w.at(idx)));
    if (table[qidx] == -1) {
      table[qidx] = value;
    } else if (table[qidx] != value) {
      throw InvariantError("partition " + cong.to_string() + " is not a congruence");
    }
  }
  std::vector<std::uint8_t> entries(table.begin(), table.end());
  Quotient q;
  q.algebra = make_algebra(OperationTable(m, k, std::move(entries)));
  q.block_of = cong.block_map();
  std::lock_guard lock(memo.mutex);
  memo.quotients.emplace(q.block_of, q);
  return q;
}

Subalgebra subalgebra(const Algebra& alg, ElementSet set) {
  if (set.empty() || !is_subuniverse(alg, set)) {
    throw InvariantError(set.to_string() + " is not a subuniverse");
  }
  Algebra::Memo& memo = alg.memo();
  {
    std::lock_guard lock(memo.mutex);
    auto it = memo.subalgebras.find(set.bits());
    if (it != memo.subalgebras.end()) return it->second;
  }
  Subalgebra sub;
  sub.labels = set.elements();
  const std::size_t k = sub.labels.size();
  std::vector<Element> relabel(alg.size(), 0);
  for (std::size_t i = 0; i < k; ++i) relabel[sub.labels[i]] = static_cast<Element>(i);
  const std::size_t m = alg.arity();
  const std::vector<Element>& labels = sub.labels;
  auto table = OperationTable::from_function(m, k, [&](std::span<const Element> x) {
    Tuple args(m);
    for (std::size_t i = 0; i < m; ++i) args[i] = labels[x[i]];
    return relabel[alg.apply(args)];
  });
  sub.algebra = make_algebra(std::move(table));
  std::lock_guard lock(memo.mutex);
  memo.subalgebras.emplace(set.bits(), sub);
  return sub;
}

// ============================================================================
// Polynomial completeness
// ============================================================================

namespace {

bool is_monotone_boolean(const OperationTable& t) {
  for (std::size_t idx = 0; idx < t.entries().size(); ++idx) {
    for (std::size_t bit = 0; bit < t.arity(); ++bit) {
      const std::size_t mask = std::size_t{1} << bit;
      if ((idx & mask) == 0 && t.at(idx) > t.at(idx | mask)) return false;
    }
  }
  return true;
}

bool is_affine_boolean(const OperationTable& t) {
  const std::size_t m = t.arity();
  const Element c0 = t.at(0);
  std::vector<Element> coeff(m);
  for (std::size_t i = 0; i < m; ++i) {
    coeff[i] = t.at(std::size_t{1} << (m - 1 - i)) ^ c0;
  }
  for (std::size_t idx = 0; idx < t.entries().size(); ++idx) {
    Element v = c0;
    for (std::size_t i = 0; i < m; ++i) {
      if ((idx >> (m - 1 - i)) & 1U) v ^= coeff[i];
    }
    if (v != t.at(idx)) return false;
  }
  return true;
}

}  // namespace

bool is_polynomially_complete(const Algebra& alg, std::size_t cap) {
  const std::size_t n = alg.size();
  if (n > cap) throw SizeError("is_polynomially_complete: carrier exceeds cap");
  if (n == 1) return true;
  if (n == 2) {
    // Constants rule out the 0-/1-preserving and self-dual maximal clones.
    return !is_monotone_boolean(alg.wnu()) && !is_affine_boolean(alg.wnu());
  }
  // w is essential and surjective, so the polynomial clone is full iff it
  // contains every unary map.
  std::vector<const Algebra*> coords(n, &alg);
  std::vector<Tuple> gens;
  Tuple identity(n);
  std::iota(identity.begin(), identity.end(), Element{0});
  gens.push_back(identity);
  for (Element a = 0; a < n; ++a) gens.emplace_back(n, a);
  const std::size_t all_unary = ipow(n, n);
  GeneratedSubuniverse unary = generate_subuniverse(coords, gens);
  return unary.tuples.size() == all_unary;
}

// ============================================================================
// Linear structure
// ============================================================================

std::size_t LinearIso::product_size() const {
  std::size_t s = 1;
  for (unsigned p : primes) s *= p;
  return s;
}

Element LinearIso::preimage(std::span<const Element> coords) const {
  for (std::size_t a = 0; a < image.size(); ++a) {
    if (std::equal(coords.begin(), coords.end(), image[a].begin(), image[a].end())) {
      return static_cast<Element>(a);
    }
  }
  throw ArgumentError("vector outside the linear image");
}

namespace {

bool sum_identity_holds(const Algebra& alg, const std::vector<unsigned>& primes,
                        const std::vector<Tuple>& image,
                        const std::vector<Element>& index_to_element,
                        const std::vector<std::size_t>& radix_scale) {
  const std::size_t m = alg.arity();
  const std::size_t s = primes.size();
  const auto& entries = alg.wnu().entries();
  const std::size_t n = alg.size();
  std::vector<Element> acc(s);
  for (std::size_t idx = 0; idx < entries.size(); ++idx) {
    std::fill(acc.begin(), acc.end(), 0);
    std::size_t rest = idx;
    for (std::size_t i = 0; i < m; ++i) {
      const Element a = static_cast<Element>(rest % n);
      rest /= n;
      for (std::size_t c = 0; c < s; ++c) acc[c] += image[a][c];
    }
    std::size_t product_index = 0;
    for (std::size_t c = 0; c < s; ++c) product_index += (acc[c] % primes[c]) * radix_scale[c];
    if (index_to_element[product_index] != entries[idx]) return false;
  }
  return true;
}

}  // namespace

std::optional<LinearIso> linear_structure(const Algebra& alg, std::size_t cap) {
  const std::size_t n = alg.size();
  if (n > cap) throw SizeError("linear_structure: carrier exceeds cap");
  LinearIso iso;
  if (n == 1) {
    iso.image = {Tuple{}};
    return iso;
  }
  iso.primes = prime_factors(n);
  for (unsigned p : iso.primes) {
    if (alg.arity() % p != 1 % p) return std::nullopt;  // sum of m not idempotent
  }
  const std::size_t s = iso.primes.size();
  std::vector<std::size_t> radix_scale(s);
  {
    std::size_t scale = 1;
    for (std::size_t c = s; c-- > 0;) {
      radix_scale[c] = scale;
      scale *= iso.primes[c];
    }
  }
  std::vector<Tuple> product_vectors(n, Tuple(s));
  for (std::size_t idx = 0; idx < n; ++idx) {
    for (std::size_t c = 0; c < s; ++c) {
      product_vectors[idx][c] = static_cast<Element>((idx / radix_scale[c]) % iso.primes[c]);
    }
  }
  // perm[a] = product index of element a
  std::vector<Element> perm(n);
  std::iota(perm.begin(), perm.end(), Element{0});
  std::vector<Element> index_to_element(n);
  std::vector<Tuple> image(n);
  do {
    for (std::size_t a = 0; a < n; ++a) {
      index_to_element[perm[a]] = static_cast<Element>(a);
      image[a] = product_vectors[perm[a]];
    }
    if (sum_identity_holds(alg, iso.primes, image, index_to_element, radix_scale)) {
      iso.image = image;
      return iso;
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  return std::nullopt;
}

bool verify_linear_iso(const Algebra& alg, const LinearIso& iso) {
  const std::size_t n = alg.size();
  if (iso.image.size() != n || iso.product_size() != n) return false;
  for (unsigned p : iso.primes) {
    if (p < 2) return false;
    for (unsigned d = 2; d * d <= p; ++d) {
      if (p % d == 0) return false;
    }
  }
  // Bijectivity.
  std::vector<Tuple> sorted = iso.image;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) return false;
  for (const Tuple& v : iso.image) {
    if (v.size() != iso.primes.size()) return false;
    for (std::size_t c = 0; c < v.size(); ++c) {
      if (v[c] >= iso.primes[c]) return false;
    }
  }
  const std::size_t m = alg.arity();
  const std::size_t s = iso.primes.size();
  for (std::size_t idx = 0; idx < alg.wnu().entries().size(); ++idx) {
    Tuple args = alg.wnu().arguments_of(idx);
    Tuple acc(s, 0);
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t c = 0; c < s; ++c) acc[c] = (acc[c] + iso.image[args[i]][c]) % iso.primes[c];
    }
    if (iso.image[alg.wnu().at(idx)] != acc) return false;
  }
  return true;
}

// ============================================================================
// Binary terms
// ============================================================================

BinaryTerms binary_terms(const Algebra& alg, std::size_t cap) {
  const std::size_t n = alg.size();
  // Binary terms are idempotent, so only off-diagonal values vary.
  std::vector<std::pair<Element, Element>> cells;
  for (Element a = 0; a < n; ++a) {
    for (Element b = 0; b < n; ++b) {
      if (a != b) cells.emplace_back(a, b);
    }
  }
  std::vector<const Algebra*> coords(cells.size(), &alg);
  Tuple x(cells.size()), y(cells.size());
  for (std::size_t i = 0; i < cells.size(); ++i) {
    x[i] = cells[i].first;
    y[i] = cells[i].second;
  }
  GeneratedSubuniverse gen = generate_subuniverse(coords, {x, y}, cap);
  BinaryTerms out;
  out.complete = gen.complete;
  for (const Tuple& row : gen.tuples) {
    std::vector<std::uint8_t> entries(n * n);
    for (Element a = 0; a < n; ++a) entries[a * n + a] = static_cast<std::uint8_t>(a);
    for (std::size_t i = 0; i < cells.size(); ++i) {
      entries[cells[i].first * n + cells[i].second] = static_cast<std::uint8_t>(row[i]);
    }
    out.terms.emplace_back(2, n, std::move(entries));
  }
  std::sort(out.terms.begin(), out.terms.end());
  return out;
}

}  // namespace wnucsp
