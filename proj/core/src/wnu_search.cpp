#include <algorithm>
#include <set>

#include "wnucsp/algebra.hpp"

namespace wnucsp {

namespace {

class WnuSearcher {
 public:
  WnuSearcher(std::size_t n, std::size_t m, std::size_t budget) : n_(n), m_(m), budget_(budget) {
    total_ = 1;
    for (std::size_t i = 0; i < m; ++i) total_ *= n;
    build_classes();
  }

  // False if a fully fixed combination already breaks a relation.
  bool add_relation(const std::vector<Tuple>& tuples) {
    if (tuples.empty()) return true;
    const std::size_t r = tuples.front().size();
    const std::set<Tuple> members(tuples.begin(), tuples.end());
    std::set<std::vector<std::size_t>> seen;
    std::vector<std::size_t> rows(m_, 0);
    while (true) {
      std::vector<std::size_t> cols(r);
      for (std::size_t j = 0; j < r; ++j) {
        std::size_t idx = 0;
        for (std::size_t k = 0; k < m_; ++k) idx = idx * n_ + tuples[rows[k]][j];
        cols[j] = class_of_[idx];
      }
      if (seen.insert(cols).second) {
        std::size_t trigger = 0;
        bool has_free = false;
        for (std::size_t c : cols) {
          if (!fixed_[c]) {
            has_free = true;
            trigger = std::max(trigger, position_[c]);
          }
        }
        Check chk{cols, relations_.size()};
        if (has_free) {
          checks_[trigger].push_back(std::move(chk));
        } else if (!holds(chk, members)) {
          return false;
        }
      }
      std::size_t k = m_;
      while (k > 0 && ++rows[k - 1] == tuples.size()) rows[--k] = 0;
      if (k == 0) break;
    }
    relations_.push_back(members);
    return true;
  }

  WnuSearch run() {
    WnuSearch out;
    if (static_check_failed_) return out;
    const bool ok = descend(0, out.nodes);
    if (exceeded_) {
      out.status = WnuSearch::Status::budget_exceeded;
    } else if (ok) {
      std::vector<std::uint8_t> entries(total_);
      for (std::size_t idx = 0; idx < total_; ++idx) {
        entries[idx] = static_cast<std::uint8_t>(value_[class_of_[idx]]);
      }
      out.status = WnuSearch::Status::found;
      out.table = OperationTable(m_, n_, std::move(entries));
    }
    return out;
  }

  void fail_statically() { static_check_failed_ = true; }

 private:
  struct Check {
    std::vector<std::size_t> classes;
    std::size_t relation;
  };

  void build_classes() {
    class_of_.assign(total_, SIZE_MAX);
    oneoff_.assign(n_ * n_, SIZE_MAX);
    Tuple args(m_);
    for (std::size_t idx = 0; idx < total_; ++idx) {
      std::size_t rest = idx;
      for (std::size_t i = m_; i-- > 0;) {
        args[i] = static_cast<Element>(rest % n_);
        rest /= n_;
      }
      std::size_t cls = SIZE_MAX;
      const bool constant = std::all_of(args.begin(), args.end(), [&](Element x) { return x == args[0]; });
      if (constant) {
        cls = new_class(args[0]);
      } else {
        for (std::size_t j = 0; j < m_ && cls == SIZE_MAX; ++j) {
          const Element a = args[(j + 1) % m_];
          bool oneoff = args[j] != a;
          for (std::size_t k = 0; k < m_ && oneoff; ++k) {
            if (k != j && args[k] != a) oneoff = false;
          }
          if (oneoff) {
            std::size_t& slot = oneoff_[a * n_ + args[j]];
            if (slot == SIZE_MAX) slot = new_class(std::nullopt);
            cls = slot;
          }
        }
        if (cls == SIZE_MAX) cls = new_class(std::nullopt);
      }
      class_of_[idx] = cls;
    }
    checks_.resize(order_.size());
  }

  std::size_t new_class(std::optional<Element> fixed) {
    const std::size_t c = fixed_.size();
    fixed_.push_back(fixed.has_value());
    value_.push_back(fixed.value_or(0));
    assigned_.push_back(fixed.has_value());
    position_.push_back(fixed ? 0 : order_.size());
    if (!fixed) order_.push_back(c);
    return c;
  }

  bool holds(const Check& chk, const std::set<Tuple>& members) const {
    Tuple t;
    for (std::size_t c : chk.classes) t.push_back(value_[c]);
    return members.contains(t);
  }

  // a o (a o b) = a o b for every assigned pair.
  bool special_ok() const {
    for (Element a = 0; a < n_; ++a) {
      for (Element b = 0; b < n_; ++b) {
        if (a == b) continue;
        const std::size_t ab = oneoff_[a * n_ + b];
        if (!assigned_[ab]) continue;
        const Element v = value_[ab];
        if (v == a || v == b) continue;
        const std::size_t av = oneoff_[a * n_ + v];
        if (assigned_[av] && value_[av] != v) return false;
      }
    }
    return true;
  }

  bool descend(std::size_t pos, std::size_t& nodes) {
    if (pos == order_.size()) return true;
    const std::size_t c = order_[pos];
    for (Element v = 0; v < n_; ++v) {
      if (++nodes > budget_) {
        exceeded_ = true;
        return false;
      }
      value_[c] = v;
      assigned_[c] = true;
      bool ok = special_ok();
      for (const Check& chk : checks_[pos]) {
        if (!ok) break;
        ok = holds(chk, relations_[chk.relation]);
      }
      if (ok && descend(pos + 1, nodes)) return true;
      if (exceeded_) return false;
    }
    assigned_[c] = false;
    return false;
  }

  std::size_t n_;
  std::size_t m_;
  std::size_t budget_;
  std::size_t total_ = 1;
  std::vector<std::size_t> class_of_;
  std::vector<std::size_t> oneoff_;  // (a, b) -> class of w(a, ..., a, b)
  std::vector<bool> fixed_;
  std::vector<Element> value_;
  std::vector<bool> assigned_;
  std::vector<std::size_t> position_;  // free class -> order position
  std::vector<std::size_t> order_;
  std::vector<std::vector<Check>> checks_;
  std::vector<std::set<Tuple>> relations_;
  bool exceeded_ = false;
  bool static_check_failed_ = false;
};

}  // namespace

WnuSearch search_special_wnu(std::size_t n, const std::vector<std::vector<Tuple>>& relations,
                             std::size_t arity, std::size_t budget) {
  if (n == 0 || n > 255) throw ArgumentError("domain size out of range");
  if (arity < 3) throw ArgumentError("WNU arity must be at least 3");
  WnuSearcher s(n, arity, budget);
  for (const std::vector<Tuple>& rel : relations) {
    for (const Tuple& t : rel) {
      for (Element a : t) {
        if (a >= n) throw ArgumentError("relation entry out of range");
      }
    }
    if (!s.add_relation(rel)) s.fail_statically();
  }
  WnuSearch out = s.run();
  if (out.table && !verify_special_wnu(*out.table).ok()) {
    throw InvariantError("search produced a table that is not a special WNU");
  }
  return out;
}

}  // namespace wnucsp
