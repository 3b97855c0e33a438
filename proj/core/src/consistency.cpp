#include "wnucsp/consistency.hpp"

#include <algorithm>
#include <numeric>

namespace wnucsp {

namespace {

class UnionFind {
 public:
  explicit UnionFind(std::size_t n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), 0); }
  std::size_t find(std::size_t x) {
    while (parent_[x] != x) x = parent_[x] = parent_[parent_[x]];
    return x;
  }
  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a != b) parent_[std::max(a, b)] = std::min(a, b);
  }

 private:
  std::vector<std::size_t> parent_;
};

BinaryRelation pair_projection(const Relation& r, std::size_t p, std::size_t q,
                               std::size_t first_size) {
  BinaryRelation out(first_size);
  for (const Tuple& t : r.tuples()) out[t[p]].insert(t[q]);
  return out;
}

}  // namespace

// ============================================================================
// Pair network
// ============================================================================

PairNetwork::PairNetwork(const Instance& inst) : n_(inst.size()) {
  for (const Variable& v : inst.variables()) sizes_.push_back(v.algebra->size());
  rel_.resize(n_ * n_);
  for (std::size_t i = 0; i < n_; ++i) {
    for (std::size_t j = 0; j < n_; ++j) {
      BinaryRelation& r = rel_[i * n_ + j];
      r.assign(sizes_[i], ElementSet{});
      if (i == j) continue;
      for (Element a : inst.variable(i).domain.elements()) r[a] = inst.variable(j).domain;
    }
  }
  for (const Constraint& c : inst.constraints()) {
    if (c.scope.size() < 2) continue;
    const Relation r = inst.restricted(c);
    for (std::size_t p = 0; p < c.scope.size(); ++p) {
      for (std::size_t q = p + 1; q < c.scope.size(); ++q) {
        restrict_pair(c.scope[p], c.scope[q], pair_projection(r, p, q, sizes_[c.scope[p]]));
      }
    }
  }
}

bool PairNetwork::restrict_pair(std::size_t i, std::size_t j, const BinaryRelation& r) {
  BinaryRelation& fwd = rel_[i * n_ + j];
  bool changed = false;
  for (std::size_t a = 0; a < fwd.size(); ++a) {
    const ElementSet next = fwd[a] & r[a];
    if (next != fwd[a]) {
      fwd[a] = next;
      changed = true;
    }
  }
  if (changed) {
    BinaryRelation& back = rel_[j * n_ + i];
    back.assign(sizes_[j], ElementSet{});
    for (std::size_t a = 0; a < fwd.size(); ++a) {
      for (Element b : fwd[a].elements()) back[b].insert(static_cast<Element>(a));
    }
  }
  return changed;
}

ElementSet PairNetwork::first_projection(std::size_t i, std::size_t j) const {
  ElementSet s;
  const BinaryRelation& r = at(i, j);
  for (std::size_t a = 0; a < r.size(); ++a) {
    if (!r[a].empty()) s.insert(static_cast<Element>(a));
  }
  return s;
}

bool PairNetwork::empty(std::size_t i, std::size_t j) const {
  return first_projection(i, j).empty();
}

std::size_t propagate_triangles(PairNetwork& net) {
  const std::size_t n = net.size();
  std::size_t passes = 0;
  bool changed = true;
  while (changed) {
    changed = false;
    ++passes;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        for (std::size_t k = 0; k < n; ++k) {
          if (k == i || k == j) continue;
          const BinaryRelation& ij = net.at(i, j);
          const BinaryRelation& ik = net.at(i, k);
          const BinaryRelation& kj = net.at(k, j);
          BinaryRelation next(ij.size());
          for (std::size_t a = 0; a < ij.size(); ++a) {
            if (ij[a].empty()) continue;
            ElementSet reach;
            for (Element z : ik[a].elements()) reach = reach | kj[z];
            next[a] = ij[a] & reach;
          }
          if (net.restrict_pair(i, j, next)) changed = true;
        }
      }
    }
  }
  return passes;
}

ConsistencyResult enforce_cycle_consistency(const Instance& inst) {
  ConsistencyResult out;
  for (const Constraint& c : inst.constraints()) {
    const Relation r = inst.restricted(c);
    if (r.empty()) {
      out.kind = ConsistencyResult::Kind::no_solution;
      return out;
    }
    for (std::size_t p = 0; p < c.scope.size(); ++p) {
      const ElementSet values = r.values_at(p);
      if (values != inst.variable(c.scope[p]).domain) {
        out.kind = ConsistencyResult::Kind::reduction;
        out.variable = c.scope[p];
        out.subset = values;
        return out;
      }
    }
  }
  PairNetwork net(inst);
  propagate_triangles(net);
  const std::size_t n = inst.size();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (net.empty(i, j)) {
        out.kind = ConsistencyResult::Kind::no_solution;
        return out;
      }
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      const ElementSet proj = net.first_projection(i, j);
      if (proj != inst.variable(i).domain) {
        out.kind = ConsistencyResult::Kind::reduction;
        out.variable = i;
        out.subset = proj;
        return out;
      }
    }
  }
  out.network = std::move(net);
  return out;
}

// ============================================================================
// Fragments and linked components
// ============================================================================

std::vector<std::vector<std::size_t>> fragments(const Instance& inst) {
  UnionFind uf(inst.size());
  for (const Constraint& c : inst.constraints()) {
    for (std::size_t v : c.scope) uf.unite(c.scope.front(), v);
  }
  std::vector<std::vector<std::size_t>> out;
  std::vector<std::size_t> index_of(inst.size(), SIZE_MAX);
  for (std::size_t v = 0; v < inst.size(); ++v) {
    const std::size_t root = uf.find(v);
    if (index_of[root] == SIZE_MAX) {
      index_of[root] = out.size();
      out.emplace_back();
    }
    out[index_of[root]].push_back(v);
  }
  return out;
}

bool is_fragmented(const Instance& inst) { return fragments(inst).size() > 1; }

Instance sub_instance(const Instance& inst, const std::vector<std::size_t>& vars) {
  Instance out;
  std::vector<std::size_t> new_index(inst.size(), SIZE_MAX);
  for (std::size_t v : vars) {
    const Variable& var = inst.variable(v);
    new_index[v] = out.add_variable(var.name, var.algebra, var.domain);
  }
  std::vector<Constraint> cs;
  for (const Constraint& c : inst.constraints()) {
    Constraint nc{c.relation, {}};
    bool inside = true;
    for (std::size_t v : c.scope) {
      if (new_index[v] == SIZE_MAX) {
        inside = false;
        break;
      }
      nc.scope.push_back(new_index[v]);
    }
    if (inside) cs.push_back(std::move(nc));
  }
  out.set_constraints(std::move(cs));
  return out;
}

Instance project_instance(const Instance& inst, const std::vector<std::size_t>& vars) {
  Instance out;
  std::vector<std::size_t> new_index(inst.size(), SIZE_MAX);
  for (std::size_t v : vars) {
    const Variable& var = inst.variable(v);
    new_index[v] = out.add_variable(var.name, var.algebra, var.domain);
  }
  std::vector<Constraint> cs;
  for (const Constraint& c : inst.constraints()) {
    std::vector<std::size_t> idx;
    std::vector<std::size_t> scope;
    for (std::size_t p = 0; p < c.scope.size(); ++p) {
      if (new_index[c.scope[p]] != SIZE_MAX) {
        idx.push_back(p);
        scope.push_back(new_index[c.scope[p]]);
      }
    }
    if (idx.empty()) continue;
    if (idx.size() == c.scope.size()) {
      cs.push_back({c.relation, std::move(scope)});
    } else {
      cs.push_back({std::make_shared<const Relation>(project(inst.restricted(c), idx)),
                    std::move(scope)});
    }
  }
  out.set_constraints(std::move(cs));
  return out;
}

std::vector<std::vector<ElementSet>> linked_components(const Instance& inst) {
  if (is_fragmented(inst)) throw ArgumentError("linked_components needs a non-fragmented instance");
  const std::size_t n = inst.size();
  std::vector<std::size_t> offset(n + 1, 0);
  for (std::size_t i = 0; i < n; ++i) offset[i + 1] = offset[i] + inst.variable(i).algebra->size();
  UnionFind uf(offset[n]);
  for (const Constraint& c : inst.constraints()) {
    const Relation r = inst.restricted(c);
    for (const Tuple& t : r.tuples()) {
      const std::size_t first = offset[c.scope[0]] + t[0];
      for (std::size_t p = 1; p < t.size(); ++p) uf.unite(first, offset[c.scope[p]] + t[p]);
    }
  }
  std::vector<std::vector<ElementSet>> blocks;
  std::vector<std::size_t> block_of(offset[n], SIZE_MAX);
  for (std::size_t i = 0; i < n; ++i) {
    for (Element a : inst.variable(i).domain.elements()) {
      const std::size_t root = uf.find(offset[i] + a);
      if (block_of[root] == SIZE_MAX) {
        block_of[root] = blocks.size();
        blocks.emplace_back(n, ElementSet{});
      }
      blocks[block_of[root]][i].insert(a);
    }
  }
  return blocks;
}

bool is_linked(const Instance& inst) { return linked_components(inst).size() <= 1; }

// ============================================================================
// Irreducibility
// ============================================================================

namespace {

// A partition of a domain: class index per element (-1 outside the domain).
struct Partition {
  std::vector<int> cls;
  std::vector<ElementSet> classes;
};

struct Spread {
  std::vector<std::size_t> order;     // variables of I in discovery order
  std::vector<Partition> partitions;  // indexed by variable
  std::vector<std::size_t> parent;    // discovering variable
  std::vector<BinaryRelation> link;   // projection parent -> variable
};

Spread spread_congruence(const Instance& inst, std::size_t k, Partition sigma_k) {
  const std::size_t n = inst.size();
  Spread s;
  s.partitions.resize(n);
  s.parent.assign(n, SIZE_MAX);
  s.link.resize(n);
  std::vector<bool> in_i(n, false);
  in_i[k] = true;
  s.order.push_back(k);
  s.partitions[k] = std::move(sigma_k);
  for (std::size_t head = 0; head < s.order.size(); ++head) {
    const std::size_t i = s.order[head];
    for (const Constraint& c : inst.constraints()) {
      auto pi = std::find(c.scope.begin(), c.scope.end(), i);
      if (pi == c.scope.end()) continue;
      const std::size_t p = static_cast<std::size_t>(pi - c.scope.begin());
      const Relation r = inst.restricted(c);
      for (std::size_t q = 0; q < c.scope.size(); ++q) {
        const std::size_t j = c.scope[q];
        if (in_i[j]) continue;
        const BinaryRelation delta =
            pair_projection(r, p, q, inst.variable(i).algebra->size());
        const ElementSet dj = inst.variable(j).domain;
        const std::size_t size_j = inst.variable(j).algebra->size();
        // Classes of sigma_i reaching each y.
        std::vector<std::uint64_t> reach(size_j, 0);
        for (std::size_t x = 0; x < delta.size(); ++x) {
          const int cx = s.partitions[i].cls[x];
          if (cx < 0) continue;
          for (Element y : delta[x].elements()) reach[y] |= std::uint64_t{1} << cx;
        }
        const std::vector<Element> ys = dj.elements();
        bool equivalence = true;
        bool full = true;
        for (Element y : ys) equivalence = equivalence && reach[y] != 0;
        for (std::size_t a = 0; a < ys.size() && equivalence; ++a) {
          for (std::size_t b = 0; b < ys.size() && equivalence; ++b) {
            const bool ab = (reach[ys[a]] & reach[ys[b]]) != 0;
            if (!ab) full = false;
            for (std::size_t c2 = 0; c2 < ys.size() && ab; ++c2) {
              const bool bc = (reach[ys[b]] & reach[ys[c2]]) != 0;
              const bool ac = (reach[ys[a]] & reach[ys[c2]]) != 0;
              if (bc && !ac) equivalence = false;
            }
          }
        }
        if (!equivalence || full) continue;
        Partition pj;
        pj.cls.assign(size_j, -1);
        for (Element y : ys) {
          if (pj.cls[y] >= 0) continue;
          const int id = static_cast<int>(pj.classes.size());
          ElementSet block;
          for (Element z : ys) {
            if ((reach[y] & reach[z]) != 0) {
              pj.cls[z] = id;
              block.insert(z);
            }
          }
          pj.classes.push_back(block);
        }
        in_i[j] = true;
        s.order.push_back(j);
        s.partitions[j] = std::move(pj);
        s.parent[j] = i;
        s.link[j] = delta;
      }
    }
  }
  return s;
}

}  // namespace

IrreducibilityResult check_irreducibility(const Instance& inst, const SolveCallback& solve) {
  IrreducibilityResult out;
  for (const Constraint& c : inst.constraints()) {
    if (inst.restricted(c).empty()) {
      out.kind = IrreducibilityResult::Kind::no_solution;
      return out;
    }
  }
  for (std::size_t k = 0; k < inst.size(); ++k) {
    const Variable& var = inst.variable(k);
    if (var.domain.size() < 2) continue;
    Subalgebra sub = subalgebra(*var.algebra, var.domain);
    for (const Congruence& cong : maximal_congruences(*sub.algebra)) {
      Partition sigma;
      sigma.cls.assign(var.algebra->size(), -1);
      for (const ElementSet& block : cong.blocks()) {
        ElementSet lifted;
        for (Element l : block.elements()) {
          lifted.insert(sub.labels[l]);
          sigma.cls[sub.labels[l]] = static_cast<int>(sigma.classes.size());
        }
        sigma.classes.push_back(lifted);
      }
      const Spread spread = spread_congruence(inst, k, std::move(sigma));
      if (spread.order.size() == 1) continue;

      std::vector<std::size_t> xs = spread.order;
      std::sort(xs.begin(), xs.end());
      const Instance projected = project_instance(inst, xs);
      std::vector<ElementSet> covered(xs.size());

      for (std::size_t ck = 0; ck < spread.partitions[k].classes.size(); ++ck) {
        std::vector<ElementSet> cls(inst.size());
        cls[k] = spread.partitions[k].classes[ck];
        for (std::size_t h = 1; h < spread.order.size(); ++h) {
          const std::size_t j = spread.order[h];
          const std::size_t i = spread.parent[j];
          int target = -1;
          for (Element x : cls[i].elements()) {
            for (Element y : spread.link[j][x].elements()) {
              target = spread.partitions[j].cls[y];
              break;
            }
            if (target >= 0) break;
          }
          if (target < 0) {
            cls[j] = ElementSet{};
          } else {
            cls[j] = spread.partitions[j].classes[static_cast<std::size_t>(target)];
          }
        }
        Instance reduced = projected;
        bool empty_class = false;
        for (std::size_t p = 0; p < xs.size(); ++p) {
          if (cls[xs[p]].empty()) empty_class = true;
          reduced.set_domain(p, cls[xs[p]]);
        }
        if (empty_class) continue;
        auto record = [&](const Tuple& sol) {
          for (std::size_t p = 0; p < xs.size(); ++p) covered[p].insert(sol[p]);
        };
        auto first = solve(reduced);
        if (!first) continue;
        record(*first);
        for (std::size_t p = 0; p < xs.size(); ++p) {
          for (Element a : cls[xs[p]].elements()) {
            if (covered[p].contains(a)) continue;
            Instance pinned = reduced;
            pinned.set_domain(p, ElementSet::single(a));
            if (auto sol = solve(pinned)) record(*sol);
          }
        }
      }

      bool any = false;
      for (const ElementSet& c : covered) any = any || !c.empty();
      if (!any) {
        out.kind = IrreducibilityResult::Kind::no_solution;
        return out;
      }
      for (std::size_t p = 0; p < xs.size(); ++p) {
        if (covered[p] != inst.variable(xs[p]).domain) {
          out.kind = IrreducibilityResult::Kind::reduction;
          out.variable = xs[p];
          out.subset = covered[p];
          return out;
        }
      }
    }
  }
  return out;
}

}  // namespace wnucsp
