#include "wnucsp/format.hpp"

#include <cctype>
#include <charconv>
#include <fstream>
#include <map>
#include <sstream>

namespace wnucsp {

namespace {

constexpr std::size_t kMaxDomain = 64;

std::vector<std::string_view> tokenize(std::string_view line) {
  if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    std::size_t j = i;
    while (j < line.size() && !std::isspace(static_cast<unsigned char>(line[j]))) ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

std::size_t number(std::string_view tok, std::size_t line, const char* what) {
  std::size_t v = 0;
  const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc{} || ptr != tok.data() + tok.size()) {
    throw FormatError("expected " + std::string(what) + ", got '" + std::string(tok) + "'", line);
  }
  return v;
}

class Parser {
 public:
  InstanceFile parse(std::string_view text) {
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
      std::size_t end = text.find('\n', pos);
      if (end == std::string_view::npos) end = text.size();
      ++line_no;
      line(tokenize(text.substr(pos, end - pos)), line_no);
      pos = end + 1;
    }
    if (open_rel_) throw FormatError("REL " + f_.relations.back().name + " is missing END", rel_line_);
    finish();
    return std::move(f_);
  }

 private:
  void line(const std::vector<std::string_view>& t, std::size_t ln) {
    if (t.empty()) return;
    if (open_rel_) {
      if (t[0] == "END") {
        if (t.size() != 1) throw FormatError("END takes no arguments", ln);
        open_rel_ = false;
        return;
      }
      InstanceFile::Rel& rel = f_.relations.back();
      if (t.size() != rel.domains.size()) {
        throw FormatError("tuple of " + rel.name + " needs " + std::to_string(rel.domains.size()) +
                              " entries",
                          ln);
      }
      Tuple tup;
      for (std::size_t j = 0; j < t.size(); ++j) {
        const std::size_t v = number(t[j], ln, "an element");
        if (v >= f_.domains[rel.domains[j]].size) {
          throw FormatError("element " + std::to_string(v) + " outside domain " +
                                f_.domains[rel.domains[j]].name,
                            ln);
        }
        tup.push_back(static_cast<Element>(v));
      }
      rel.tuples.push_back(std::move(tup));
      return;
    }
    const std::string_view d = t[0];
    if (d == "DOMAIN") {
      arity(t, 3, ln);
      fresh(domain_index_, t[1], ln);
      const std::size_t n = number(t[2], ln, "a domain size");
      if (n == 0 || n > kMaxDomain) throw FormatError("domain size must be in 1..64", ln);
      domain_index_[std::string(t[1])] = f_.domains.size();
      f_.domains.push_back({std::string(t[1]), n, std::nullopt, false});
    } else if (d == "WNU") {
      if (t.size() < 4) throw FormatError("WNU needs a domain, an arity and a table", ln);
      InstanceFile::Domain& dom = f_.domains[lookup(domain_index_, t[1], ln, "domain")];
      if (dom.wnu) throw FormatError("second WNU for domain " + dom.name, ln);
      const std::size_t m = number(t[2], ln, "an arity");
      if (m < 2 || m > 16) throw FormatError("WNU arity must be in 2..16", ln);
      std::size_t total = 1;
      for (std::size_t i = 0; i < m; ++i) {
        total *= dom.size;
        if (total > (1U << 20)) throw FormatError("WNU table too large", ln);
      }
      if (t.size() == 4 && t[3] == "SUM") {
        dom.wnu = ops::sum_mod(dom.size, m);
        dom.sum = true;
      } else {
        if (t.size() - 3 != total) {
          throw FormatError("WNU table needs " + std::to_string(total) + " entries, got " +
                                std::to_string(t.size() - 3),
                            ln);
        }
        std::vector<std::uint8_t> entries;
        for (std::size_t i = 3; i < t.size(); ++i) {
          const std::size_t v = number(t[i], ln, "a table entry");
          if (v >= dom.size) throw FormatError("table entry out of range", ln);
          entries.push_back(static_cast<std::uint8_t>(v));
        }
        dom.wnu = OperationTable(m, dom.size, std::move(entries));
      }
      const WnuVerdict verdict = verify_special_wnu(*dom.wnu);
      if (!verdict.ok()) {
        throw WnuInvalid("line " + std::to_string(ln) + ": WNU for " + dom.name +
                         " is not special: " + verdict.violations.front().describe());
      }
    } else if (d == "VAR") {
      arity(t, 3, ln);
      fresh(var_index_, t[1], ln);
      const std::size_t dom = lookup(domain_index_, t[2], ln, "domain");
      var_index_[std::string(t[1])] = f_.variables.size();
      f_.variables.push_back({std::string(t[1]), dom});
    } else if (d == "REL") {
      if (t.size() < 4) throw FormatError("REL needs a name, an arity and domains", ln);
      fresh(rel_index_, t[1], ln);
      const std::size_t r = number(t[2], ln, "an arity");
      if (r == 0 || t.size() != 3 + r) {
        throw FormatError("REL " + std::string(t[1]) + " needs " + std::to_string(r) + " domains", ln);
      }
      InstanceFile::Rel rel{std::string(t[1]), {}, {}};
      for (std::size_t i = 3; i < t.size(); ++i) {
        rel.domains.push_back(lookup(domain_index_, t[i], ln, "domain"));
      }
      rel_index_[rel.name] = f_.relations.size();
      f_.relations.push_back(std::move(rel));
      open_rel_ = true;
      rel_line_ = ln;
    } else if (d == "CON") {
      if (t.size() < 3) throw FormatError("CON needs a relation and variables", ln);
      const std::size_t rel = lookup(rel_index_, t[1], ln, "relation");
      const InstanceFile::Rel& r = f_.relations[rel];
      if (t.size() - 2 != r.domains.size()) {
        throw FormatError("relation " + r.name + " has arity " + std::to_string(r.domains.size()), ln);
      }
      InstanceFile::Con con{rel, {}};
      for (std::size_t i = 2; i < t.size(); ++i) {
        const std::size_t v = lookup(var_index_, t[i], ln, "variable");
        if (f_.variables[v].domain != r.domains[i - 2]) {
          throw FormatError("variable " + f_.variables[v].name + " is not over domain " +
                                f_.domains[r.domains[i - 2]].name,
                            ln);
        }
        con.vars.push_back(v);
      }
      f_.constraints.push_back(std::move(con));
    } else if (d == "END") {
      throw FormatError("END without REL", ln);
    } else {
      throw FormatError("unknown directive '" + std::string(d) + "'", ln);
    }
  }

  void finish() {
    std::optional<std::size_t> arity;
    bool any = false;
    bool all = true;
    for (const InstanceFile::Domain& d : f_.domains) {
      any = any || d.wnu.has_value();
      all = all && d.wnu.has_value();
      if (!d.wnu) continue;
      if (arity && *arity != d.wnu->arity()) throw FormatError("WNU arities differ between domains");
      arity = d.wnu->arity();
    }
    if (any && !all) throw FormatError("some domains have a WNU and others do not");
    if (!any || f_.domains.empty()) return;
    std::vector<AlgebraPtr> algebras;
    for (const InstanceFile::Domain& d : f_.domains) algebras.push_back(make_algebra(*d.wnu));
    for (const InstanceFile::Rel& r : f_.relations) {
      std::vector<AlgebraPtr> coords;
      for (std::size_t d : r.domains) coords.push_back(algebras[d]);
      if (!is_invariant(Relation(coords, r.tuples))) {
        throw WnuInvalid("WNU does not preserve relation " + r.name);
      }
    }
  }

  static void arity(const std::vector<std::string_view>& t, std::size_t n, std::size_t ln) {
    if (t.size() != n) {
      throw FormatError(std::string(t[0]) + " takes " + std::to_string(n - 1) + " arguments", ln);
    }
  }

  static void fresh(const std::map<std::string, std::size_t, std::less<>>& index,
                    std::string_view name, std::size_t ln) {
    if (index.contains(name)) throw FormatError("duplicate name '" + std::string(name) + "'", ln);
  }

  static std::size_t lookup(const std::map<std::string, std::size_t, std::less<>>& index,
                            std::string_view name, std::size_t ln, const char* kind) {
    auto it = index.find(name);
    if (it == index.end()) {
      throw FormatError("unknown " + std::string(kind) + " '" + std::string(name) + "'", ln);
    }
    return it->second;
  }

  InstanceFile f_;
  std::map<std::string, std::size_t, std::less<>> domain_index_;
  std::map<std::string, std::size_t, std::less<>> var_index_;
  std::map<std::string, std::size_t, std::less<>> rel_index_;
  bool open_rel_ = false;
  std::size_t rel_line_ = 0;
};

}  // namespace

bool InstanceFile::has_wnu() const {
  for (const Domain& d : domains) {
    if (!d.wnu) return false;
  }
  return true;
}

std::vector<std::vector<Tuple>> InstanceFile::relations_over(std::size_t d) const {
  std::vector<std::vector<Tuple>> out;
  for (const Rel& r : relations) {
    bool inside = true;
    for (std::size_t x : r.domains) inside = inside && x == d;
    if (inside) out.push_back(r.tuples);
  }
  return out;
}

Instance InstanceFile::to_instance() const {
  std::vector<AlgebraPtr> algebras;
  for (const Domain& d : domains) {
    if (!d.wnu) throw PreconditionError("domain " + d.name + " has no WNU");
    algebras.push_back(make_algebra(*d.wnu));
  }
  std::vector<RelationPtr> rels;
  for (const Rel& r : relations) {
    std::vector<AlgebraPtr> coords;
    for (std::size_t d : r.domains) coords.push_back(algebras[d]);
    rels.push_back(std::make_shared<const Relation>(coords, r.tuples));
  }
  Instance inst;
  for (const Var& v : variables) inst.add_variable(v.name, algebras[v.domain]);
  for (const Con& c : constraints) inst.add_constraint(rels[c.relation], c.vars);
  return inst;
}

InstanceFile parse_instance_file(std::string_view text) { return Parser().parse(text); }

InstanceFile read_instance_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_instance_file(ss.str());
}

std::string print_instance_file(const InstanceFile& f) {
  std::ostringstream os;
  for (const InstanceFile::Domain& d : f.domains) os << "DOMAIN " << d.name << ' ' << d.size << '\n';
  for (const InstanceFile::Domain& d : f.domains) {
    if (!d.wnu) continue;
    os << "WNU " << d.name << ' ' << d.wnu->arity();
    if (d.sum) {
      os << " SUM";
    } else {
      for (std::uint8_t e : d.wnu->entries()) os << ' ' << static_cast<unsigned>(e);
    }
    os << '\n';
  }
  for (const InstanceFile::Var& v : f.variables) {
    os << "VAR " << v.name << ' ' << f.domains[v.domain].name << '\n';
  }
  for (const InstanceFile::Rel& r : f.relations) {
    os << "REL " << r.name << ' ' << r.domains.size();
    for (std::size_t d : r.domains) os << ' ' << f.domains[d].name;
    os << '\n';
    for (const Tuple& t : r.tuples) {
      for (std::size_t j = 0; j < t.size(); ++j) os << (j ? " " : "  ") << t[j];
      os << '\n';
    }
    os << "END\n";
  }
  for (const InstanceFile::Con& c : f.constraints) {
    os << "CON " << f.relations[c.relation].name;
    for (std::size_t v : c.vars) os << ' ' << f.variables[v].name;
    os << '\n';
  }
  return os.str();
}

InstanceFile to_instance_file(const Instance& inst) {
  InstanceFile f;
  std::map<const Algebra*, std::size_t> dom_of;
  auto domain_for = [&](const AlgebraPtr& alg) {
    auto [it, inserted] = dom_of.try_emplace(alg.get(), f.domains.size());
    if (inserted) {
      const std::string name = f.domains.empty() ? "D" : "D" + std::to_string(f.domains.size());
      const OperationTable& w = alg->wnu();
      const bool sum = w == ops::sum_mod(w.domain_size(), w.arity());
      f.domains.push_back({name, alg->size(), w, sum});
    }
    return it->second;
  };
  for (const Variable& v : inst.variables()) {
    f.variables.push_back({v.name, domain_for(v.algebra)});
  }
  std::map<const Relation*, std::size_t> rel_of;
  for (const Constraint& c : inst.constraints()) {
    auto [it, inserted] = rel_of.try_emplace(c.relation.get(), f.relations.size());
    if (inserted) {
      InstanceFile::Rel r{"R" + std::to_string(f.relations.size()), {}, c.relation->tuples()};
      for (const AlgebraPtr& a : c.relation->coords()) r.domains.push_back(domain_for(a));
      f.relations.push_back(std::move(r));
    }
    f.constraints.push_back({it->second, c.scope});
  }
  return f;
}

}  // namespace wnucsp
