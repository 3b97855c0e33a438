#include "cli.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <set>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "wnucsp/format.hpp"
#include "wnucsp/harness.hpp"
#include "wnucsp/solver.hpp"

namespace wnucsp::cli {

namespace {

using json = nlohmann::json;

struct Globals {
  bool trace = false;
  bool json = false;
  std::size_t max_nodes = 5'000'000;
  std::size_t max_domain = kDefaultDomainCap;
  std::uint64_t seed = 1;
};

// Arities tried when a file gives no WNU; only the first is decisive on a
// two-element domain.
constexpr std::size_t kSearchArities[] = {3, 4, 5};

class Runner {
 public:
  Runner(const Globals& g, std::ostream& out, std::ostream& err) : g_(g), out_(out), err_(err) {}

  int solve(const std::string& path) {
    const auto start = std::chrono::steady_clock::now();
    InstanceFile f = read_instance_file(path);
    check_domains(f);
    if (int rc = ensure_wnu(f, "solve"); rc != kOk) return rc;
    const Instance inst = f.to_instance();

    SolverConfig cfg;
    cfg.max_nodes = g_.max_nodes;
    if (g_.trace) cfg.trace = [this](const TraceEvent& ev) { print_trace(ev); };
    const SolveOutcome r = wnucsp::solve(inst, cfg);
    const double ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();

    if (g_.json) {
      json j{{"command", "solve"}, {"decision", r.decision()}};
      if (r.satisfiable()) {
        json a = json::object();
        for (std::size_t i = 0; i < inst.size(); ++i) a[inst.variable(i).name] = r.assignment[i];
        j["assignment"] = a;
      }
      if (!r.detail.empty()) j["detail"] = r.detail;
      j["trace"] = {{"nodes", r.stats.nodes},
                    {"memo_hits", r.stats.memo_hits},
                    {"max_depth", r.stats.max_depth},
                    {"max_weakening_depth", r.stats.max_type3_depth},
                    {"learned_equations", r.stats.learned_equations}};
      j["timings"] = {{"total_ms", ms}};
      out_ << j.dump() << '\n';
    } else {
      out_ << r.decision();
      if (!r.detail.empty()) out_ << ": " << r.detail;
      out_ << '\n';
      if (r.satisfiable()) {
        for (std::size_t i = 0; i < inst.size(); ++i) {
          out_ << inst.variable(i).name << '=' << r.assignment[i] << '\n';
        }
      }
    }
    switch (r.kind) {
      case SolveOutcome::Kind::solution: return kOk;
      case SolveOutcome::Kind::no_solution: return kUnsat;
      case SolveOutcome::Kind::no_wnu: return kNone;
      case SolveOutcome::Kind::config_error: return kUsage;
      case SolveOutcome::Kind::internal_error: return kInternal;
    }
    return kInternal;
  }

  int classify(const std::string& path) {
    InstanceFile f = read_instance_file(path);
    check_domains(f);
    if (int rc = ensure_wnu(f, "classify"); rc != kOk) return rc;
    json reports = json::array();
    for (const InstanceFile::Domain& d : f.domains) {
      std::string text;
      if (d.size < 2) {
        text = "trivial";
      } else {
        const AlgebraPtr alg = make_algebra(*d.wnu);
        text = classify_domain(*alg).to_string();
      }
      if (g_.json) {
        reports.push_back({{"domain", d.name}, {"report", text}});
      } else {
        out_ << d.name << ": " << text << '\n';
      }
    }
    if (g_.json) out_ << json{{"command", "classify"}, {"reports", reports}}.dump() << '\n';
    return kOk;
  }

  int wnu(const std::string& path, std::size_t arity) {
    const InstanceFile f = read_instance_file(path);
    check_domains(f);
    if (f.domains.size() != 1) throw ArgumentError("wnu search needs exactly one domain");
    const WnuSearch s = search_special_wnu(f.domains[0].size, f.relations_over(0), arity, g_.max_nodes);
    std::string decision;
    int rc = kOk;
    std::string line;
    switch (s.status) {
      case WnuSearch::Status::found: {
        decision = "FOUND";
        std::ostringstream os;
        os << "WNU " << f.domains[0].name << ' ' << arity;
        for (std::uint8_t e : s.table->entries()) os << ' ' << static_cast<unsigned>(e);
        line = os.str();
        break;
      }
      case WnuSearch::Status::none:
        decision = "NONE";
        line = "NONE";
        rc = kNone;
        break;
      case WnuSearch::Status::budget_exceeded:
        decision = "BUDGET-EXCEEDED";
        line = "BUDGET-EXCEEDED after " + std::to_string(s.nodes) + " nodes";
        rc = kUsage;
        break;
    }
    if (g_.json) {
      json j{{"command", "wnu"}, {"decision", decision}, {"nodes", s.nodes}};
      if (s.table) j["table"] = s.table->entries();
      out_ << j.dump() << '\n';
    } else {
      out_ << line << '\n';
    }
    return rc;
  }

  int oracle(const std::string& path, bool all) {
    const InstanceFile f = read_instance_file(path);
    check_domains(f);
    const std::vector<Tuple> sols = enumerate(f, all);
    json j{{"command", "oracle"}, {"decision", sols.empty() ? "UNSAT" : "SAT"}};
    if (all) {
      if (!g_.json) out_ << "SOLUTIONS " << sols.size() << '\n';
      json list = json::array();
      for (const Tuple& t : sols) {
        if (g_.json) {
          list.push_back(t);
          continue;
        }
        for (std::size_t i = 0; i < t.size(); ++i) {
          out_ << (i ? " " : "") << f.variables[i].name << '=' << t[i];
        }
        out_ << '\n';
      }
      j["solutions"] = list;
    } else if (!g_.json) {
      out_ << (sols.empty() ? "UNSAT" : "SAT") << '\n';
      if (!sols.empty()) {
        for (std::size_t i = 0; i < sols[0].size(); ++i) {
          out_ << f.variables[i].name << '=' << sols[0][i] << '\n';
        }
      }
    } else if (!sols.empty()) {
      json a = json::object();
      for (std::size_t i = 0; i < sols[0].size(); ++i) a[f.variables[i].name] = sols[0][i];
      j["assignment"] = a;
    }
    if (g_.json) out_ << j.dump() << '\n';
    return sols.empty() ? kUnsat : kOk;
  }

  int gen(const GenParams& p, const std::string& out_path) {
    const GeneratedInstance g = random_instance(p);
    const std::string text = print_instance_file(to_instance_file(g.instance));
    if (out_path.empty()) {
      out_ << text;
    } else {
      std::ofstream os(out_path);
      if (!os) throw ArgumentError("cannot write " + out_path);
      os << text;
    }
    return kOk;
  }

  int difftest(std::size_t n, const GenParams& p) {
    SolverConfig cfg;
    cfg.max_nodes = g_.max_nodes;
    const DiffReport r = differential_test(n, p, cfg);
    if (g_.json) {
      json recs = json::array();
      for (const DiffRecord& d : r.records) {
        recs.push_back({{"seed", d.seed}, {"solver", d.solver}, {"oracle", d.oracle}});
      }
      out_ << json{{"command", "difftest"},
                   {"agreements", r.agreements},
                   {"disagreements", r.disagreements.size()},
                   {"records", recs}}
                  .dump()
           << '\n';
    } else {
      out_ << r.machine_lines() << r.summary();
    }
    return r.ok() ? kOk : kInternal;
  }

 private:
  void check_domains(const InstanceFile& f) const {
    for (const InstanceFile::Domain& d : f.domains) {
      if (d.size > g_.max_domain) {
        throw SizeError("domain " + d.name + " has " + std::to_string(d.size) +
                        " elements; the limit is " + std::to_string(g_.max_domain));
      }
    }
  }

  // Searches for a WNU when the file declares none.  Returns kOk once every
  // domain has one.
  int ensure_wnu(InstanceFile& f, const char* command) {
    if (f.has_wnu()) return kOk;
    if (f.domains.size() != 1) {
      throw FormatError("without a WNU directive only single-domain files are supported");
    }
    InstanceFile::Domain& d = f.domains[0];
    bool exceeded = false;
    for (std::size_t m : kSearchArities) {
      const WnuSearch s = search_special_wnu(d.size, f.relations_over(0), m, g_.max_nodes);
      if (s.status == WnuSearch::Status::found) {
        d.wnu = *s.table;
        if (g_.trace) err_ << "[wnu] found a special WNU of arity " << m << '\n';
        return kOk;
      }
      if (s.status == WnuSearch::Status::budget_exceeded) exceeded = true;
      if (d.size <= 2 && !exceeded) break;
    }
    if (exceeded) {
      out_ << "CONFIG-ERROR: WNU search budget exceeded\n";
      return kUsage;
    }
    const std::string note = d.size <= 2 ? "" : " (up to arity 5)";
    if (g_.json) {
      out_ << json{{"command", command}, {"decision", "NO-WNU"}, {"detail", note}}.dump() << '\n';
    } else {
      out_ << "NO-WNU" << note << '\n';
    }
    return kNone;
  }

  std::vector<Tuple> enumerate(const InstanceFile& f, bool all) const {
    if (f.has_wnu()) {
      const BruteForceResult r =
          brute_force(f.to_instance(), all ? BruteMode::all : BruteMode::decision);
      if (all) return r.all;
      return r.first ? std::vector<Tuple>{*r.first} : std::vector<Tuple>{};
    }
    // No algebra is needed to enumerate.
    std::vector<std::set<Tuple>> rels;
    for (const InstanceFile::Rel& r : f.relations) rels.emplace_back(r.tuples.begin(), r.tuples.end());
    const std::size_t n = f.variables.size();
    std::size_t total = 1;
    for (const InstanceFile::Var& v : f.variables) {
      total *= f.domains[v.domain].size;
      if (total > 10'000'000) throw SizeError("search space exceeds the brute-force cap");
    }
    std::vector<Tuple> out;
    Tuple a(n, 0);
    while (true) {
      bool ok = true;
      for (const InstanceFile::Con& c : f.constraints) {
        Tuple t;
        for (std::size_t v : c.vars) t.push_back(a[v]);
        if (!rels[c.relation].contains(t)) {
          ok = false;
          break;
        }
      }
      if (ok) {
        out.push_back(a);
        if (!all) break;
      }
      std::size_t k = n;
      while (k > 0 && ++a[k - 1] == f.domains[f.variables[k - 1].domain].size) a[--k] = 0;
      if (k == 0) break;
    }
    return out;
  }

  void print_trace(const TraceEvent& ev) const {
    err_ << "[d" << ev.depth << " w" << ev.type3_depth << "] step " << ev.step;
    if (ev.recursion_type) err_ << " (recursion " << ev.recursion_type << ')';
    if (!ev.detail.empty()) err_ << ": " << ev.detail;
    err_ << '\n';
    if (ev.system && !ev.equation) {
      for (const Equation& e : ev.system->equations) {
        err_ << "    " << format_equation(e, ev.system->vars) << '\n';
      }
    }
  }

  const Globals& g_;
  std::ostream& out_;
  std::ostream& err_;
};

}  // namespace

int execute_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Constraint satisfaction for languages with a special WNU polymorphism", "wnucsp"};
  app.require_subcommand(1);
  app.fallthrough();

  Globals g;
  app.add_flag("--trace", g.trace, "Print solver steps to stderr");
  app.add_flag("--json", g.json, "Print one JSON object per command");
  app.add_option("--max-nodes", g.max_nodes, "Recursion and search budget");
  app.add_option("--max-domain", g.max_domain, "Largest accepted domain");
  app.add_option("--seed", g.seed, "Seed for gen and difftest");

  std::string file;
  std::size_t arity = 3;
  bool all = false;
  std::string preset_name = "minority2";
  std::optional<std::size_t> vars, cons, max_arity, domain_size, wnu_arity;
  bool sat = false;
  std::string out_path;
  std::size_t count = 100;

  CLI::App* solve = app.add_subcommand("solve", "Decide an instance file");
  solve->add_option("file", file)->required();
  CLI::App* classify = app.add_subcommand("classify", "Report the structure of every domain");
  classify->add_option("file", file)->required();
  CLI::App* wnu = app.add_subcommand("wnu", "Search for a special WNU preserving the relations");
  wnu->add_option("file", file)->required();
  wnu->add_option("--arity", arity, "WNU arity")->check(CLI::Range(3, 8));
  CLI::App* oracle = app.add_subcommand("oracle", "Brute-force an instance file");
  oracle->add_option("file", file)->required();
  oracle->add_flag("--all", all, "List every solution");

  auto gen_options = [&](CLI::App* sub) {
    sub->add_option("--preset", preset_name, "minority2, maj2, and3, dd3 or z4sum5");
    sub->add_option("--vars", vars, "Number of variables");
    sub->add_option("--cons", cons, "Number of constraints");
    sub->add_option("--max-arity", max_arity, "Largest constraint arity");
    sub->add_option("--domain-size", domain_size, "Domain size (sum and dual discriminator)");
    sub->add_option("--wnu-arity", wnu_arity, "WNU arity (sum and meet)");
    sub->add_flag("--sat", sat, "Plant a solution");
  };
  CLI::App* gen = app.add_subcommand("gen", "Write a random instance");
  gen_options(gen);
  gen->add_option("-o,--out", out_path, "Output file (default stdout)");
  CLI::App* diff = app.add_subcommand("difftest", "Compare the solver with brute force");
  gen_options(diff);
  diff->add_option("--n", count, "Number of instances");

  try {
    std::vector<std::string> rev(args.rbegin(), args.rend());
    app.parse(rev);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  }

  auto params = [&] {
    GenParams p = preset(preset_name);
    p.seed = g.seed;
    if (vars) p.variables = *vars;
    if (cons) p.constraints = *cons;
    if (max_arity) p.max_arity = *max_arity;
    if (domain_size) p.domain_size = *domain_size;
    if (wnu_arity) p.wnu_arity = *wnu_arity;
    p.satisfiable_bias = sat;
    return p;
  };

  Runner r(g, out, err);
  try {
    if (*solve) return r.solve(file);
    if (*classify) return r.classify(file);
    if (*wnu) return r.wnu(file, arity);
    if (*oracle) return r.oracle(file, all);
    if (*gen) return r.gen(params(), out_path);
    if (*diff) return r.difftest(count, params());
  } catch (const FormatError& e) {
    err << "format error: " << e.what() << '\n';
    return kUsage;
  } catch (const WnuInvalid& e) {
    err << "invalid WNU: " << e.what() << '\n';
    return kUsage;
  } catch (const SizeError& e) {
    err << "size limit: " << e.what() << '\n';
    return kUsage;
  } catch (const ArgumentError& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const ConfigError& e) {
    err << "configuration limit: " << e.what() << '\n';
    return kUsage;
  } catch (const Error& e) {
    err << "internal error: " << e.what() << '\n';
    return kInternal;
  }
  return kUsage;
}

}  // namespace wnucsp::cli
