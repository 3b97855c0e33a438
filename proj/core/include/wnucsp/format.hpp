#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "wnucsp/instance.hpp"

namespace wnucsp {

// Text form of an instance:
//
//   DOMAIN <name> <n>
//   WNU <domain> <m> (SUM | <n^m entries, row-major>)
//   VAR <name> <domain>
//   REL <name> <arity> <domain>...
//     <tuple lines>
//   END
//   CON <relation> <var>...
//
// Tokens are whitespace-separated; '#' starts a comment.
struct InstanceFile {
  struct Domain {
    std::string name;
    std::size_t size = 0;
    std::optional<OperationTable> wnu;
    bool sum = false;  // written as SUM

    bool operator==(const Domain&) const = default;
  };
  struct Rel {
    std::string name;
    std::vector<std::size_t> domains;
    std::vector<Tuple> tuples;

    bool operator==(const Rel&) const = default;
  };
  struct Var {
    std::string name;
    std::size_t domain = 0;

    bool operator==(const Var&) const = default;
  };
  struct Con {
    std::size_t relation = 0;
    std::vector<std::size_t> vars;

    bool operator==(const Con&) const = default;
  };

  std::vector<Domain> domains;
  std::vector<Rel> relations;
  std::vector<Var> variables;
  std::vector<Con> constraints;

  // True when every domain carries a WNU.
  bool has_wnu() const;
  // Tuple lists of the relations whose coordinates all lie in domain d.
  std::vector<std::vector<Tuple>> relations_over(std::size_t d) const;

  // One algebra per domain, shared by its variables and relations.  Throws
  // PreconditionError when a domain has no WNU.
  Instance to_instance() const;

  bool operator==(const InstanceFile&) const = default;
};

// Throws FormatError (with the line) on malformed input and WnuInvalid when a
// WNU is not special or does not preserve a relation.
InstanceFile parse_instance_file(std::string_view text);
InstanceFile read_instance_file(const std::filesystem::path& path);

// Canonical text; parse_instance_file(print_instance_file(f)) == f.
std::string print_instance_file(const InstanceFile& f);

// File form of an instance: one domain per distinct algebra (D, D1, D2, ...)
// and one relation per distinct constraint relation (R0, R1, ...).
InstanceFile to_instance_file(const Instance& inst);

}  // namespace wnucsp
