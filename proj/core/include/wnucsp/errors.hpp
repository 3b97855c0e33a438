#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace wnucsp {

// Base for every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input: operation tables with the wrong entry count, bad instance
// files, non-prime moduli.  `line()` is 1-based, 0 when not tied to a file.
class FormatError : public Error {
 public:
  explicit FormatError(const std::string& what, std::size_t line = 0)
      : Error(line == 0 ? what : "line " + std::to_string(line) + ": " + what),
        line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

// A declared operation is not a special WNU, or does not preserve a relation.
class WnuInvalid : public Error {
 public:
  using Error::Error;
};

// Domain exceeds the configured size cap for an exhaustive procedure.
class SizeError : public Error {
 public:
  using Error::Error;
};

// A value passed in breaks a structural invariant (e.g. a partition that is
// not a congruence).
class InvariantError : public Error {
 public:
  using Error::Error;
};

class ArgumentError : public Error {
 public:
  using Error::Error;
};

// Attempt to reduce a domain to an empty set or a non-subuniverse.
class ReductionError : public Error {
 public:
  using Error::Error;
};

class PreconditionError : public Error {
 public:
  using Error::Error;
};

class EmptyRelationError : public Error {
 public:
  using Error::Error;
};

// A capped search could not complete where completeness is required.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// A predicate supplied by the caller answered inconsistently.
class OracleError : public Error {
 public:
  using Error::Error;
};

// Membership observations cannot be explained by a single affine hyperplane.
class AffineStructureViolation : public Error {
 public:
  using Error::Error;
};

// None of the four structural outcomes applied to a domain algebra.
class ClassificationError : public Error {
 public:
  using Error::Error;
};

}  // namespace wnucsp
