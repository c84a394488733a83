#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace ukd {

/// Base of every failure raised by the library. The CLI maps these to exit
/// status 1; usage problems are reported separately with status 2.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Transfer function evaluated at (numerically) an eigenvalue of A.
class PoleError : public Error {
 public:
  using Error::Error;
};

/// I - tau * D1'D1 (or its dual counterpart) is not positive definite.
class FeasibilityError : public Error {
 public:
  using Error::Error;
};

class ParameterError : public Error {
 public:
  using Error::Error;
};

/// A Riccati solution escaped before reaching t = 0.
class NoSolutionError : public Error {
 public:
  NoSolutionError(const std::string& what, double escape_time)
      : Error(what), escape_time_(escape_time) {}
  double escape_time() const { return escape_time_; }

 private:
  double escape_time_;
};

class DegeneracyError : public Error {
 public:
  using Error::Error;
};

class ConditioningError : public Error {
 public:
  using Error::Error;
};

/// Input outside an operation's domain (zero state where a nonzero one is
/// required, mismatched interfaces, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  using Error::Error;
};

class ValidationError : public Error {
 public:
  ValidationError(const std::string& what, std::vector<std::string> violations)
      : Error(what), violations_(std::move(violations)) {}
  const std::vector<std::string>& violations() const { return violations_; }

 private:
  std::vector<std::string> violations_;
};

}  // namespace ukd
