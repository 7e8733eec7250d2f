#ifndef RRVI_ERRORS_HPP
#define RRVI_ERRORS_HPP

#include <cstddef>
#include <stdexcept>
#include <string>

#include "rrvi/types.hpp"

namespace rrvi {

/// Base class for every error raised by the library. The exit code is what the
/// command-line tool returns when the error escapes a subcommand.
class Error : public std::runtime_error {
 public:
  Error(const std::string& what, int exit_code)
      : std::runtime_error(what), exit_code_(exit_code) {}
  int exit_code() const { return exit_code_; }

 private:
  int exit_code_;
};

class ParameterError : public Error {
 public:
  explicit ParameterError(const std::string& what) : Error(what, 2) {}
};

// Singular mean operator, empty problem, etc.
class DegenerateProblemError : public Error {
 public:
  explicit DegenerateProblemError(const std::string& what) : Error(what, 2) {}
};

class UnsupportedError : public Error {
 public:
  explicit UnsupportedError(const std::string& what) : Error(what, 2) {}
};

class NonContractiveError : public Error {
 public:
  explicit NonContractiveError(const std::string& what) : Error(what, 2) {}
};

class NotConvergedError : public Error {
 public:
  explicit NotConvergedError(const std::string& what) : Error(what, 4) {}
};

class InvariantViolation : public Error {
 public:
  explicit InvariantViolation(const std::string& what) : Error(what, 4) {}
};

/// Raised when an iterate leaves the finite range or its norm exceeds the
/// divergence threshold. Carries the last iterate that was still finite.
class DivergenceError : public Error {
 public:
  DivergenceError(const std::string& what, Vector last_finite, std::size_t step)
      : Error(what, 3), last_finite_(std::move(last_finite)), step_(step) {}
  const Vector& last_finite() const { return last_finite_; }
  std::size_t step() const { return step_; }

 private:
  Vector last_finite_;
  std::size_t step_;
};

}  // namespace rrvi

#endif  // RRVI_ERRORS_HPP
