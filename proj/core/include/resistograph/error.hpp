#pragma once

#include <stdexcept>
#include <string>

namespace resistograph {

/// Failure classes surfaced to callers. The CLI maps each to its own exit code.
enum class ErrorKind {
  parse,    ///< malformed input file or config
  data,     ///< well-formed input that violates a precondition
  solver,   ///< iterative solve did not reach tolerance
  numeric,  ///< NaN/Inf or a degenerate parameter value
};

const char* to_string(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what);
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

class ParseError : public Error {
 public:
  explicit ParseError(const std::string& what) : Error(ErrorKind::parse, what) {}
};

class DataError : public Error {
 public:
  explicit DataError(const std::string& what) : Error(ErrorKind::data, what) {}
};

class SolverError : public Error {
 public:
  SolverError(const std::string& what, double achieved_residual, int iterations)
      : Error(ErrorKind::solver, what),
        achieved_residual_(achieved_residual),
        iterations_(iterations) {}

  double achieved_residual() const noexcept { return achieved_residual_; }
  int iterations() const noexcept { return iterations_; }

 private:
  double achieved_residual_;
  int iterations_;
};

class NumericError : public Error {
 public:
  explicit NumericError(const std::string& what) : Error(ErrorKind::numeric, what) {}
};

}  // namespace resistograph
