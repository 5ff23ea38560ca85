#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace symmix {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Argument outside the mathematical domain of an operation.
class DomainError : public Error {
public:
  using Error::Error;
};

/// Invalid configuration (distribution parameters, study spec, options).
class ConfigError : public Error {
public:
  using Error::Error;
};

/// Floating-point breakdown that cannot be recovered locally.
class NumericalError : public Error {
public:
  NumericalError(const std::string& what, std::size_t index)
      : Error(what + " (observation index " + std::to_string(index) + ")"), index_(index) {}
  explicit NumericalError(const std::string& what)
      : Error(what), index_(static_cast<std::size_t>(-1)) {}

  /// Offending observation, or size_t(-1) when not tied to one.
  std::size_t index() const noexcept { return index_; }

private:
  std::size_t index_;
};

/// Every restart of an EM fit ended degenerate.
class EstimationError : public Error {
public:
  using Error::Error;
};

/// No candidate model could be fitted during selection of k.
class SelectionError : public Error {
public:
  using Error::Error;
};

/// A likelihood-ratio comparison produced an inconsistent pair of fits.
class DiagnosticsError : public Error {
public:
  using Error::Error;
};

/// Input file could not be parsed.
class ParseError : public Error {
public:
  ParseError(const std::string& what, std::size_t line)
      : Error(line > 0 ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}

  /// 1-based line number, 0 when the error is not tied to a line.
  std::size_t line() const noexcept { return line_; }

private:
  std::size_t line_;
};

}  // namespace symmix
