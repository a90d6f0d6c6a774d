#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace proxpinv {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Operand dimensions do not fit together (e.g. an iterate that is not n x m).
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// Non-finite entries or otherwise unusable numeric input.
class InputError : public Error {
 public:
  using Error::Error;
};

/// Invalid solver or generator configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// The Cholesky factorization of I + mu M^T M broke down.
class ConditioningError : public Error {
 public:
  ConditioningError(const std::string& what, double mu) : Error(what), mu_(mu) {}
  double mu() const noexcept { return mu_; }

 private:
  double mu_;
};

/// An inner iterative solve hit its iteration cap before its acceptance test held.
class NonConvergenceError : public Error {
 public:
  NonConvergenceError(const std::string& what, double residual, int iterations)
      : Error(what), residual_(residual), iterations_(iterations) {}
  double residual() const noexcept { return residual_; }
  int iterations() const noexcept { return iterations_; }

 private:
  double residual_;
  int iterations_;
};

/// M^T M has no eigenvalue above the rank threshold (M is numerically zero).
class SpectralError : public Error {
 public:
  using Error::Error;
};

/// Malformed matrix file. line() is 1-based, 0 when no line applies.
class ParseError : public Error {
 public:
  ParseError(const std::string& path, std::size_t line, const std::string& msg)
      : Error(path + (line ? ":" + std::to_string(line) : std::string()) + ": " + msg),
        line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// Filesystem failure (missing file, unwritable destination).
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace proxpinv
