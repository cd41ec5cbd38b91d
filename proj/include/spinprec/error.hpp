#pragma once

#include <stdexcept>
#include <string>

namespace spinprec {

/// Process-level error categories. The numeric values double as CLI exit codes.
enum class ErrorCode : int {
  ok = 0,
  usage = 1,
  config = 2,
  solver = 3,
  fit = 4,
  domain = 5,
  io = 6,
  internal = 7,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// Argument outside an operation's domain (e.g. a time outside the pulse).
class DomainError : public Error {
 public:
  explicit DomainError(const std::string& what) : Error(ErrorCode::domain, what) {}
};

/// Closed-form solution requested for a configuration it does not cover.
class UnsupportedConfiguration : public Error {
 public:
  explicit UnsupportedConfiguration(const std::string& what) : Error(ErrorCode::domain, what) {}
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error(ErrorCode::config, what) {}
};

class SolverError : public Error {
 public:
  explicit SolverError(const std::string& what) : Error(ErrorCode::solver, what) {}
};

class FitError : public Error {
 public:
  enum class Kind { insufficient_signal, not_converged, bad_input };
  FitError(Kind kind, const std::string& what) : Error(ErrorCode::fit, what), kind_(kind) {}
  Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error(ErrorCode::io, what) {}
};

}  // namespace spinprec
