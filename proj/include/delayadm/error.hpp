#pragma once

#include <complex>
#include <stdexcept>
#include <string>

namespace delayadm {

enum class ErrorCode {
  dimension = 1,
  range = 2,
  singular = 3,
  convergence = 4,
  config = 5,
  domain = 6,
};

/// Base of every exception thrown by the library. The code maps one-to-one
/// onto the status values of the C interface.
class Error : public std::runtime_error {
public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

private:
  ErrorCode code_;
};

class DimensionError : public Error {
public:
  explicit DimensionError(const std::string& what) : Error(ErrorCode::dimension, what) {}
};

class RangeError : public Error {
public:
  explicit RangeError(const std::string& what) : Error(ErrorCode::range, what) {}
};

class SingularityError : public Error {
public:
  explicit SingularityError(const std::string& what, std::complex<double> lambda = {})
      : Error(ErrorCode::singular, what), lambda_(lambda) {}
  /// Spectral parameter at which the failure happened (zero when not applicable).
  std::complex<double> lambda() const noexcept { return lambda_; }

private:
  std::complex<double> lambda_;
};

class ConvergenceError : public Error {
public:
  ConvergenceError(const std::string& what, double last_defect)
      : Error(ErrorCode::convergence, what), last_defect_(last_defect) {}
  double last_defect() const noexcept { return last_defect_; }

private:
  double last_defect_;
};

class ConfigError : public Error {
public:
  explicit ConfigError(const std::string& what) : Error(ErrorCode::config, what) {}
};

class DomainError : public Error {
public:
  explicit DomainError(const std::string& what) : Error(ErrorCode::domain, what) {}
};

}  // namespace delayadm
