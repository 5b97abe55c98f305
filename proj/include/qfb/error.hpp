#pragma once

#include <stdexcept>
#include <string>

namespace qfb {

enum class ErrorKind {
  NonHermitianInput,
  NotPSD,
  DimensionMismatch,
  InvalidState,
  InvalidParameter,
  ConfigurationMismatch,
  DomainViolation,
  NonFinite,
  ProjectionFailure,
  DivisionByZero,
  NonPositiveValue,
  ParseError,
  ValidationError,
  CampaignFailure,
  IoError,
};

const char* to_string(ErrorKind kind);

/// All library failures are reported through this exception; `kind()` is the
/// machine-readable part, `what()` carries the human-readable detail.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind), detail_(what) {}

  ErrorKind kind() const noexcept { return kind_; }
  /// The message without the kind prefix.
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorKind kind_;
  std::string detail_;
};

}  // namespace qfb
