#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace portspill {

enum class ErrorKind {
  MalformedRow,
  UnknownProductCode,
  UnknownLocationCode,
  MissingConcordance,
  ConflictingMapping,
  EmptyYear,
  UnknownProduct,
  MissingRouting,
  UnmappedCountry,
  WindowTooShort,
  UnmappedPort,
  NotConverged,
  SingularDesign,
  MissingCovariate,
  UnknownCoefficient,
  InvalidSpec,
  InfeasibleConfig,
  MissingUpstreamArtifact,
  ConfigError,
  Io,
};

std::string_view to_string(ErrorKind kind);

// Domain error carrying a machine-readable kind. The CLI maps every Error to
// exit status 1 except ConfigError (usage, status 2).
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace portspill
