#pragma once

#include <stdexcept>
#include <string>

namespace pompkit {

enum class ErrorKind {
  Domain,              // argument outside the mathematical domain
  MissingComponent,    // a model callback an algorithm needs is absent
  SimulationDiverged,  // a non-finite state was produced
  FilteringFailure,    // all particle weights vanished at some step
  SingularMatrix,      // covariance / design matrix cannot be inverted
  Validation,          // malformed input, config or data
  Lookup,              // unknown parameter, state or covariate name
  Io
};

inline const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Domain: return "domain error";
    case ErrorKind::MissingComponent: return "missing component";
    case ErrorKind::SimulationDiverged: return "simulation diverged";
    case ErrorKind::FilteringFailure: return "filtering failure";
    case ErrorKind::SingularMatrix: return "singular matrix";
    case ErrorKind::Validation: return "validation error";
    case ErrorKind::Lookup: return "lookup error";
    case ErrorKind::Io: return "i/o error";
  }
  return "error";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

/// Thrown by pfilter when every particle has zero weight at an observation.
class FilteringFailure : public Error {
 public:
  FilteringFailure(std::size_t step, const std::string& what)
      : Error(ErrorKind::FilteringFailure, what), step_(step) {}

  /// 1-based observation index at which the failure happened.
  std::size_t step() const noexcept { return step_; }

 private:
  std::size_t step_;
};

}  // namespace pompkit
