#pragma once

#include <stdexcept>
#include <string>

namespace blochdegen {

enum class ErrorKind {
  SingularLattice,
  OutOfRange,
  ParityViolation,
  NonHermitianAmplitudes,
  NonHermitian,
  EigensolverFailure,
  NonLatticeVector,
  AccidentalDegeneracy,
  BasisMismatch,
  SelectionRuleViolation,
  RegimeViolation,
  DegenerateSplit,
  IncommensurateK,
  CrowdedWindow,
  ConfigError,
  IoFailure,
};

const char* error_name(ErrorKind kind) noexcept;

/// Every failure raised by the library carries one of the named kinds above;
/// the CLI maps them to exit codes and reports the name verbatim.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(error_name(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

inline const char* error_name(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::SingularLattice: return "SingularLattice";
    case ErrorKind::OutOfRange: return "OutOfRange";
    case ErrorKind::ParityViolation: return "ParityViolation";
    case ErrorKind::NonHermitianAmplitudes: return "NonHermitianAmplitudes";
    case ErrorKind::NonHermitian: return "NonHermitian";
    case ErrorKind::EigensolverFailure: return "EigensolverFailure";
    case ErrorKind::NonLatticeVector: return "NonLatticeVector";
    case ErrorKind::AccidentalDegeneracy: return "AccidentalDegeneracy";
    case ErrorKind::BasisMismatch: return "BasisMismatch";
    case ErrorKind::SelectionRuleViolation: return "SelectionRuleViolation";
    case ErrorKind::RegimeViolation: return "RegimeViolation";
    case ErrorKind::DegenerateSplit: return "DegenerateSplit";
    case ErrorKind::IncommensurateK: return "IncommensurateK";
    case ErrorKind::CrowdedWindow: return "CrowdedWindow";
    case ErrorKind::ConfigError: return "ConfigError";
    case ErrorKind::IoFailure: return "IoFailure";
  }
  return "Unknown";
}

}  // namespace blochdegen
