#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace nbet {

enum class ErrorKind {
  Parse,
  Malformed,
  NotNonNegative,
  NotSuperfair,
  DegenerateSelection,
  SupportMismatch,
  ZeroVector,
  NotPositive,
  UnknownSymbol,
  NotInBscc,
  NotPseudoMixing,
  StarViolated,
  DegenerateLiveCone,
  SequenceTooShort,
  UnsupportedBase,
  NoSignal,
  NumericalFailure,
  InternalContradiction,
  Usage,
};

inline std::string_view to_string(ErrorKind k) {
  switch (k) {
    case ErrorKind::Parse: return "Parse";
    case ErrorKind::Malformed: return "Malformed";
    case ErrorKind::NotNonNegative: return "NotNonNegative";
    case ErrorKind::NotSuperfair: return "NotSuperfair";
    case ErrorKind::DegenerateSelection: return "DegenerateSelection";
    case ErrorKind::SupportMismatch: return "SupportMismatch";
    case ErrorKind::ZeroVector: return "ZeroVector";
    case ErrorKind::NotPositive: return "NotPositive";
    case ErrorKind::UnknownSymbol: return "UnknownSymbol";
    case ErrorKind::NotInBscc: return "NotInBscc";
    case ErrorKind::NotPseudoMixing: return "NotPseudoMixing";
    case ErrorKind::StarViolated: return "StarViolated";
    case ErrorKind::DegenerateLiveCone: return "DegenerateLiveCone";
    case ErrorKind::SequenceTooShort: return "SequenceTooShort";
    case ErrorKind::UnsupportedBase: return "UnsupportedBase";
    case ErrorKind::NoSignal: return "NoSignal";
    case ErrorKind::NumericalFailure: return "NumericalFailure";
    case ErrorKind::InternalContradiction: return "InternalContradiction";
    case ErrorKind::Usage: return "Usage";
  }
  return "Unknown";
}

/// Process exit code for a failure of this kind: 1 usage/parse, 2 domain
/// rejection, 3 internal contradiction.
inline int exit_code(ErrorKind k) {
  switch (k) {
    case ErrorKind::Parse:
    case ErrorKind::Malformed:
    case ErrorKind::Usage:
    case ErrorKind::UnknownSymbol:
    case ErrorKind::UnsupportedBase:
      return 1;
    case ErrorKind::InternalContradiction:
    case ErrorKind::NumericalFailure:
      return 3;
    default:
      return 2;
  }
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) {
  throw Error(kind, what);
}

}  // namespace nbet
