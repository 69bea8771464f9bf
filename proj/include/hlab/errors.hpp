#pragma once

#include <stdexcept>
#include <string>

namespace hlab {

enum class ErrorKind {
  InvalidGeometry,
  DegenerateChord,
  NumericalFailure,
  OutsideDomain,
  NonUniqueSupport,
  BudgetExceeded,
  SpectralAmbiguity,
  UnsupportedScenario,
  NotBiproximal,
  InsufficientData,
  SubcriticalParameter,
  ParseError,
  InvalidArgument,
};

const char* to_string(ErrorKind kind);

/// Every failure raised by the library carries one of the kinds above so that
/// callers (and the CLI) can report it without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what);

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace hlab
